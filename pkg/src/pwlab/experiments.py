"""Config-driven experiments producing CSV records and JSON summaries.

A config is a JSON object::

    {
      "experiment": "equivalence" | "levelset" | "schur" | "admissibility",
      "seed": 0,
      "domain": "disc.json" | {"kind": "Disc2D", ...},
      "decomposition": {"j_max": 4, "m": 3, "epsilon": 0.05},
      "grid": {...},          # experiment specific sizes
      "symbols": {...},       # equivalence sweeps only
      "exponents": {...},
      "output": {"csv": "out.csv", "json": "summary.json", "gnuplot": "plot.gp"}
    }

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import besov as bs
from . import decomposition as dc
from . import geometry as geo
from . import hankel as hk
from . import partition as pt
from . import serialization as se
from . import weight as wt

KINDS = ("equivalence", "levelset", "schur", "admissibility")


class ExperimentError(Exception):
    """A failure attributed to one pipeline stage, with a machine-readable code."""

    def __init__(self, stage: str, message: str, code: str = "component_error", details: dict | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage, self.message, self.code = stage, message, code
        self.details = details or {}

    def to_dict(self) -> dict:
        return {"error": self.code, "stage": self.stage, "message": self.message, "details": self.details}


class _Stage:
    """Context manager that re-raises component errors tagged with a stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        if exc is None or isinstance(exc, ExperimentError):
            return False
        if isinstance(exc, dc.ContainmentError):
            raise ExperimentError(self.name, str(exc), "A_not_in_domain",
                                  {"j": exc.j, "index": list(exc.index), "excess": exc.excess}) from exc
        if isinstance(exc, (ValueError, ArithmeticError, OSError, KeyError)):
            raise ExperimentError(self.name, str(exc)) from exc
        return False


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

def _writable(path: Path) -> bool:
    parent = path.parent if str(path.parent) else Path(".")
    if path.exists():
        return os.access(path, os.W_OK)
    return parent.is_dir() and os.access(parent, os.W_OK)


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    domain: geo.ConvexDomain
    decomposition: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    symbols: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    record: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "ExperimentConfig":
        base = Path(base_dir) if base_dir is not None else Path(".")
        with _Stage("config"):
            kind = data.get("experiment")
            if kind not in KINDS:
                raise ExperimentError("config", f"experiment must be one of {KINDS}, got {kind!r}", "invalid_config")
            if "seed" not in data or isinstance(data["seed"], bool) or not isinstance(data["seed"], int):
                raise ExperimentError("config", "an integer seed is mandatory", "invalid_config")
            source = data.get("domain")
            if source is None:
                raise ExperimentError("config", "a domain (file or inline object) is required", "invalid_config")
            domain = geo.load_domain(source if isinstance(source, dict) else base / source)
            output = {k: str(base / v) for k, v in data.get("output", {}).items() if v is not None}
            for name, path in output.items():
                if not _writable(Path(path)):
                    raise ExperimentError("config", f"output path {path} is not writable", "invalid_config",
                                          {"output": name})
            record = dict(data)
            record["domain"] = geo.domain_to_dict(domain)
            record.pop("output", None)
            cfg = cls(kind, int(data["seed"]), domain, dict(data.get("decomposition", {})),
                      dict(data.get("grid", {})), dict(data.get("symbols", {})),
                      dict(data.get("exponents", {})), output, record)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d, g, x = self.decomposition, self.grid, self.exponents

        def bad(msg):
            raise ExperimentError("config", msg, "invalid_config")

        if "j_max" in d and (not isinstance(d["j_max"], int) or d["j_max"] < 0):
            bad("decomposition.j_max must be a nonnegative integer")
        if "m" in d and (not isinstance(d["m"], int) or d["m"] < 0):
            bad("decomposition.m must be a nonnegative integer")
        if "epsilon" in d and not (0 < float(d["epsilon"]) < 0.5):
            bad("decomposition.epsilon must lie in (0, 1/2)")
        if "a" in d and float(d["a"]) <= 1:
            bad("decomposition.a must exceed 1")
        for key in ("samples", "N", "partition_grid"):
            if key in g and (not isinstance(g[key], int) or g[key] <= 0):
                bad(f"grid.{key} must be a positive integer")
        for key in ("h", "h_divisor"):
            if key in g and not float(g[key]) > 0:
                bad(f"grid.{key} must be positive")
        for p in _as_list(x.get("p", [])):
            if float(p) < 1:
                bad("exponents.p must be at least 1")
        if "q" in x and float(x["q"]) < 1:
            bad("exponents.q must be at least 1")
        if self.symbols.get("count", 1) <= 0:
            bad("symbols.count must be positive")

    @property
    def hash(self) -> str:
        return se.config_hash(self.record)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ExperimentError("config", f"cannot read {path}: {exc}", "invalid_config") from exc
    return ExperimentConfig.from_dict(data, path.parent)


def _as_list(value):
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def symbol_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _decomposition(cfg: ExperimentConfig, j_max_default: int) -> dc.Decomposition:
    d = cfg.decomposition
    with _Stage("decomposition"):
        dec = se.build_decomposition(cfg.domain, int(d.get("j_max", j_max_default)),
                                     int(d.get("m", 3)), float(d.get("epsilon", 0.05)))
        if "a" in d and not math.isclose(float(d["a"]), dec.a):
            raise ExperimentError("decomposition", f"this construction uses a = {dec.a:g}, config asks for {d['a']}",
                                  "invalid_config")
    return dec


def _emit(cfg: ExperimentConfig, columns, rows, summary: dict, plot: str | None = None) -> "ExperimentResult":
    csv_text = se.write_csv(cfg.output.get("csv"), columns, rows, cfg.record)
    summary = dict(summary, experiment=cfg.kind, config_hash=cfg.hash, seed=cfg.seed)
    if "json" in cfg.output:
        se.write_json(cfg.output["json"], summary)
    if plot is not None and "gnuplot" in cfg.output:
        Path(cfg.output["gnuplot"]).write_text(plot)
    return ExperimentResult(cfg.kind, list(columns), [list(r) for r in rows], summary, csv_text)


@dataclass
class ExperimentResult:
    kind: str
    columns: list
    rows: list
    summary: dict
    csv_text: str

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _gnuplot(csv_path: str | None, title: str, xcol: int, ycol: int, xlabel: str, ylabel: str,
             logy: bool = True) -> str | None:
    if csv_path is None:
        return None
    lines = ['set datafile separator ","', "set key autotitle columnhead", f'set title "{title}"',
             f'set xlabel "{xlabel}"', f'set ylabel "{ylabel}"']
    if logy:
        lines.append("set logscale y")
    lines.append(f"plot '{Path(csv_path).name}' using {xcol}:{ycol} with points pt 7")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Equivalence sweep
# --------------------------------------------------------------------------

EQUIVALENCE_COLUMNS = ["symbol", "tilt", "p", "s", "refinement", "h", "nodes", "besov", "schatten", "ratio"]


def _band(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


def run_equivalence_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Besov and Schatten norms of random symbols, their ratios and band statistics.

    Besov norms use the squared partition family on 2Ω with s = σ + τ + 1/p;
    Schatten norms come from the weighted Hankel matrix at spacing h and, for
    the first ``subsample`` symbols, also at h/2.
    """
    domain = cfg.domain
    x, g, sy = cfg.exponents, cfg.grid, cfg.symbols
    ps = [float(p) for p in _as_list(x.get("p", [1, 2]))]
    sigma, tau = float(x.get("sigma", 0.0)), float(x.get("tau", 0.0))
    count = int(sy.get("count", 20))
    tilts = [float(t) for t in _as_list(sy.get("tilts", [0.0, 0.3, 0.6]))]
    modes = int(sy.get("modes", 16))
    subsample = min(int(sy.get("subsample", 3)), count)
    h = float(g["h"]) if "h" in g else domain.diameter() / float(g.get("h_divisor", 40))
    spacing = float(g.get("symbol_spacing", 2 * h))
    method = g.get("spectrum", "gram")
    tolerance = float(g.get("refinement_tolerance", 0.05))
    default_j = 4 if domain.kind in ("Disc2D", "SmoothCurve2D") else 6

    dec = _decomposition(cfg, default_j)
    with _Stage("weight"):
        weight = wt.normalize(domain, base=dec.a, seed=cfg.seed)
    with _Stage("partition"):
        pou = pt.build_partition(dec, grid=int(g.get("partition_grid", 64)))
        family = pt.build_squared_family(pou)
        cache = bs.MemberCache(family)
        levels = np.array([t.j for t in family.tiles[: family.member_count]])
    with _Stage("quadrature"):
        steps = [h, h / 2]
        nodes = {hh: hk.quadrature_nodes(domain, hh) for hh in steps[: 2 if subsample else 1]}
        cells = {hh: hk.cell_measures(domain, nv, hh) for hh, nv in nodes.items()}

    rows = []
    for i in range(count):
        tilt = tilts[i % len(tilts)]
        with _Stage("symbol"):
            symbol = bs.random_symbol(domain.scaled(2), spacing, symbol_seed(cfg.seed, i), modes=modes,
                                      tilt=tilt, weight=weight)
        with _Stage("besov"):
            norms, _ = bs.member_lp_norms(symbol, family, ps, cache)
            besov = [bs.combine(norms[:, k], levels, bs.BesovParams(sigma + tau + 1 / p, p, float(x.get("q", p))),
                                dec.a) for k, p in enumerate(ps)]
        for level, hh in enumerate(steps[: 2 if i < subsample else 1]):
            with _Stage("hankel"):
                spec = hk.HankelSpec(domain, symbol, sigma, tau, weight, hh, nodes[hh], cells[hh])
                spectrum = hk.singular_spectrum(hk.assemble_hankel(spec), hh, method)
            for k, p in enumerate(ps):
                schatten = hk.schatten_norm(spectrum, p)
                if not (besov[k] > 0 and schatten > 0):
                    raise ExperimentError("equivalence", f"vanishing norm for symbol {i}, p={p:g}", "zero_norm",
                                          {"besov": besov[k], "schatten": schatten})
                rows.append([i, tilt, p, sigma + tau + 1 / p, level, hh, spec.size, besov[k], schatten,
                             besov[k] / schatten])

    summary = {"domain": domain.kind, "h": h, "symbol_spacing": spacing, "j_max": dec.j_max,
               "members": family.member_count, "sigma": sigma, "tau": tau, "by_p": []}
    for p in ps:
        base = {r[0]: r[9] for r in rows if r[2] == p and r[4] == 0}
        fine = {r[0]: r[9] for r in rows if r[2] == p and r[4] == 1}
        ratios = np.array([base[i] for i in range(count)])
        entry = {"p": p, "count": count, "max": float(ratios.max()), "min": float(ratios.min()),
                 "median": float(np.median(ratios)), "band": _band(ratios)}
        if fine:
            ids = sorted(fine)
            coarse_band, fine_band = _band([base[i] for i in ids]), _band([fine[i] for i in ids])
            entry["refinement"] = {
                "symbols": ids, "band_h": coarse_band, "band_h_half": fine_band,
                "max_relative_change": float(max(abs(fine[i] / base[i] - 1) for i in ids)),
                "stable": bool(fine_band <= coarse_band * (1 + tolerance)),
            }
        by_tilt = {t: [base[i] for i in range(count) if tilts[i % len(tilts)] == t] for t in tilts}
        medians = [float(np.median(v)) for v in by_tilt.values() if v]
        present = [t for t, v in by_tilt.items() if v]
        entry["tilt_trend"] = {
            "tilts": present, "median_ratio": medians,
            "spread": float(max(medians) / min(medians)),
            "log_slope": float(np.polyfit(present, np.log(medians), 1)[0]) if len(present) >= 2 else 0.0,
        }
        summary["by_p"].append(entry)
    plot = _gnuplot(cfg.output.get("csv"), "besov / schatten", 1, 10, "symbol", "ratio")
    return _emit(cfg, EQUIVALENCE_COLUMNS, rows, summary, plot)


# --------------------------------------------------------------------------
# Level sets
# --------------------------------------------------------------------------

LEVELSET_COLUMNS = ["j", "measure", "stderr", "hits", "samples", "model_polytope", "model_curved",
                    "ratio_polytope", "ratio_curved", "reliable"]


def run_levelset_study(cfg: ExperimentConfig) -> ExperimentResult:
    domain = cfg.domain
    curved = domain.kind in ("Disc2D", "SmoothCurve2D")
    j_max = int(cfg.decomposition.get("j_max", 7 if curved else 9))
    samples = int(cfg.grid.get("samples", 1_000_000))
    with _Stage("weight"):
        weight = wt.normalize(domain, base=cfg.decomposition.get("a"), seed=cfg.seed)
    with _Stage("levelsets"):
        reports = wt.levelset_measures(weight, j_max, samples, cfg.seed)
    rows = [[r.j, r.measure, r.stderr, r.hits, r.samples, r.model_polytope, r.model_curved,
             r.measure / r.model_polytope, r.measure / r.model_curved, r.reliable] for r in reports]
    fit = cfg.grid.get("fit_range", [2, min(7, j_max)] if curved else [3, min(9, j_max)])
    summary = {"domain": domain.kind, "a": weight.base, "j_max": j_max, "samples": samples,
               "fit_range": list(fit), "j0_measure": reports[0].measure}
    with _Stage("fit"):
        summary["exponent"] = wt.fit_levelset_exponent(reports, fit, weight.base)
        summary["curved_model_exponent"] = -2 / (domain.dimension + 1)
        summary["polynomial_degree"] = wt.fit_polynomial_degree(reports, fit, weight.base)
        summary["polytope_model_degree"] = domain.dimension - 1
        sel = [r for r in reports if fit[0] <= r.j <= fit[1] and r.hits > 0]
        ratios = [r.measure / r.model_polytope for r in sel]
        summary["polytope_ratio_band"] = float(max(ratios) / min(ratios)) if ratios else None
    plot = _gnuplot(cfg.output.get("csv"), "level-set measures", 1, 2, "j", "m(Delta_j)")
    return _emit(cfg, LEVELSET_COLUMNS, rows, summary, plot)


# --------------------------------------------------------------------------
# Schur scans
# --------------------------------------------------------------------------

SCHUR_COLUMNS = ["sigma", "tau", "rho", "gamma", "j_max", "column_sup", "row_sup",
                 "log_rate", "tail_rate", "verdict", "log_rule_verdict"]


def _linear_fit(js, sups):
    js, sups = np.asarray(js, float), np.asarray(sups, float)
    slope, intercept = np.polyfit(js, sups, 1)
    resid = sups - (slope * js + intercept)
    spread = float(np.sum((sups - sups.mean()) ** 2))
    r2 = 1 - float(np.sum(resid ** 2)) / spread if spread > 0 else 1.0
    return float(slope), r2


def run_schur_scan(cfg: ExperimentConfig) -> ExperimentResult:
    """Schur test verdicts along a scan of (σ, τ) with the best weight exponent γ per point.

    Boxes default to a deep one-dimensional scan with γ = 0; smooth domains
    default to the disc scan around the threshold.
    """
    domain = cfg.domain
    box = domain.kind == "BoxN"
    x, g = cfg.exponents, cfg.grid
    dec = _decomposition(cfg, 120 if box else 11)
    J = dec.j_max
    default_sigmas = [0.1, 0.2, 0.3, 0.4, 0.5] if box else [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
    sigmas = [float(s) for s in _as_list(x.get("sigma", default_sigmas))]
    taus = [float(t) for t in _as_list(x["tau"])] if x.get("tau") is not None else list(sigmas)
    rhos = [float(r) for r in _as_list(x["rho"])] if x.get("rho") is not None else [s + t for s, t in zip(sigmas, taus)]
    gammas = [float(v) for v in _as_list(x.get("gamma", [0.0] if box else list(np.linspace(0, 0.5, 51))))]
    truncations = [int(j) for j in _as_list(g.get("truncations", list(range(max(0, J - 7), J + 1))))]
    if max(truncations) > J:
        raise ExperimentError("config", "truncations exceed decomposition.j_max", "invalid_config")
    with _Stage("schur-profile"):
        profile = hk.schur_profile(dec)
    with _Stage("schur-test"):
        scan = hk.schur_frontier(profile, sigmas, gammas, truncations, taus=taus, rhos=rhos)
    rows, points = [], []
    for s, t, r, rep in zip(sigmas, taus, rhos, scan.best):
        log_rule = "growing" if rep.log_rate > rep.threshold else "stable"
        tail = rep.tail_rate if rep.tail_rate is not None else float("nan")
        for j, c, w in zip(rep.truncations, rep.column_sups, rep.row_sups):
            rows.append([s, t, r, rep.gamma, j, c, w, rep.log_rate, tail, rep.verdict, log_rule])
        slope, r2 = _linear_fit(rep.truncations, np.maximum(rep.column_sups, rep.row_sups))
        points.append({"sigma": s, "tau": t, "rho": r, "gamma": rep.gamma, "verdict": rep.verdict,
                       "log_rule_verdict": log_rule, "log_rate": rep.log_rate, "tail_rate": rep.tail_rate,
                       "final_sup": max(rep.column_sups[-1], rep.row_sups[-1]),
                       "linear_slope": slope, "linear_r2": r2})
    summary = {"domain": domain.kind, "j_max": J, "truncations": truncations, "gammas": gammas,
               "frontier": scan.frontier, "points": points}
    if box and g.get("include_zero", True):
        zero = hk.profile_test(profile, 0.0, 0.0, 0.0, 0.0, truncations)
        sups = np.maximum(zero.column_sups, zero.row_sups)
        slope, r2 = _linear_fit(truncations, sups)
        summary["zero_exponent"] = {"sups": sups.tolist(), "linear_slope": slope, "linear_r2": r2}
    if box:
        toeplitz = hk.toeplitz_norm_check(float(g.get("toeplitz_base", 2.0)))
        summary["toeplitz"] = {"base": toeplitz.a_base, "sizes": toeplitz.sizes, "norms": toeplitz.norms,
                               "limit": toeplitz.limit, "bounded": toeplitz.bounded,
                               "increasing": toeplitz.increasing}
    return _emit(cfg, SCHUR_COLUMNS, rows, summary)


# --------------------------------------------------------------------------
# Admissibility
# --------------------------------------------------------------------------

ADMISSIBILITY_COLUMNS = ["constant", "j_max", "value", "stable"]


def run_admissibility_report(cfg: ExperimentConfig) -> ExperimentResult:
    """Measured constants of the tiling at j_max − 2, j_max − 1 and j_max."""
    dec = _decomposition(cfg, 7)
    with _Stage("admissibility"):
        report = dc.admissibility_report(dec, samples=int(cfg.grid.get("samples", 200)), seed=cfg.seed,
                                         tolerance=float(cfg.grid.get("tolerance", 0.10)))
    rows = []
    for name in sorted(report.constants):
        for j in sorted(report.by_truncation):
            value = report.by_truncation[j].get(name, report.constants[name])
            rows.append([name, j, float(value), report.stable.get(name, True)])
    c = report.constants
    summary = {"domain": cfg.domain.kind, "construction": dec.kind, "j_max": report.j_max,
               "truncations": sorted(report.by_truncation), "constants": c,
               "by_truncation": {str(k): v for k, v in report.by_truncation.items()},
               "stable": report.stable, "finite": report.finite, "admissible": report.admissible,
               "measure_ratio": c["c2"] / c["c1"], "details": report.details}
    return _emit(cfg, ADMISSIBILITY_COLUMNS, rows, summary)


RUNNERS = {"equivalence": run_equivalence_sweep, "levelset": run_levelset_study,
           "schur": run_schur_scan, "admissibility": run_admissibility_report}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.kind](cfg)
