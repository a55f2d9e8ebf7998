"""The normalised overlap weight ω and its level sets.

``ω(x) = m(D ∩ (x − D)) / max_y m(D ∩ (y − D))`` is supported on the closure of
``2D``.  Dilated copies never need new geometry: ``ω_{qD}(x) = ω_D(x / q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import geometry as geo


@dataclass(frozen=True)
class WeightField:
    domain: geo.ConvexDomain
    normalizer: float
    maximizer: np.ndarray
    base: float
    method: str = "exact"

    def overlap(self, x):
        return geo.intersection_volume(self.domain, x, self.method)

    def __call__(self, x):
        return eval_omega(self, x)


def default_base(domain: geo.ConvexDomain) -> float:
    return 8.0 if domain.kind in ("Disc2D", "SmoothCurve2D") else 2.0


def _overlap_method(domain):
    if domain.kind == "SmoothCurve2D" and domain.disc_map is None:
        return "polygonal"
    return "exact"


def normalize(domain: geo.ConvexDomain, base: float | None = None, seed: int = 0,
              probes: int = 1000, starts: int = 16) -> WeightField:
    """Locate the maximiser of the overlap volume and build the weight field."""
    if domain.volume() <= 0:
        raise ValueError("domain has zero volume")
    base = default_base(domain) if base is None else float(base)
    if base <= 1:
        raise ValueError("level-set base must exceed 1")
    method = _overlap_method(domain)
    vol = lambda x: geo.intersection_volume(domain, x, method)
    rng = np.random.default_rng(seed)
    lo, hi = domain.scaled(2).bounding_box()
    probe_pts = lo + (hi - lo) * rng.random((probes, domain.dimension))

    centre = domain.symmetry_center()
    if centre is not None:
        best = 2 * centre
        value = float(vol(best))
        if domain.kind in ("BoxN", "Disc2D") or domain.disc_map is not None:
            probe_vals = vol(probe_pts)
        else:
            probe_vals = np.array([vol(p) for p in probe_pts])
        if probe_vals.max() > value * (1 + 1e-9):
            raise RuntimeError("symmetric domain has an overlap exceeding the central value")
        return WeightField(domain, value, best, base, method)

    # Concavity of the n-th root makes the objective unimodal; several starts
    # and a final grid comparison guard against flat plateaus.
    seeds = probe_pts[rng.choice(len(probe_pts), size=starts, replace=False)]
    seeds = np.vstack([seeds, [2 * _centroid(domain)]])
    best, value = None, -np.inf
    for start in seeds:
        res = optimize.minimize(lambda x: -vol(x), start, method="Nelder-Mead",
                                options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 4000})
        if -res.fun > value:
            best, value = res.x, -res.fun
    return WeightField(domain, float(value), np.asarray(best), base, method)


def _centroid(domain):
    if domain.kind == "Polygon2D":
        v = domain.eff_vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return ((v + w) * cr[:, None]).sum(axis=0) / (3 * cr.sum())
    lo, hi = domain.bounding_box()
    return (lo + hi) / 2


def eval_omega(weight: WeightField, x):
    x = np.asarray(x, dtype=float)
    out = np.clip(np.asarray(weight.overlap(x)) / weight.normalizer, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def omega_scaled(weight: WeightField, x, factor: float):
    """ω of the dilated domain ``factor·D`` at x."""
    return eval_omega(weight, np.asarray(x, dtype=float) / factor)


def omega_half(weight: WeightField, x):
    """ω_{½D}(x), the weight whose level sets define the tiles of D."""
    return eval_omega(weight, 2 * np.asarray(x, dtype=float))


def level_index(values, base: float):
    """floor(−log_a v) for v ∈ (0, 1]; −1 for nonpositive v."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        idx = np.floor(-np.log(np.where(v > 0, v, 1.0)) / math.log(base) + 1e-12)
    idx = np.where(v > 0, np.maximum(idx, 0), -1).astype(int)
    return int(idx) if idx.ndim == 0 else idx


def tabulate(weight: WeightField, nodes: int):
    """Grid of ω over the bounding box of 2D; returns (axes, values)."""
    lo, hi = weight.domain.scaled(2).bounding_box()
    axes = [np.linspace(lo[k], hi[k], nodes) for k in range(weight.domain.dimension)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return axes, eval_omega(weight, mesh)


# --------------------------------------------------------------------------
# Level sets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSetReport:
    j: int
    measure: float
    stderr: float
    hits: int
    samples: int
    model_polytope: float
    model_curved: float
    reliable: bool


def levelset_measures(weight: WeightField, j_max: int, samples: int, seed: int,
                      min_hits: int = 100, batch: int = 250_000) -> list[LevelSetReport]:
    """Monte Carlo measures of Δ_j = {x ∈ D : ω_{½D}(x) ∈ (a^{-j-1}, a^{-j}]}."""
    if j_max < 0 or samples <= 0:
        raise ValueError("need j_max ≥ 0 and a positive sample count")
    dom, a, n = weight.domain, weight.base, weight.domain.dimension
    lo, hi = dom.bounding_box()
    box_vol = float(np.prod(hi - lo))
    counts = np.zeros(j_max + 1, dtype=np.int64)
    rng = np.random.default_rng(seed)
    left = samples
    while left > 0:
        m = min(left, batch)
        pts = lo + (hi - lo) * rng.random((m, n))
        pts = pts[geo.contains(dom, pts)]
        levels = level_index(omega_half(weight, pts), a)
        levels = levels[(levels >= 0) & (levels <= j_max)]
        counts += np.bincount(levels, minlength=j_max + 1)[: j_max + 1]
        left -= m
    out = []
    for j, hits in enumerate(counts):
        p = hits / samples
        out.append(LevelSetReport(
            j=j, measure=box_vol * p, stderr=box_vol * math.sqrt(p * (1 - p) / samples),
            hits=int(hits), samples=samples,
            model_polytope=float(max(j, 1) ** (n - 1) * a ** (-j)),
            model_curved=float(a ** (-2 * j / (n + 1))),
            reliable=bool(hits >= min_hits)))
    return out


def fit_levelset_exponent(reports, j_range, base: float) -> float:
    """Least-squares slope of log_a m(Δ_j) against j."""
    js = np.array([r.j for r in reports if j_range[0] <= r.j <= j_range[1] and r.hits > 0])
    ms = np.array([r.measure for r in reports if j_range[0] <= r.j <= j_range[1] and r.hits > 0])
    if len(js) < 2:
        raise ValueError("need at least two populated levels to fit")
    return float(np.polyfit(js, np.log(ms) / math.log(base), 1)[0])


def fit_polynomial_degree(reports, j_range, base: float) -> float:
    """Exponent d in m(Δ_j) ≈ C·j^d·a^{-j}, by regression on log j."""
    sel = [r for r in reports if j_range[0] <= r.j <= j_range[1] and r.hits > 0 and r.j > 0]
    js = np.array([r.j for r in sel], dtype=float)
    y = np.log([r.measure for r in sel]) + js * math.log(base)
    return float(np.polyfit(np.log(js), y, 1)[0])


# --------------------------------------------------------------------------
# Structural checks
# --------------------------------------------------------------------------

def _sample_in(domain, count, rng):
    lo, hi = domain.bounding_box()
    out = np.empty((0, domain.dimension))
    while len(out) < count:
        pts = lo + (hi - lo) * rng.random((2 * count + 16, domain.dimension))
        out = np.vstack([out, pts[geo.contains(domain, pts)]])
    return out[:count]


@dataclass(frozen=True)
class InequalityReport:
    trials: int
    max_violation: float
    violations: int
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def check_concavity(weight: WeightField, trials: int, seed: int, tol: float = 1e-9) -> InequalityReport:
    """ω^{1/n}(tx + (1−t)y) ≥ tω^{1/n}(x) + (1−t)ω^{1/n}(y) on random segments of 2D."""
    rng = np.random.default_rng(seed)
    n = weight.domain.dimension
    doubled = weight.domain.scaled(2)
    x, y = _sample_in(doubled, trials, rng), _sample_in(doubled, trials, rng)
    t = rng.random(trials)
    root = lambda p: eval_omega(weight, p) ** (1.0 / n)
    lhs = root(t[:, None] * x + (1 - t[:, None]) * y)
    rhs = t * root(x) + (1 - t) * root(y)
    gap = rhs - lhs
    return InequalityReport(trials, float(max(gap.max(), 0.0)), int((gap > tol).sum()), tol)


def check_sum_inequality(weight: WeightField, trials: int, seed: int, tol: float = 1e-9) -> InequalityReport:
    """ω_{2D}(x+y) ≥ 2^{-n} max(ω(x), ω(y)) and its level-index form."""
    rng = np.random.default_rng(seed)
    n, a = weight.domain.dimension, weight.base
    doubled = weight.domain.scaled(2)
    x, y = _sample_in(doubled, trials, rng), _sample_in(doubled, trials, rng)
    wx, wy = eval_omega(weight, x), eval_omega(weight, y)
    wsum = omega_scaled(weight, x + y, 2.0)
    gap = 2.0 ** (-n) * np.maximum(wx, wy) - wsum
    # Level form: with ω = a^{-j}, a^{-j'}, a^{-k}, both j and j' ≥ k − n·log_a 2.
    shift = n * math.log(2) / math.log(a)
    lvl = lambda w: -np.log(np.maximum(w, 1e-300)) / math.log(a)
    live = (wx > 0) & (wy > 0) & (wsum > 0)
    k = lvl(wsum[live])
    index_gap = np.maximum(k - shift - lvl(wx[live]), k - shift - lvl(wy[live]))
    return InequalityReport(
        trials, float(max(gap.max(), 0.0)), int((gap > tol).sum()), tol,
        {"level_shift": shift, "index_violations": int((index_gap > 1e-9).sum()),
         "max_index_gap": float(index_gap.max()) if index_gap.size else 0.0})
