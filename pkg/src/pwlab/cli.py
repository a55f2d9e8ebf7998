"""Command-line entry point ``pwlab``."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import besov as bs
from . import decomposition as dc
from . import experiments as ex
from . import geometry as geo
from . import hankel as hk
from . import partition as pt
from . import serialization as se
from . import weight as wt


def _fail(error: ex.ExperimentError):
    click.echo(json.dumps(error.to_dict(), sort_keys=True), err=True)
    sys.exit(2)


class _Group(click.Group):
    """Reports component failures as one JSON object on stderr with exit status 2."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ex.ExperimentError as err:
            _fail(err)
        except dc.ContainmentError as err:
            _fail(ex.ExperimentError("decomposition", str(err), "A_not_in_domain",
                                     {"j": err.j, "index": list(err.index), "excess": err.excess}))
        except ValueError as err:
            _fail(ex.ExperimentError(ctx.invoked_subcommand or "pwlab", str(err)))


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="pwlab")
def main():
    """Weighted Hankel operators on Paley-Wiener spaces of convex domains."""


def _domain(path):
    return geo.load_domain(Path(path))


def _echo_json(obj):
    click.echo(se.write_json(None, obj), nl=False)


@main.command()
@click.option("--domain", "domain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "nodes", required=True, type=click.IntRange(2))
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def weight(domain_path, nodes, out):
    """Tabulate ω on an N^n grid over the bounding box of 2Ω."""
    domain = _domain(domain_path)
    field = wt.normalize(domain)
    axes, values = wt.tabulate(field, nodes)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, domain.dimension)
    columns = [f"x{k}" for k in range(domain.dimension)] + ["omega"]
    rows = [list(pt_) + [v] for pt_, v in zip(mesh.tolist(), values.ravel().tolist())]
    se.write_csv(out, columns, rows, {"command": "weight", "domain": geo.domain_to_dict(domain), "grid": nodes})


@main.command()
@click.option("--domain", "domain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--a", "base", type=float, default=None, help="Level-set base (default 8 for curved, 2 for polytopes).")
@click.option("--jmax", required=True, type=click.IntRange(0))
@click.option("--samples", default=1_000_000, show_default=True, type=click.IntRange(1))
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def levelsets(domain_path, base, jmax, samples, seed, out):
    """Monte Carlo level-set measures with model ratios and fitted exponents."""
    config = {"experiment": "levelset", "seed": seed, "domain": json.loads(Path(domain_path).read_text()),
              "decomposition": {"j_max": jmax}, "grid": {"samples": samples}, "output": {"csv": str(Path(out))}}
    if base is not None:
        config["decomposition"]["a"] = base
    result = ex.run(ex.ExperimentConfig.from_dict(config, Path.cwd()))
    _echo_json(result.summary)


@main.command()
@click.option("--domain", "domain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--jmax", required=True, type=click.IntRange(0))
@click.option("--m", "m", default=3, show_default=True, type=click.IntRange(0))
@click.option("--eps", default=0.05, show_default=True, type=float)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def decompose(domain_path, jmax, m, eps, out):
    """Build the tile pairs {(E, A)} and store them as JSON."""
    dec = se.build_decomposition(_domain(domain_path), jmax, m, eps)
    se.save_decomposition(out, dec)
    click.echo(f"{len(dec.tiles)} tiles, construction {dec.kind}, a = {dec.a:g}")


@main.command()
@click.option("--dec", "dec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", default=None, type=float, help="Bump margin (default: measured from the tiles).")
@click.option("--grid", "nodes", default=128, show_default=True, type=click.IntRange(8))
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--report", default=None, type=click.Path(dir_okay=False, writable=True),
              help="CSV of per-member L1 norms and support boxes.")
def partition(dec_path, eps, nodes, out, report):
    """Normalised partition of unity subordinate to the parallelepipeds."""
    record = json.loads(Path(dec_path).read_text())
    dec = se.decomposition_from_dict(record)
    bump = None if eps is None else pt.build_base_bump(eps, dec.domain.dimension)
    pou = pt.build_partition(dec, bump, grid=nodes)
    se.save_partition(out, pou, record, nodes)
    if report is not None:
        norms = pt.all_l1_norms(pou)
        n = dec.domain.dimension
        columns = ["member", "j", "l1", "tail"] + [f"lo{k}" for k in range(n)] + [f"hi{k}" for k in range(n)]
        rows = []
        for p in range(pou.member_count):
            lo, hi = pou.tiles[p].A.bounds()
            rows.append([p, pou.tiles[p].j, norms[p].value, norms[p].tail, *lo.tolist(), *hi.tolist()])
        se.write_csv(report, columns, rows, {"command": "partition", "decomposition": record["construction"],
                                             "eps": eps, "grid": nodes})
    _echo_json({"members": pou.member_count, "bump_epsilon": pou.bump.epsilon, "checks": pou.checks})


@main.command()
@click.option("--domain", "domain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--spacing", required=True, type=float, help="Sample spacing of the symbol grid on 2Ω.")
@click.option("--seed", required=True, type=int)
@click.option("--modes", default=16, show_default=True, type=click.IntRange(1))
@click.option("--tilt", default=0.0, show_default=True, type=float)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def symbol(domain_path, spacing, seed, modes, tilt, out):
    """Random smooth symbol sampled over the bounding box of 2Ω."""
    domain = _domain(domain_path)
    sym = bs.random_symbol(domain.scaled(2), spacing, seed, modes=modes, tilt=tilt)
    se.save_symbol(out, sym)
    click.echo(f"symbol grid {'x'.join(str(len(a)) for a in sym.axes)}")


@main.command()
@click.option("--symbol", "symbol_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pou", "pou_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--s", "s", required=True, type=float)
@click.option("--p", "p", required=True, type=float)
@click.option("--q", "q", required=True, type=float)
@click.option("--family", type=click.Choice(["squared", "doubled"]), default="squared", show_default=True,
              help="squared: ψ̂² family of the stored partition; doubled: normalised partition on 2Ω.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def besov(symbol_path, pou_path, s, p, q, family, out):
    """Besov norm of a stored symbol on 2Ω."""
    sym = se.load_symbol(symbol_path)
    header = se.partition_header(pou_path)
    if family == "squared":
        pou = pt.build_squared_family(se.load_partition(pou_path))
    else:
        dec = se.decomposition_from_dict(header["decomposition"])
        pou = bs.doubled_partition(dec, header["bump_epsilon"], check=False)
    result = bs.besov_norm(sym, pou, bs.BesovParams(s, p, q))
    report = {"value": result.value, "s": s, "p": p, "q": q, "family": family, "members": pou.member_count,
              "per_level": result.profile, "max_tail": result.max_tail}
    se.write_json(out, report)
    _echo_json(report)


@main.command()
@click.option("--domain", "domain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--symbol", "symbol_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma", default=0.0, show_default=True, type=float)
@click.option("--tau", default=0.0, show_default=True, type=float)
@click.option("--h", "h", required=True, type=float)
@click.option("--p", "exponents", multiple=True, type=float, default=(2.0,), show_default=True)
@click.option("--method", type=click.Choice(["svd", "gram"]), default="svd", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
def hankel(domain_path, symbol_path, sigma, tau, h, exponents, method, out):
    """Schatten norms of the discretised weighted Hankel operator."""
    domain = _domain(domain_path)
    sym = se.load_symbol(symbol_path)
    spec = hk.make_spec(domain, sym, h, sigma, tau)
    spectrum = hk.singular_spectrum(hk.assemble_hankel(spec), h, method)
    report = {"h": h, "nodes": spec.size, "sigma": sigma, "tau": tau, "method": method,
              "schatten": {format(p, "g"): hk.schatten_norm(spectrum, p) for p in exponents},
              "largest": spectrum.values[:10].tolist(),
              "hilbert_schmidt_squared": hk.hilbert_schmidt_squared(spec)}
    if sigma == 0 and tau == 0:
        report["overlap_integral"] = hk.overlap_integral(sym, domain, spec.weight)
    se.write_json(out, report)
    _echo_json(report)


@main.command()
@click.option("--dec", "dec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma", required=True, type=float)
@click.option("--tau", required=True, type=float)
@click.option("--rho", default=None, type=float, help="Default σ + τ.")
@click.option("--gamma", "gammas", multiple=True, type=float, default=(0.0,), show_default=True)
@click.option("--jmax", required=True, type=click.IntRange(0))
@click.option("--out", default=None, type=click.Path(dir_okay=False, writable=True))
def schur(dec_path, sigma, tau, rho, gammas, jmax, out):
    """Weighted Schur sums at truncations up to j_max; the best γ decides the verdict."""
    dec = se.load_decomposition(dec_path)
    if jmax > dec.j_max:
        raise ValueError(f"--jmax {jmax} exceeds the stored decomposition depth {dec.j_max}")
    rho = sigma + tau if rho is None else rho
    profile = hk.schur_profile(dec.truncated(jmax) if jmax < dec.j_max else dec)
    truncations = list(range(max(0, jmax - 7), jmax + 1))
    scan = hk.schur_frontier(profile, [sigma], list(gammas), truncations, taus=[tau], rhos=[rho])
    rep = scan.best[0]
    rows = [[sigma, tau, rho, rep.gamma, j, c, r] for j, c, r in zip(rep.truncations, rep.column_sups, rep.row_sups)]
    if out is not None:
        se.write_csv(out, ["sigma", "tau", "rho", "gamma", "j_max", "column_sup", "row_sup"], rows,
                     {"command": "schur", "sigma": sigma, "tau": tau, "rho": rho, "gammas": list(gammas),
                      "jmax": jmax})
    _echo_json({"gamma": rep.gamma, "verdict": rep.verdict, "log_rate": rep.log_rate, "tail_rate": rep.tail_rate,
                "truncations": rep.truncations, "column_sups": rep.column_sups, "row_sups": rep.row_sups})


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def run(config_path):
    """Run an experiment described by a JSON config."""
    result = ex.run(ex.load_config(config_path))
    _echo_json(result.summary)


if __name__ == "__main__":
    main()
