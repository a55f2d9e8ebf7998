"""File formats: decompositions (JSON), symbols and partitions (npz), CSV tables.

Decompositions and partitions are stored with the parameters that rebuild
them, since every construction is deterministic; the tile listing and sample
arrays are written for inspection and are checked on load.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from . import decomposition as dc
from . import geometry as geo
from . import partition as pt
from .besov import SampledSymbol, SmoothGenerator


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, columns: list[str], rows, config: dict) -> str:
    """CSV with a ``# pwlab <version> config=<sha256>`` first line; returns the text."""
    buf = io.StringIO()
    buf.write(f"# pwlab {__version__} config={config_hash(config)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path) -> tuple[str, list[dict]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0]
    return header, list(csv.DictReader(lines[1:]))


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj) -> str:
    text = json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# --------------------------------------------------------------------------
# Decompositions
# --------------------------------------------------------------------------

def build_decomposition(domain: geo.ConvexDomain, j_max: int, m: int = 3, epsilon: float = 0.05) -> dc.Decomposition:
    """The construction matching the domain type."""
    if domain.kind == "BoxN":
        return dc.decompose_box(domain.dimension, j_max, domain)
    if domain.kind == "Polygon2D":
        return dc.decompose_polygon2d(domain, j_max)
    return dc.decompose_smooth2d(domain, m=m, epsilon=epsilon, j_max=j_max)


def decomposition_to_dict(dec: dc.Decomposition) -> dict:
    tiles = []
    for t in dec.tiles:
        tiles.append({
            "j": t.j, "index": list(t.index),
            "E": {"type": type(t.E).__name__, "area": float(t.E.area()), "centroid": t.E.centroid()},
            "A": {"center": t.A.center, "edges": t.A.edges},
            "T": {"matrix": t.A.inverse, "offset": -t.A.inverse @ t.A.center},
        })
    construction = {"domain": geo.domain_to_dict(dec.domain.scaled(1 / dec.scale)), "kind": dec.kind,
                    "j_max": dec.j_max, "scale": dec.scale}
    if dec.kind == "smooth2d":
        construction.update(m=dec.params["m"], epsilon=dec.params["epsilon"])
    return _json_ready({"construction": construction, "a": dec.a, "params": dec.params,
                        "measured": {k: v for k, v in dec.measured.items() if np.isscalar(v)},
                        "tiles": tiles})


def decomposition_from_dict(data: dict) -> dc.Decomposition:
    c = data["construction"]
    domain = geo.domain_from_dict(c["domain"])
    dec = build_decomposition(domain, int(c["j_max"]), int(c.get("m", 3)), float(c.get("epsilon", 0.05)))
    if len(dec.tiles) != len(data.get("tiles", dec.tiles)):
        raise ValueError("stored tile listing does not match the rebuilt decomposition")
    scale = float(c.get("scale", 1.0))
    return dec.scaled(scale) if scale != 1.0 else dec


def save_decomposition(path, dec: dc.Decomposition) -> None:
    write_json(path, decomposition_to_dict(dec))


def load_decomposition(path) -> dc.Decomposition:
    return decomposition_from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# Symbols and partitions
# --------------------------------------------------------------------------

def save_symbol(path, symbol: SampledSymbol) -> None:
    arrays = {f"axis{k}": ax for k, ax in enumerate(symbol.axes)}
    arrays["values"] = symbol.values
    if symbol.generator is not None:
        arrays.update({f"lattice{k}": ax for k, ax in enumerate(symbol.generator.lattice)})
        arrays["coefficients"] = symbol.generator.coefficients
        arrays["width"] = np.array(symbol.generator.width)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_symbol(path) -> SampledSymbol:
    with np.load(path) as data:
        n = sum(1 for k in data.files if k.startswith("axis"))
        axes = tuple(data[f"axis{k}"] for k in range(n))
        gen = None
        if "coefficients" in data.files:
            gen = SmoothGenerator(tuple(data[f"lattice{k}"] for k in range(n)), data["coefficients"],
                                  float(data["width"]))
        return SampledSymbol(axes, data["values"], gen)


def save_partition(path, pou: pt.PartitionOfUnity, decomposition_record: dict, grid: int) -> None:
    """Header (rebuild parameters and checks) plus sparse member samples on the global grid."""
    _, flat = pt.global_grid(pou.decomposition.domain, grid)
    samples = pou.samples(flat)
    header = {"format": "pwlab-partition", "version": __version__, "kind": pou.kind,
              "bump_epsilon": pou.bump.epsilon, "j_max": pou.j_max, "grid": grid,
              "decomposition": decomposition_record, "checks": pou.checks}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.frombuffer(canonical_json(_json_ready(header)).encode(), dtype=np.uint8),
                 nodes=flat, point=samples.point, member=samples.member, value=samples.value)


def partition_header(path) -> dict:
    with np.load(path) as data:
        if "header" not in data.files:
            raise ValueError("not a partition file")
        header = json.loads(bytes(data["header"]).decode())
    if header.get("format") != "pwlab-partition":
        raise ValueError("not a partition file")
    return header


def load_partition(path) -> pt.PartitionOfUnity:
    header = partition_header(path)
    dec = decomposition_from_dict(header["decomposition"])
    bump = pt.build_base_bump(header["bump_epsilon"], dec.domain.dimension)
    pou = pt.build_partition(dec, bump, check=False)
    return pt.build_squared_family(pou) if header["kind"] == "squared" else pou
