"""Tilings of a convex domain into level-set tiles E with enclosing
parallelepipeds A, and numerical checks of their admissibility.

Three constructions are provided:

* :func:`decompose_box` for axis boxes in any dimension (dyadic layers toward
  every face, tensorised),
* :func:`decompose_smooth2d` for discs and strictly convex smooth curves
  (radial bands of width 4^-j cut into 2^(j+m) angular sectors),
* :func:`decompose_polygon2d` for convex polygons (the square pattern pulled
  back through bilinear charts around each vertex).

Every tile carries an affine map ``T`` sending its parallelepiped ``A`` onto
the centred unit cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product

import numpy as np
import shapely

from . import geometry as geo
from . import weight as wt

REF_SIGNS_2D = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])


# --------------------------------------------------------------------------
# Building blocks
# --------------------------------------------------------------------------

class ContainmentError(ValueError):
    """A parallelepiped A of some tile is not contained in the domain."""

    def __init__(self, j: int, index: tuple, excess: float, message: str):
        super().__init__(message)
        self.j, self.index, self.excess = j, index, excess


@dataclass(frozen=True, eq=False)
class Parallelepiped:
    """``{center + edges @ u : u ∈ (-½, ½)^n}``; columns of ``edges`` are edge vectors."""

    center: np.ndarray
    edges: np.ndarray

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.edges)

    @property
    def dimension(self) -> int:
        return len(self.center)

    def to_reference(self, x):
        """The map T onto (-½, ½)^n."""
        return (np.asarray(x, dtype=float) - self.center) @ self.inverse.T

    def from_reference(self, u):
        return self.center + np.asarray(u, dtype=float) @ self.edges.T

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.edges)))

    def corners(self) -> np.ndarray:
        n = self.dimension
        if n == 2:
            ref = REF_SIGNS_2D if np.linalg.det(self.edges) > 0 else REF_SIGNS_2D[::-1]
        else:
            ref = np.array(list(product((-0.5, 0.5), repeat=n)))
        return self.from_reference(ref)

    def contains(self, x):
        return np.all(np.abs(self.to_reference(x)) < 0.5, axis=-1)

    def scaled(self, q: float) -> "Parallelepiped":
        return Parallelepiped(self.center * q, self.edges * q)

    def bounds(self):
        c = self.corners()
        return c.min(axis=0), c.max(axis=0)


@dataclass(frozen=True, eq=False)
class BoxRegion:
    lo: np.ndarray
    hi: np.ndarray

    def area(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def centroid(self):
        return (self.lo + self.hi) / 2

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return np.all((x > self.lo) & (x < self.hi), axis=-1)

    def scaled(self, q):
        return BoxRegion(self.lo * q, self.hi * q)

    def outline(self, resolution: int = 0) -> np.ndarray:
        (x0, y0), (x1, y1) = self.lo, self.hi
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    def hull_points(self, resolution: int = 0) -> np.ndarray:
        return np.array(list(product(*zip(self.lo, self.hi))))

    def sample_points(self, per_axis: int = 9) -> np.ndarray:
        axes = [np.linspace(l, h, per_axis) for l, h in zip(self.lo, self.hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(self.lo))


@dataclass(frozen=True, eq=False)
class PolarRegion:
    """``{r·q·γ(t) : r0 < r < r1, t0 < t < t1}`` for a boundary γ scaled by q."""

    domain: geo.ConvexDomain
    r0: float
    r1: float
    t0: float
    t1: float

    @property
    def _gamma(self):
        return self.domain.boundary()

    def area(self) -> float:
        # |det| of (r,t) ↦ rγ(t) is r·(γ × γ'); the t-integral is by Gauss–Legendre.
        nodes, weights = np.polynomial.legendre.leggauss(24)
        t = (self.t0 + self.t1) / 2 + (self.t1 - self.t0) / 2 * nodes
        g, dg = self._gamma.eval(t), self._gamma.deriv(t)
        cross = g[:, 0] * dg[:, 1] - g[:, 1] * dg[:, 0]
        ang = float((weights * cross).sum() * (self.t1 - self.t0) / 2)
        return self.domain.scale**2 * (self.r1**2 - self.r0**2) / 2 * ang

    def points(self, r, t):
        return self.domain.scale * np.asarray(r)[..., None] * self._gamma.eval(t)

    def centroid(self):
        nodes, weights = np.polynomial.legendre.leggauss(12)
        r = (self.r0 + self.r1) / 2 + (self.r1 - self.r0) / 2 * nodes
        t = (self.t0 + self.t1) / 2 + (self.t1 - self.t0) / 2 * nodes
        R, Tt = np.meshgrid(r, t, indexing="ij")
        g, dg = self._gamma.eval(Tt), self._gamma.deriv(Tt)
        jac = R * (g[..., 0] * dg[..., 1] - g[..., 1] * dg[..., 0])
        w = np.outer(weights, weights) * jac
        x = self.points(R, Tt)
        return (x * w[..., None]).sum(axis=(0, 1)) / w.sum()

    def contains(self, x):
        r, t = geo.polar_coordinates(self.domain, x)
        return (r > self.r0) & (r < self.r1) & (t > self.t0) & (t < self.t1)

    def scaled(self, q):
        return replace(self, domain=self.domain.scaled(q))

    def outline(self, resolution: int = 16) -> np.ndarray:
        t = np.linspace(self.t0, self.t1, resolution + 1)
        outer = self.points(np.full_like(t, self.r1), t)
        if self.r0 <= 0:
            return np.vstack([outer, np.zeros((1, 2))])
        inner = self.points(np.full_like(t, self.r0), t[::-1])
        return np.vstack([outer, inner])

    def hull_points(self, resolution: int = 8) -> np.ndarray:
        t = np.linspace(self.t0, self.t1, resolution + 1)
        outer = self.points(np.full_like(t, self.r1), t)
        inner = self.points(np.array([self.r0, self.r0]), np.array([self.t0, self.t1]))
        return np.vstack([outer, inner])

    def sample_points(self, per_axis: int = 9) -> np.ndarray:
        r = np.linspace(self.r0, self.r1, per_axis)
        t = np.linspace(self.t0, self.t1, 2 * per_axis - 1)
        R, Tt = np.meshgrid(r, t, indexing="ij")
        return self.points(R, Tt).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class PolygonRegion:
    """A union of quadrilaterals (each given counterclockwise)."""

    quads: np.ndarray  # (count, 4, 2)

    @cached_property
    def geometry(self):
        polys = shapely.polygons(self.quads)
        return shapely.union_all(polys) if len(polys) > 1 else polys[0]

    def area(self) -> float:
        x, y = self.quads[..., 0], self.quads[..., 1]
        return float(0.5 * (x * np.roll(y, -1, 1) - y * np.roll(x, -1, 1)).sum())

    def centroid(self):
        c = self.geometry.centroid
        return np.array([c.x, c.y])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return shapely.contains_xy(self.geometry, x[..., 0], x[..., 1])

    def scaled(self, q):
        return PolygonRegion(self.quads * q)

    def outline(self, resolution: int = 0) -> np.ndarray:
        g = self.geometry
        if g.geom_type != "Polygon":
            g = g.convex_hull
        return np.asarray(g.exterior.coords)[:-1]

    def hull_points(self, resolution: int = 0) -> np.ndarray:
        return self.quads.reshape(-1, 2)

    def sample_points(self, per_axis: int = 9) -> np.ndarray:
        s = np.linspace(0, 1, per_axis)
        S, U = np.meshgrid(s, s, indexing="ij")
        q = self.quads
        pts = ((1 - S) * (1 - U))[None, ..., None] * q[:, None, None, 0] \
            + (S * (1 - U))[None, ..., None] * q[:, None, None, 1] \
            + (S * U)[None, ..., None] * q[:, None, None, 2] \
            + ((1 - S) * U)[None, ..., None] * q[:, None, None, 3]
        return pts.reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class SectorRegion:
    """``{r·q·γ(t) : r ≥ r_min, t ∈ (t_lo, t_hi) mod 1}``."""

    domain: geo.ConvexDomain
    r_min: float
    t_lo: float
    t_hi: float

    def contains(self, x):
        r, t = geo.polar_coordinates(self.domain, x)
        if self.t_hi - self.t_lo >= 1:
            inside = np.ones_like(t, dtype=bool)
        else:
            inside = np.mod(t - self.t_lo, 1.0) < (self.t_hi - self.t_lo)
        return (r >= self.r_min) & inside

    def scaled(self, q):
        return replace(self, domain=self.domain.scaled(q))


@dataclass(frozen=True, eq=False)
class Tile:
    j: int
    index: tuple
    E: object
    A: Parallelepiped
    G: object = None

    def T(self, x):
        return self.A.to_reference(x)

    def scaled(self, q):
        return Tile(self.j, self.index, self.E.scaled(q), self.A.scaled(q),
                    None if self.G is None else self.G.scaled(q))


@dataclass(eq=False)
class Decomposition:
    domain: geo.ConvexDomain
    kind: str
    a: float
    j_max: int
    tiles: list
    params: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    locator: object = None
    scale: float = 1.0
    builder: object = None

    @cached_property
    def position(self) -> dict:
        return {(t.j, t.index): p for p, t in enumerate(self.tiles)}

    @cached_property
    def levels(self) -> np.ndarray:
        return np.array([t.j for t in self.tiles])

    @property
    def counts(self) -> list[int]:
        return np.bincount(self.levels, minlength=self.j_max + 1).tolist()

    @property
    def epsilon(self):
        return self.params.get("epsilon")

    def locate(self, x) -> np.ndarray:
        """Position of the tile whose E contains each point; -1 when none does."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.locator(x / self.scale)

    def scaled(self, q: float) -> "Decomposition":
        return Decomposition(self.domain.scaled(q), self.kind, self.a, self.j_max,
                             [t.scaled(q) for t in self.tiles], dict(self.params),
                             dict(self.measured), self.locator, self.scale * q, self.builder)

    def extended(self, extra: int = 1) -> "Decomposition":
        """The same construction with ``extra`` more levels; tile positions are preserved."""
        if self.builder is None:
            raise ValueError("decomposition cannot be extended")
        ext = self.builder(self.j_max + extra)
        return ext.scaled(self.scale) if self.scale != 1 else ext

    def truncated(self, j_max: int) -> "Decomposition":
        """The sub-decomposition with levels ≤ j_max."""
        if j_max > self.j_max:
            raise ValueError("cannot extend a truncation")
        keep = [t for t in self.tiles if t.j <= j_max]
        inner = self.locator
        count = len(keep)
        locator = lambda x: np.where(_lt(inner(x), count), inner(x), -1)
        return Decomposition(self.domain, self.kind, self.a, j_max, keep, dict(self.params),
                             dict(self.measured), locator, self.scale, self.builder)

    @cached_property
    def reference_maps(self):
        """Stacked (centers, inverse edge matrices) for vectorised T evaluation."""
        centers = np.array([t.A.center for t in self.tiles])
        inv = np.array([t.A.inverse for t in self.tiles])
        return centers, inv

    @cached_property
    def neighbors(self) -> list[np.ndarray]:
        """For each tile, positions of tiles whose A meets its A (itself included)."""
        pairs = overlap_pairs(self)
        out = [[] for _ in self.tiles]
        for p, q in pairs:
            out[p].append(q)
        return [np.array(sorted(v)) for v in out]


def _lt(values, bound):
    return (values >= 0) & (values < bound)


# --------------------------------------------------------------------------
# Axis boxes
# --------------------------------------------------------------------------

def interval_E(i: int) -> tuple[float, float]:
    if i == 0:
        return -0.5, 0.5
    lo, hi = 1 - 2.0 ** (-abs(i)), 1 - 2.0 ** (-abs(i) - 1)
    return (lo, hi) if i > 0 else (-hi, -lo)


def interval_A(i: int) -> tuple[float, float]:
    if i == 0:
        return -2 / 3, 2 / 3
    lo, hi = 1 - 1.5 * 2.0 ** (-abs(i)), 1 - (2 / 3) * 2.0 ** (-abs(i) - 1)
    return (lo, hi) if i > 0 else (-hi, -lo)


def dyadic_index(y):
    """1-D tile index of points of (-1, 1); large magnitudes for |y| → 1."""
    y = np.asarray(y, dtype=float)
    mag = np.abs(y)
    with np.errstate(divide="ignore"):
        k = np.floor(-np.log2(np.maximum(1 - mag, 1e-300)))
    k = np.where(mag < 0.5, 0, np.maximum(k, 1)).astype(np.int64)
    return np.where(y < 0, -k, k)


def box_indices(n: int, j_max: int) -> list[tuple]:
    out = []
    for j in range(j_max + 1):
        for idx in product(range(-j, j + 1), repeat=n):
            if sum(abs(i) for i in idx) == j:
                out.append(tuple(idx))
    return out


def decompose_box(n: int = 1, j_max: int = 6, domain: geo.ConvexDomain | None = None) -> Decomposition:
    """Dyadic tensor decomposition of an axis box (by default the cube (-1,1)^n)."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if domain is None:
        domain = geo.box(np.ones(n))
    if domain.kind != "BoxN" or domain.dimension != n:
        raise ValueError("decompose_box needs an n-dimensional box")
    c, w = domain.eff_center, domain.eff_half_widths
    tiles = []
    for idx in box_indices(n, j_max):
        e = np.array([interval_E(i) for i in idx])
        A = np.array([interval_A(i) for i in idx])
        g = np.array([_box_g_interval(i) for i in idx])
        E = BoxRegion(c + w * e[:, 0], c + w * e[:, 1])
        par = Parallelepiped(c + w * A.mean(axis=1), np.diag(w * (A[:, 1] - A[:, 0])))
        G = BoxRegion(c + w * g[:, 0], c + w * g[:, 1])
        tiles.append(Tile(sum(abs(i) for i in idx), idx, E, par, G))
    keys = {t.index: p for p, t in enumerate(tiles)}
    width = 2 * j_max + 3
    table = np.full(width**n, -1, dtype=np.int64)
    for idx, p in keys.items():
        table[_box_key(np.array(idx), j_max)] = p
    base_c, base_w = c.copy(), w.copy()

    def locator(x):
        y = (x - base_c) / base_w
        inside = np.all(np.abs(y) < 1, axis=-1)
        idx = np.clip(dyadic_index(np.where(np.abs(y) < 1, y, 0)), -(j_max + 1), j_max + 1)
        ok = inside & (np.abs(idx).sum(axis=-1) <= j_max)
        out = np.full(len(x), -1, dtype=np.int64)
        out[ok] = table[_box_key(idx[ok], j_max)]
        return out

    dec = Decomposition(domain, "box", 2.0, j_max, tiles,
                        {"n": n, "epsilon": 1 / 7, "M1": n}, locator=locator,
                        builder=lambda J: decompose_box(n, J, domain))
    dec.measured.update(_area_constants(dec), L=n * math.log(2) / math.log(2.0))
    return dec


def _box_key(idx, j_max):
    idx = np.atleast_2d(idx)
    width = 2 * j_max + 3
    shifted = idx + j_max + 1
    return (shifted * width ** np.arange(idx.shape[-1])).sum(axis=-1)


def _box_g_interval(i: int):
    """Points x with (x+y)/2 ∈ E_i for some y ∈ (-1,1), along one axis."""
    lo, hi = interval_E(i)
    return max(2 * lo - 1, -1.0), min(2 * hi + 1, 1.0)


def box_beta_1d(i: int, k: int) -> int:
    if i != 0 and k != 0 and (i > 0) == (k > 0):
        return int(np.sign(i)) * min(abs(i), abs(k))
    return 0


# --------------------------------------------------------------------------
# Smooth planar domains
# --------------------------------------------------------------------------

def _band(j):
    return (0.0, 0.75) if j == 0 else (1 - 4.0 ** (-j), 1 - 4.0 ** (-j - 1))


def band_level(r):
    """Radial band index j with r ∈ (1 − 4^{-j}, 1 − 4^{-j-1}); band 0 is r < 3/4."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        j = np.floor(-np.log(np.maximum(1 - r, 1e-300)) / math.log(4))
    return np.where(r < 0.75, 0, np.maximum(j, 1)).astype(np.int64)


def _golden_extreme(f, lo, hi, maximize, iters=48):
    """Vectorised golden-section search of f over per-row brackets [lo, hi]."""
    sign = -1.0 if maximize else 1.0
    g = (math.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        d_new = np.where(left, c, a + g * (b - a))
        c_new = np.where(left, b - g * (b - a), d)
        fd_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fd)
        need_c, need_d = ~np.isnan(fc_new) == False, np.isnan(fd_new)
        c, d = c_new, d_new
        fc = np.where(need_c, sign * f(c), fc_new)
        fd = np.where(need_d, sign * f(d), fd_new)
    x = (a + b) / 2
    return x, f(x)


def _tangent_coordinates(gamma, t_center, t):
    """Coordinates of γ(t) in the frame (γ'(t_c), γ(t_c)); shapes broadcast."""
    d, g = gamma.deriv(t_center), gamma.eval(t_center)
    det = d[..., 0] * g[..., 1] - d[..., 1] * g[..., 0]
    p = gamma.eval(t)
    u = (p[..., 0] * g[..., 1] - p[..., 1] * g[..., 0]) / det
    v = (d[..., 0] * p[..., 1] - d[..., 1] * p[..., 0]) / det
    return u, v


def decompose_smooth2d(domain: geo.ConvexDomain, m: int = 3, epsilon: float = 0.05,
                       j_max: int = 5, samples: int = 64) -> Decomposition:
    """Band/sector tiles with tangent-frame parallelograms for a smooth planar domain."""
    if domain.kind not in ("Disc2D", "SmoothCurve2D"):
        raise ValueError("decompose_smooth2d needs a disc or a smooth closed curve")
    if domain.kind == "Disc2D" and np.any(domain.center):
        raise ValueError("the disc must be centred at the origin")
    if not geo.contains(domain, np.zeros(2)):
        raise ValueError("the origin must lie inside the domain")
    gamma = domain.boundary()
    if gamma.curvature_bounds[0] <= 0:
        raise ValueError("boundary curvature must be strictly positive")
    if not (0 < epsilon < 0.5) or m < 0 or j_max < 0:
        raise ValueError("need m ≥ 0, 0 < epsilon < 1/2 and j_max ≥ 0")
    q = domain.scale
    tiles = []
    for j in range(j_max + 1):
        count = 2 ** (j + m)
        r0, r1 = _band(j)
        i = np.arange(1, count + 1)
        t0, t1 = (i - 1) / count, i / count
        tc = (i - 0.5) / count
        s = np.linspace(0, 1, samples + 1)
        ts = t0[:, None] + (t1 - t0)[:, None] * s[None, :]
        u, v = _tangent_coordinates(gamma, tc[:, None], ts)
        extremes = {}
        for name, vals, comp in (("u", u, 0), ("v", v, 1)):
            for maximize in (False, True):
                k = np.argmax(vals, axis=1) if maximize else np.argmin(vals, axis=1)
                step = (t1 - t0) / samples
                lo = np.maximum(ts[np.arange(count), k] - step, t0)
                hi = np.minimum(ts[np.arange(count), k] + step, t1)
                f = lambda tt, comp=comp: _tangent_coordinates(gamma, tc, tt)[comp]
                _, best = _golden_extreme(f, lo, hi, maximize)
                sampled = vals.max(axis=1) if maximize else vals.min(axis=1)
                extremes[(name, maximize)] = np.maximum(best, sampled) if maximize else np.minimum(best, sampled)
        # x = r·γ(t) has frame coordinates r·(u, v): extremes sit at r0 or r1.
        lo_u = np.minimum(r0 * extremes[("u", False)], r1 * extremes[("u", False)])
        hi_u = np.maximum(r0 * extremes[("u", True)], r1 * extremes[("u", True)])
        lo_v = np.minimum(r0 * extremes[("v", False)], r1 * extremes[("v", False)])
        hi_v = np.maximum(r0 * extremes[("v", True)], r1 * extremes[("v", True)])
        du, dv = epsilon * 2.0 ** (-j - m), epsilon * 4.0 ** (-j)
        lo_u, hi_u, lo_v, hi_v = lo_u - du, hi_u + du, lo_v - dv, hi_v + dv
        frames = q * np.stack([gamma.deriv(tc), gamma.eval(tc)], axis=-1)  # columns
        mid = np.stack([(lo_u + hi_u) / 2, (lo_v + hi_v) / 2], -1)
        centers = np.einsum("kij,kj->ki", frames, mid)
        edges = frames * np.stack([hi_u - lo_u, hi_v - lo_v], -1)[:, None, :]
        for p in range(count):
            A = Parallelepiped(centers[p], edges[p])
            corners = A.corners()
            r_corner, _ = geo.polar_coordinates(domain, corners)
            if np.any(r_corner > 1 + 1e-12):
                raise ContainmentError(
                    j, (p + 1,), float(r_corner.max() - 1),
                    f"parallelogram A for tile (j={j}, i={p + 1}) leaves the domain "
                    f"(corner radius {r_corner.max():.4f}); increase m or decrease epsilon")
            E = PolarRegion(domain, r0, r1, float(t0[p]), float(t1[p]))
            tiles.append(Tile(j, (p + 1,), E, A))
    offsets = np.concatenate([[0], np.cumsum([2 ** (j + m) for j in range(j_max + 1)])])

    def locator(x):
        r, t = geo.polar_coordinates(domain.scaled(1 / q), x * 1.0) if q != 1 else geo.polar_coordinates(domain, x)
        j = band_level(r)
        ok = (r < 1) & (j <= j_max)
        jj = np.where(ok, j, 0)
        i = np.minimum(np.floor(t * 2.0 ** (jj + m)).astype(np.int64), 2 ** (jj + m) - 1)
        return np.where(ok, offsets[jj] + i, -1)

    dec = Decomposition(domain, "smooth2d", 8.0, j_max, tiles,
                        {"m": m, "epsilon": epsilon}, locator=locator,
                        builder=lambda J: decompose_smooth2d(domain, m, epsilon, J, samples))
    dec.measured.update(_area_constants(dec), L=2 * math.log(2) / math.log(8.0))
    m1, m2 = measure_sector_constants(dec)
    dec.measured.update(M1=m1, M2=m2)
    dec.params.update(M1=m1, M2=m2)
    for p, tile in enumerate(dec.tiles):
        dec.tiles[p] = replace(tile, G=_sector_for(dec, tile, m1, m2))
    return dec


def _sector_for(dec, tile, m1, m2):
    m = dec.params["m"]
    if tile.j == 0:
        return SectorRegion(dec.domain, 0.0, 0.0, 1.0)
    count = 2 ** (tile.j + m)
    tc = (tile.index[0] - 0.5) / count
    r_min = max(1 - 4.0 ** (m1 - tile.j), 0.0)
    return SectorRegion(dec.domain, r_min, tc - m2 / count, tc + m2 / count)


def _lens_boundary_params(domain, z, t_z, iters=60):
    """Parameters t± of the two corners of D ∩ (2z − D) on the boundary of D."""
    gamma, q = domain.boundary(), domain.scale

    def outside(t):
        r, _ = geo.polar_coordinates(domain, 2 * z - q * gamma.eval(t))
        return r >= 1

    out = []
    for direction in (-1.0, 1.0):
        step = np.full(len(z), 2.0 ** -14)
        found = np.zeros(len(z), dtype=bool)
        for _ in range(16):
            hit = outside(t_z + direction * step) & ~found
            found |= hit
            step = np.where(found, step, step * 2)
            if found.all():
                break
        lo, hi = np.where(found, step / 2, 0.0), np.where(found, step, 0.5)
        lo = np.where(step <= 2.0 ** -14, 0.0, lo)
        for _ in range(iters):
            mid = (lo + hi) / 2
            o = outside(t_z + direction * mid)
            hi, lo = np.where(o, mid, hi), np.where(o, lo, mid)
        out.append(t_z + direction * hi)
    return out[0], out[1]


def lens_samples(domain, z, per_arc=12, interior=12, rng=None):
    """Points x ∈ closure(D ∩ (2z − D)) for each z: boundary arcs plus interior points.

    Returns an array (len(z), K, 2) for smooth planar domains.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    gamma, q = domain.boundary(), domain.scale
    _, t_z = geo.polar_coordinates(domain, z)
    t_lo, t_hi = _lens_boundary_params(domain, z, t_z)
    s = np.linspace(0, 1, per_arc)
    ts = t_lo[:, None] + (t_hi - t_lo)[:, None] * s[None, :]
    arc = q * gamma.eval(ts)
    mirror = 2 * z[:, None, :] - arc
    boundary = np.concatenate([arc, mirror], axis=1)
    pick = rng.integers(0, boundary.shape[1], size=(len(z), interior))
    lam = rng.random((len(z), interior, 1))
    inner = z[:, None, :] + lam * (np.take_along_axis(boundary, pick[..., None], axis=1) - z[:, None, :])
    return np.concatenate([boundary, inner], axis=1)


def measure_sector_constants(dec: Decomposition, z_per_axis: int = 3, seed: int = 0):
    """Measured (M1, M2) for the sector regions G of a smooth decomposition.

    M1 is the largest drop ``j − j(x)`` and M2 the largest angular spread
    ``|t(x) − t_c|·2^(j+m)`` over pairs x, y = 2z − x with z in a tile of level j ≥ 1.
    """
    rng = np.random.default_rng(seed)
    m = dec.params["m"]
    zs, js, tcs = [], [], []
    for tile in dec.tiles:
        if tile.j == 0:
            continue
        E = tile.E
        r = np.linspace(E.r0, E.r1, z_per_axis)
        t = np.linspace(E.t0, E.t1, z_per_axis)
        R, Tt = np.meshgrid(r, t, indexing="ij")
        z = E.points(R, Tt).reshape(-1, 2)
        zs.append(z)
        js.append(np.full(len(z), tile.j))
        tcs.append(np.full(len(z), (E.t0 + E.t1) / 2))
    if not zs:
        return 0, 0.0
    z, j, tc = np.concatenate(zs), np.concatenate(js), np.concatenate(tcs)
    m1, m2 = 0, 0.0
    for start in range(0, len(z), 4096):
        sl = slice(start, start + 4096)
        x = lens_samples(dec.domain, z[sl], rng=rng)
        r, t = geo.polar_coordinates(dec.domain, x.reshape(-1, 2))
        r, t = r.reshape(x.shape[:2]), t.reshape(x.shape[:2])
        lvl = band_level(np.minimum(r, 1 - 1e-15))
        m1 = max(m1, int((j[sl, None] - lvl).max()))
        dt = np.abs(np.mod(t - tc[sl, None] + 0.5, 1.0) - 0.5)
        m2 = max(m2, float((dt * 2.0 ** (j[sl, None] + m)).max()))
    return max(m1, 0), math.ceil(m2 * 4 + 1e-9) / 4


# --------------------------------------------------------------------------
# Convex polygons
# --------------------------------------------------------------------------

def _cube_interval(i):
    return (0.0, 0.5) if i == 0 else (1 - 2.0 ** (-i), 1 - 2.0 ** (-i - 1))


@dataclass(frozen=True, eq=False)
class PolygonCharts:
    """Bilinear charts B_k : [0,1]^2 → quadrilateral (c, m_k, v_k, m_{k-1})."""

    vertices: np.ndarray
    center: np.ndarray

    @property
    def count(self):
        return len(self.vertices)

    @cached_property
    def midpoints(self):
        return (self.vertices + np.roll(self.vertices, -1, axis=0)) / 2

    def coefficients(self, k):
        c, v = self.center, self.vertices[k]
        mk, mprev = self.midpoints[k], self.midpoints[k - 1]
        return c, mk - c, mprev - c, v - mk - mprev + c

    def map(self, k, u, v):
        c, eu, ev, d = self.coefficients(k)
        u, v = np.asarray(u, dtype=float)[..., None], np.asarray(v, dtype=float)[..., None]
        return c + u * eu + v * ev + u * v * d

    def jacobian(self, k, u, v):
        _, eu, ev, d = self.coefficients(k)
        return np.stack([eu + v * d, ev + u * d], axis=-1)

    def quad(self, k, u0, u1, v0, v1):
        pts = self.map(k, np.array([u0, u1, u1, u0]), np.array([v0, v0, v1, v1]))
        return pts if _signed_area(pts) > 0 else pts[::-1]

    def invert(self, k, x, iters=40):
        c, eu, ev, d = self.coefficients(k)
        uv = np.full(x.shape, 0.5)
        for _ in range(iters):
            u, v = uv[..., 0:1], uv[..., 1:2]
            res = c + u * eu + v * ev + u * v * d - x
            ju, jv = eu + v * d, ev + u * d
            det = ju[..., 0] * jv[..., 1] - ju[..., 1] * jv[..., 0]
            det = np.where(np.abs(det) > 1e-300, det, 1e-300)
            du = (res[..., 0] * jv[..., 1] - res[..., 1] * jv[..., 0]) / det
            dv = (ju[..., 0] * res[..., 1] - ju[..., 1] * res[..., 0]) / det
            uv = np.clip(uv - np.stack([du, dv], -1), -2.0, 3.0)
        return uv

    def scaled(self, q):
        return PolygonCharts(self.vertices * q, self.center * q)


def _signed_area(pts):
    return geo.polygon_area(pts)


def _frame_box(frame, origin, points):
    coords = (points - origin) @ np.linalg.inv(frame).T
    return coords.min(axis=0), coords.max(axis=0)


def _inflate_cube(lo, hi, outward):
    """Dyadic-layer inflation: the side facing the boundary grows by a third."""
    L = hi - lo
    if outward > 0:
        return lo - L, hi + L / 3
    return lo - L / 3, hi + L


def _parallelogram(frame, origin, lo, hi):
    mid = (lo + hi) / 2
    return Parallelepiped(origin + frame @ mid, frame * (hi - lo)[None, :])


def _fit_inside(domain, build, max_halvings=6):
    """Build a parallelogram with inflation factor s, halving s until A ⊂ domain."""
    s = 1.0
    for _ in range(max_halvings + 1):
        A = build(s)
        corners = A.corners()
        if np.all(_closed_polygon_contains(domain, corners)):
            return A, s
        s /= 2
    raise ValueError("could not fit parallelogram inside the polygon; the chart is too distorted")


def _closed_polygon_contains(domain, x, tol=1e-12):
    v = domain.eff_vertices
    e = np.roll(v, -1, axis=0) - v
    rel = x[..., None, :] - v
    scale = np.abs(v).max()
    return np.all(e[:, 0] * rel[..., 1] - e[:, 1] * rel[..., 0] >= -tol * scale**2, axis=-1)


def decompose_polygon2d(domain: geo.ConvexDomain, j_max: int = 6) -> Decomposition:
    """Corner, edge and central tiles pulled back from the square through vertex charts."""
    if domain.kind != "Polygon2D":
        raise ValueError("decompose_polygon2d needs a convex polygon")
    v = domain.eff_vertices
    geo.polygon(v)  # re-validates strict convexity
    cen = wt._centroid(domain)
    charts = PolygonCharts(v, cen)
    V = charts.count
    tiles = []
    inflation = []

    # central tile
    quads = np.array([charts.quad(k, 0, 0.5, 0, 0.5) for k in range(V)])
    E = PolygonRegion(quads)
    pts = quads.reshape(-1, 2)
    edges_dir = np.roll(v, -1, axis=0) - v
    frames = [np.stack([charts.midpoints[k] - cen, charts.midpoints[k - 1] - cen], -1) for k in range(V)]
    frames += [np.stack([edges_dir[k], edges_dir[l]], -1) for k in range(V) for l in range(k + 1, V)]
    best = None
    for frame in frames:
        if abs(np.linalg.det(frame)) < 1e-12 * np.abs(frame).max() ** 2:
            continue
        lo, hi = _frame_box(frame, cen, pts)
        try:
            A, s = _fit_inside(domain, lambda s, f=frame, lo=lo, hi=hi: _parallelogram(
                f, cen, lo - s * (hi - lo) / 6, hi + s * (hi - lo) / 6))
        except ValueError:
            continue
        key = (-s, A.volume)
        if best is None or key < best[0]:
            best = (key, A, s)
    split_center = best is None
    if split_center:
        # Too thin for one parallelogram: one central tile per chart instead.
        for k in range(V):
            quad = charts.quad(k, 0, 0.5, 0, 0.5)
            origin = charts.map(k, 0.25, 0.25)
            frame = charts.jacobian(k, 0.25, 0.25)
            lo, hi = _frame_box(frame, origin, quad)
            A, s = _fit_inside(domain, lambda s, f=frame, o=origin, lo=lo, hi=hi: _parallelogram(
                f, o, lo - s * (hi - lo) / 6, hi + s * (hi - lo) / 6))
            tiles.append(Tile(0, ("c", k), PolygonRegion(quad[None]), A))
            inflation.append(s)
    else:
        _, A, s = best
        tiles.append(Tile(0, ("c",), E, A))
        inflation.append(s)

    for j in range(1, j_max + 1):
        for k in range(V):
            # edge k at level j: chart k near its u = 1 side, chart k+1 near v = 1
            k1 = (k + 1) % V
            lo_i, hi_i = _cube_interval(j)
            quads = np.array([charts.quad(k, lo_i, hi_i, 0, 0.5), charts.quad(k1, 0, 0.5, lo_i, hi_i)])
            E = PolygonRegion(quads)
            frame = np.stack([(v[k1] - v[k]) / 2, charts.midpoints[k] - cen], -1)
            lo, hi = _frame_box(frame, cen, quads.reshape(-1, 2))

            def build(s, lo=lo, hi=hi, frame=frame):
                a_lo, a_hi = lo[0] - s * (hi[0] - lo[0]) / 6, hi[0] + s * (hi[0] - lo[0]) / 6
                n_lo, n_hi = _inflate_cube(lo[1], hi[1], +1)
                n_lo, n_hi = lo[1] - s * (lo[1] - n_lo), hi[1] + s * (n_hi - hi[1])
                return _parallelogram(frame, cen, np.array([a_lo, n_lo]), np.array([a_hi, n_hi]))

            A, s = _fit_inside(domain, build)
            tiles.append(Tile(j, ("e", k, j), E, A))
            inflation.append(s)
        for k in range(V):
            for i1 in range(1, j):
                i2 = j - i1
                (u0, u1), (w0, w1) = _cube_interval(i1), _cube_interval(i2)
                quad = charts.quad(k, u0, u1, w0, w1)
                E = PolygonRegion(quad[None])
                um, wm = (u0 + u1) / 2, (w0 + w1) / 2
                origin = charts.map(k, um, wm)
                frame = charts.jacobian(k, um, wm)
                lo, hi = _frame_box(frame, origin, quad)

                def build(s, lo=lo, hi=hi, frame=frame, origin=origin):
                    new = [_inflate_cube(lo[a], hi[a], +1) for a in range(2)]
                    nlo = np.array([lo[a] - s * (lo[a] - new[a][0]) for a in range(2)])
                    nhi = np.array([hi[a] + s * (new[a][1] - hi[a]) for a in range(2)])
                    return _parallelogram(frame, origin, nlo, nhi)

                A, s = _fit_inside(domain, build)
                tiles.append(Tile(j, ("v", k, i1, i2), E, A))
                inflation.append(s)

    position = {(t.j, t.index): p for p, t in enumerate(tiles)}
    base_charts = charts
    diameter = float(np.ptp(v, axis=0).max())

    def locator(x):
        out = np.full(len(x), -1, dtype=np.int64)
        pending = np.ones(len(x), dtype=bool)
        inside = np.all(_closed_polygon_contains(domain, x, tol=-1e-15), axis=-1) if len(x) else pending
        pending &= inside
        for k in range(V):
            if not pending.any():
                break
            sel = np.nonzero(pending)[0]
            uv = base_charts.invert(k, x[sel])
            with np.errstate(invalid="ignore"):
                resid = np.linalg.norm(base_charts.map(k, uv[:, 0], uv[:, 1]) - x[sel], axis=-1)
                ok = np.all((uv >= -1e-12) & (uv <= 1 + 1e-12), axis=-1) & (resid < 1e-9 * diameter)
            uv = np.clip(uv[ok], 0, 1 - 1e-16)
            ids = sel[ok]
            iu = np.where(uv[:, 0] < 0.5, 0, dyadic_index(uv[:, 0]))
            iv = np.where(uv[:, 1] < 0.5, 0, dyadic_index(uv[:, 1]))
            for n_, (a_, b_, p_) in enumerate(zip(iu, iv, ids)):
                a_, b_ = int(a_), int(b_)
                if a_ == 0 and b_ == 0:
                    key = (0, ("c", k)) if split_center else (0, ("c",))
                elif b_ == 0:
                    key = (a_, ("e", k, a_))
                elif a_ == 0:
                    key = (b_, ("e", (k - 1) % V, b_))
                else:
                    key = (a_ + b_, ("v", k, a_, b_))
                out[p_] = position.get(key, -1)
            pending[ids] = False
        return out

    dec = Decomposition(domain, "polygon2d", 2.0, j_max, tiles,
                        {"epsilon": None, "vertices": V, "min_inflation": float(min(inflation)),
                         "M1": 2}, locator=locator,
                        builder=lambda J: decompose_polygon2d(domain, J))
    dec.measured.update(_area_constants(dec), L=2.0)
    return dec


# --------------------------------------------------------------------------
# Shared measurements
# --------------------------------------------------------------------------

def _area_constants(dec):
    scaled = np.array([t.E.area() * dec.a ** t.j for t in dec.tiles])
    return {"c1": float(scaled.min()), "c2": float(scaled.max())}


def _shrunk(points, factor=1e-9):
    c = points.mean(axis=-2, keepdims=True)
    return c + (points - c) * (1 - factor)


def overlap_pairs(dec: Decomposition, rel_tol: float = 1e-9) -> list[tuple[int, int]]:
    """Ordered pairs (p, q) of tiles whose open parallelepipeds intersect."""
    tiles = dec.tiles
    if dec.domain.dimension == 2:
        polys = shapely.polygons(np.array([_shrunk(t.A.corners(), rel_tol) for t in tiles]))
        tree = shapely.STRtree(polys)
        a, b = tree.query(polys, predicate="intersects")
        return list(zip(a.tolist(), b.tolist()))
    lo = np.array([t.A.bounds()[0] for t in tiles])
    hi = np.array([t.A.bounds()[1] for t in tiles])
    width = hi - lo
    tol = rel_tol * width
    hit = np.all((lo[:, None, :] + tol[:, None, :] < hi[None, :, :]) &
                 (lo[None, :, :] + tol[None, :, :] < hi[:, None, :]), axis=-1)
    a, b = np.nonzero(hit)
    return list(zip(a.tolist(), b.tolist()))


def beta_index(dec: Decomposition, first: tuple, second: tuple) -> tuple:
    """Index (β, γ) of a doubled tile 2E_β^γ meeting E_j^i + E_k^l.

    ``first`` and ``second`` are (j, index) keys.  Boxes use the per-axis
    closed form; other decompositions locate the sum of the two centroids.
    """
    t1 = dec.tiles[dec.position[first]]
    t2 = dec.tiles[dec.position[second]]
    if dec.kind == "box":
        beta = tuple(box_beta_1d(i, k) for i, k in zip(t1.index, t2.index))
        level = sum(abs(b) for b in beta)
        if level > dec.j_max:
            raise ValueError("truncation exceeded")
        return level, beta
    mid = (t1.E.centroid() + t2.E.centroid()) / 2
    p = int(dec.locate(mid[None])[0])
    if p < 0:
        raise ValueError("truncation exceeded")
    target = dec.tiles[p]
    return target.j, target.index


# --------------------------------------------------------------------------
# Admissibility report
# --------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    j_max: int
    constants: dict
    by_truncation: dict
    stable: dict
    details: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return all(np.isfinite(v) for v in self.constants.values())

    @property
    def admissible(self) -> bool:
        return self.finite and all(self.stable.values())


def _hull_points(tile, resolution):
    E = tile.E
    if isinstance(E, BoxRegion):
        return E.hull_points()
    return E.hull_points(resolution)


def _doubled_outlines(dec, resolution):
    return [2 * t.E.outline(resolution) for t in dec.tiles]


def _rotation_classes(dec):
    """Representative tiles up to the 2^m-fold rotation symmetry of a centred disc."""
    if dec.kind != "smooth2d" or dec.domain.kind != "Disc2D":
        return np.arange(len(dec.tiles)), 1
    m = dec.params["m"]
    fold = 2 ** m
    reps = [p for p, t in enumerate(dec.tiles) if (t.index[0] - 1) < 2 ** (t.j + m) // fold]
    return np.array(reps), fold


def sumset_hits(dec: Decomposition, resolution: int = 8, batch: int = 8192):
    """Triples (p, q, r) with (E_p + E_q) ∩ 2E_r ≠ ∅.

    Boxes use exact interval arithmetic.  Planar tiles use the convex hull of
    E_p + E_q (an over-approximation, so counts are upper bounds) against the
    outline of 2E_r.  For the centred disc only rotation representatives p are
    enumerated.
    """
    tiles = dec.tiles
    count = len(tiles)
    if dec.kind == "box":
        lo = np.array([t.E.lo for t in tiles])
        hi = np.array([t.E.hi for t in tiles])
        width = (hi - lo).min()
        tol = 1e-12 * max(1.0, np.abs(hi).max())
        ps, qs, rs = [], [], []
        for p in range(count):
            s_lo, s_hi = lo[p] + lo, hi[p] + hi  # (q, n)
            hit = np.all((np.maximum(s_lo[:, None, :], 2 * lo[None]) + tol
                          < np.minimum(s_hi[:, None, :], 2 * hi[None])), axis=-1)
            q, r = np.nonzero(hit)
            ps.append(np.full(len(q), p)), qs.append(q), rs.append(r)
        del width
        return np.concatenate(ps), np.concatenate(qs), np.concatenate(rs)
    reps, _ = _rotation_classes(dec)
    hulls = []
    for t in tiles:
        pts = _hull_points(t, resolution)
        hull = shapely.convex_hull(shapely.multipoints(pts))
        hulls.append(np.asarray(hull.exterior.coords)[:-1])
    size = max(len(h) for h in hulls)
    padded = np.array([np.vstack([h, np.repeat(h[-1:], size - len(h), 0)]) for h in hulls])
    doubled = np.array([shapely.polygons(_shrunk(o, 1e-9)) for o in _doubled_outlines(dec, 4 * resolution)])
    tree = shapely.STRtree(doubled)
    pairs_p = np.repeat(reps, count)
    pairs_q = np.tile(np.arange(count), len(reps))
    ps, qs, rs = [], [], []
    for start in range(0, len(pairs_p), batch):
        bp, bq = pairs_p[start:start + batch], pairs_q[start:start + batch]
        sums = (padded[bp][:, :, None, :] + padded[bq][:, None, :, :]).reshape(len(bp), -1, 2)
        hull = shapely.convex_hull(shapely.multipoints(_shrunk(sums, 1e-9)))
        a, r = tree.query(hull, predicate="intersects")
        ps.append(bp[a]), qs.append(bq[a]), rs.append(r)
    return np.concatenate(ps), np.concatenate(qs), np.concatenate(rs)


def _sumset_constant(dec, hits, levels, j_cap):
    p, q, r = hits
    keep = (levels[p] <= j_cap) & (levels[q] <= j_cap) & (levels[r] <= j_cap)
    if not keep.any():
        return 0
    key = p[keep].astype(np.int64) * len(levels) + q[keep]
    return int(np.bincount(key).max())


def _weight_levels(weight, pts, a):
    """Continuous level −log_a ω_{½Ω}; +inf where ω vanishes."""
    w = wt.omega_half(weight, pts)
    with np.errstate(divide="ignore"):
        return np.where(w > 0, -np.log(np.maximum(w, 1e-300)) / math.log(a), np.inf)


def _a_samples(A, per_axis=5):
    n = A.dimension
    g = np.linspace(-0.5, 0.5, per_axis)
    ref = np.stack(np.meshgrid(*([g] * n), indexing="ij"), -1).reshape(-1, n)
    return A.from_reference(ref)


def _count_bound_polar(dec, m1, m2):
    """(iii.b) ratio max #{l : G_{j,i} ∩ E_k^l ≠ ∅} / n_{k−j+M1} for sector regions."""
    m, J = dec.params["m"], dec.j_max
    n = lambda k: 2 ** (k + m)
    worst = np.zeros(J + 1)
    for t in dec.tiles:
        G = t.G
        for k in range(J + 1):
            r_lo, r_hi = _band(k)
            if r_hi <= G.r_min:
                continue
            if G.t_hi - G.t_lo >= 1:
                c = n(k)
            else:
                c = min(n(k), math.ceil(G.t_hi * n(k)) - math.floor(G.t_lo * n(k)))
            ratio = c / n(max(k - t.j + m1, 0))
            worst[t.j] = max(worst[t.j], ratio)
    return float(worst.max()), worst


def _count_bound_box(dec, m1):
    """Exact (iii.b) ratio for the box decomposition, via per-axis index histograms."""
    n_dim, J = dec.params["n"], dec.j_max
    levels = np.array(dec.counts)
    axis_idx = np.arange(-J, J + 1)
    worst = 0.0
    per_level = np.zeros(J + 1)
    lo_e = np.array([interval_E(i)[0] for i in axis_idx])
    hi_e = np.array([interval_E(i)[1] for i in axis_idx])
    for t in dec.tiles:
        hist = np.zeros(J + 1, dtype=np.int64)
        hist[0] = 1
        for a_, i in enumerate(t.index):
            g_lo, g_hi = _box_g_interval(i)
            ok = (np.maximum(lo_e, g_lo) < np.minimum(hi_e, g_hi))
            axis_hist = np.bincount(np.abs(axis_idx[ok]), minlength=J + 1)[: J + 1]
            hist = np.convolve(hist, axis_hist)[: J + 1]
        for k in range(J + 1):
            if hist[k] == 0:
                continue
            ref = max(k - t.j + m1, 0)
            denom = levels[ref] if ref <= J else _box_level_count(n_dim, ref)
            ratio = hist[k] / denom
            worst = max(worst, ratio)
            per_level[t.j] = max(per_level[t.j], ratio)
    return float(worst), per_level


def _box_level_count(n, j):
    return len(box_indices(n, j)) - len(box_indices(n, j - 1)) if j > 0 else 1


def _sector_checks(dec, weight, samples, rng):
    """Random midpoint pairs: are x, y ∈ G and how far below j do their levels drop."""
    tiles = dec.tiles
    picks = rng.integers(0, len(tiles), size=samples)
    outside, drop = 0, -np.inf
    for p in picks:
        t = tiles[p]
        z = t.E.sample_points(5)
        z = z[rng.integers(0, len(z))]
        # nudge into the open tile
        z = z + 1e-9 * (t.E.centroid() - z)
        x = _random_lens_point(dec.domain, z, rng)
        y = 2 * z - x
        for pt in (x, y):
            if t.G is not None and not bool(t.G.contains(pt[None])[0]):
                outside += 1
        loc = dec.locate(np.array([x, y]))
        lv = [tiles[q].j if q >= 0 else dec.j_max + 1 for q in loc]
        drop = max(drop, t.j - min(lv))
    return outside, drop


def _random_lens_point(domain, z, rng):
    """A uniform-ish point of Ω ∩ (2z − Ω) by rejection from Ω's bounding box."""
    lo, hi = domain.bounding_box()
    for _ in range(200):
        pts = lo + (hi - lo) * rng.random((4096, domain.dimension))
        ok = geo.contains(domain, pts) & geo.contains(domain, 2 * z - pts)
        if ok.any():
            return pts[np.argmax(ok)]
    return z.copy()


def _measure_report(dec, weight, j_cap, hits, neighbor_pairs, resolution):
    a = dec.a
    tiles = [t for t in dec.tiles if t.j <= j_cap]
    levels = np.array([t.j for t in dec.tiles])
    out = {}
    scaled = np.array([t.E.area() * a ** t.j for t in tiles])
    out["c1"], out["c2"] = float(scaled.min()), float(scaled.max())
    m_e, m_a = 0.0, 0.0
    j0 = 1
    for t in tiles:
        lv = _weight_levels(weight, t.E.sample_points(7), a)
        m_e = max(m_e, float(np.max(np.abs(lv - t.j))))
        if t.j >= j0:
            corners = _weight_levels(weight, t.A.corners(), a)
            inner = _weight_levels(weight, _a_samples(t.A), a)
            m_a = max(m_a, float(corners.max() - t.j), float(t.j - inner.min()))
    out["M_E"], out["M"] = m_e, m_a
    out["C_sum"] = _sumset_constant(dec, hits, levels, j_cap)
    p, q = neighbor_pairs
    keep = (levels[p] <= j_cap) & (levels[q] <= j_cap)
    out["C_overlap"] = int(np.bincount(p[keep]).max())
    eps, eps_all = np.inf, np.inf
    for t in tiles:
        if isinstance(t.E, BoxRegion):
            pts = t.E.hull_points()
        else:
            pts = t.E.outline(4 * resolution)
        margin = 0.5 - float(np.abs(t.T(pts)).max())
        eps_all = min(eps_all, margin)
        if t.j >= j0:
            eps = min(eps, margin)
    out["epsilon"], out["epsilon_all"] = eps, eps_all
    c_img = 0.0
    for pp, qq in zip(p[keep], q[keep]):
        c_img = max(c_img, 2 * float(np.abs(dec.tiles[pp].T(dec.tiles[qq].A.corners())).max()))
    out["C_image"] = c_img
    return out


def admissibility_report(dec: Decomposition, samples: int = 200, seed: int = 0,
                         resolution: int = 8, weight=None, tolerance: float = 0.10) -> AdmissibilityReport:
    """Measured constants of properties (i)–(viii) at truncations j_max−2, j_max−1, j_max.

    Counts computed once at ``j_max`` are restricted to smaller truncations.
    A constant is stable when its spread across the three truncations is
    within ``tolerance`` relative to its largest value.
    """
    rng = np.random.default_rng(seed)
    weight = wt.normalize(dec.domain, base=dec.a, seed=seed) if weight is None else weight
    hits = sumset_hits(dec, resolution)
    pairs = overlap_pairs(dec)
    p = np.array([a for a, _ in pairs])
    q = np.array([b for _, b in pairs])
    J = dec.j_max
    caps = [c for c in (J - 2, J - 1, J) if c >= 0]
    by_trunc = {c: _measure_report(dec, weight, c, hits, (p, q), resolution) for c in caps}
    # (iii): region G
    if dec.kind == "smooth2d":
        m1, m2 = dec.params["M1"], dec.params["M2"]
        ratio, per_level = _count_bound_polar(dec, m1, m2)
    elif dec.kind == "box":
        m1 = dec.params["M1"]
        ratio, per_level = _count_bound_box(dec, m1)
    else:
        m1, ratio, per_level = None, None, None
    outside, drop = _sector_checks(dec, weight, samples, rng)
    if m1 is None:
        m1 = max(int(drop), 0)
        dec.params["M1"] = m1
        ratio, per_level = _count_bound_sampled(dec, m1, samples, rng)
    for c in caps:
        by_trunc[c]["M1"] = m1
        by_trunc[c]["C_region"] = float(np.max(per_level[: c + 1]))
    constants = dict(by_trunc[J])
    constants["C_region"] = float(ratio)
    stable = {}
    for key in by_trunc[J]:
        vals = np.array([by_trunc[c][key] for c in caps], dtype=float)
        top = np.max(np.abs(vals))
        stable[key] = bool(np.all(np.isfinite(vals)) and (top == 0 or np.ptp(vals) <= tolerance * top))
    details = {"G_violations": outside, "sampled_level_drop": float(drop),
               "pairs_checked": int(len(np.unique(hits[0]))) * len(dec.tiles)}
    return AdmissibilityReport(J, constants, by_trunc, stable, details)


def _count_bound_sampled(dec, m1, samples, rng):
    """Sampled region G for polygons: tiles hit by lens samples of each tile's midpoints."""
    J = dec.j_max
    counts = np.array(dec.counts)
    per_level = np.zeros(J + 1)
    for p, t in enumerate(dec.tiles):
        z = t.E.sample_points(3)
        xs = []
        for zz in z:
            zz = zz + 1e-9 * (t.E.centroid() - zz)
            for _ in range(2):
                xs.append(_random_lens_point(dec.domain, zz, rng))
            xs.extend([2 * zz - x for x in xs[-2:]])
        loc = dec.locate(np.array(xs))
        loc = loc[loc >= 0]
        lv = np.array([dec.tiles[q].j for q in np.unique(loc)])
        for k in np.unique(lv):
            ref = min(max(k - t.j + m1, 0), J)
            per_level[t.j] = max(per_level[t.j], (lv == k).sum() / counts[ref])
    return float(per_level.max()), per_level
