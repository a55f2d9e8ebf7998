"""Smooth partitions of unity subordinate to the parallelepipeds A of a decomposition.

Members live on the Fourier side.  The raw family is ``φ̂_p = φ̂ ∘ T_p`` for a
tensor bump ``φ̂``; the normalised family divides by the sum of all raw
members, and the squared family is ``a^j (φ̂_p ∗ φ̂_p)``.

Space-side quantities (L¹ norms, tile convolutions) are computed on a
per-member reference grid in the coordinates ``u = T_p x``: every L^p norm
transforms by a Jacobian power under affine changes of variables, and the
reference grid only has to resolve the shapes of neighbouring members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
import shapely
from scipy import fft as sfft
from scipy import integrate, interpolate

from . import decomposition as dc
from . import geometry as geo
from . import weight as wt


# --------------------------------------------------------------------------
# Mollifier and base bump
# --------------------------------------------------------------------------

def _mollifier_unnormalized(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1
    safe = np.where(inside, t, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe**2)), 0.0)


@dataclass(frozen=True)
class _MollifierTable:
    nodes: np.ndarray
    cdf: np.ndarray
    mass: float

    @cached_property
    def spline(self):
        return interpolate.CubicHermiteSpline(self.nodes, self.cdf, self.density(self.nodes))

    def density(self, t):
        return _mollifier_unnormalized(t) / self.mass

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        inner = self.spline(np.clip(t, -1.0, 1.0))
        return np.where(t <= -1, 0.0, np.where(t >= 1, 1.0, inner))


def _build_mollifier(points: int = 4097) -> _MollifierTable:
    nodes = np.linspace(-1.0, 1.0, points)
    gl_x, gl_w = np.polynomial.legendre.leggauss(12)
    left, right = nodes[:-1], nodes[1:]
    mid, half = (left + right) / 2, (right - left) / 2
    pieces = (_mollifier_unnormalized(mid[:, None] + half[:, None] * gl_x) * gl_w).sum(axis=1) * half
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    mass = cdf[-1]
    return _MollifierTable(nodes, cdf / mass, float(mass))


MOLLIFIER = _build_mollifier()


@dataclass(frozen=True)
class BumpProfile:
    """Tensor bump: 1 on (−(1−ε)/2, (1−ε)/2)^n, supported in (−½, ½)^n.

    The 1-D factor is the indicator of (−h, h), h = (1 − ε/2)/2, convolved with
    the standard mollifier of half-width w = ε/4.
    """

    epsilon: float
    dimension: int

    @property
    def half(self) -> float:
        return (1 - self.epsilon / 2) / 2

    @property
    def width(self) -> float:
        return self.epsilon / 4

    def profile(self, u):
        u = np.asarray(u, dtype=float)
        w, h = self.width, self.half
        return MOLLIFIER.cumulative((u + h) / w) - MOLLIFIER.cumulative((u - h) / w)

    def profile_derivative(self, u):
        u = np.asarray(u, dtype=float)
        w, h = self.width, self.half
        return (MOLLIFIER.density((u + h) / w) - MOLLIFIER.density((u - h) / w)) / w

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.prod(self.profile(u), axis=-1)

    @cached_property
    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        grid = np.linspace(-0.5, 0.5, 2049)
        return grid, self.profile(grid)

    @cached_property
    def _self_convolution_table(self):
        # f ∗ f on [−1, 1] by the trapezoid rule on a fine grid; f vanishes at ±½.
        count = 2**14 + 1
        grid = np.linspace(-0.5, 0.5, count)
        step = grid[1] - grid[0]
        f = self.profile(grid)
        conv = np.convolve(f, f) * step
        s = np.linspace(-1.0, 1.0, 2 * count - 1)
        return interpolate.CubicSpline(s, conv)

    def self_convolution_1d(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(np.abs(s) < 1, self._self_convolution_table(np.clip(s, -1, 1)), 0.0)

    def self_convolution(self, s):
        return np.prod(self.self_convolution_1d(s), axis=-1)

    @cached_property
    def square_integral_1d(self) -> float:
        return float(integrate.quad(lambda u: self.profile(u) ** 2, -0.5, 0.5, limit=200,
                                    points=[-self.half, self.half])[0])

    def derivative_sup(self, finite_difference: bool = False) -> float:
        """max over γ ∈ {0,1}^n of ‖∂^γ φ̂‖_∞ (tensor structure: ‖f'‖_∞^{|γ|})."""
        grid = np.linspace(-0.5, 0.5, 200_001)
        if finite_difference:
            d1 = np.abs(np.diff(self.profile(grid)) / (grid[1] - grid[0])).max()
        else:
            d1 = np.abs(self.profile_derivative(grid)).max()
        return float(max(1.0, d1) ** self.dimension)

    def l1_bound(self) -> float:
        """Bound for ‖φ‖_{L¹} from the sup of the mixed derivatives.

        ‖φ‖₁² ≤ π^n Σ_γ ‖ξ^γ φ‖₂² ≤ π^n Σ_γ ‖∂^γ φ̂‖₂² ≤ (2π)^n C²
        with C = max_γ ‖∂^γ φ̂‖_∞ and φ̂ supported in a unit cube.
        """
        return math.sqrt((2 * math.pi) ** self.dimension) * self.derivative_sup()

    def l1_bound_l2(self) -> float:
        """Sharper bound π^{n/2}(Σ_γ (2π)^{-2|γ|}‖∂^γ φ̂‖₂²)^{1/2} for the normalised transform."""
        g = np.linspace(-0.5, 0.5, 200_001)
        step = g[1] - g[0]
        f2 = float((self.profile(g) ** 2).sum() * step)
        d2 = float((self.profile_derivative(g) ** 2).sum() * step) / (2 * math.pi) ** 2
        return math.pi ** (self.dimension / 2) * math.sqrt((f2 + d2) ** self.dimension)


def build_base_bump(epsilon: float, n: int) -> BumpProfile:
    if not (0 < epsilon < 0.5):
        raise ValueError("bump epsilon must lie in (0, 1/2)")
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return BumpProfile(float(epsilon), int(n))


# --------------------------------------------------------------------------
# Families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseSamples:
    """Nonzero member values at points: value[k] belongs to (point[k], member[k])."""

    point: np.ndarray
    member: np.ndarray
    value: np.ndarray
    count: int

    def total(self) -> np.ndarray:
        return np.bincount(self.point, weights=self.value, minlength=self.count)

    def for_member(self, p: int):
        sel = self.member == p
        return self.point[sel], self.value[sel]


@dataclass(eq=False)
class PartitionOfUnity:
    decomposition: dc.Decomposition
    bump: BumpProfile
    kind: str = "normalized"
    j_max: int | None = None
    l1_norms: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.j_max is None:
            self.j_max = self.decomposition.j_max

    @property
    def tiles(self):
        return self.decomposition.tiles

    @cached_property
    def member_count(self) -> int:
        """Members are the tiles with j ≤ j_max; finer tiles only enter denominators."""
        return int(sum(1 for t in self.tiles if t.j <= self.j_max))

    @cached_property
    def _maps(self):
        return self.decomposition.reference_maps

    def raw_at(self, p: int, x) -> np.ndarray:
        return self.bump(self.tiles[p].T(x))

    def candidates(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Pairs (point, tile) with x in the open parallelepiped A of that tile."""
        return parallelepiped_hits(self.decomposition, np.atleast_2d(x))

    def raw_samples(self, x) -> SparseSamples:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        pt, tile = self.candidates(x)
        centers, inv = self._maps
        u = np.einsum("kij,kj->ki", inv[tile], x[pt] - centers[tile])
        val = self.bump(u)
        keep = val > 0
        return SparseSamples(pt[keep], tile[keep], val[keep], len(x))

    def denominator(self, x) -> np.ndarray:
        return self.raw_samples(x).total()

    def samples(self, x) -> SparseSamples:
        """Member values at points (normalised or squared family)."""
        if self.kind == "squared":
            return squared_samples(self, x)
        raw = self.raw_samples(x)
        denom = raw.total()
        keep = raw.member < self.member_count
        value = raw.value[keep] / denom[raw.point[keep]]
        return SparseSamples(raw.point[keep], raw.member[keep], value, raw.count)

    def member_at(self, p: int, x) -> np.ndarray:
        s = self.samples(x)
        out = np.zeros(s.count)
        pt, val = s.for_member(p)
        np.add.at(out, pt, val)
        return out

    def scale_of(self, p: int) -> int:
        return self.tiles[p].j


def parallelepiped_hits(dec: dc.Decomposition, x: np.ndarray):
    """All (point index, tile index) pairs with the point inside the tile's open A."""
    tiles = dec.tiles
    centers, inv = dec.reference_maps
    if dec.domain.dimension == 2:
        tree = _a_tree(dec)
        pt, tile = tree.query(shapely.points(x), predicate="intersects")
    else:
        lo = np.array([t.A.bounds()[0] for t in tiles])
        hi = np.array([t.A.bounds()[1] for t in tiles])
        pts, tls = [], []
        for start in range(0, len(x), 4096):
            xs = x[start:start + 4096]
            ok = np.all((xs[:, None, :] > lo[None]) & (xs[:, None, :] < hi[None]), axis=-1)
            a, b = np.nonzero(ok)
            pts.append(a + start), tls.append(b)
        pt, tile = np.concatenate(pts), np.concatenate(tls)
    u = np.einsum("kij,kj->ki", inv[tile], x[pt] - centers[tile])
    inside = np.all(np.abs(u) < 0.5, axis=-1)
    order = np.lexsort((tile[inside], pt[inside]))
    return pt[inside][order], tile[inside][order]


_TREES: dict = {}


def _a_tree(dec):
    key = id(dec)
    hit = _TREES.get(key)
    if hit is None or hit[0] is not dec:
        polys = shapely.polygons(np.array([t.A.corners() for t in dec.tiles]))
        hit = (dec, shapely.STRtree(polys))
        _TREES[key] = hit
    return hit[1]


def squared_samples(pou: PartitionOfUnity, x) -> SparseSamples:
    """a^j m(A)(φ̂ ∗ φ̂)(S(x − 2c)), nonzero on the doubled parallelepipeds 2A."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    dec = pou.decomposition
    doubled = dec.scaled(2.0)
    pt, tile = parallelepiped_hits(doubled, x)
    centers, inv = dec.reference_maps
    s = np.einsum("kij,kj->ki", inv[tile], x[pt] - 2 * centers[tile])
    vol = np.array([t.A.volume for t in dec.tiles])
    level = np.array([t.j for t in dec.tiles])
    val = dec.a ** level[tile] * vol[tile] * pou.bump.self_convolution(s)
    keep = (val > 0) & (tile < pou.member_count)
    return SparseSamples(pt[keep], tile[keep], val[keep], len(x))


def build_partition(dec: dc.Decomposition, bump: BumpProfile | None = None,
                    grid: int = 256, check: bool = True, weight=None) -> PartitionOfUnity:
    """Normalised family ψ̂_p = φ̂_p / Σ_q φ̂_q, verified on covered nodes of a global grid.

    Denominators include one extra level of tiles so that the finest members
    stay smooth; members themselves stop at ``dec.j_max``.
    """
    if bump is None:
        bump = build_base_bump(default_bump_epsilon(dec), dec.domain.dimension)
    jump = level_jump(dec)
    host = dec.extended(jump) if dec.builder is not None else dec
    pou = PartitionOfUnity(host, bump, "normalized", dec.j_max)
    pou.checks["level_jump"] = jump
    if check:
        pou.checks.update(check_partition(pou, grid, weight=weight))
    return pou


def level_jump(dec: dc.Decomposition) -> int:
    """Largest level difference between tiles whose parallelepipeds overlap (at least 1)."""
    levels = dec.levels
    jump = max(int(np.max(levels[q] - levels[p])) for p, q in enumerate(dec.neighbors) if len(q))
    return max(jump, 1)


def identity_level(pou: "PartitionOfUnity") -> int:
    """Threshold level for covered nodes: finer non-member bumps vanish on ω > a^{-level}."""
    return pou.j_max - pou.checks.get("level_jump", 1) + 1


def default_bump_epsilon(dec: dc.Decomposition) -> float:
    """Measured margin ε' of T(E) inside the reference cube, over all tiles."""
    cached = dec.measured.get("epsilon_all")
    if cached is None:
        margins = []
        for t in dec.tiles:
            pts = t.E.hull_points() if isinstance(t.E, dc.BoxRegion) else t.E.outline(64)
            margins.append(0.5 - float(np.abs(t.T(pts)).max()))
        cached = float(min(margins))
        dec.measured["epsilon_all"] = cached
    return min(cached, 0.49)


def build_squared_family(pou: PartitionOfUnity) -> PartitionOfUnity:
    if pou.kind != "normalized":
        raise ValueError("the squared family is built from a normalised partition")
    sq = PartitionOfUnity(pou.decomposition, pou.bump, "squared", pou.j_max)
    sq.checks["level_jump"] = pou.checks.get("level_jump", 1)
    return sq


def global_grid(domain: geo.ConvexDomain, nodes: int):
    """Uniform grid over the bounding box of the domain (cell centres)."""
    lo, hi = domain.bounding_box()
    axes = [lo[k] + (hi[k] - lo[k]) * (np.arange(nodes) + 0.5) / nodes for k in range(domain.dimension)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, domain.dimension)
    return axes, mesh


def covered_nodes(dec: dc.Decomposition, nodes: np.ndarray, weight=None, j_max=None) -> np.ndarray:
    """Nodes of Ω with ω_{½Ω} > a^{−j_max}, inside the union of the E tiles.

    ``weight`` is the weight field of the undilated domain (scale removed).
    """
    domain = dec.domain
    j_max = dec.j_max if j_max is None else j_max
    if weight is None:
        weight = wt.normalize(domain.scaled(1 / dec.scale), base=dec.a)
    inside = geo.contains(domain, nodes)
    w = np.zeros(len(nodes))
    w[inside] = wt.omega_half(weight, nodes[inside] / dec.scale)
    ok = inside & (w > dec.a ** (-j_max))
    located = np.full(len(nodes), -1)
    located[ok] = dec.locate(nodes[ok])
    return ok & (located >= 0)


def check_partition(pou: PartitionOfUnity, grid: int = 256, weight=None) -> dict:
    dec = pou.decomposition
    _, nodes = global_grid(dec.domain, grid)
    covered = covered_nodes(dec, nodes, weight, identity_level(pou))
    x = nodes[covered]
    raw = pou.raw_samples(x)
    denom = raw.total()
    if denom.size and denom.min() < 1 - 1e-6:
        raise ValueError(f"cover defect: partition denominator {denom.min():.3g} < 1 on a covered node")
    values = raw.value / denom[raw.point]
    is_member = raw.member < pou.member_count
    total = np.bincount(raw.point[is_member], weights=values[is_member], minlength=len(x))
    centers, inv = dec.reference_maps
    u = np.einsum("kij,kj->ki", inv[raw.member], x[raw.point] - centers[raw.member])
    return {
        "covered_nodes": int(covered.sum()),
        "sum_error": float(np.abs(total - 1).max()) if len(x) else 0.0,
        "denominator_min": float(denom.min()) if len(x) else np.nan,
        "denominator_max": float(denom.max()) if len(x) else np.nan,
        "support_violations": int((np.abs(u).max(axis=-1) >= 0.5).sum()),
        "member_sup": float(values.max()) if len(values) else 0.0,
    }


def squared_envelope(pou: PartitionOfUnity, grid: int = 256, weight=None) -> dict:
    """Bounds of Σ_p ψ̂_p for the squared family over covered nodes of 2Ω."""
    sq = pou if pou.kind == "squared" else build_squared_family(pou)
    dec = sq.decomposition
    doubled = dec.scaled(2.0)
    _, nodes = global_grid(doubled.domain, grid)
    covered = covered_nodes(doubled, nodes, weight, identity_level(pou))
    total = squared_samples(sq, nodes[covered]).total()
    return {"covered_nodes": int(covered.sum()), "lower": float(total.min()),
            "upper": float(total.max())}


# --------------------------------------------------------------------------
# Reference grids and space-side norms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceGrid:
    """Fourier-side grid over [−P/2, P/2)^n in reference coordinates."""

    steps: np.ndarray
    sizes: tuple
    padding: float

    @cached_property
    def axes(self):
        return [(np.arange(n) - n // 2) * d for n, d in zip(self.sizes, self.steps)]

    @cached_property
    def support_slices(self):
        out = []
        for ax in self.axes:
            idx = np.nonzero(np.abs(ax) < 0.5)[0]
            out.append(slice(idx[0], idx[-1] + 1))
        return tuple(out)

    def support_points(self) -> np.ndarray:
        sub = [ax[s] for ax, s in zip(self.axes, self.support_slices)]
        mesh = np.stack(np.meshgrid(*sub, indexing="ij"), -1)
        return mesh

    @property
    def space_steps(self):
        return 1.0 / (np.array(self.sizes) * self.steps)


def reference_grid(sharpness, width: float, resolution: float = 3.0, padding: float = 2.0,
                   max_nodes: int = 1 << 23) -> ReferenceGrid:
    """Steps ``width/(resolution·sharpness_k)``; the space box per axis is their reciprocal."""
    sharp = np.maximum(np.asarray(sharpness, dtype=float), 1.0)
    steps = width / (resolution * sharp)
    sizes = tuple(int(sfft.next_fast_len(int(math.ceil(padding / s)))) for s in steps)
    if int(np.prod(sizes)) > max_nodes:
        raise ValueError("reference grid too large; increase the bump epsilon or lower the resolution")
    steps = padding / np.array(sizes)
    return ReferenceGrid(steps, sizes, padding)


def neighbor_maps(pou: PartitionOfUnity, p: int):
    """Maps u ↦ M u + b taking member p's reference coordinates to each neighbour's."""
    dec = pou.decomposition
    nbrs = dec.neighbors[p]
    tp = dec.tiles[p].A
    mats, offs = [], []
    for q in nbrs:
        tq = dec.tiles[q].A
        mats.append(tq.inverse @ tp.edges)
        offs.append(tq.inverse @ (tp.center - tq.center))
    return nbrs, np.array(mats), np.array(offs)


def member_reference_values(pou: PartitionOfUnity, p: int, grid: ReferenceGrid) -> np.ndarray:
    """ψ̂_p ∘ T_p^{-1} on the support block of the reference grid."""
    u = grid.support_points()
    own = pou.bump(u)
    if pou.kind == "squared":
        raise ValueError("squared members use the closed-form path")
    _, mats, offs = neighbor_maps(pou, p)
    denom = np.zeros(u.shape[:-1])
    for M, b in zip(mats, offs):
        denom += pou.bump(u @ M.T + b)
    return np.where(own > 0, own / np.where(denom > 0, denom, 1.0), 0.0)


def member_sharpness(pou: PartitionOfUnity, p: int) -> np.ndarray:
    _, mats, _ = neighbor_maps(pou, p)
    return np.abs(mats).max(axis=(0, 1))


@dataclass(frozen=True)
class SpaceNorm:
    value: float
    tail: float
    grid: tuple


def space_lp_norms(values: np.ndarray, grid: ReferenceGrid, exponents) -> list[SpaceNorm]:
    """‖F^{-1} g‖_{L^p} for each p, g sampled on the support block of a reference grid.

    The tail figure is the share of the L^p mass (or of the maximum, for p = ∞)
    at space frequencies above 0.4 of the periodic box, a proxy for truncation
    plus aliasing.
    """
    full = np.zeros(grid.sizes, dtype=complex)
    full[grid.support_slices] = values
    n = len(grid.sizes)
    # sum_k g_k e^{2πi u_k ξ} du with ξ_m = m / (N δ)
    spatial = sfft.ifftn(full, workers=1) * np.prod(grid.sizes) * np.prod(grid.steps)
    mag = np.abs(spatial)
    dxi = np.prod(grid.space_steps)
    outer = np.zeros(grid.sizes, dtype=bool)
    for k, size in enumerate(grid.sizes):
        freq = np.abs(sfft.fftfreq(size))
        shape = [1] * n
        shape[k] = size
        outer |= (freq > 0.4).reshape(shape)
    out = []
    for p in exponents:
        if math.isinf(p):
            total = float(mag.max())
            tail = float(mag[outer].max() / total) if total > 0 else 0.0
            out.append(SpaceNorm(total, tail, grid.sizes))
            continue
        powered = mag if p == 1 else mag**p
        mass = float(powered.sum() * dxi)
        tail = float(powered[outer].sum() * dxi / mass) if mass > 0 else 0.0
        out.append(SpaceNorm(mass ** (1 / p), tail, grid.sizes))
    return out


def space_lp_norm(values: np.ndarray, grid: ReferenceGrid, p: float) -> SpaceNorm:
    return space_lp_norms(values, grid, [p])[0]


def _signature(pou, p, digits=7):
    nbrs, mats, offs = neighbor_maps(pou, p)
    rows = np.round(np.concatenate([mats.reshape(len(nbrs), -1), offs], axis=1), digits) + 0.0
    rows = rows[np.lexsort(rows.T[::-1])]
    return rows.tobytes()


def l1_norm(pou: PartitionOfUnity, p: int, resolution: float = 3.0, padding: float = 2.0,
            tail_tolerance: float = 1e-3, max_nodes: int = 1 << 24) -> SpaceNorm:
    """‖ψ_p‖_{L¹} of one member (affine invariant, so computed in reference coordinates).

    The reference grid is refined by factors of 1.5 until the outer-shell mass
    falls below ``tail_tolerance``.
    """
    if pou.kind == "squared":
        dec = pou.decomposition
        t = dec.tiles[p]
        # ψ = a^j φ², nonnegative, so its L¹ norm is a^j ‖φ̂_p‖₂².
        value = dec.a ** t.j * t.A.volume * pou.bump.square_integral_1d ** dec.domain.dimension
        return SpaceNorm(value, 0.0, ())
    sharp = member_sharpness(pou, p)
    while True:
        grid = reference_grid(sharp, pou.bump.width, resolution, padding, max_nodes)
        result = space_lp_norm(member_reference_values(pou, p, grid), grid, 1.0)
        if result.tail <= tail_tolerance:
            return result
        try:
            reference_grid(sharp, pou.bump.width, resolution * 1.5, padding, max_nodes)
        except ValueError:
            raise ValueError(f"increase R or grid: relative tail {result.tail:.2e} for member {p}") from None
        resolution *= 1.5


def all_l1_norms(pou: PartitionOfUnity, resolution: float = 3.0, padding: float = 2.0,
                 tail_tolerance: float = 1e-3) -> dict:
    """L¹ norms for every member, computing each congruence class once."""
    cache: dict = {}
    out = {}
    for p in range(pou.member_count):
        key = _signature(pou, p) if pou.kind == "normalized" else p
        if key not in cache:
            cache[key] = l1_norm(pou, p, resolution, padding, tail_tolerance)
        out[p] = cache[key]
    pou.l1_norms = {p: r.value for p, r in out.items()}
    pou.checks["l1_classes"] = len(cache)
    pou.checks["l1_max_tail"] = max(r.tail for r in out.values())
    return out


def l1_trend(pou: PartitionOfUnity, j_range=None) -> dict:
    """Per-level sup of the L¹ norms and the fitted slope of their logarithm in j."""
    if not pou.l1_norms:
        all_l1_norms(pou)
    levels = np.array([t.j for t in pou.tiles[: pou.member_count]])
    norms = np.array([pou.l1_norms[p] for p in range(pou.member_count)])
    js = np.unique(levels)
    sups = np.array([norms[levels == j].max() for j in js])
    lo, hi = (js.min(), js.max()) if j_range is None else j_range
    sel = (js >= lo) & (js <= hi)
    slope = float(np.polyfit(js[sel], np.log(sups[sel]), 1)[0]) if sel.sum() >= 2 else 0.0
    return {"levels": js.tolist(), "sup": sups.tolist(), "slope": slope, "overall": float(norms.max())}
