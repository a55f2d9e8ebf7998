"""Besov norms of grid symbols with respect to a partition of unity.

``‖f‖ = (Σ_p (a^{-j_p s} ‖f ∗ ψ_p‖_{L^p})^q)^{1/q}``, each term evaluated in the
reference coordinates of member p, where ``‖f ∗ ψ_p‖_p = |det A_p|^{1-1/p} ‖G‖_p``
and G is the inverse transform of the pulled-back product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate

from . import decomposition as dc
from . import geometry as geo
from . import partition as pt
from . import weight as wt


@dataclass(frozen=True, eq=False)
class SmoothGenerator:
    """φ̂(x) = Σ_k c_k Π_i g((x_i − ℓ_{k,i}) / width), g the standard Gaussian profile."""

    lattice: tuple
    coefficients: np.ndarray
    width: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, len(self.lattice))
        coef = self.coefficients
        factors = []
        reach = 7 * self.width
        # Gaussians further than 7 widths contribute below 1e-10 relative.
        for i, ax in enumerate(self.lattice):
            keep = (ax >= flat[:, i].min() - reach) & (ax <= flat[:, i].max() + reach)
            coef = np.compress(keep, coef, axis=i)
            factors.append(np.exp(-0.5 * ((flat[:, i, None] - ax[keep][None, :]) / self.width) ** 2))
        if len(factors) == 1:
            out = factors[0] @ coef
        elif len(factors) == 2:
            out = np.sum(factors[0] * (factors[1] @ coef.T), axis=1)
        else:
            out = np.einsum("pk,...k->p...", factors[-1], coef)
            for g in reversed(factors[:-1]):
                out = np.einsum("pk,p...k->p...", g, out)
        return out.reshape(x.shape[:-1])

    def scaled(self, c):
        return SmoothGenerator(self.lattice, self.coefficients * c, self.width)

    def __add__(self, other):
        if other.width != self.width or any(not np.array_equal(a, b) for a, b in zip(self.lattice, other.lattice)):
            raise ValueError("generators live on different lattices")
        return SmoothGenerator(self.lattice, self.coefficients + other.coefficients, self.width)


@dataclass(frozen=True, eq=False)
class SampledSymbol:
    """Complex Fourier-side samples on a uniform grid, multilinearly interpolated.

    ``generator`` optionally holds the smooth function the samples were taken
    from; tile convolutions use it so that interpolation kinks do not leak
    slowly decaying tails into the space side.
    """

    axes: tuple
    values: np.ndarray
    generator: SmoothGenerator | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("symbol samples must be finite")
        if self.values.shape != tuple(len(a) for a in self.axes):
            raise ValueError("sample array does not match the grid axes")

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([ax[1] - ax[0] for ax in self.axes])

    @property
    def box(self):
        return np.array([ax[0] for ax in self.axes]), np.array([ax[-1] for ax in self.axes])

    @property
    def smoothness_scale(self) -> float:
        """Fourier-side length over which the symbol varies appreciably."""
        return self.generator.width if self.generator is not None else float(self.spacing.min()) / 4

    def __call__(self, x):
        """Multilinear interpolation of the grid samples (zero outside the grid box)."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.dimension)
        interp = interpolate.RegularGridInterpolator(self.axes, self.values, method="linear",
                                                     bounds_error=False, fill_value=0.0)
        return interp(flat).reshape(x.shape[:-1])

    def smooth(self, x):
        """The generating function where one exists, otherwise the interpolant."""
        return self.generator(x) if self.generator is not None else self(x)

    def inside(self, x) -> np.ndarray:
        lo, hi = self.box
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * np.maximum(1, np.abs(hi))
        return np.all((x >= lo - tol) & (x <= hi + tol), axis=-1)

    def scaled(self, c: complex) -> "SampledSymbol":
        gen = None if self.generator is None else self.generator.scaled(c)
        return SampledSymbol(self.axes, self.values * c, gen)

    def __add__(self, other: "SampledSymbol") -> "SampledSymbol":
        if (self.generator is None) != (other.generator is None):
            raise ValueError("cannot add a generated symbol to a plain grid symbol")
        gen = None if self.generator is None else self.generator + other.generator
        return SampledSymbol(self.axes, self.values + other.values, gen)

    def l2_norm_squared(self, region: geo.ConvexDomain | None = None) -> float:
        """Grid Riemann sum of |φ̂|², optionally restricted to a region."""
        mesh = np.stack(np.meshgrid(*self.axes, indexing="ij"), -1)
        vals = np.abs(self.values) ** 2
        if region is not None:
            vals = np.where(geo.contains(region, mesh), vals, 0.0)
        return float(vals.sum() * np.prod(self.spacing))


def symbol_grid(domain: geo.ConvexDomain, spacing: float):
    """Uniform node axes over the bounding box of a domain, containing its closure."""
    lo, hi = domain.bounding_box()
    axes = []
    for k in range(domain.dimension):
        count = int(math.ceil((hi[k] - lo[k]) / spacing - 1e-9)) + 1
        mid = (lo[k] + hi[k]) / 2
        axes.append(mid + (np.arange(count) - (count - 1) / 2) * spacing)
    return tuple(axes)


def from_generator(domain: geo.ConvexDomain, spacing: float, generator: SmoothGenerator) -> SampledSymbol:
    axes = symbol_grid(domain, spacing)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    return SampledSymbol(axes, generator(mesh).astype(complex), generator)


def random_symbol(domain: geo.ConvexDomain, spacing: float, seed: int, modes: int = 16,
                  tilt: float = 0.0, base: float | None = None, weight=None) -> SampledSymbol:
    """Random smooth symbol on the bounding box of ``domain`` (normally 2Ω).

    Coefficients on a ``modes``-per-axis lattice are i.i.d. standard complex
    Gaussians; a tilt θ multiplies the coefficient at ℓ by ω_{½·domain}(ℓ)^θ,
    which is about a^{-jθ} on the tiles of level j and damps fine scales.
    """
    rng = np.random.default_rng(seed)
    lo, hi = domain.bounding_box()
    pitch = float((hi - lo).max()) / modes
    lattice = tuple(np.linspace(lo[k] + pitch / 2, hi[k] - pitch / 2, max(1, int(round((hi[k] - lo[k]) / pitch))))
                    for k in range(domain.dimension))
    shape = tuple(len(ax) for ax in lattice)
    coef = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    if tilt:
        base_domain = domain.scaled(1 / domain.scale)
        weight = wt.normalize(base_domain, base=base) if weight is None else weight
        mesh = np.stack(np.meshgrid(*lattice, indexing="ij"), -1)
        w = wt.omega_half(weight, mesh / domain.scale)
        coef = coef * np.power(np.maximum(w, 0.0), tilt)
    return from_generator(domain, spacing, SmoothGenerator(lattice, coef, 0.6 * pitch))


def zero_symbol(domain: geo.ConvexDomain, spacing: float) -> SampledSymbol:
    axes = symbol_grid(domain, spacing)
    return SampledSymbol(axes, np.zeros(tuple(len(a) for a in axes), dtype=complex))


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be at least 1")


# --------------------------------------------------------------------------
# Tile convolutions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TileConvolution:
    """Space-side samples of F^{-1}(symbol · member) in reference coordinates."""

    member: int
    grid: pt.ReferenceGrid
    fourier_values: np.ndarray
    jacobian: float

    def lp_norms(self, exponents) -> list[pt.SpaceNorm]:
        exponents = list(exponents)
        spatial = [r for r in exponents if r != 2]
        computed = dict(zip(spatial, pt.space_lp_norms(self.fourier_values, self.grid, spatial))) if spatial else {}
        out = []
        for r in exponents:
            if r == 2:
                # Plancherel on the Fourier side, where the samples are exact.
                val = float(np.sqrt((np.abs(self.fourier_values) ** 2).sum() * np.prod(self.grid.steps)))
                out.append(pt.SpaceNorm(val * self.jacobian ** 0.5, 0.0, self.grid.sizes))
                continue
            res = computed[r]
            factor = self.jacobian if math.isinf(r) else self.jacobian ** (1 - 1 / r)
            out.append(pt.SpaceNorm(res.value * factor, res.tail, res.grid))
        return out

    def lp_norm(self, p: float) -> pt.SpaceNorm:
        return self.lp_norms([p])[0]

    def space_l2_squared(self) -> float:
        """‖f ∗ ψ‖²_{L²} summed on the space side, for the Parseval check."""
        full = np.zeros(self.grid.sizes, dtype=complex)
        full[self.grid.support_slices] = self.fourier_values
        spatial = np.fft.ifftn(full) * np.prod(self.grid.sizes) * np.prod(self.grid.steps)
        return float((np.abs(spatial) ** 2).sum() * np.prod(self.grid.space_steps) * self.jacobian)


def _member_frame(pou: pt.PartitionOfUnity, p: int):
    """(center, edges) of the parallelepiped carrying member p's support."""
    A = pou.tiles[p].A
    if pou.kind == "squared":
        return 2 * A.center, 2 * A.edges
    return A.center, A.edges


def member_fourier_values(pou: pt.PartitionOfUnity, p: int, grid: pt.ReferenceGrid) -> np.ndarray:
    if pou.kind == "squared":
        dec = pou.decomposition
        t = dec.tiles[p]
        u = grid.support_points()
        return dec.a ** t.j * t.A.volume * pou.bump.self_convolution(2 * u)
    return pt.member_reference_values(pou, p, grid)


def member_grid(pou: pt.PartitionOfUnity, p: int, resolution: float, padding: float,
                symbol_scale: float | None = None, max_nodes: int = 1 << 24) -> pt.ReferenceGrid:
    """Reference grid resolving both the member's transitions and the symbol's variation."""
    if pou.kind == "squared":
        # the self-convolution has transitions of width about 2w in s = 2u, i.e. w in u
        sharp = np.ones(pou.decomposition.domain.dimension)
    else:
        sharp = pt.member_sharpness(pou, p)
    if symbol_scale:
        _, edges = _member_frame(pou, p)
        sharp = np.maximum(sharp, pou.bump.width * np.linalg.norm(edges, axis=0) / symbol_scale)
    return pt.reference_grid(sharp, pou.bump.width, resolution, padding, max_nodes)


def tile_convolution(symbol: SampledSymbol, pou: pt.PartitionOfUnity, p: int,
                     resolution: float = 3.0, padding: float = 2.0,
                     member_values=None, grid=None) -> TileConvolution:
    """Pointwise product φ̂·ψ̂_p pulled back to member p's reference grid."""
    center, edges = _member_frame(pou, p)
    if grid is None:
        grid = member_grid(pou, p, resolution, padding, symbol.smoothness_scale)
    if member_values is None:
        member_values = member_fourier_values(pou, p, grid)
    u = grid.support_points()
    x = center + u @ edges.T
    support = member_values != 0
    if not np.all(symbol.inside(x[support])):
        raise ValueError("member support leaves the symbol grid")
    values = np.zeros(u.shape[:-1], dtype=complex)
    values[support] = symbol.smooth(x[support]) * member_values[support]
    return TileConvolution(p, grid, values, float(abs(np.linalg.det(edges))))


# --------------------------------------------------------------------------
# Norms
# --------------------------------------------------------------------------

@dataclass
class BesovResult:
    value: float
    terms: np.ndarray
    levels: np.ndarray
    profile: dict
    max_tail: float
    params: BesovParams


@dataclass
class MemberCache:
    """Per-member reference grids and Fourier-side member samples, reused across symbols.

    A member whose space-side tail exceeded the tolerance is remembered at its
    refined resolution.
    """

    pou: pt.PartitionOfUnity
    resolution: float = 3.0
    padding: float = 2.0
    max_nodes: int = 1 << 24
    entries: dict = field(default_factory=dict)
    boosts: dict = field(default_factory=dict)

    def get(self, p: int, symbol_scale: float | None = None):
        key = (p, symbol_scale)
        boost = self.boosts.get(key, 1.0)
        hit = self.entries.get((key, boost))
        if hit is None:
            grid = member_grid(self.pou, p, self.resolution * boost, self.padding, symbol_scale, self.max_nodes)
            hit = (grid, member_fourier_values(self.pou, p, grid))
            self.entries = {k: v for k, v in self.entries.items() if k[0] != key}
            self.entries[(key, boost)] = hit
        return hit

    def refine(self, p: int, symbol_scale: float | None = None) -> bool:
        key = (p, symbol_scale)
        boost = self.boosts.get(key, 1.0) * 1.5
        try:
            member_grid(self.pou, p, self.resolution * boost, self.padding, symbol_scale, self.max_nodes)
        except ValueError:
            return False
        self.boosts[key] = boost
        return True


def member_lp_norms(symbol: SampledSymbol, pou: pt.PartitionOfUnity, exponents,
                    cache: MemberCache | None = None, tail_tolerance: float = 1e-3):
    """‖f ∗ ψ_p‖_{L^r} for every member p and every r in ``exponents``.

    Returns (norms of shape (members, len(exponents)), largest tail).
    """
    cache = MemberCache(pou) if cache is None else cache
    exponents = list(exponents)
    scale = symbol.smoothness_scale
    out = np.zeros((pou.member_count, len(exponents)))
    worst = 0.0
    for p in range(pou.member_count):
        while True:
            grid, values = cache.get(p, scale)
            conv = tile_convolution(symbol, pou, p, member_values=values, grid=grid)
            if not np.any(conv.fourier_values):
                tails = [0.0]
                break
            results = conv.lp_norms(exponents)
            tails = [r.tail for r in results]
            if max(tails) <= tail_tolerance or not cache.refine(p, scale):
                out[p] = [r.value for r in results]
                break
        worst = max(worst, max(tails))
    if worst > tail_tolerance:
        raise ValueError(f"aliasing bound {worst:.2e} exceeds {tail_tolerance:.0e}; refine the reference grid")
    return out, worst


def combine(norms: np.ndarray, levels: np.ndarray, params: BesovParams, a: float) -> float:
    terms = a ** (-levels * params.s) * norms
    if math.isinf(params.q):
        return float(terms.max()) if terms.size else 0.0
    return float((terms ** params.q).sum() ** (1 / params.q))


def besov_norm(symbol: SampledSymbol, pou: pt.PartitionOfUnity, params: BesovParams,
               cache: MemberCache | None = None, tail_tolerance: float = 1e-3) -> BesovResult:
    norms, tail = member_lp_norms(symbol, pou, [params.p], cache, tail_tolerance)
    norms = norms[:, 0]
    levels = np.array([t.j for t in pou.tiles[: pou.member_count]])
    a = pou.decomposition.a
    value = combine(norms, levels, params, a)
    terms = a ** (-levels * params.s) * norms
    profile = {}
    for j in np.unique(levels):
        sel = terms[levels == j]
        profile[int(j)] = float(sel.max()) if math.isinf(params.q) else float((sel ** params.q).sum())
    return BesovResult(value, terms, levels, profile, tail, params)


def equivalence_ratio(symbol: SampledSymbol, pou_a: pt.PartitionOfUnity, pou_b: pt.PartitionOfUnity,
                      params: BesovParams, cache_a=None, cache_b=None, tail_tolerance: float = 1e-3) -> float:
    na = besov_norm(symbol, pou_a, params, cache_a, tail_tolerance).value
    nb = besov_norm(symbol, pou_b, params, cache_b, tail_tolerance).value
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        raise ValueError("one norm vanishes while the other does not")
    return max(na / nb, nb / na)


def doubled_partition(dec: dc.Decomposition, bump_epsilon: float | None = None,
                      grid: int = 128, check: bool = True) -> pt.PartitionOfUnity:
    """Normalised partition of unity for 2Ω built on the pair {(2E, 2A)}."""
    doubled = dec.scaled(2.0)
    bump = None if bump_epsilon is None else pt.build_base_bump(bump_epsilon, dec.domain.dimension)
    return pt.build_partition(doubled, bump, grid=grid, check=check)
