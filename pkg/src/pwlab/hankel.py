"""Discretised extended Hankel operators, Schatten norms and the tile Schur matrix.

The operator acts on Fourier-side functions on Ω with kernel
``φ̂(x+y) ω^σ(x) ω^τ(y)``, ω = ω_{½Ω}.  A uniform node set of spacing h with
weight h^{n/2} on each side turns it into a matrix whose singular values
approximate those of the operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from . import decomposition as dc
from . import geometry as geo
from . import weight as wt
from .besov import SampledSymbol

BLOCK_ENTRIES = 1 << 22


# --------------------------------------------------------------------------
# Quadrature and assembly
# --------------------------------------------------------------------------

def lattice_axes(domain: geo.ConvexDomain, h: float) -> list[np.ndarray]:
    """Cell-centre axes of an h-lattice covering the bounding box, centred on it."""
    if h <= 0:
        raise ValueError("spacing must be positive")
    lo, hi = domain.bounding_box()
    axes = []
    for k in range(domain.dimension):
        count = max(1, int(math.ceil((hi[k] - lo[k]) / h - 1e-9)))
        mid = (lo[k] + hi[k]) / 2
        axes.append(mid + (np.arange(count) - (count - 1) / 2) * h)
    return axes


def quadrature_nodes(domain: geo.ConvexDomain, h: float) -> np.ndarray:
    """Centres inside Ω of the h-lattice cells."""
    axes = lattice_axes(domain, h)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, domain.dimension)
    return mesh[geo.contains(domain, mesh)]


def cell_measures(domain: geo.ConvexDomain, nodes: np.ndarray, h: float, subsamples: int = 8) -> np.ndarray:
    """m(cell_q ∩ Ω) for the h-cells centred at the nodes (exact for boxes)."""
    n = nodes.shape[1]
    if domain.kind == "BoxN":
        lo, hi = domain.bounding_box()
        left = np.maximum(nodes - h / 2, lo)
        right = np.minimum(nodes + h / 2, hi)
        return np.prod(np.clip(right - left, 0, None), axis=1)
    offsets = (np.arange(subsamples) + 0.5) / subsamples - 0.5
    grid = np.stack(np.meshgrid(*[offsets] * n, indexing="ij"), -1).reshape(-1, n) * h
    inside = np.zeros(len(nodes))
    for shift in grid:
        inside += geo.contains(domain, nodes + shift)
    return inside / len(grid) * h**n


@dataclass
class HankelSpec:
    """Discretisation data; ``cell_weights`` default to m(cell ∩ Ω) so that the
    node sums integrate over Ω rather than over a staircase approximation."""

    domain: geo.ConvexDomain
    symbol: SampledSymbol
    sigma: complex
    tau: complex
    weight: wt.WeightField
    h: float
    nodes: np.ndarray = None
    cell_weights: np.ndarray = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and np.isfinite(self.tau)):
            raise ValueError("σ and τ must be finite")
        if self.nodes is None:
            self.nodes = quadrature_nodes(self.domain, self.h)
        self.nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        if len(self.nodes) == 0:
            raise ValueError("no quadrature nodes inside Ω")
        if not np.all(geo.contains(self.domain, self.nodes)):
            raise ValueError("quadrature node outside Ω")
        if self.cell_weights is None:
            self.cell_weights = cell_measures(self.domain, self.nodes, self.h)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def weights(self, exponent) -> np.ndarray:
        """ω_{½Ω}(x_q)^exponent (complex exponents allowed)."""
        w = wt.omega_half(self.weight, self.nodes)
        if exponent == 0:
            return np.ones(len(w), dtype=complex)
        return np.exp(exponent * np.log(np.maximum(w, 1e-300))).astype(complex)


def make_spec(domain: geo.ConvexDomain, symbol: SampledSymbol, h: float, sigma=0.0, tau=0.0,
              weight: wt.WeightField | None = None) -> HankelSpec:
    weight = wt.normalize(domain) if weight is None else weight
    return HankelSpec(domain, symbol, sigma, tau, weight, h)


def multilinear(symbol: SampledSymbol, x: np.ndarray) -> np.ndarray:
    """Multilinear interpolation on the symbol grid; raises off the grid."""
    lo, _ = symbol.box
    step = symbol.spacing
    sizes = np.array(symbol.values.shape)
    t = (x - lo) / step
    if np.any(t < -1e-9) or np.any(t > sizes - 1 + 1e-9):
        raise ValueError("x_q + x_r outside the symbol grid")
    base = np.clip(np.floor(t).astype(np.int64), 0, sizes - 2)
    frac = np.clip(t - base, 0.0, 1.0)
    n = symbol.dimension
    out = np.zeros(x.shape[:-1], dtype=complex)
    for corner in np.ndindex(*(2,) * n):
        wgt = np.ones(x.shape[:-1])
        idx = []
        for k, c in enumerate(corner):
            wgt = wgt * (frac[..., k] if c else 1 - frac[..., k])
            idx.append(base[..., k] + c)
        out += wgt * symbol.values[tuple(idx)]
    return out


def _row_blocks(count: int):
    rows = max(1, BLOCK_ENTRIES // max(count, 1))
    for start in range(0, count, rows):
        yield slice(start, min(count, start + rows))


def assemble_hankel(spec: HankelSpec) -> np.ndarray:
    """M[q,r] = φ̂(x_q + x_r) ω^σ(x_q) ω^τ(x_r) √(w_q w_r), w_q = hⁿ for interior cells."""
    x = spec.nodes
    root = np.sqrt(spec.cell_weights)
    left = spec.weights(spec.sigma) * root
    right = spec.weights(spec.tau) * root
    out = np.empty((len(x), len(x)), dtype=complex)
    for rows in _row_blocks(len(x)):
        vals = multilinear(spec.symbol, x[rows, None, :] + x[None, :, :])
        out[rows] = left[rows, None] * vals * right[None, :]
    return out


def hilbert_schmidt_squared(spec: HankelSpec) -> float:
    """‖M‖²_{S²} without holding the matrix.

    For lattice nodes every sum x_q + x_r is a lattice point, so the double sum
    is Σ_z |φ̂(z)|² (A ∗ B)(z) with A, B the weighted node indicators; the
    correlation is done by FFT.  Other node sets are summed blockwise.
    """
    x = spec.nodes
    left = np.abs(spec.weights(spec.sigma)) ** 2 * spec.cell_weights
    right = np.abs(spec.weights(spec.tau)) ** 2 * spec.cell_weights
    axes = lattice_axes(spec.domain, spec.h)
    origin = np.array([ax[0] for ax in axes])
    index = np.rint((x - origin) / spec.h).astype(np.int64)
    if np.allclose(origin + index * spec.h, x, rtol=0, atol=1e-9 * spec.h):
        shape = tuple(len(ax) for ax in axes)
        A = np.zeros(shape)
        B = np.zeros(shape)
        A[tuple(index.T)] = left
        B[tuple(index.T)] = right
        corr = signal.fftconvolve(A, B, mode="full")
        sums = np.stack(np.meshgrid(*[2 * ax[0] + np.arange(2 * len(ax) - 1) * spec.h for ax in axes],
                                    indexing="ij"), -1)
        live = corr > 1e-14 * corr.max()
        return float((np.abs(multilinear(spec.symbol, sums[live])) ** 2 * corr[live]).sum())
    total = 0.0
    for rows in _row_blocks(len(x)):
        vals = np.abs(multilinear(spec.symbol, x[rows, None, :] + x[None, :, :])) ** 2
        total += float(left[rows] @ (vals @ right))
    return total


def overlap_integral(symbol: SampledSymbol, domain: geo.ConvexDomain, weight: wt.WeightField | None = None,
                     refine: int = 4) -> float:
    """∫_{2Ω} |φ̂(z)|² m(Ω ∩ (z − Ω)) dz for the interpolated symbol.

    Midpoint rule on the symbol grid refined ``refine`` times per axis, with the
    overlap volume evaluated in closed form.
    """
    weight = wt.normalize(domain) if weight is None else weight
    total = 0.0
    fine = [np.concatenate([ax[:-1, None] + (np.arange(refine) + 0.5) / refine * (ax[1] - ax[0])]).ravel()
            for ax in symbol.axes]
    cell = np.prod(symbol.spacing) / refine ** symbol.dimension
    first = fine[0]
    rows = max(1, BLOCK_ENTRIES // int(np.prod([len(f) for f in fine[1:]]) or 1))
    for start in range(0, len(first), rows):
        sub = [first[start:start + rows]] + fine[1:]
        mesh = np.stack(np.meshgrid(*sub, indexing="ij"), -1)
        overlap = np.asarray(weight.overlap(mesh))
        total += float((np.abs(symbol(mesh)) ** 2 * overlap).sum())
    return total * cell


# --------------------------------------------------------------------------
# Spectra
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    h: float
    count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("singular values must be nonnegative and descending")


def singular_spectrum(matrix: np.ndarray, h: float = 0.0, method: str = "svd") -> SingularSpectrum:
    """Singular values by SVD, or ("gram") as square roots of the eigenvalues of MᴴM.

    The Gram route is faster for large matrices; singular values below about
    1e-8 of the largest lose relative accuracy, which does not move S^p norms
    with p ≥ 1 beyond rounding.
    """
    if method == "svd":
        values = linalg.svdvals(matrix, overwrite_a=False, check_finite=False)
    elif method == "gram":
        gram = matrix.conj().T @ matrix
        values = np.sqrt(np.clip(linalg.eigvalsh(gram, overwrite_a=True, check_finite=False, driver="evd"), 0, None))
    else:
        raise ValueError(f"unknown spectrum method {method!r}")
    return SingularSpectrum(np.sort(values)[::-1], h, len(values))


def schatten_norm(spectrum, p: float) -> float:
    """(Σ s_k^p)^{1/p}, or the largest singular value when p = ∞."""
    if p < 1:
        raise ValueError("Schatten exponent must be at least 1")
    s = np.asarray(spectrum.values if isinstance(spectrum, SingularSpectrum) else spectrum, dtype=float)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(s.max())
    top = s.max()
    if top == 0:
        return 0.0
    return float(top * ((s / top) ** p).sum() ** (1 / p))


def top_singular_value(matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 5000, seed: int = 0) -> float:
    """Largest singular value by power iteration on MᴴM."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.shape[1]) + 0j
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        w = matrix.conj().T @ (matrix @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
        est = math.sqrt(norm)
        if abs(est - prev) <= tol * est:
            break
        prev = est
    return float(np.linalg.norm(matrix @ v))


# --------------------------------------------------------------------------
# Schur multipliers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Multiplier:
    """A Fourier-side multiplier φ̂ together with ‖φ‖_{L¹}."""

    evaluate: object
    l1: float
    label: str = ""

    def __call__(self, x):
        return self.evaluate(x)


def fejer_multiplier(width: float, center=None, dimension: int = 2) -> Multiplier:
    """φ̂(z) = Π (1 − |z_i − c_i|/L)_+, whose inverse transform is a modulated
    Fejér kernel of unit L¹ norm."""
    c = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)

    def evaluate(x):
        return np.prod(np.clip(1 - np.abs(x - c) / width, 0, None), axis=-1).astype(complex)

    return Multiplier(evaluate, 1.0, f"fejer(L={width})")


def member_multiplier(pou, p: int) -> Multiplier:
    """Member p of a squared family: ψ_p ≥ 0, so its L¹ norm is exact."""
    from . import partition as pt

    def evaluate(x):
        flat = np.asarray(x, dtype=float).reshape(-1, pou.decomposition.domain.dimension)
        sparse = pt.squared_samples(pou, flat)
        out = np.zeros(len(flat))
        sel = sparse.member == p
        np.add.at(out, sparse.point[sel], sparse.value[sel])
        return out.reshape(np.shape(x)[:-1]).astype(complex)

    if pou.kind != "squared":
        raise ValueError("member multipliers come from a squared family")
    return Multiplier(evaluate, pt.l1_norm(pou, p).value, f"member {p}")


@dataclass
class MultiplierReport:
    label: str
    l1: float
    norms: dict
    bounds: dict
    slack: float

    @property
    def holds(self) -> bool:
        return all(self.norms[p] <= self.bounds[p] * (1 + self.slack) for p in self.norms)


def schur_multiplier_check(kernel: np.ndarray, nodes: np.ndarray, multiplier: Multiplier,
                           exponents=(1, 2, math.inf), slack: float = 1e-6) -> MultiplierReport:
    """Compare ‖φ̂(x_q+x_r)k_{qr}‖_{S^p} with ‖φ‖_{L¹}‖k‖_{S^p}."""
    sums = nodes[:, None, :] + nodes[None, :, :]
    product = multiplier(sums) * kernel
    s_prod = singular_spectrum(product)
    s_kernel = singular_spectrum(kernel)
    norms = {p: schatten_norm(s_prod, p) for p in exponents}
    bounds = {p: multiplier.l1 * schatten_norm(s_kernel, p) for p in exponents}
    return MultiplierReport(multiplier.label, multiplier.l1, norms, bounds, slack)


# --------------------------------------------------------------------------
# The Schur matrix on tile indices
# --------------------------------------------------------------------------

def beta_levels(dec: dc.Decomposition, j_max: int | None = None) -> np.ndarray:
    """Level β of the doubled tile meeting E_p + E_q, for all tiles p, q with level ≤ j_max."""
    j_max = dec.j_max if j_max is None else j_max
    tiles = [t for t in dec.tiles if t.j <= j_max]
    count = len(tiles)
    if dec.kind == "box":
        idx = np.array([t.index for t in tiles])
        same = ((idx[:, None, :] > 0) & (idx[None, :, :] > 0)) | ((idx[:, None, :] < 0) & (idx[None, :, :] < 0))
        mag = np.minimum(np.abs(idx[:, None, :]), np.abs(idx[None, :, :]))
        beta = np.where(same, mag, 0).sum(axis=-1)
    else:
        centroids = np.array([t.E.centroid() for t in tiles])
        beta = np.empty((count, count), dtype=np.int64)
        levels = dec.levels
        for rows in _row_blocks(count):
            mids = ((centroids[rows, None, :] + centroids[None, :, :]) / 2).reshape(-1, 2)
            found = dec.locate(mids)
            if np.any(found < 0):
                raise ValueError("truncation exceeded")
            beta[rows] = levels[found].reshape(-1, count)
    if beta.max() > dec.j_max:
        raise ValueError("truncation exceeded")
    return beta


@dataclass
class SchurMatrix:
    decomposition: dc.Decomposition
    sigma: float
    tau: float
    rho: float
    j_max: int
    levels: np.ndarray
    beta: np.ndarray
    entries: np.ndarray

    def truncated(self, j_max: int) -> "SchurMatrix":
        keep = self.levels <= j_max
        beta = self.beta[np.ix_(keep, keep)]
        return SchurMatrix(self.decomposition, self.sigma, self.tau, self.rho, j_max,
                           self.levels[keep], beta, self.entries[np.ix_(keep, keep)])


def assemble_schur_matrix(dec: dc.Decomposition, sigma: float, tau: float, rho: float,
                          j_max: int | None = None, beta: np.ndarray | None = None) -> SchurMatrix:
    """(a^{-jσ} a^{-kτ} a^{βρ}) over tile pairs with levels ≤ j_max."""
    j_max = dec.j_max if j_max is None else j_max
    levels = np.array([t.j for t in dec.tiles if t.j <= j_max])
    beta = beta_levels(dec, j_max) if beta is None else beta
    a = dec.a
    entries = a ** (-sigma * levels)[:, None] * a ** (-tau * levels)[None, :] * a ** (rho * beta)
    return SchurMatrix(dec, sigma, tau, rho, j_max, levels, beta, entries)


@dataclass
class SchurReport:
    """Weighted Schur sums at successive truncations.

    ``column_rate``/``row_rate`` are slopes of log(sup) against j_max.  When at
    least five truncations are given, ``tail_rate`` is the slope of the log of
    the two-step increments S_J − S_{J−2} over the deepest ones: negative means
    the sums settle geometrically, positive means they keep growing.  The
    verdict uses the tail rate when available, else the log-sup rate.
    """

    gamma: float
    truncations: list
    column_sups: list
    row_sups: list
    column_rate: float
    row_rate: float
    threshold: float = 0.02
    tail_rate: float | None = None

    @property
    def log_rate(self) -> float:
        return max(self.column_rate, self.row_rate)

    @property
    def verdict(self) -> str:
        if self.tail_rate is None:
            return "growing" if self.log_rate > self.threshold else "stable"
        if self.tail_rate > self.threshold:
            return "growing"
        if self.tail_rate < -self.threshold:
            return "stable"
        return "undecided"

    @property
    def growing(self) -> bool:
        return self.verdict == "growing"

    @property
    def bounded(self) -> bool:
        return self.verdict == "stable"


def tail_increment_rate(truncations, sups, points: int = 4) -> float | None:
    """Slope of log(S_J − S_{J−2}) over the deepest ``points`` truncations."""
    js = np.asarray(truncations, dtype=float)
    s = np.asarray(sups, dtype=float)
    if len(s) < 5 or np.any(np.diff(js) != 1):
        return None
    inc = s[2:] - s[:-2]
    js, inc = js[2:][-points:], inc[-points:]
    if np.any(inc <= 1e-12 * s.max()):
        return -np.inf
    return float(np.polyfit(js, np.log(inc), 1)[0])


def _report(gamma, truncations, cols, rows, threshold):
    tails = [tail_increment_rate(truncations, v) for v in (cols, rows)]
    tail = None if tails[0] is None else max(tails)
    return SchurReport(gamma, list(truncations), cols, rows, growth_rate(truncations, cols),
                       growth_rate(truncations, rows), threshold, tail)


def schur_sums(schur: SchurMatrix, gamma: float) -> tuple[float, float]:
    """(sup_c Σ_r T_rc w_r / w_c, sup_r Σ_c T_rc w_c / w_r) with w = a^{-jγ}."""
    w = schur.decomposition.a ** (-gamma * schur.levels)
    columns = (w @ schur.entries) / w
    rows = (schur.entries @ w) / w
    return float(columns.max()), float(rows.max())


def growth_rate(truncations, sups) -> float:
    if len(truncations) < 3:
        raise ValueError("growth rates need at least three truncations")
    return float(np.polyfit(np.asarray(truncations, float), np.log(sups), 1)[0])


def schur_test(schur: SchurMatrix, gamma: float, truncations=None, threshold: float = 0.02) -> SchurReport:
    """Weighted row and column sups at successive truncations, with a log-linear growth fit."""
    if truncations is None:
        truncations = list(range(max(0, schur.j_max - 2), schur.j_max + 1))
    cols, rows = [], []
    for j in truncations:
        c, r = schur_sums(schur.truncated(j), gamma)
        cols.append(c)
        rows.append(r)
    return _report(gamma, truncations, cols, rows, threshold)


@dataclass
class FrontierScan:
    sigmas: list
    best: list
    frontier: float | None

    @property
    def verdicts(self) -> list[str]:
        return [r.verdict for r in self.best]


def _deciding_rate(report: SchurReport) -> float:
    return report.tail_rate if report.tail_rate is not None else report.log_rate


def schur_frontier(profile: SchurProfile, sigmas, gammas, truncations, threshold: float = 0.02,
                   taus=None, rhos=None) -> FrontierScan:
    """Per scan point, the γ with the smallest growth, and the σ where that growth crosses zero.

    ``taus`` defaults to ``sigmas`` and ``rhos`` to σ + τ.
    """
    taus = list(sigmas) if taus is None else list(taus)
    rhos = [s + t for s, t in zip(sigmas, taus)] if rhos is None else list(rhos)
    if not (len(taus) == len(rhos) == len(sigmas)):
        raise ValueError("σ, τ and ρ lists must have equal length")
    best = []
    for s, t, r in zip(sigmas, taus, rhos):
        reports = [profile_test(profile, s, t, r, g, truncations, threshold) for g in gammas]
        best.append(min(reports, key=_deciding_rate))
    rates = [_deciding_rate(r) for r in best]
    frontier = None
    for (s0, r0), (s1, r1) in zip(zip(sigmas, rates), zip(sigmas[1:], rates[1:])):
        if r0 > 0 >= r1:
            frontier = s0 if not np.isfinite(r1) else s0 + (s1 - s0) * r0 / (r0 - r1)
            break
    return FrontierScan(list(sigmas), best, frontier)


@dataclass
class SchurProfile:
    """Histogram H[c, j, b] = #{tiles r at level j with β(r, c) = b} for representative tiles c.

    Since β is symmetric, every weighted row or column sum of T_{σ,τ,ρ} at any
    truncation is a contraction of H, so deep truncations never need the
    dense matrix.  For a centred disc, one tile per rotation orbit suffices.
    """

    decomposition: dc.Decomposition
    representatives: np.ndarray
    rep_levels: np.ndarray
    histogram: np.ndarray

    def sums(self, sigma: float, tau: float, rho: float, gamma: float, j_max: int) -> tuple[float, float]:
        """(column sup, row sup) of the a^{-jγ}-weighted Schur test at truncation j_max."""
        a = self.decomposition.a
        live = self.rep_levels <= j_max
        H = self.histogram[live][:, : j_max + 1, :]
        lv = self.rep_levels[live]
        js = np.arange(H.shape[1])
        bs = np.arange(H.shape[2])
        beta_factor = a ** (rho * bs)

        def weighted(own_exp, other_exp):
            inner = np.einsum("cjb,j,b->c", H, a ** (-(other_exp + gamma) * js), beta_factor)
            return float((a ** ((-own_exp + gamma) * lv) * inner).max())

        return weighted(tau, sigma), weighted(sigma, tau)


def schur_profile(dec: dc.Decomposition, batch: int = 1 << 22) -> SchurProfile:
    reps, _ = dc._rotation_classes(dec)
    levels = dec.levels
    depth = dec.j_max + 1
    if dec.kind == "box":
        idx = np.array([t.index for t in dec.tiles])
        reps = np.arange(len(dec.tiles))
    else:
        centroids = np.array([t.E.centroid() for t in dec.tiles])
    hist = np.zeros((len(reps), depth, depth), dtype=np.int64)
    per = max(1, batch // len(dec.tiles))
    for start in range(0, len(reps), per):
        block = reps[start:start + per]
        if dec.kind == "box":
            first, second = idx[block][:, None, :], idx[None, :, :]
            same = ((first > 0) & (second > 0)) | ((first < 0) & (second < 0))
            beta = np.where(same, np.minimum(np.abs(first), np.abs(second)), 0).sum(-1)
        else:
            mids = ((centroids[block][:, None, :] + centroids[None, :, :]) / 2).reshape(-1, 2)
            found = dec.locate(mids)
            if np.any(found < 0):
                raise ValueError("truncation exceeded")
            beta = levels[found].reshape(len(block), -1)
        if beta.max() > dec.j_max:
            raise ValueError("truncation exceeded")
        flat = (np.arange(len(block))[:, None] * depth + levels[None, :]) * depth + beta
        hist[start:start + len(block)] = np.bincount(flat.ravel(), minlength=len(block) * depth * depth
                                                     ).reshape(len(block), depth, depth)
    return SchurProfile(dec, reps, levels[reps], hist)


def profile_test(profile: SchurProfile, sigma: float, tau: float, rho: float, gamma: float,
                 truncations, threshold: float = 0.02) -> SchurReport:
    cols, rows = [], []
    for j in truncations:
        c, r = profile.sums(sigma, tau, rho, gamma, j)
        cols.append(c)
        rows.append(r)
    return _report(gamma, truncations, cols, rows, threshold)


def geometric_row_bound(ratio: float) -> float:
    """1 + 2 Σ_{d≥1} r^d, the bound for a two-sided geometric Toeplitz row."""
    return 1 + 2 * ratio / (1 - ratio)


# --------------------------------------------------------------------------
# Toeplitz check
# --------------------------------------------------------------------------

@dataclass
class ToeplitzReport:
    a_base: float
    sizes: list
    norms: list
    limit: float

    @property
    def bounded(self) -> bool:
        return all(v <= self.limit * (1 + 1e-12) for v in self.norms)

    @property
    def increasing(self) -> bool:
        return all(b >= a - 1e-12 for a, b in zip(self.norms, self.norms[1:]))


def toeplitz_norm(a_base: float, size: int) -> float:
    """Operator norm of (a^{-|i-k|})_{i,k<N}: the top eigenvalue of a symmetric positive matrix."""
    if a_base <= 1:
        raise ValueError("the Toeplitz base must exceed 1")
    matrix = linalg.toeplitz(a_base ** (-np.arange(size, dtype=float)))
    return float(linalg.eigvalsh(matrix, subset_by_index=[size - 1, size - 1])[0])


def toeplitz_norm_check(a_base: float, sizes=(64, 256, 1024)) -> ToeplitzReport:
    if a_base <= 1:
        raise ValueError("the Toeplitz base must exceed 1")
    limit = 2 / (1 - 1 / a_base) - 1
    return ToeplitzReport(a_base, list(sizes), [toeplitz_norm(a_base, n) for n in sizes], limit)
