import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from pwlab import besov as bv
from pwlab import decomposition as dc
from pwlab import geometry as geo
from pwlab import hankel as hk
from pwlab import partition as pt


def plane_wave(domain, h, direction):
    """e^{2πi z·v} sampled on the symbol grid of 2Ω with spacing h."""
    axes = bv.symbol_grid(domain.scaled(2.0), h)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    return bv.SampledSymbol(axes, np.exp(2j * math.pi * mesh @ np.asarray(direction)))


@pytest.fixture(scope="module")
def disc_symbol(unit_disc):
    return bv.random_symbol(unit_disc.scaled(2.0), 0.05, seed=11, modes=8)


@pytest.fixture(scope="module")
def disc_spec(unit_disc, disc_symbol, disc_weight):
    return hk.HankelSpec(unit_disc, disc_symbol, 0.0, 0.0, disc_weight, 0.1)


class TestAssembly:
    def test_hs_fft_path_matches_dense_frobenius(self, disc_spec):
        dense = hk.assemble_hankel(disc_spec)
        assert hk.hilbert_schmidt_squared(disc_spec) == pytest.approx(np.sum(np.abs(dense) ** 2), rel=1e-10)

    def test_hs_blockwise_path_for_scattered_nodes(self, unit_disc, disc_symbol, disc_weight, rng):
        nodes = rng.uniform(-0.6, 0.6, (150, 2))
        spec = hk.HankelSpec(unit_disc, disc_symbol, 0.5, 0.25, disc_weight, 0.1, nodes=nodes)
        dense = hk.assemble_hankel(spec)
        assert hk.hilbert_schmidt_squared(spec) == pytest.approx(np.sum(np.abs(dense) ** 2), rel=1e-10)

    def test_weighted_entries(self, unit_disc, disc_symbol, disc_weight):
        spec = hk.HankelSpec(unit_disc, disc_symbol, 0.7, 0.3 + 0.2j, disc_weight, 0.2)
        m = hk.assemble_hankel(spec)
        w = disc_weight.overlap(2 * spec.nodes) / disc_weight.normalizer
        q, r = 3, 11
        expected = (disc_symbol(spec.nodes[q] + spec.nodes[r]) * w[q] ** 0.7 * w[r] ** (0.3 + 0.2j)
                    * math.sqrt(spec.cell_weights[q] * spec.cell_weights[r]))
        assert m[q, r] == pytest.approx(expected, rel=1e-9)

    def test_plane_wave_gives_rank_one(self, unit_disc, disc_weight):
        spec = hk.HankelSpec(unit_disc, plane_wave(unit_disc, 0.1, [0.4, -0.3]), 0.0, 0.0, disc_weight, 0.1)
        s = hk.singular_spectrum(hk.assemble_hankel(spec)).values
        assert s[0] == pytest.approx(spec.cell_weights.sum(), rel=1e-10)
        assert s[1] < 1e-10 * s[0]

    def test_box_cells_are_exact(self, unit_square):
        nodes = hk.quadrature_nodes(unit_square, 0.3)
        assert hk.cell_measures(unit_square, nodes, 0.3).sum() == pytest.approx(4.0)

    def test_disc_cells_against_polygon_clipping(self, unit_disc):
        h = 0.05
        nodes = hk.quadrature_nodes(unit_disc, h)
        ours = hk.cell_measures(unit_disc, nodes, h)
        t = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
        disc = shapely.Polygon(np.stack([np.cos(t), np.sin(t)], -1))
        exact = np.array([disc.intersection(shapely.box(*(x - h / 2), *(x + h / 2))).area for x in nodes])
        assert np.allclose(ours, exact, atol=0.07 * h * h)
        assert ours.sum() == pytest.approx(exact.sum(), rel=1e-3)

    def test_errors(self, unit_disc, disc_symbol, disc_weight):
        with pytest.raises(ValueError):
            hk.HankelSpec(unit_disc, disc_symbol, 0.0, 0.0, disc_weight, 0.1, nodes=np.array([[1.5, 0.0]]))
        with pytest.raises(ValueError):
            hk.HankelSpec(unit_disc, disc_symbol, math.inf, 0.0, disc_weight, 0.1)
        with pytest.raises(ValueError):
            hk.lattice_axes(unit_disc, 0.0)
        small = bv.random_symbol(unit_disc, 0.05, seed=1, modes=4)
        with pytest.raises(ValueError):
            hk.assemble_hankel(hk.HankelSpec(unit_disc, small, 0.0, 0.0, disc_weight, 0.2))


class TestHilbertSchmidtIdentity:
    @pytest.mark.parametrize("name", ["unit_disc", "unit_square"])
    def test_converges_to_overlap_integral(self, name, request):
        dom = request.getfixturevalue(name)
        symbol = bv.random_symbol(dom.scaled(2.0), dom.diameter() / 128, seed=5, modes=8)
        target = hk.overlap_integral(symbol, dom)
        errors = []
        for divisor in (16, 32, 64):
            spec = hk.make_spec(dom, symbol, dom.diameter() / divisor)
            errors.append(abs(hk.hilbert_schmidt_squared(spec) / target - 1))
        assert errors[-1] < 0.02
        assert errors[-1] < errors[0]

    def test_constant_symbol_gives_overlap_volume(self, unit_square):
        axes = bv.symbol_grid(unit_square.scaled(2.0), 0.05)
        one = bv.SampledSymbol(axes, np.ones(tuple(len(a) for a in axes), dtype=complex))
        # ∫ m(Ω ∩ (z − Ω)) dz = m(Ω)²
        assert hk.overlap_integral(one, unit_square) == pytest.approx(16.0, rel=1e-9)


class TestSpectra:
    def test_gram_matches_svd(self, rng):
        m = rng.standard_normal((60, 40)) + 1j * rng.standard_normal((60, 40))
        a = hk.singular_spectrum(m).values
        b = hk.singular_spectrum(m, method="gram").values
        assert np.allclose(a, b, rtol=1e-9)
        assert hk.top_singular_value(m) == pytest.approx(a[0], rel=1e-8)
        with pytest.raises(ValueError):
            hk.singular_spectrum(m, method="qr")

    def test_schatten_examples(self):
        assert hk.schatten_norm([3.0, 4.0], 2) == pytest.approx(5.0)
        assert hk.schatten_norm([3.0, 4.0], 1) == pytest.approx(7.0)
        assert hk.schatten_norm([3.0, 4.0], math.inf) == 4.0
        assert hk.schatten_norm([], 2) == 0.0
        with pytest.raises(ValueError):
            hk.schatten_norm([1.0], 0.5)
        with pytest.raises(ValueError):
            hk.SingularSpectrum(np.array([1.0, 2.0]), 0.1, 2)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0, 1e3), min_size=1, max_size=20), st.floats(1, 8))
    def test_schatten_decreasing_in_p(self, values, p):
        s = sorted(values, reverse=True)
        assert hk.schatten_norm(s, p + 1) <= hk.schatten_norm(s, p) * (1 + 1e-12) + 1e-300
        assert hk.schatten_norm(s, p) >= max(s) * (1 - 1e-12)

    def test_frobenius_equals_s2(self, rng):
        m = rng.standard_normal((30, 30))
        assert hk.schatten_norm(hk.singular_spectrum(m), 2) == pytest.approx(np.linalg.norm(m), rel=1e-12)
        assert hk.schatten_norm(hk.singular_spectrum(m), 1) == pytest.approx(np.linalg.norm(m, "nuc"), rel=1e-12)


class TestMultipliers:
    def test_fejer_kernel_bound(self, unit_disc, disc_spec):
        kernel = hk.assemble_hankel(disc_spec)
        report = hk.schur_multiplier_check(kernel, disc_spec.nodes, hk.fejer_multiplier(0.8, [0.2, 0.1]))
        assert report.holds
        assert report.norms[math.inf] <= report.bounds[math.inf] * (1 + 1e-6)

    def test_squared_member_bound(self, square_pou4, unit_square):
        sq = pt.build_squared_family(square_pou4)
        symbol = bv.random_symbol(unit_square.scaled(2.0), 0.1, seed=3, modes=6)
        spec = hk.make_spec(unit_square, symbol, 0.2)
        mult = hk.member_multiplier(sq, 7)
        report = hk.schur_multiplier_check(hk.assemble_hankel(spec), spec.nodes, mult)
        assert report.holds
        with pytest.raises(ValueError):
            hk.member_multiplier(square_pou4, 7)


class TestSchurMatrix:
    def test_box_beta_matches_pairwise_rule(self, square_dec4):
        beta = hk.beta_levels(square_dec4)
        keys = [(t.j, t.index) for t in square_dec4.tiles]
        for p in range(0, len(keys), 5):
            for q in range(0, len(keys), 7):
                assert beta[p, q] == dc.beta_index(square_dec4, keys[p], keys[q])[0]

    @pytest.mark.parametrize("name", ["square_dec4", "disc_dec3"])
    def test_profile_sums_match_dense_matrix(self, name, request):
        dec = request.getfixturevalue(name)
        profile = hk.schur_profile(dec)
        for sigma, tau, rho, gamma in ((0.2, 0.2, 0.4, 0.1), (0.1, 0.3, 0.3, 0.0)):
            dense = hk.assemble_schur_matrix(dec, sigma, tau, rho)
            for j in range(1, dec.j_max + 1):
                expected = hk.schur_sums(dense.truncated(j), gamma)
                assert profile.sums(sigma, tau, rho, gamma, j) == pytest.approx(expected, rel=1e-12)

    def test_interval_rows_bounded_by_geometric_series(self):
        dec = dc.decompose_box(1, 30)
        profile = hk.schur_profile(dec)
        sigma = 0.3
        _, row = profile.sums(sigma, sigma, 2 * sigma, 0.0, 30)
        # entries 2^{-σ|j−k|} across the two branches
        assert row <= 2 * hk.geometric_row_bound(2 ** -sigma)

    def test_tail_increment_rates(self):
        js = list(range(10))
        assert hk.tail_increment_rate(js, [2.0 - 0.5 ** j for j in js]) == pytest.approx(-math.log(2), rel=1e-9)
        assert hk.tail_increment_rate(js, [1.5 ** j for j in js]) == pytest.approx(math.log(1.5), rel=1e-9)
        assert hk.tail_increment_rate(js[:4], [1, 2, 3, 4]) is None
        assert hk.tail_increment_rate(js, [1.0] * 10) == -math.inf

    def test_verdicts(self):
        dec = dc.decompose_box(1, 40)
        profile = hk.schur_profile(dec)
        truncations = range(33, 41)
        assert hk.profile_test(profile, 0.3, 0.3, 0.6, 0.0, truncations).verdict == "stable"
        assert hk.profile_test(profile, -0.2, -0.2, 0.0, 0.0, truncations).verdict == "growing"

    def test_growth_rate_needs_three_points(self):
        with pytest.raises(ValueError):
            hk.growth_rate([1, 2], [1.0, 2.0])

    def test_frontier_interpolation(self):
        dec = dc.decompose_box(1, 40)
        scan = hk.schur_frontier(hk.schur_profile(dec), [-0.2, 0.3], [0.0], range(33, 41))
        assert scan.verdicts == ["growing", "stable"]
        assert -0.2 < scan.frontier < 0.3


class TestToeplitz:
    @pytest.mark.parametrize("base", [2.0, 8.0])
    def test_norm_matches_dense_and_limit(self, base):
        report = hk.toeplitz_norm_check(base, (16, 64, 256))
        n = 64
        dense = base ** -np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        assert report.norms[1] == pytest.approx(np.linalg.norm(dense, 2), rel=1e-12)
        assert report.limit == pytest.approx((base + 1) / (base - 1))
        assert report.bounded and report.increasing

    def test_invalid_base(self):
        with pytest.raises(ValueError):
            hk.toeplitz_norm(1.0, 4)
