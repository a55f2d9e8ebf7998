import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pwlab import decomposition as dc
from pwlab import partition as pt


@pytest.fixture(scope="module")
def interval_pou():
    return pt.build_partition(dc.decompose_box(1, 5), grid=512)


def spectral_l1(pou, p, count=1 << 21, step=4e-6):
    """Direct inverse transform of ψ̂_p sampled in global frequency coordinates (1-D)."""
    xi = (np.arange(count) - count // 2) * step
    inside = np.abs(xi) < 1
    values = np.zeros(count)
    values[inside] = pou.member_at(p, xi[inside][:, None])
    spatial = np.fft.ifft(np.fft.ifftshift(values)) * count * step
    return float(np.abs(spatial).sum() / (count * step))


class TestBump:
    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.02, 0.45), st.floats(-0.7, 0.7))
    def test_plateau_support_and_range(self, epsilon, u):
        bump = pt.build_base_bump(epsilon, 1)
        value = float(bump.profile(u))
        assert -1e-12 <= value <= 1 + 1e-12
        if abs(u) <= (1 - epsilon) / 2:
            assert value == pytest.approx(1.0, abs=1e-12)
        if abs(u) >= 0.5:
            assert value == 0.0

    def test_profile_is_even_and_monotone_on_the_ramp(self):
        bump = pt.build_base_bump(0.2, 1)
        u = np.linspace(0, 0.5, 2001)
        assert np.allclose(bump.profile(u), bump.profile(-u), atol=1e-13)
        assert np.all(np.diff(bump.profile(u)) <= 1e-13)

    def test_derivative_matches_finite_differences(self):
        bump = pt.build_base_bump(0.2, 1)
        u = np.linspace(-0.49, 0.49, 301)
        h = 1e-6
        numeric = (bump.profile(u + h) - bump.profile(u - h)) / (2 * h)
        assert np.allclose(bump.profile_derivative(u), numeric, atol=1e-4)
        assert bump.derivative_sup() == pytest.approx(bump.derivative_sup(finite_difference=True), rel=1e-3)

    def test_tensor_product(self):
        bump = pt.build_base_bump(0.1, 2)
        u = np.array([[0.47, -0.3], [0.1, 0.48]])
        assert np.allclose(bump(u), bump.profile(u[:, 0]) * bump.profile(u[:, 1]))

    def test_self_convolution_against_quadrature(self):
        bump = pt.build_base_bump(0.2, 1)
        for s in (0.0, 0.3, 0.75, 0.95):
            expected = integrate.quad(lambda v: bump.profile(v) * bump.profile(s - v), -0.5, 0.5,
                                      limit=200, points=[-bump.half, bump.half, s - bump.half, s + bump.half])[0]
            assert bump.self_convolution_1d(s) == pytest.approx(expected, abs=1e-6)
        assert bump.self_convolution_1d(1.2) == 0.0

    def test_square_integral(self):
        bump = pt.build_base_bump(0.2, 1)
        grid = np.linspace(-0.5, 0.5, 400_001)
        assert bump.square_integral_1d == pytest.approx(np.trapezoid(bump.profile(grid) ** 2, grid), rel=1e-8)
        assert bump.square_integral_1d == pytest.approx(float(bump.self_convolution_1d(0.0)), rel=1e-6)

    def test_rejects_bad_parameters(self):
        for eps in (0.0, 0.5, -0.1):
            with pytest.raises(ValueError):
                pt.build_base_bump(eps, 2)
        with pytest.raises(ValueError):
            pt.build_base_bump(0.1, 0)


class TestNormalisedFamily:
    @pytest.mark.parametrize("name", ["square_pou4", "disc_pou3"])
    def test_sums_to_one_on_covered_nodes(self, name, request):
        checks = request.getfixturevalue(name).checks
        assert checks["covered_nodes"] > 0
        assert checks["sum_error"] < 1e-8
        assert checks["support_violations"] == 0
        assert checks["denominator_min"] >= 1 - 1e-9

    def test_members_are_bounded_and_supported(self, disc_pou3, rng):
        x = rng.uniform(-1, 1, (4000, 2))
        samples = disc_pou3.samples(x)
        assert samples.value.min() > 0 and samples.value.max() <= 1 + 1e-12
        for p in (0, 17, 60):
            pts, _ = samples.for_member(p)
            u = disc_pou3.tiles[p].T(x[pts])
            assert np.all(np.abs(u) < 0.5)

    def test_member_at_agrees_with_samples(self, square_pou4, rng):
        x = rng.uniform(-1, 1, (500, 2))
        direct = sum(square_pou4.member_at(p, x) for p in range(square_pou4.member_count))
        assert np.allclose(direct, square_pou4.samples(x).total())

    def test_interval_sum_is_one_inside(self, interval_pou):
        x = np.linspace(-0.9, 0.9, 3001)[:, None]
        assert np.allclose(interval_pou.samples(x).total(), 1.0, atol=1e-12)

    def test_l1_norm_against_direct_transform(self, interval_pou):
        for p in (2, 5):
            ours = pt.l1_norm(interval_pou, p, padding=8).value
            assert ours == pytest.approx(spectral_l1(interval_pou, p), rel=2e-3)
            assert pt.l1_norm(interval_pou, p).value == pytest.approx(ours, rel=1e-2)

    def test_plancherel_on_reference_grid(self, interval_pou):
        grid = pt.reference_grid(pt.member_sharpness(interval_pou, 3), interval_pou.bump.width, padding=4)
        values = pt.member_reference_values(interval_pou, 3, grid)
        l2 = pt.space_lp_norm(values, grid, 2.0).value
        assert l2 ** 2 == pytest.approx(float((values ** 2).sum() * np.prod(grid.steps)), rel=1e-10)

    def test_sup_norm_is_integral_of_nonnegative_member(self, interval_pou):
        grid = pt.reference_grid(pt.member_sharpness(interval_pou, 4), interval_pou.bump.width)
        values = pt.member_reference_values(interval_pou, 4, grid)
        sup = pt.space_lp_norm(values, grid, math.inf).value
        assert sup == pytest.approx(float(values.sum() * np.prod(grid.steps)), rel=1e-12)

    def test_l1_norms_bounded_uniformly(self, interval_pou):
        trend = pt.l1_trend(interval_pou)
        assert abs(trend["slope"]) < 0.1
        assert interval_pou.checks["l1_classes"] <= interval_pou.member_count
        assert trend["overall"] >= 1.0

    def test_reference_grid_limit(self):
        with pytest.raises(ValueError):
            pt.reference_grid([1e4, 1e4], 0.01, max_nodes=1000)


class TestSquaredFamily:
    def test_closed_form_l1(self, square_pou4):
        sq = pt.build_squared_family(square_pou4)
        bump = sq.bump
        xi = np.linspace(-0.5, 0.5, 20001)
        one_dim = np.trapezoid(bump.profile(xi) ** 2, xi)
        for p in (0, 9, 30):
            tile = sq.tiles[p]
            expected = 2.0 ** tile.j * tile.A.volume * one_dim ** 2
            assert pt.l1_norm(sq, p).value == pytest.approx(expected, rel=1e-6)

    def test_squared_requires_normalised_input(self, square_pou4):
        sq = pt.build_squared_family(square_pou4)
        with pytest.raises(ValueError):
            pt.build_squared_family(sq)

    def test_member_is_scaled_self_convolution(self, square_pou4, rng):
        sq = pt.build_squared_family(square_pou4)
        tile = sq.tiles[5]
        s = rng.uniform(-0.9, 0.9, (50, 2))
        x = 2 * tile.A.center + s @ tile.A.edges.T
        expected = 2.0 ** tile.j * tile.A.volume * sq.bump.self_convolution(s)
        assert np.allclose(sq.member_at(5, x), expected)

    @pytest.mark.parametrize("name", ["square_pou4", "disc_pou3"])
    def test_envelope_bounded_away_from_zero(self, name, request):
        env = pt.squared_envelope(request.getfixturevalue(name), grid=96)
        assert env["covered_nodes"] > 0
        assert 0 < env["lower"] <= env["upper"] < math.inf


def test_global_grid_cell_centres(unit_square):
    axes, mesh = pt.global_grid(unit_square, 4)
    assert np.allclose(axes[0], [-0.75, -0.25, 0.25, 0.75])
    assert mesh.shape == (16, 2)
