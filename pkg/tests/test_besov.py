import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwlab import besov as bv
from pwlab import decomposition as dc
from pwlab import geometry as geo
from pwlab import partition as pt


@pytest.fixture(scope="module")
def line_pou():
    return bv.doubled_partition(dc.decompose_box(1, 4), grid=512)


@pytest.fixture(scope="module")
def line_symbol():
    return bv.random_symbol(geo.box([2.0]), 0.01, seed=3, modes=12)


@pytest.fixture(scope="module")
def square_squared(square_pou4):
    return pt.build_squared_family(square_pou4)


@pytest.fixture(scope="module")
def plane_symbols():
    dom = geo.box([2.0, 2.0])
    return [bv.random_symbol(dom, 0.05, seed=s, modes=8) for s in (1, 2)]


def direct_tile_norms(pou, symbol, p, exponents, count=1 << 21, step=8e-6):
    """‖F^{-1}(φ̂ ψ̂_p)‖_r from a dense global-frequency FFT (1-D)."""
    xi = (np.arange(count) - count // 2) * step
    inside = np.abs(xi) < 2
    values = np.zeros(count, dtype=complex)
    values[inside] = pou.member_at(p, xi[inside][:, None]) * symbol.smooth(xi[inside][:, None])
    spatial = np.abs(np.fft.ifft(np.fft.ifftshift(values))) * count * step
    dx = 1 / (count * step)
    return [float(((spatial ** r).sum() * dx) ** (1 / r)) for r in exponents]


class TestSymbols:
    def test_seeded_and_tilted(self):
        dom = geo.box([2.0, 2.0])
        a = bv.random_symbol(dom, 0.1, seed=4)
        b = bv.random_symbol(dom, 0.1, seed=4)
        assert np.array_equal(a.values, b.values)
        tilted = bv.random_symbol(dom, 0.1, seed=4, tilt=1.0)
        assert np.abs(tilted.values).sum() < np.abs(a.values).sum()

    def test_grid_covers_domain(self, unit_disc):
        axes = bv.symbol_grid(unit_disc.scaled(2.0), 0.3)
        for ax in axes:
            assert ax[0] <= -2 and ax[-1] >= 2
            assert np.allclose(np.diff(ax), 0.3)

    def test_interpolant_reproduces_nodes(self, plane_symbols):
        sym = plane_symbols[0]
        mesh = np.stack(np.meshgrid(*sym.axes, indexing="ij"), -1)
        assert np.allclose(sym(mesh[::7, ::5]), sym.values[::7, ::5])
        assert np.allclose(sym.values, sym.smooth(mesh))

    def test_linear_structure(self, plane_symbols):
        first, second = plane_symbols
        combo = first.scaled(2 - 1j) + second
        x = np.array([[0.3, -0.2], [1.1, 0.7]])
        assert np.allclose(combo.smooth(x), (2 - 1j) * first.smooth(x) + second.smooth(x))

    def test_validation(self):
        axes = (np.linspace(0, 1, 3),)
        with pytest.raises(ValueError):
            bv.SampledSymbol(axes, np.array([0, np.nan, 0], dtype=complex))
        with pytest.raises(ValueError):
            bv.SampledSymbol(axes, np.zeros(4, dtype=complex))
        with pytest.raises(ValueError):
            bv.BesovParams(0.0, 0.5, 1.0)

    def test_l2_norm_of_constant(self):
        sym = bv.SampledSymbol((np.linspace(-1, 1, 201), np.linspace(-1, 1, 201)),
                               np.ones((201, 201), dtype=complex))
        region = geo.disc(0.5)
        assert sym.l2_norm_squared(region) == pytest.approx(math.pi / 4, rel=2e-2)


class TestTileNorms:
    def test_against_dense_transform(self, line_pou, line_symbol):
        norms, tail = bv.member_lp_norms(line_symbol, line_pou, [1, 2, 3])
        assert tail <= 1e-3
        for p in (3, 7):
            expected = direct_tile_norms(line_pou, line_symbol, p, (1, 2, 3))
            assert norms[p] == pytest.approx(expected, rel=1e-2)
            assert norms[p][1] == pytest.approx(expected[1], rel=1e-5)

    def test_parseval_on_the_space_side(self, square_squared, plane_symbols):
        conv = bv.tile_convolution(plane_symbols[0], square_squared, 6)
        assert conv.lp_norm(2).value ** 2 == pytest.approx(conv.space_l2_squared(), rel=1e-10)

    def test_sup_bounded_by_fourier_l1(self, square_squared, plane_symbols):
        conv = bv.tile_convolution(plane_symbols[1], square_squared, 12)
        fourier_l1 = np.abs(conv.fourier_values).sum() * np.prod(conv.grid.steps) * conv.jacobian
        assert conv.lp_norm(math.inf).value <= fourier_l1 * (1 + 1e-12)

    def test_support_must_stay_in_symbol_grid(self, square_squared):
        small = bv.random_symbol(geo.box([1.0, 1.0]), 0.05, seed=1, modes=4)
        with pytest.raises(ValueError):
            bv.tile_convolution(small, square_squared, 0)


@pytest.fixture(scope="module")
def cache(square_squared):
    return bv.MemberCache(square_squared)


class TestNorms:
    def test_homogeneity(self, square_squared, plane_symbols, cache):
        params = bv.BesovParams(0.5, 1.0, 1.0)
        base = bv.besov_norm(plane_symbols[0], square_squared, params, cache).value
        scaled = bv.besov_norm(plane_symbols[0].scaled(-3 + 4j), square_squared, params, cache).value
        assert scaled == pytest.approx(5 * base, rel=1e-10)

    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_triangle_inequality(self, square_squared, plane_symbols, cache, p):
        params = bv.BesovParams(0.5, p, 1.0 if math.isinf(p) else p)
        first, second = plane_symbols
        lhs = bv.besov_norm(first + second, square_squared, params, cache).value
        rhs = sum(bv.besov_norm(s, square_squared, params, cache).value for s in plane_symbols)
        assert lhs <= rhs * (1 + 1e-9)

    def test_decreasing_in_smoothness(self, square_squared, plane_symbols, cache):
        values = [bv.besov_norm(plane_symbols[0], square_squared, bv.BesovParams(s, 2.0, 2.0), cache).value
                  for s in (0.0, 0.5, 1.0, 2.0)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_decreasing_in_q(self, square_squared, plane_symbols, cache):
        values = [bv.besov_norm(plane_symbols[1], square_squared, bv.BesovParams(0.3, 1.0, q), cache).value
                  for q in (1.0, 2.0, 4.0, math.inf)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_profile_sums_to_norm(self, square_squared, plane_symbols, cache):
        res = bv.besov_norm(plane_symbols[0], square_squared, bv.BesovParams(0.2, 2.0, 2.0), cache)
        assert sum(res.profile.values()) == pytest.approx(res.value ** 2, rel=1e-12)

    def test_zero_symbol(self, square_squared):
        zero = bv.zero_symbol(geo.box([2.0, 2.0]), 0.05)
        assert bv.besov_norm(zero, square_squared, bv.BesovParams(0, 1, 1)).value == 0.0

    def test_same_partition_ratio_is_one(self, square_squared, plane_symbols):
        ratio = bv.equivalence_ratio(plane_symbols[0], square_squared, square_squared, bv.BesovParams(0.5, 1, 1))
        assert ratio == pytest.approx(1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0, 10), min_size=1, max_size=8), st.floats(-1, 2), st.floats(1, 6))
    def test_combine_matches_definition(self, values, s, q):
        norms = np.array(values)
        levels = np.arange(len(values))
        expected = sum((2.0 ** (-j * s) * v) ** q for j, v in zip(levels, values)) ** (1 / q)
        assert bv.combine(norms, levels, bv.BesovParams(s, 1.0, q), 2.0) == pytest.approx(expected, rel=1e-9,
                                                                                           abs=1e-300)
