import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from pwlab import decomposition as dc
from pwlab import geometry as geo
from pwlab import weight as wt

TRIANGLE = [[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]]


@pytest.fixture(scope="module")
def triangle_dec():
    return dc.decompose_polygon2d(geo.polygon(TRIANGLE), j_max=4)


def level_count_box(n, j):
    return sum(1 for idx in np.ndindex(*(2 * j + 1,) * n) if sum(abs(i - j) for i in idx) == j)


class TestBox:
    def test_tile_counts(self, square_dec4):
        assert square_dec4.counts == [level_count_box(2, j) for j in range(5)]
        assert len(dc.decompose_box(1, 6).tiles) == 13

    def test_one_dimensional_intervals_tile_the_line(self):
        edges = sorted(dc.interval_E(i) for i in range(-8, 9))
        for (a0, a1), (b0, b1) in zip(edges, edges[1:]):
            assert a1 == pytest.approx(b0)
        assert edges[0][0] == pytest.approx(-(1 - 2.0 ** -9))

    def test_dyadic_index_matches_intervals(self, rng):
        y = rng.uniform(-0.999, 0.999, 2000)
        idx = dc.dyadic_index(y)
        for value, i in zip(y, idx):
            lo, hi = dc.interval_E(int(i))
            assert lo <= value <= hi

    def test_beta_closed_form(self, square_dec4):
        assert dc.box_beta_1d(3, 2) == 2
        assert dc.box_beta_1d(-3, -1) == -1
        assert dc.box_beta_1d(3, -1) == 0
        assert dc.beta_index(square_dec4, (2, (1, 1)), (3, (2, 1))) == (2, (1, 1))

    def test_beta_is_symmetric(self, disc_dec3):
        keys = [(t.j, t.index) for t in disc_dec3.tiles[::9]]
        for first in keys:
            for second in keys:
                assert dc.beta_index(disc_dec3, first, second) == dc.beta_index(disc_dec3, second, first)

    def test_rejects_non_box(self, unit_disc):
        with pytest.raises(ValueError):
            dc.decompose_box(2, 3, unit_disc)


def check_nesting(dec, per_axis=5):
    for t in dec.tiles:
        pts = t.E.sample_points(per_axis)
        assert np.all(np.abs(t.T(pts)) < 0.5)
        corners = t.A.corners()
        assert np.allclose(np.abs(t.T(corners)), 0.5)


class TestStructure:
    @pytest.mark.parametrize("name", ["square_dec4", "disc_dec3", "triangle_dec"])
    def test_e_inside_a(self, name, request):
        check_nesting(request.getfixturevalue(name))

    @pytest.mark.parametrize("name", ["square_dec4", "disc_dec3", "triangle_dec"])
    def test_a_inside_domain(self, name, request):
        dec = request.getfixturevalue(name)
        for t in dec.tiles:
            inner = t.A.center + (t.A.corners() - t.A.center) * (1 - 1e-9)
            assert np.all(geo.contains(dec.domain, inner))

    @pytest.mark.parametrize("name", ["square_dec4", "disc_dec3", "triangle_dec"])
    def test_locate_agrees_with_membership(self, name, request, rng):
        dec = request.getfixturevalue(name)
        lo, hi = dec.domain.bounding_box()
        pts = lo + (hi - lo) * rng.random((3000, 2))
        found = dec.locate(pts)
        for x, p in zip(pts, found):
            if p >= 0:
                assert dec.tiles[p].E.contains(x[None])[0]

    def test_e_tiles_disjoint_in_the_plane(self, triangle_dec):
        polys = [shapely.Polygon(t.E.outline(16)) for t in triangle_dec.tiles]
        total = sum(p.area for p in polys)
        union = shapely.union_all(polys).area
        assert union == pytest.approx(total, rel=1e-9)

    def test_disc_polar_areas(self, disc_dec3):
        for t in disc_dec3.tiles:
            count = 2 ** (t.j + 3)
            expected = math.pi * (t.E.r1 ** 2 - t.E.r0 ** 2) / count
            assert t.E.area() == pytest.approx(expected, rel=1e-12)

    def test_disc_counts(self, disc_dec3):
        assert disc_dec3.counts == [8, 16, 32, 64]

    def test_measure_calibration(self, disc_dec3):
        scaled = np.array([t.E.area() * 8.0 ** t.j for t in disc_dec3.tiles])
        assert scaled.max() / scaled.min() <= 8

    def test_disc_e_tiles_sum_to_covered_area(self, disc_dec3):
        r_outer = disc_dec3.tiles[-1].E.r1
        assert sum(t.E.area() for t in disc_dec3.tiles) == pytest.approx(math.pi * r_outer ** 2, rel=1e-12)

    def test_tiles_follow_weight_levels(self, disc_dec3):
        weight = wt.normalize(disc_dec3.domain, base=disc_dec3.a)
        for t in disc_dec3.tiles[::5]:
            lv = wt.level_index(wt.omega_half(weight, t.E.sample_points(5)), disc_dec3.a)
            assert np.abs(lv - t.j).max() <= 2


class TestTransforms:
    def test_scaled_and_truncated(self, square_dec4):
        doubled = square_dec4.scaled(2.0)
        assert doubled.scale == 2.0
        assert np.allclose(doubled.tiles[7].A.center, 2 * square_dec4.tiles[7].A.center)
        x = np.array([[0.93, 0.1]])
        assert doubled.locate(2 * x)[0] == square_dec4.locate(x)[0]
        short = square_dec4.truncated(2)
        assert short.j_max == 2 and len(short.tiles) == sum(square_dec4.counts[:3])
        with pytest.raises(ValueError):
            short.truncated(3)

    def test_extension_preserves_positions(self, disc_dec3):
        ext = disc_dec3.extended(1)
        assert ext.j_max == 4
        for p in (0, 10, 50):
            assert np.allclose(ext.tiles[p].A.center, disc_dec3.tiles[p].A.center)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 119), st.floats(-0.49, 0.49), st.floats(-0.49, 0.49))
    def test_reference_map_round_trip(self, disc_dec3, k, u, v):
        tile = disc_dec3.tiles[k]
        ref = np.array([u, v])
        assert np.allclose(tile.T(tile.A.from_reference(ref)), ref)


class TestErrors:
    def test_parallelogram_outside_domain(self, unit_disc):
        with pytest.raises(dc.ContainmentError) as info:
            dc.decompose_smooth2d(unit_disc, m=1, epsilon=0.4, j_max=2)
        assert info.value.excess > 0
        assert isinstance(info.value, ValueError)

    def test_parameter_checks(self, unit_disc, unit_square):
        with pytest.raises(ValueError):
            dc.decompose_smooth2d(unit_disc, m=3, epsilon=0.6, j_max=2)
        with pytest.raises(ValueError):
            dc.decompose_smooth2d(unit_square, m=3, epsilon=0.05, j_max=2)
        with pytest.raises(ValueError):
            dc.decompose_smooth2d(geo.disc(1.0, (0.5, 0.0)), j_max=2)
        with pytest.raises(ValueError):
            dc.decompose_polygon2d(unit_disc, 2)


class TestAdmissibility:
    def test_interval_report(self):
        report = dc.admissibility_report(dc.decompose_box(1, 6))
        assert report.finite and report.admissible
        assert sorted(report.by_truncation) == [4, 5, 6]
        assert report.constants["c2"] / report.constants["c1"] == pytest.approx(2.0)

    def test_disc_report_small(self, disc_dec3):
        report = dc.admissibility_report(disc_dec3, samples=50)
        assert report.finite
        assert report.constants["epsilon"] > 0
        assert report.details["G_violations"] == 0
