import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvimg import polytope3d as p3
from curvimg.quadrature import icosphere_grid

import oracles

GRID = icosphere_grid(3)
AXES = np.vstack([np.eye(3), -np.eye(3)])


def axis_nodes(grid=GRID):
    return [int(np.argmax(grid.nodes @ e)) for e in AXES]


def cube(half=1.0):
    h = np.full(GRID.size, 10.0)
    h[axis_nodes()] = half
    return p3.reconstruct(h, GRID)


class TestReconstruct:
    def test_axis_directions_are_nodes(self):
        for e, i in zip(AXES, axis_nodes()):
            assert np.abs(GRID.nodes[i] - e).max() < 1e-15

    def test_cube(self):
        P = cube()
        assert P.volume == pytest.approx(8.0, abs=1e-12)
        assert P.active.sum() == 6
        assert P.areas[axis_nodes()] == pytest.approx(np.full(6, 4.0), abs=1e-12)

    def test_ball_volume(self):
        # circumscribed polytope: relative excess 4.8e-3 at 642 nodes
        assert p3.ball().volume == pytest.approx(4 * math.pi / 3, rel=1e-2)
        assert p3.ball().volume > 4 * math.pi / 3

    @settings(max_examples=10)
    @given(st.integers(0, 1000), st.booleans())
    def test_divergence_identity(self, seed, even):
        P = p3.random_polytope(seed, even=even)
        assert abs(P.areas @ P.support / 3 - P.volume) < 1e-10

    @settings(max_examples=5)
    @given(st.integers(0, 1000))
    def test_against_halfspace_intersection(self, seed):
        P = p3.random_polytope(seed)
        areas, vol = oracles.facet_areas_by_hull(GRID.nodes, P.h)
        assert P.volume == pytest.approx(vol, rel=1e-12)
        assert np.abs(P.areas - areas).max() < 1e-10

    def test_support_never_exceeds_h(self):
        P = p3.reconstruct(1.0 + 0.3 * GRID.nodes[:, 0] ** 3, GRID)
        assert np.all(P.support <= P.h + 1e-13)
        assert np.abs(P.support - P.h)[P.active].max() < 1e-12

    def test_origin_outside_is_handled(self):
        P = p3.ball().translate([1.5, 0, 0])
        assert not P.origin_interior
        Q = p3.reconstruct(P.support, GRID)
        assert Q.volume == pytest.approx(P.volume, rel=1e-12)


class TestSupportEval:
    def test_cube(self):
        P = cube()
        assert p3.support_eval(P, [1.0, 0, 0]) == pytest.approx(1.0, abs=1e-14)
        assert p3.support_eval(P, np.ones(3) / math.sqrt(3)) == pytest.approx(math.sqrt(3), abs=1e-14)

    def test_active_nodes(self):
        P = p3.random_polytope(3)
        vals = p3.support_eval(P, GRID.nodes)
        assert np.abs(vals - P.h)[P.active].max() < 1e-12


class TestMixedVolume:
    def test_cube_cube(self):
        assert p3.mixed_volume_1(cube(), cube()) == pytest.approx(8.0, abs=1e-12)

    def test_cube_ball(self):
        assert p3.mixed_volume_1(cube(), p3.reconstruct(np.ones(GRID.size), GRID)) == pytest.approx(8.0, abs=1e-12)

    @settings(max_examples=10)
    @given(st.integers(0, 1000), st.integers(0, 1000))
    def test_minkowski_inequality(self, s1, s2):
        K, L = p3.random_polytope(s1), p3.random_polytope(s2 + 7, amplitude=0.6)
        assert p3.mixed_volume_1(K, L) ** 3 >= K.volume**2 * L.volume * (1 - 1e-12)


class TestPolarVolume:
    def test_grid_ball(self):
        P = p3.ball()
        # the polar of the circumscribed polytope is the hull of the nodes
        assert P.polar_volume() == pytest.approx(oracles.hull_volume(GRID.nodes), rel=1e-12)

    def test_cube(self):
        assert cube().polar_volume() == pytest.approx(4 / 3, abs=1e-12)

    @given(st.floats(0.3, 3.0))
    def test_homogeneity(self, lam):
        P = p3.random_polytope(2)
        assert P.scaled(lam).polar_volume() == pytest.approx(lam**-3 * P.polar_volume(), rel=1e-10)

    def test_against_hull_of_dual_vertices(self):
        P = p3.random_polytope(5)
        pts = GRID.nodes[P.active] / P.support[P.active, None]
        assert P.polar_volume() == pytest.approx(oracles.hull_volume(pts), rel=1e-12)


class TestSantalo:
    def test_centered_cube(self):
        assert np.abs(cube().santalo_point()).max() < 1e-10

    def test_equivariance(self):
        P = p3.random_polytope(4)
        s = P.santalo_point()
        c = np.array([0.05, -0.1, 0.02])
        assert P.translate(c).santalo_point() == pytest.approx(s - c, abs=1e-8)

    def test_minimality_probe(self):
        P = p3.random_polytope(6)
        s = P.santalo_point()
        base = P.translate(s).polar_volume()
        rng = np.random.default_rng(1)
        for d in rng.normal(scale=1e-3, size=(30, 3)):
            assert P.translate(s + d).polar_volume() >= base - 1e-12


class TestAreaHessian:
    def test_matches_finite_differences(self):
        P = p3.random_polytope(8)
        H = P.area_hessian()
        idx = np.flatnonzero(P.active)[:12]

        def areas(hsub):
            h = P.h.copy()
            h[idx] = hsub
            return p3.reconstruct(h, GRID).areas

        J = oracles.finite_difference_jacobian(areas, P.h[idx], step=1e-6)
        assert np.abs(J - H[:, idx]).max() < 1e-6

    def test_volume_gradient_is_area(self):
        P = p3.random_polytope(8)
        J = oracles.finite_difference_jacobian(
            lambda h: [p3.reconstruct(h, GRID).volume], P.h, step=1e-6)
        assert np.abs(J[0] - P.areas).max() < 1e-7


def test_hausdorff_self():
    P = p3.random_polytope(1)
    assert p3.hausdorff(P, P) == 0.0


def test_translate_keeps_areas_and_volume():
    P = p3.random_polytope(1)
    Q = P.translate([0.1, 0.2, -0.05])
    assert np.array_equal(Q.areas, P.areas)
    assert Q.volume == P.volume
    assert np.abs(Q.support - (P.support - GRID.nodes @ [0.1, 0.2, -0.05])).max() < 1e-14


def test_closure_of_facet_areas():
    assert p3.random_polytope(12).closure_defect < 1e-13


def test_off_output():
    text = cube().to_off()
    lines = text.splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    assert nv == 8 and nf == 12
