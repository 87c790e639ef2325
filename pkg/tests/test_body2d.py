import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvimg.body2d import (
    Body2D,
    ConvexityError,
    curvature_fn,
    disk,
    ellipse,
    hausdorff,
    mixed_volume,
    polar_volume,
    random_body,
    santalo_point,
    translate,
    volume,
)
from curvimg.quadrature import circle_grid, vector_moment

import oracles

seeds = st.integers(min_value=0, max_value=10_000)


def cos3_body():
    a = np.zeros(9)
    b = np.zeros(9)
    a[0], a[3] = 1.0, 0.05
    return Body2D(a, b)


class TestCurvature:
    def test_disk(self):
        assert np.allclose(curvature_fn(disk(1.7)), 1.7, atol=1e-14)

    def test_cos3(self):
        t = circle_grid().theta
        assert np.abs(curvature_fn(cos3_body()) - (1 - 0.4 * np.cos(3 * t))).max() < 1e-14

    @given(seeds)
    def test_closure(self, seed):
        K = random_body(seed)
        assert np.abs(vector_moment(K.f, K.grid)).max() < 1e-12

    def test_nonconvex_rejected(self):
        a = np.zeros(5)
        a[0], a[2] = 1.0, 0.5  # f = 1 - 1.5 cos 2t
        with pytest.raises(ConvexityError):
            Body2D(a, np.zeros(5)).volume


class TestVolume:
    def test_disks(self):
        assert volume(disk(1.0)) == pytest.approx(math.pi, abs=1e-13)
        assert volume(disk(2.0)) == pytest.approx(4 * math.pi, abs=1e-13)

    def test_cos3_matches_shoelace(self):
        K = cos3_body()
        assert abs(volume(K) - oracles.shoelace_extrapolated(K, 4096)) < 1e-8

    @given(seeds)
    def test_random_matches_shoelace(self, seed):
        K = random_body(seed, even=seed % 2 == 0)
        assert volume(K) == pytest.approx(oracles.shoelace_extrapolated(K), rel=1e-10)

    def test_perimeter_is_polyline_length(self):
        K = random_body(5)
        assert K.perimeter() == pytest.approx(
            oracles.perimeter_polyline(oracles.boundary_points(K, 8192)), rel=1e-6)


class TestMixedVolume:
    def test_ball(self):
        assert mixed_volume(disk(), disk()) == pytest.approx(math.pi, abs=1e-13)

    def test_disks(self):
        assert mixed_volume(disk(0.5), disk(3.0)) == pytest.approx(1.5 * math.pi, abs=1e-13)

    def test_matches_finite_difference_of_area(self):
        K, L = random_body(1), random_body(2)
        assert mixed_volume(K, L) == pytest.approx(oracles.mixed_volume_fd(K, L), rel=1e-6)

    @given(seeds, seeds)
    def test_minkowski_inequality(self, s1, s2):
        K, L = random_body(s1), random_body(s2 + 1, amplitude=0.5)
        assert mixed_volume(K, L) ** 2 - volume(K) * volume(L) >= -1e-12


class TestPolarVolume:
    def test_disks(self):
        assert polar_volume(disk(1.0)) == pytest.approx(math.pi, abs=1e-13)
        assert polar_volume(disk(2.0)) == pytest.approx(math.pi / 4, abs=1e-13)

    def test_ellipse(self):
        assert polar_volume(ellipse(2, 0.5, degree=128)) == pytest.approx(math.pi, rel=1e-10)

    def test_matches_halfspace_oracle(self):
        K = random_body(11)
        assert polar_volume(K) == pytest.approx(oracles.polar_area_halfspaces(K), rel=1e-6)


class TestTranslate:
    def test_zero(self):
        K = disk()
        assert hausdorff(translate(K, (0, 0)), K) == 0.0

    def test_volume_invariant(self):
        assert volume(translate(disk(), (0.3, 0))) == pytest.approx(math.pi, abs=1e-13)

    def test_curvature_unchanged(self):
        K = random_body(4)
        assert np.array_equal(translate(K, (0.2, -0.4)).f, K.f)

    def test_shifts_support(self):
        K = random_body(4)
        x = np.array([0.2, -0.4])
        L = translate(K, x)
        assert np.abs(L.h - (K.h - K.grid.nodes @ x)).max() < 1e-14


class TestSantalo:
    def test_symmetric_body(self):
        assert np.abs(santalo_point(random_body(3, even=True))).max() < 1e-12

    def test_equivariance(self):
        # K - c has Santalo point -c
        c = np.array([0.25, -0.1])
        assert santalo_point(translate(disk(), c)) == pytest.approx(-c, abs=1e-10)
        K = random_body(9)
        s = santalo_point(K)
        assert santalo_point(translate(K, c)) == pytest.approx(s - c, abs=1e-10)

    def test_minimality_probe(self):
        K = random_body(7)
        s = santalo_point(K)
        base = polar_volume(translate(K, s))
        rng = np.random.default_rng(0)
        for d in rng.normal(scale=1e-3, size=(100, 2)):
            assert polar_volume(translate(K, s + d)) >= base - 1e-14

    def test_matches_direct_minimizer(self):
        K = random_body(13)
        assert santalo_point(K) == pytest.approx(oracles.santalo_point_direct(K), abs=1e-5)


class TestHausdorff:
    def test_self(self):
        K = random_body(2)
        assert hausdorff(K, K) == 0

    def test_disks(self):
        assert hausdorff(disk(1.0), disk(1.4)) == pytest.approx(0.4, abs=1e-14)

    @given(seeds, seeds)
    def test_symmetric(self, s1, s2):
        K, L = random_body(s1), random_body(s2)
        assert hausdorff(K, L) == hausdorff(L, K)


class TestRandomBody:
    def test_amplitude_zero_is_disk(self):
        K = random_body(3, amplitude=0.0)
        assert hausdorff(K, disk(1.0, degree=K.degree)) < 1e-15

    @given(seeds, st.floats(0.0, 0.95), st.booleans())
    def test_min_curvature(self, seed, amp, even):
        K = random_body(seed, amplitude=amp, even=even)
        assert K.f.min() >= 0.1 - 1e-12

    def test_deterministic(self):
        K1, K2 = random_body(42), random_body(42)
        assert np.array_equal(K1.a, K2.a) and np.array_equal(K1.b, K2.b)

    def test_even_is_symmetric(self):
        assert random_body(8, even=True).is_symmetric
        assert not random_body(8).is_symmetric


def test_support_at_is_homogeneous():
    K = random_body(6)
    v = np.array([[0.3, -1.2], [2.0, 0.5]])
    u = v / np.linalg.norm(v, axis=1, keepdims=True)
    assert K.support_at(v) == pytest.approx(np.linalg.norm(v, axis=1) * K.support_at(u), rel=1e-14)


def test_support_is_max_over_boundary():
    K = random_body(6)
    pts = oracles.boundary_points(K, 8192)
    t = np.linspace(0, 2 * np.pi, 37)
    u = np.column_stack([np.cos(t), np.sin(t)])
    assert (pts @ u.T).max(axis=0) == pytest.approx(K.eval(t), abs=1e-6)
