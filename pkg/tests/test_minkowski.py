import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvimg import polytope3d as p3
from curvimg.body2d import Body2D, disk, hausdorff, random_body
from curvimg.minkowski import (
    ClosureError,
    ClosureRepairWarning,
    CurvatureData,
    SolveInfo,
    closure_repair,
    solve_2d,
    solve_3d,
)
from curvimg.quadrature import circle_grid, icosphere_grid, vector_moment

C = circle_grid()
S = icosphere_grid(3)


def strip_first_harmonics(K):
    a, b = K.a.copy(), K.b.copy()
    a[1] = b[1] = 0.0
    return Body2D(a, b, K.grid)


class TestSolve2D:
    def test_constant(self):
        K = solve_2d(CurvatureData(C, np.full(C.size, 1.3)))
        assert hausdorff(K, disk(1.3, degree=K.degree)) < 1e-14

    def test_cos3(self):
        K = solve_2d(CurvatureData(C, 1 - 0.4 * np.cos(3 * C.theta)))
        assert np.abs(K.h - (1 + 0.05 * np.cos(3 * C.theta))).max() < 1e-14

    @given(st.integers(0, 10_000), st.booleans())
    def test_round_trip(self, seed, even):
        K = random_body(seed, even=even, degree=128)
        L = solve_2d(CurvatureData(C, K.f), degree=K.degree)
        assert hausdorff(L, strip_first_harmonics(K)) < 1e-10

    def test_unclosed_data_rejected(self):
        with pytest.raises(ClosureError):
            solve_2d(CurvatureData(C, 1 + 0.2 * np.cos(C.theta)))

    def test_nonpositive_data_rejected(self):
        with pytest.raises(ValueError):
            CurvatureData(C, np.cos(2 * C.theta))

    def test_positive_data_gives_convex_body(self):
        g = 1 + 0.99 * np.cos(4 * C.theta)
        K = solve_2d(CurvatureData(C, g))
        assert K.f.min() > 0


class TestClosure:
    def test_small_defect_repaired_with_warning(self):
        g = np.ones(C.size) + 1e-9 * np.cos(C.theta)
        data = CurvatureData(C, g, closure_tol=1e-9)
        with pytest.warns(ClosureRepairWarning):
            fixed = data.validated()
        assert fixed.repaired
        assert fixed.closure_defect < 1e-14

    def test_large_defect_raises(self):
        g = np.ones(C.size) + 1e-3 * np.cos(C.theta)
        with pytest.raises(ClosureError):
            CurvatureData(C, g).validated()

    def test_repair_is_multiplicative(self):
        g = np.ones(S.size) + 0.01 * S.nodes[:, 2]
        r = closure_repair(g, S)
        assert np.abs(vector_moment(r, S)).max() < 1e-14
        assert np.all(r > 0)


class TestSolve3D:
    def test_cube_from_restricted_data(self):
        idx = [int(np.argmax(S.nodes @ e)) for e in np.vstack([np.eye(3), -np.eye(3)])]
        a = np.zeros(S.size)
        a[idx] = 4.0
        P = solve_3d(CurvatureData(S, a / S.weights))
        ref = p3.cube_support(S, 1.0)
        assert np.abs(P.support - ref).max() < 1e-8
        assert P.volume == pytest.approx(8.0, abs=1e-8)

    def test_ball_data(self):
        P = solve_3d(CurvatureData(S, np.ones(S.size)))
        assert np.abs(P.support - 1).max() < 1e-2

    @settings(max_examples=6)
    @given(st.integers(0, 1000), st.booleans())
    def test_round_trip(self, seed, even):
        P = p3.random_polytope(seed, even=even)
        info = SolveInfo()
        Q = solve_3d(CurvatureData(S, P.f), info=info)
        shift = Q._unique_vertices().mean(0) - P._unique_vertices().mean(0)
        # the solution is centred; move P the same way
        assert np.abs(Q.support - P.translate(-shift).support).max() < 1e-6
        assert info.residual < 1e-9

    def test_solution_areas_match_data(self):
        P = p3.random_polytope(17)
        Q = solve_3d(CurvatureData(S, P.f))
        assert np.abs(Q.areas - P.areas).max() < 1e-10

    def test_volume_normalization_is_scale_free(self):
        P = p3.random_polytope(3)
        Q1 = solve_3d(CurvatureData(S, P.f))
        Q2 = solve_3d(CurvatureData(S, 4.0 * P.f))
        assert np.abs(Q2.support - 2.0 * Q1.support).max() < 1e-8
