from fractions import Fraction
import math

import numpy as np
import pytest

from fiberbergman.errors import (
    BadBasePoint,
    CurveDegenerate,
    DegreeMismatch,
    GridComponentMismatch,
    OrderMismatch,
    ResolutionTooLow,
)
from fiberbergman.family import fiber_poly
from fiberbergman.fibergeom import (
    build_quadrature,
    central_grids,
    fiber_grid,
    fs_norm,
    h0_eval,
    integrate_central,
    integrate_pair,
    pair_h0_eval,
    rotation_frame,
    track_points,
    tracked_limit,
)
from fiberbergman.polyalg import HomogPoly, parse

X, Y, Z = (HomogPoly.variable(v) for v in "XYZ")
HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def line_grid():
    return build_quadrature(Y, 64)


@pytest.fixture(scope="module")
def conic_grid():
    return build_quadrature(parse("Y^2 - X*Z"), 64)


class TestFSNorm:
    def test_values(self):
        assert fs_norm(X, [1, 0, 0], 1) == 1
        assert fs_norm(Y, [1, 1, 0], 1) == pytest.approx(0.5, abs=1e-15)

    def test_scale_invariance(self):
        a = fs_norm(parse("X*Y - Z^2"), [1, 1, 0], 2)
        b = fs_norm(parse("X*Y - Z^2"), [2, 2, 0], 2)
        assert abs(a - b) <= 1e-14

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            fs_norm(X, [1, 0, 0], 2)


class TestQuadrature:
    @pytest.mark.parametrize("res", [32, 64])
    def test_line_volume(self, res):
        assert build_quadrature(Y, res).volume == pytest.approx(1, abs=1e-4)

    def test_conic_volume(self, conic_grid):
        assert conic_grid.volume == pytest.approx(2, abs=1e-3)

    def test_cuspidal_fiber_volume(self, cuspidal):
        assert fiber_grid(cuspidal, 1, 64).volume == pytest.approx(3, abs=1e-2)

    def test_nodes_on_curve(self, conic_grid, cuspidal):
        for grid in (conic_grid, fiber_grid(cuspidal, 0.3, 32)):
            assert np.abs(grid.curve.eval(grid.points)).max() <= 1e-9
            assert np.allclose(np.linalg.norm(grid.points, axis=1), 1)

    def test_too_coarse(self):
        with pytest.raises(ResolutionTooLow):
            build_quadrature(Y, 4)

    def test_repeated_factor(self):
        with pytest.raises(CurveDegenerate):
            build_quadrature(parse("Y^2"), 16)

    def test_projection_centre_fallback(self):
        # X*Y*Z has no pure power: the rotated frame is used
        grid = build_quadrature(parse("X*Y*Z"), 32)
        assert grid.volume == pytest.approx(3, abs=1e-3)

    def test_refinement_order(self, cuspidal):
        curve = fiber_poly(cuspidal, 1)
        res = [8, 16, 32, 64]
        errs = [abs(build_quadrature(curve, r).volume - 3) for r in res]
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert min(orders) >= 1.5

    def test_refinement_of_pairings(self, cuspidal):
        curve = fiber_poly(cuspidal, 0.5)
        s = parse("X*Y - Z^2")
        a = integrate_pair(s, s, build_quadrature(curve, 32), 2)
        b = integrate_pair(s, s, build_quadrature(curve, 64), 2)
        c = integrate_pair(s, s, build_quadrature(curve, 128), 2)
        assert abs(c - b) <= abs(b - a) + 1e-12

    def test_chart_consistency(self, conic_grid):
        rotated = build_quadrature(parse("Y^2 - X*Z"), 64, frame=rotation_frame() @ np.eye(3)[:, [0, 2, 1]])
        f = lambda p: np.abs(p[:, 0]) ** 2 * np.abs(p[:, 2] + 0.3 * p[:, 1]) ** 2
        a = conic_grid.integrate(f(conic_grid.points))
        b = rotated.integrate(f(rotated.points))
        assert abs(a - b) <= 2e-6

    def test_log_integrability(self):
        curve = parse("Y^2 - X*Z")
        s = X  # vanishes at [0:0:1] on the conic
        vals = []
        for res in (64, 128):
            g = build_quadrature(curve, res)
            vals.append(g.integrate(np.abs(np.log(np.abs(s.eval(g.points)) ** 2))))
        assert np.isfinite(vals).all()
        assert abs(vals[1] - vals[0]) <= 0.05 * abs(vals[1])


class TestIntegratePair:
    def test_line_x(self, line_grid):
        assert integrate_pair(X, X, line_grid, 1) == pytest.approx(0.5, abs=1e-4)

    def test_line_xz_orthogonal(self, line_grid):
        assert abs(integrate_pair(X, Z, line_grid, 1)) <= 1e-6

    def test_constant(self, line_grid):
        one = HomogPoly.constant(1)
        assert integrate_pair(one, one, line_grid, 0) == pytest.approx(line_grid.volume)

    @pytest.mark.parametrize("a,b", [(2, 0), (1, 1), (3, 1), (2, 2)])
    def test_beta_oracle(self, line_grid, a, b):
        s = HomogPoly.monomial((a, 0, b))
        exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 1)
        assert integrate_pair(s, s, line_grid, a + b).real == pytest.approx(exact, rel=1e-10)

    def test_degree_mismatch(self, line_grid):
        with pytest.raises(DegreeMismatch):
            integrate_pair(X, X, line_grid, 2)


class TestIntegrateCentral:
    def test_conic(self, conic):
        grids = central_grids(conic, 32)
        assert integrate_central(conic, lambda p, j: np.ones(len(p)), grids) == pytest.approx(2, abs=1e-12)

    def test_cuspidal(self, cuspidal):
        grids = central_grids(cuspidal, 32)
        assert integrate_central(cuspidal, lambda p, j: np.ones(len(p)), grids) == pytest.approx(3, abs=1e-12)

    def test_mismatch(self, cuspidal, conic):
        with pytest.raises(GridComponentMismatch):
            integrate_central(cuspidal, lambda p, j: 1.0, central_grids(conic, 16))
        wrong = central_grids(cuspidal, 16)[::-1]
        with pytest.raises(GridComponentMismatch):
            integrate_central(cuspidal, lambda p, j: 1.0, wrong)

    @pytest.mark.parametrize("t", [1, 0.1, 0.01])
    def test_volume_continuity(self, conic, t):
        assert fiber_grid(conic, t, 64).volume == pytest.approx(2, abs=1e-3)


class TestTracking:
    def test_square_roots(self, conic):
        pts = track_points(conic, [1, 0, 1], 1e-4)
        affine = pts / pts[:, [0]]
        assert sorted(affine[:, 1].real) == pytest.approx([-1e-2, 1e-2], abs=1e-8)
        assert np.allclose(affine[:, 2], 1)

    def test_close_for_small_t(self, conic):
        pts = track_points(conic, [1, 0, 1], 1e-6)
        x0 = np.array([1, 0, 1]) / math.sqrt(2)
        assert len(pts) == 2
        for p in pts:
            assert np.linalg.norm(p - x0 * (p[0] / abs(p[0]))) <= 1e-3

    def test_f1_vanishes(self, conic):
        with pytest.raises(BadBasePoint):
            track_points(conic, [1, 0, 0], 1e-4)

    def test_off_fiber_point(self, conic):
        with pytest.raises(BadBasePoint):
            track_points(conic, [1, 1, 1], 1e-4)

    def test_multiplicity_count(self, cuspidal):
        assert len(track_points(cuspidal, [0, 1, 1], 1e-4)) == 1
        assert len(track_points(cuspidal, [1, 0, 1], 1e-4)) == 2

    def test_distance_shrinks(self, cuspidal):
        x0 = np.array([1, 0, 1]) / math.sqrt(2)
        dist = []
        for t in (1e-2, 1e-4, 1e-6):
            p = track_points(cuspidal, x0, t)[0]
            dist.append(np.linalg.norm(p - x0 * (p[0] / abs(p[0]) / (x0[0] / abs(x0[0])))))
        assert dist[0] > dist[1] > dist[2]


class TestLimitPairing:
    @pytest.mark.parametrize("c", [1, 2, 0.5, 1 + 1j])
    def test_y_on_double_line(self, conic, c):
        assert h0_eval(conic, Y, HALF, [1, 0, c]) == pytest.approx(abs(c) / (1 + abs(c) ** 2), rel=1e-12)

    def test_alpha_zero(self, conic):
        assert h0_eval(conic, X, 0, [1, 0, 1]) == pytest.approx(0.5)

    def test_vanishing_rule(self, conic):
        assert h0_eval(conic, Y, 0, [1, 0, 1]) == 0

    def test_order_mismatch(self, conic):
        with pytest.raises(OrderMismatch):
            h0_eval(conic, X, HALF, [1, 0, 1])

    def test_non_integral_level_vanishes(self, cuspidal):
        # on the reduced component X the only level is 0
        assert h0_eval(cuspidal, parse("X*Y"), HALF, [0, 1, 1]) == 0

    def test_bad_point(self, conic):
        with pytest.raises(BadBasePoint):
            h0_eval(conic, Y, HALF, [1, 0, 0])

    def test_polarisation(self, conic):
        s, s2 = parse("X*Y"), parse("(1+i)*Y*Z")
        x = np.array([1, 0, 0.7 - 0.2j])
        val = pair_h0_eval(conic, s, s2, HALF, x)
        # both equal g * q with the same |v|^{-1/2}; the pairing is w * q conj(q2)
        xu = x / np.linalg.norm(x)
        w = abs(xu[0] * xu[2])
        assert val == pytest.approx(w * xu[0] * np.conj((1 + 1j) * xu[2]), rel=1e-10)

    def test_tracked_limit_random_points(self, conic, cuspidal, rng):
        cases = [(conic, Y, HALF, lambda c: [1, 0, c]),
                 (cuspidal, Y, HALF, lambda c: [1, 0, c]),
                 (cuspidal, Z, 0, lambda c: [0, 1, c])]
        for k in range(20):
            fam, s, alpha, make = cases[k % 3]
            c = complex(*rng.uniform(0.3, 2, size=2))
            x0 = make(c)
            direct = h0_eval(fam, s, alpha, x0)
            limit = tracked_limit(fam, s, alpha, x0, 1e-6)
            assert limit == pytest.approx(direct, rel=1e-4)
