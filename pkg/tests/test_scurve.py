import cmath
import math

import numpy as np
import pytest

from angelesco.equilibrium import AngelescoProblem, scalar_weighted_equilibrium, solve_angelesco
from angelesco.measures import IntervalSet
from angelesco.periods import SqrtRatio, capacity_from_qd, segment_integral
from angelesco.polynomials import poly_from_roots
from angelesco.scurve import (
    ChebotarevResult,
    NonGenericConfiguration,
    QDSpec,
    SCurveError,
    chebotarev_solve,
    cubic_fit,
    fixed_point_check,
    fuse_partition,
    g_function_Y,
    g_function_from_roots,
    trace_trajectories,
)

CUBE_ROOTS = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]


class TestPeriods:
    def test_two_point_capacity(self):
        assert capacity_from_qd([-1.0, 1.0], []) == pytest.approx(0.5, abs=1e-10)
        assert capacity_from_qd([0.0, 1.0], []) == pytest.approx(0.25, abs=1e-10)

    def test_three_star_capacity_closed_form(self):
        cap = capacity_from_qd(CUBE_ROOTS, [0.0])
        assert cap == pytest.approx(4 ** (-1 / 3), abs=1e-10)

    def test_arm_integrals_sum_to_pi_i(self):
        fun = SqrtRatio((0.0,), tuple(CUBE_ROOTS))
        total = sum(segment_integral(fun, 0.0, a) for a in CUBE_ROOTS)
        assert abs(total.real) < 1e-13
        assert abs(abs(total.imag) - math.pi) < 1e-13


class TestChebotarev:
    def test_two_points_is_the_segment(self):
        res = chebotarev_solve([-1.0, 1.0])
        assert res.V == (1.0,)
        assert res.capacity == pytest.approx(0.5)
        assert res.period_residuals[0] <= 1e-12
        (k0, _), (k1, _) = res.arcs[0].endpoints
        assert {k0, k1} == {"a"}
        ys = [z.imag for z in res.arcs[0].points]
        assert max(abs(y) for y in ys) < 1e-12

    def test_cube_roots_symmetric_zero(self):
        res = chebotarev_solve(CUBE_ROOTS)
        assert abs(res.v_roots[0]) <= 1e-8
        assert max(res.period_residuals) <= 1e-10
        assert res.capacity == pytest.approx(4 ** (-1 / 3), abs=1e-8)
        kinds = sorted(c[2] for c in res.combinatorics)
        assert kinds == ["a-v", "a-v", "a-v"]

    def test_generic_three_points_vs_capacity_oracle(self):
        from oracles import min_capacity_over_trees

        res = chebotarev_solve([0.0, 1.0, 1j])
        oracle = min_capacity_over_trees([0.0, 1.0, 1j])
        assert abs(res.capacity - oracle) <= 1e-4
        assert max(res.period_residuals) <= 1e-10

    def test_four_points_generic_census(self):
        res = chebotarev_solve([-1.2, 1.0, 0.3 + 1.1j, -0.2 - 0.9j], seed=3)
        assert len(res.v_roots) == 2
        kinds = [c[2] for c in res.combinatorics]
        assert kinds.count("a-v") == 4
        assert kinds.count("v-v") == 1
        assert max(res.period_residuals) <= 1e-10

    def test_rejects_degenerate_input(self):
        with pytest.raises(SCurveError):
            chebotarev_solve([1.0])
        with pytest.raises(SCurveError):
            chebotarev_solve([1.0, 1.0, 2.0])

    def test_multistart_determinism(self):
        a = chebotarev_solve([0.0, 1.0, 1j], seed=7)
        b = chebotarev_solve([0.0, 1.0, 1j], seed=7)
        assert a.v_roots == b.v_roots


class TestTrajectories:
    def test_segment_ray(self):
        spec = QDSpec.from_points([-1.0, 1.0], [])
        trajs = trace_trajectories(spec, 1.0)
        assert len(trajs) == 1
        t = trajs[0]
        assert t.endpoints[1] == ("a", 0)  # lands on -1
        assert max(abs(z.imag) for z in t.points) < 1e-9
        assert t.re_drift <= 1e-11

    def test_cube_root_star(self):
        spec = QDSpec.from_points(CUBE_ROOTS, [0.0])
        trajs = trace_trajectories(spec, 0.0)
        assert len(trajs) == 3
        landed = sorted(t.endpoints[1][1] for t in trajs)
        assert landed == [0, 1, 2]
        for t in trajs:
            assert t.re_drift <= 1e-11
            assert t.arclength == pytest.approx(1.0, abs=5e-3)

    def test_invariant_drift_bound(self):
        res = chebotarev_solve([0.0, 1.0, 1j])
        spec = QDSpec.from_points([0.0, 1.0, 1j], res.v_roots)
        for t in trace_trajectories(spec, res.v_roots[0], tolerance=1e-12):
            assert t.re_drift <= 1e-11

    def test_non_critical_start_rejected(self):
        spec = QDSpec.from_points([-1.0, 1.0], [])
        with pytest.raises(SCurveError):
            trace_trajectories(spec, 0.5 + 0.5j)


class TestGFunction:
    def test_genus_zero(self):
        data = g_function_Y([-1.0, 0.0, 1.0])
        assert data.Y == (1.0,)

    def test_symmetric_four_points_y_at_origin(self):
        data = g_function_from_roots([-2.0, -1.0, 1.0, 2.0])
        assert abs(-data.Y[0]) <= 1e-8
        assert max(data.period_residuals) <= 1e-10

    def test_generic_four_points_vs_bisection_oracle(self):
        roots = [-3.0, -1.0, 2.0, 4.0]
        data = g_function_from_roots(roots)
        y = -data.Y[0]
        fun = SqrtRatio((), tuple(roots))

        def gap(yy):
            return segment_integral(fun, -1.0, 2.0, extra_poly=[-yy, 1.0]).real

        lo, hi = -1.0, 2.0
        flo = gap(lo)
        for _ in range(60):
            mid = (lo + hi) / 2
            if (gap(mid) > 0) == (flo > 0):
                lo = mid
            else:
                hi = mid
        assert abs(y - (lo + hi) / 2) <= 1e-8

    def test_duplicate_roots_rejected(self):
        with pytest.raises(SCurveError):
            g_function_from_roots([1.0, 1.0, 2.0, 3.0])


class TestFixedPoint:
    def test_two_point_case(self):
        spec = QDSpec.from_points([-1.0, 1.0], [])
        out = fixed_point_check(spec, 1e-8)
        assert out["is_fixed"] and out["residual"] == 0.0

    def test_solved_chebotarev_is_fixed(self):
        res = chebotarev_solve(CUBE_ROOTS)
        spec = QDSpec.from_points(CUBE_ROOTS, res.v_roots)
        out = fixed_point_check(spec, 1e-8)
        assert out["is_fixed"]
        assert out["residual"] <= 1e-8

    def test_perturbed_negative_control(self):
        res = chebotarev_solve(CUBE_ROOTS)
        spec = QDSpec.from_points(CUBE_ROOTS, [res.v_roots[0] + 0.1])
        out = fixed_point_check(spec, 1e-8)
        assert not out["is_fixed"]
        assert out["residual"] > 1e-3

    def test_fused_double_zero_reduction(self):
        res = fuse_partition([-2.0, -1.0, 1.0, 2.0], [[0, 1], [2, 3]])
        V = poly_from_roots([res.double_roots[0]] * 2, 1.0)
        spec = QDSpec(tuple(poly_from_roots([-2.0, -1.0, 1.0, 2.0], 1.0)),
                      tuple(V))
        out = fixed_point_check(spec, 1e-6)
        assert out["is_fixed"]


class TestFusion:
    def test_symmetric_pair_intervals(self):
        res = fuse_partition([-2.0, -1.0, 1.0, 2.0], [[0, 1], [2, 3]])
        u = res.double_roots[0]
        assert abs(u.imag) <= 1e-10
        assert -1 < u.real < 1
        assert abs(u) <= 1e-8  # symmetry pins the saddle at the origin
        assert res.capacity == pytest.approx(math.sqrt(3) / 2, abs=1e-10)
        kinds = sorted(c[2] for c in res.combinatorics)
        assert kinds == ["a-a", "a-a"]

    def test_capacity_matches_real_equilibrium(self):
        res = fuse_partition([-2.0, -1.0, 1.0, 2.0], [[0, 1], [2, 3]])
        eq = scalar_weighted_equilibrium(
            IntervalSet(((-2.0, -1.0), (1.0, 2.0))), m_per_interval=400
        )
        assert eq.w == pytest.approx(-math.log(res.capacity), abs=2e-3)

    def test_asymmetric_partition(self):
        res = fuse_partition([-2.0, -1.0, 1.0, 3.0], [[0, 1], [2, 3]])
        u = res.double_roots[0]
        assert abs(u.imag) <= 1e-10
        assert -1 < u.real < 1
        assert max(res.period_residuals) <= 1e-10

    def test_mirror_symmetric_components(self):
        res = fuse_partition([-2.0, -1.0, 1.0, 2.0], [[0, 1], [2, 3]])
        arcs = sorted(res.arcs, key=lambda t: t.points[0].real)
        left = sorted(z.real for z in arcs[0].points)
        right = sorted(-z.real for z in arcs[1].points)
        assert np.allclose(left, right, atol=1e-8)

    def test_trivial_partition_collapses(self):
        direct = chebotarev_solve([0.0, 1.0, 1j], seed=2)
        collapsed = fuse_partition([0.0, 1.0, 1j], [[0, 1, 2]], seed=2)
        assert collapsed.v_roots == direct.v_roots

    def test_small_parts_rejected(self):
        with pytest.raises(SCurveError):
            fuse_partition([-2.0, -1.0, 1.0, 2.0], [[0], [1, 2, 3]])


@pytest.fixture(scope="module")
def pair_equilibrium():
    prob = AngelescoProblem(
        (IntervalSet(((-2.0, -1.0),)), IntervalSet(((1.0, 2.0),))),
        m_per_interval=400,
    )
    return solve_angelesco(prob)


class TestCubic:
    def test_symmetric_fit(self, pair_equilibrium):
        A = poly_from_roots([-2.0, -1.0, 1.0, 2.0], 1.0)
        probes = [4.0 * np.exp(2j * np.pi * k / 32) for k in range(32)]
        cm = cubic_fit(pair_equilibrium.components[0],
                       pair_equilibrium.components[1], A, probes)
        assert cm.max_residual <= 1e-3
        assert cm.branch_sum_max <= 1e-12
        # mirror symmetry: E even, F odd (up to the fitted sign)
        assert all(abs(cm.E[i]) <= 1e-6 for i in range(1, len(cm.E), 2))
        assert all(abs(cm.F[i]) <= 1e-6 for i in range(0, len(cm.F), 2))
        # leading coefficients reported as fitted
        assert cm.leading_E == pytest.approx(1.0, abs=1e-6)
        assert abs(cm.leading_F) == pytest.approx(1.0, abs=1e-6)

    def test_zero_mass_rejected(self, pair_equilibrium):
        from angelesco.measures import GridMeasure

        empty = GridMeasure(
            IntervalSet(((1.0, 2.0),)),
            pair_equilibrium.components[1].nodes,
            (0.0,) * len(pair_equilibrium.components[1].nodes),
        )
        A = poly_from_roots([-2.0, -1.0, 1.0, 2.0], 1.0)
        with pytest.raises(SCurveError):
            cubic_fit(pair_equilibrium.components[0], empty, A,
                      [4.0 * np.exp(2j * np.pi * k / 32) for k in range(32)])

    def test_too_few_probes_rejected(self, pair_equilibrium):
        A = poly_from_roots([-2.0, -1.0, 1.0, 2.0], 1.0)
        with pytest.raises(SCurveError):
            cubic_fit(pair_equilibrium.components[0],
                      pair_equilibrium.components[1], A, [4.0, 4j])


class TestSerialization:
    def test_chebotarev_json(self):
        res = chebotarev_solve(CUBE_ROOTS)
        doc = res.to_json()
        assert len(doc["arcs"]) == 3
        assert doc["capacity"] == pytest.approx(4 ** (-1 / 3), abs=1e-8)

    def test_qdspec_validation(self):
        with pytest.raises(SCurveError):
            QDSpec((1.0, 2.0), (1.0,))  # A not monic
        with pytest.raises(SCurveError):
            QDSpec.from_points([-1.0, 1.0], [0.5])  # degree mismatch
