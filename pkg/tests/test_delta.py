import io
import math
from fractions import Fraction

import mpmath as mp
import pytest

from pcflab.cmf import ConstructionParams, Trajectory, catalog_field, construct, traj_limit
from pcflab.constants import get_constant
from pcflab.delta import (
    DefectiveLimitMatrix,
    InsufficientPrecision,
    SingularSystem,
    balanced_limit_matrix,
    delta_closed_form,
    delta_empirical,
    delta_map,
    delta_point,
    eigen_exact,
    optimize_greedy,
    optimize_lls,
    solve_zeta5_coefficients,
    zeta5_combination,
)
from pcflab.relations import mobius_apply


@pytest.fixture(scope="module")
def zeta3_field():
    return catalog_field("zeta3")


@pytest.fixture(scope="module")
def inv_zeta3():
    with mp.workdps(4700):
        return 1 / get_constant("zeta3", 4650)


class TestClosedForm:
    def test_zeta3_eigenvalues_exact(self, zeta3_field):
        report = delta_closed_form(zeta3_field, (1, 1), steps=1500)
        assert report.eigenvalues == (Fraction(17), Fraction(12), 2)
        assert abs(report.delta - 0.0805) <= 0.002

    def test_eq16_leading_matrix(self, zeta3_field):
        from pcflab.cmf import _reduce_step_matrix, _unit_cell_affine

        step = _reduce_step_matrix(
            _unit_cell_affine(zeta3_field, Trajectory((1, 1), (1, 1)))
        )
        trace, det = balanced_limit_matrix(step)
        assert (trace, det) == (34, 1)

    def test_defective_matrix(self):
        # equal eigenvalues: trace^2 = 4 det
        with pytest.raises(DefectiveLimitMatrix):
            eigen_exact(Fraction(2), Fraction(1))

    def test_zero_eigenvalue(self):
        with pytest.raises(DefectiveLimitMatrix):
            eigen_exact(Fraction(1), Fraction(0))


class TestEmpirical:
    def test_zeta3_diagonal(self, zeta3_field, inv_zeta3):
        report = delta_empirical(
            zeta3_field, Trajectory((1, 1), (1, 1)), inv_zeta3, 1500, 4650
        )
        assert abs(report.delta - 0.080) <= 0.010

    def test_matches_closed_form(self, zeta3_field, inv_zeta3):
        emp = delta_empirical(zeta3_field, Trajectory((1, 1), (1, 1)), inv_zeta3, 1500, 4650)
        cf = delta_closed_form(zeta3_field, (1, 1), steps=1500)
        assert abs(emp.delta - cf.delta) < 0.01

    def test_zeta2_table5_value(self, catalog):
        field = construct(ConstructionParams(2, (0, 0, 0, 1)))
        eta = catalog.get("zeta2", 1400)
        with mp.workdps(1400):
            L = mobius_apply((2, 0, 0, 1), eta)
        report = delta_empirical(field, Trajectory((1, 1), (1, 1)), L, 400, 1400)
        assert abs(report.delta - 0.0988) <= 0.005

    def test_zeta2_closed_vs_empirical(self, catalog):
        field = construct(ConstructionParams(2, (0, 0, 0, 1)))
        eta = catalog.get("zeta2", 3600)
        with mp.workdps(3600):
            L = mobius_apply((2, 0, 0, 1), eta)
        emp = delta_empirical(field, Trajectory((1, 1), (1, 1)), L, 1500, 3600)
        cf = delta_closed_form(field, (1, 1), steps=1500)
        assert abs(emp.delta - cf.delta) < 0.01

    def test_rational_sequence_baseline(self):
        # p/q = 1/n against L = 0: |1/n - 0| = q^-1 exactly, so delta -> 0
        with mp.workdps(40):
            for n in (10**6, 10**9):
                d = delta_point(1, n, 1, mp.mpf(0), 30)
                assert abs(d) < 1e-9

    def test_precision_floor_detected(self, zeta3_field, catalog):
        with mp.workdps(60):
            L = 1 / catalog.get("zeta3", 50)
        with pytest.raises(InsufficientPrecision):
            delta_empirical(zeta3_field, Trajectory((1, 1), (1, 1)), L, 1500, 50)


class TestMap:
    def test_smoke_2x2(self, zeta3_field, catalog):
        with mp.workdps(220):
            L = 1 / catalog.get("zeta3", 200)
        dmap = delta_map(zeta3_field, 2, 2, L, 200)
        assert len(dmap.values) >= 3  # the origin cell has |V22| = 1 and drops out

    def test_zeta3_ridge_on_diagonal(self, zeta3_field, catalog):
        with mp.workdps(900):
            L = 1 / catalog.get("zeta3", 850)
        dmap = delta_map(zeta3_field, 40, 40, L, 850)
        assert all(dmap.get(x, x) > 0 for x in range(12, 41))
        cell, value = dmap.max_cell()
        deep = {(x, y): v for (x, y), v in dmap.values.items() if x + y >= 60}
        best_deep = max(deep, key=deep.get)
        assert abs(best_deep[0] - best_deep[1]) <= 3  # ridge hugs x = y

    def test_diagonal_running_estimate_stabilises(self, zeta3_field, inv_zeta3):
        # the tail-quartile estimator along x = y settles: its running values
        # oscillate by less than 0.01 over the deepest quartile of samples
        from pcflab.cmf import head_term, apply_head, walk
        from pcflab.pcf import backoff_schedule
        from pcflab.precision import GUARD_DIGITS

        traj = Trajectory((1, 1), (1, 1))
        head = head_term(zeta3_field, traj)
        schedule = set(backoff_schedule(1500))
        samples = []
        for state in walk(zeta3_field, traj, 1500):
            if state.index not in schedule:
                continue
            V = apply_head(state.V, head)
            g = V.content() or 1
            d = delta_point(V.b, V.d, g, inv_zeta3, 4650 + GUARD_DIGITS)
            if d is not None:
                samples.append(d)
        running = [
            sum(samples[max(0, k - max(2, (k + 1) // 4)) : k + 1])
            / len(samples[max(0, k - max(2, (k + 1) // 4)) : k + 1])
            for k in range(len(samples))
        ]
        tail = running[-len(running) // 4 :]
        assert max(tail) - min(tail) < 0.01

    def test_shifted_field_has_no_positive_cells(self, zeta3_field):
        origin = (Fraction(4, 3), 1)
        repL = traj_limit(zeta3_field, Trajectory(origin, (1, 1)), 500, 900)
        dmap = delta_map(zeta3_field, 40, 40, repL.value, 900, origin=origin)
        assert dmap.positive_cells() == []

    def test_csv_output(self, zeta3_field, catalog):
        with mp.workdps(220):
            L = 1 / catalog.get("zeta3", 200)
        dmap = delta_map(zeta3_field, 3, 3, L, 200)
        buf = io.StringIO()
        dmap.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "x,y,delta"
        assert all(len(line.split(",")) == 3 for line in lines[1:])


class TestOptimizers:
    def test_greedy_finds_diagonal_ridge(self, zeta3_field, catalog):
        with mp.workdps(1600):
            L = 1 / catalog.get("zeta3", 1550)
        path, report = optimize_greedy(zeta3_field, L, 120, 1550)
        end = path[-1]
        assert abs(end[0] - end[1]) <= 4
        assert 0.06 <= report.delta <= 0.11

    def test_greedy_toy_field_stops_fast(self, catalog):
        field = catalog_field("e")
        with mp.workdps(320):
            L = traj_limit(field, Trajectory((1, 1), (1, 1)), 300, 120).value
        path, report = optimize_greedy(field, L, 10, 120)
        assert len(path) == 11

    def test_lls_unshifted_direction(self, zeta3_field, catalog):
        with mp.workdps(1600):
            L = 1 / catalog.get("zeta3", 1550)
        direction, report = optimize_lls(zeta3_field, L, 120, 1550)
        assert direction == (1, 1)
        # finite horizons overshoot the 0.08 asymptote slightly
        assert 0.05 < report.delta < 0.13

    def test_lls_shifted_reaches_paper_value(self, zeta3_field):
        origin = (Fraction(4, 3), 1)
        repL = traj_limit(zeta3_field, Trajectory(origin, (1, 1)), 1200, 2600)
        direction, report = optimize_lls(zeta3_field, repL.value, 250, 2600, origin=origin)
        assert abs(report.delta - (-0.4741)) <= 0.02

    def test_greedy_shifted_underperforms(self, zeta3_field):
        origin = (Fraction(4, 3), 1)
        repL = traj_limit(zeta3_field, Trajectory(origin, (1, 1)), 900, 2000)
        path, report = optimize_greedy(zeta3_field, repL.value, 150, 2000, origin=origin)
        assert report.delta <= -0.40


class TestZeta5Combination:
    def test_special_case_coefficients(self):
        coeffs = solve_zeta5_coefficients({2: 1, 3: 1, 4: 1, 5: 1})
        assert coeffs[5] == 1 and coeffs[4] == 1
        assert coeffs[3] == 0 and coeffs[2] == 0

    def test_exactness_invariant(self, catalog):
        # sum c_s hz(s, R_s) reproduces zeta(5) numerically
        from pcflab.constants import hat_zeta

        for r in ({2: 1, 3: 1, 4: 1, 5: 1}, {2: 2, 3: 2, 4: 2, 5: 2}, {2: 3, 3: 3, 4: 3, 5: 3}):
            coeffs = solve_zeta5_coefficients(r)
            with mp.workdps(80):
                total = mp.mpf(0)
                for s, c in coeffs.items():
                    if c:
                        total += mp.mpf(c.numerator) / c.denominator * hat_zeta(s, r[s], 70, catalog)
                assert abs(total - catalog.get("zeta5", 70)) < mp.mpf(10) ** -60

    def test_r1_delta(self):
        plan, report = zeta5_combination({2: 1, 3: 1, 4: 1, 5: 1}, 9, digits=400)
        assert abs(report.delta - (-0.717)) <= 0.05

    def test_mixed_r_rejected(self):
        # the combination only closes with one shared R; mixed choices leave
        # an uncancelled rational and must be reported, not fudged
        with pytest.raises(SingularSystem):
            solve_zeta5_coefficients({2: 1, 3: 2, 4: 1, 5: 3})

    def test_degenerate_zeta2_plan(self):
        from pcflab.families import zzz_sr_pcf

        coeffs = solve_zeta5_coefficients({2: 0}, target_s=2)
        assert coeffs == {2: Fraction(1)}
        pcf = zzz_sr_pcf(2, 0)
        assert str(pcf.a) == "2*n^2+2*n+1" and str(pcf.b) == "-n^4"
