import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourier_pade import asymptotics
from fourier_pade.asymptotics import (RaySchedule, cdf_distance, equilibrium_for, gamma_constant, rate_experiment,
                                      zero_counting_measure, zero_distribution_experiment)
from fourier_pade.equilibrium import (DiscreteMeasure, InteractionMatrix, arcsine_cdf, interaction_matrix_linear,
                                      solve_equilibrium, standard_intervals)
from fourier_pade.errors import DegreeCeilingError, StructureError
from fourier_pade.linear_fp import solve_linear_fp
from fourier_pade.measures import AngelescoSystem, Interval, MeasureSpec
from fourier_pade.orthopoly import PolynomialRep


class TestSchedule:
    def test_largest_remainder(self):
        s = RaySchedule((1 / 3, 2 / 3), (4, 5, 6))
        assert s.multi_indices() == [(1, 3), (2, 3), (2, 4)]
        assert all(sum(n) == k for n, k in zip(s.multi_indices(), s.sizes))
        assert s.max_deviation == pytest.approx(abs(1 / 4 - 1 / 3))

    def test_tie_goes_to_lower_branch(self):
        assert RaySchedule((0.5, 0.5), (3,)).multi_index(3) == (2, 1)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 0.95), st.integers(1, 50))
    def test_sum_and_deviation(self, p1, size):
        s = RaySchedule((p1, 1 - p1), (size,))
        n = s.multi_index(size)
        assert sum(n) == size
        assert abs(n[0] / size - p1) <= 1 / size + 1e-12

    def test_invalid(self):
        with pytest.raises(ValueError):
            RaySchedule((0.5, 0.5), (4, 4))
        with pytest.raises(DegreeCeilingError):
            RaySchedule((0.5, 0.5), (4, 80))
        with pytest.raises(ValueError):
            RaySchedule((0.5, 0.6), (4,))


class TestZeroCounting:
    def test_t2(self):
        mu = zero_counting_measure(PolynomialRep(Interval(-1, 1), [0, 0, 1]))
        np.testing.assert_allclose(mu.grid, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)
        np.testing.assert_allclose(mu.masses, [0.5, 0.5])

    def test_quadratic(self):
        mu = zero_counting_measure(PolynomialRep.from_monomial([6, -5, 1], Interval(1, 4)))
        np.testing.assert_allclose(mu.grid, [2, 3], atol=1e-14)
        np.testing.assert_allclose(mu.masses, [0.5, 0.5])

    def test_repeated_zero_merges(self):
        mu = zero_counting_measure(np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(mu.masses, [2 / 3, 1 / 3])

    def test_linear_q_zeros_localized(self, ref):
        a = solve_linear_fp(ref, (6, 6))
        mu = zero_counting_measure(a.zeros[0])
        assert np.all((mu.grid > -3) & (mu.grid < -2)) and mu.masses.sum() == pytest.approx(1.0)

    def test_complex_zeros_rejected(self):
        with pytest.raises(StructureError):
            zero_counting_measure(PolynomialRep.from_monomial([1, 0, 1], Interval(-1, 1)))


class TestCdfDistance:
    def test_identity_and_unit_jump(self):
        mu = DiscreteMeasure([0.0, 0.3], [0.4, 0.6])
        assert cdf_distance(mu, mu) == 0.0
        assert cdf_distance(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([1.0], [1.0])) == 1.0

    def test_mass_mismatch(self):
        with pytest.raises(ValueError):
            cdf_distance(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([0.0], [0.5], total=0.5))

    def test_metric_on_random_triples(self, rng):
        def rand():
            g = np.sort(rng.uniform(-1, 1, 12))
            return DiscreteMeasure(g, rng.dirichlet(np.ones(12)))

        for _ in range(50):
            a, b, c = rand(), rand(), rand()
            assert cdf_distance(a, b) == cdf_distance(b, a)
            assert cdf_distance(a, c) <= cdf_distance(a, b) + cdf_distance(b, c) + 1e-15

    def test_arcsine_refinement(self):
        iv = Interval(-1, 1)

        def solve(n):
            return solve_equilibrium(InteractionMatrix([[2.0]]), [iv], grid_size=n).components[0]

        assert cdf_distance(solve(400), solve(800)) < 5e-3


def test_gamma_constant_against_mpmath(ref):
    a = solve_linear_fp(ref, (1, 1))
    nodes = a.node_sets[1].nodes
    val = gamma_constant(ref, list(a.zeros), nodes, 2, (1, 1))
    z1, z2 = a.zeros[0][0], a.zeros[1][0]
    with mp.workdps(30):
        exact = mp.quad(lambda x: (x - z2) ** 2 * abs(x - z1) / abs(mp.fprod([x - t for t in nodes])), [2, 3])
    assert val == pytest.approx(float(exact), rel=1e-12)


class TestZeroDistribution:
    def test_mirrored_system(self):
        sys_ = AngelescoSystem(MeasureSpec.chebyshev(), (MeasureSpec.jacobi(-3, -2), MeasureSpec.jacobi(1.5, 4)))
        sched = RaySchedule((0.5, 0.5), (4, 8))
        a = zero_distribution_experiment(sys_, sched, "linear", grid_size=400)
        b = zero_distribution_experiment(sys_.mirror(), sched, "linear", grid_size=400)
        for key in ("dist_q", "dist_w"):
            for j in (1, 2):
                np.testing.assert_allclose(a.series(j, key), b.series(j, key), atol=1e-6)

    def test_single_branch_w_zeros(self, single):
        sched = RaySchedule((1.0,), (4, 8, 12))
        rep = zero_distribution_experiment(single, sched, "linear", grid_size=400)
        assert rep.trend_ok(1, "dist_q") and rep.trend_ok(1, "dist_w")
        assert rep.series(1, "dist_w")[-1] < 0.05

    def test_detected_sign_changes_match_nodes_at_small_size(self, ref):
        sched = RaySchedule((0.5, 0.5), (4, 6))
        eq, _ = equilibrium_for(ref, (0.5, 0.5), "linear", grid_size=200)
        a = zero_distribution_experiment(ref, sched, "linear", equilibrium=eq)
        b = zero_distribution_experiment(ref, sched, "linear", equilibrium=eq, sign_changes="detected")
        np.testing.assert_allclose(a.series(1, "dist_w"), b.series(1, "dist_w"), atol=1e-6)


POINTS = [5.0, 2j, 1.5 + 1j]


@pytest.fixture(scope="module")
def reports(ref):
    sched = RaySchedule((0.5, 0.5), (4, 8, 12, 16))
    return {k: rate_experiment(ref, sched, k, POINTS, grid_size=400) for k in ("linear", "nonlinear")}


class TestRates:

    def test_fit_within_ballpark(self, reports):
        for rep in reports.values():
            assert rep.fits and all(d <= 0.10 for _, _, d in rep.fits.values())
            assert rep.fits[(2, 5.0)][2] <= 0.10

    def test_report_rows(self, reports):
        rep = reports["linear"]
        assert len(rep.rows) == 2 * 3 * 4
        assert all(r["err"] > 0 and 0 < r["emp_rate"] < 1 for r in rep.rows)
        assert "empty" in rep.divergence_note

    def test_gamma_limits(self, reports):
        for rep in reports.values():
            sizes, vals = rep.gamma_series(1)
            assert list(sizes) == [4, 8, 12, 16]
            assert np.all(np.diff(vals) < 0) and np.all(vals > rep.gamma_limit[1])

    def test_order_independent(self, ref, monkeypatch):
        sched = RaySchedule((0.5, 0.5), (4, 6))
        a = rate_experiment(ref, sched, "linear", [5.0], grid_size=200)
        monkeypatch.setenv("FP_THREADS", "2")
        b = rate_experiment(ref, sched, "linear", [5.0], grid_size=200)
        assert a.rows == b.rows and a.fits == b.fits

    def test_underflow_truncates(self, ref, monkeypatch):
        real = asymptotics.remainder_integral

        def fake(system, zeros, j, nodes, z, **kw):
            out = real(system, zeros, j, nodes, z, **kw)
            return out * 1e-320 if sum(len(q) for q in zeros) >= 6 else out

        monkeypatch.setattr(asymptotics, "remainder_integral", fake)
        rep = rate_experiment(ref, RaySchedule((0.5, 0.5), (2, 4, 6)), "linear", [5.0], grid_size=200)
        assert rep.truncated == {(1, 5.0): 6, (2, 5.0): 6}
        assert max(r["size"] for r in rep.rows) == 4

    def test_points_near_intervals_rejected(self, ref):
        with pytest.raises(ValueError):
            rate_experiment(ref, RaySchedule((0.5, 0.5), (2,)), "linear", [2.5 + 0.05j])
