import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourier_pade.asymptotics import cdf_distance
from fourier_pade.equilibrium import (DiscreteMeasure, InteractionMatrix, RayVector, arcsine_cdf, closed_form_minors,
                                      combined_potential, discrete_energy, interaction_matrix_linear,
                                      interaction_matrix_nonlinear, principal_minor_check, project_simplex,
                                      rate_function, solve_equilibrium, standard_intervals)
from fourier_pade.errors import ConvergenceError, FormulaRegressionError
from fourier_pade.measures import Interval

P = (0.5, 0.5)


def random_ray(rng, m):
    if m == 1:
        return (1.0,)
    p = rng.dirichlet(np.ones(m))
    p[-1] = 1.0 - p[:-1].sum()
    return tuple(p)


class TestRay:
    def test_valid(self):
        assert RayVector((0.3, 0.7))[2] == 0.7
        assert RayVector((1.0,)).m == 1

    @pytest.mark.parametrize("p", [(0.5, 0.6), (1.0, 0.0), (0.9,), ()])
    def test_invalid(self, p):
        with pytest.raises(ValueError):
            RayVector(p)


class TestInteractionMatrices:
    def test_single_branch_formula(self):
        np.testing.assert_allclose(interaction_matrix_linear((1.0,)).entries, [[2, -2], [-2, 8]])

    def test_c1_blocks(self):
        C = interaction_matrix_linear(P).entries
        np.testing.assert_allclose(C[:2, :2], [[0.5, 0.25], [0.25, 0.5]])
        np.testing.assert_allclose(C[:2, 2:], np.diag([-0.75, -0.75]))
        np.testing.assert_allclose(C[2:, 2:], np.diag([4.5, 4.5]))

    def test_c2_block(self):
        C = interaction_matrix_nonlinear(P).entries
        np.testing.assert_allclose(C[2:, 2:], [[3, -1.5], [-1.5, 3]])
        np.testing.assert_allclose(C[:2, :], interaction_matrix_linear(P).entries[:2, :])

    def test_c2_single_branch_entries(self):
        # lower-right entry 2m(1+p)^2/(m+1) = 4 for m = 1, p = 1 (C1 has 8 there)
        np.testing.assert_allclose(interaction_matrix_nonlinear((1.0,)).entries, [[2, -2], [-2, 4]])

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_symmetric_positive_definite(self, rng, m):
        for _ in range(10):
            p = random_ray(rng, m)
            for C in (interaction_matrix_linear(p), interaction_matrix_nonlinear(p)):
                np.testing.assert_array_equal(C.entries, C.entries.T)
                assert C.is_positive_definite

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_minors_match_closed_forms(self, rng, m):
        for _ in range(10):
            p = random_ray(rng, m)
            principal_minor_check(interaction_matrix_linear(p), p)
            principal_minor_check(interaction_matrix_nonlinear(p), p)
            principal_minor_check(interaction_matrix_nonlinear(p), p, convention="stated")

    def test_published_c1_factor_only_right_at_order_m(self):
        stated = closed_form_minors("C1", P, convention="stated")
        computed = interaction_matrix_linear(P).leading_minors()
        np.testing.assert_allclose(computed[:2], stated[:2], rtol=1e-12)
        assert stated[3] == pytest.approx(0.94921875)
        assert computed[3] == pytest.approx(1.58203125, rel=1e-12)
        with pytest.raises(FormulaRegressionError):
            principal_minor_check(interaction_matrix_linear(P), P, convention="stated")

    def test_pinned_values(self):
        assert interaction_matrix_nonlinear(P).leading_minors()[3] == pytest.approx(0.31640625, rel=1e-12)
        assert interaction_matrix_linear(P).leading_minors()[0] == pytest.approx(0.5)

    def test_regression_detected(self):
        bad = InteractionMatrix(interaction_matrix_linear(P).entries * 1.001, "C1")
        with pytest.raises(FormulaRegressionError):
            principal_minor_check(bad, P)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            InteractionMatrix([[1.0, 0.5], [0.4, 1.0]])


class TestDiscreteMeasure:
    def test_cdf_right_continuous(self):
        mu = DiscreteMeasure([0.0, 1.0], [0.25, 0.75])
        np.testing.assert_allclose(mu.cdf([-1, 0, 0.5, 1, 2]), [0, 0.25, 0.25, 1, 1])

    def test_validation(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([0.0, 1.0], [0.5, 0.6])
        with pytest.raises(ValueError):
            DiscreteMeasure([1.0, 0.0], [0.5, 0.5])
        with pytest.raises(ValueError):
            DiscreteMeasure([0.0, 1.0], [-0.5, 1.5])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_project_simplex(v):
    v = np.array(v)
    x = project_simplex(v)
    assert np.all(x >= 0) and abs(x.sum() - 1) < 1e-12
    # optimality: no feasible vertex is closer
    for k in range(v.size):
        e = np.zeros(v.size)
        e[k] = 1.0
        assert np.sum((x - v) ** 2) <= np.sum((e - v) ** 2) + 1e-12


@pytest.fixture(scope="module")
def arcsine():
    return solve_equilibrium(InteractionMatrix([[2.0]]), [Interval(-1, 1)], grid_size=400)


@pytest.fixture(scope="module")
def sym_c1(ref):
    return solve_equilibrium(interaction_matrix_linear(P), standard_intervals(ref), grid_size=400)


@pytest.fixture(scope="module")
def sym_c2(ref):
    return solve_equilibrium(interaction_matrix_nonlinear(P), standard_intervals(ref), grid_size=400)


class TestSingleInterval:
    def test_arcsine(self, arcsine):
        mu = arcsine.components[0]
        ref = DiscreteMeasure(mu.grid, np.diff(np.concatenate([[0.0], arcsine_cdf(Interval(-1, 1), mu.grid)])) /
                              arcsine_cdf(Interval(-1, 1), mu.grid[-1]))
        assert np.max(np.abs(mu.cdf(mu.grid) - ref.cdf(mu.grid))) < 2e-2
        assert abs(arcsine.constants[0] - 2 * math.log(2)) < 1e-2
        assert arcsine.kkt_violation < 1e-3

    def test_potential_at_zero(self, arcsine):
        assert abs(combined_potential(arcsine, arcsine.C, 1, 0.0) - 2 * math.log(2)) < 2e-2


class TestSymmetric:
    @staticmethod
    def mirrored(mu, onto):
        # grids agree up to roundoff; transfer masses so atoms coincide exactly
        np.testing.assert_allclose(-mu.grid[::-1], onto.grid, atol=1e-13)
        return DiscreteMeasure(onto.grid, mu.masses[::-1])

    def test_mirror_components(self, sym_c1):
        mu1, mu2, mu3, mu4 = sym_c1.components
        assert cdf_distance(mu1, self.mirrored(mu2, mu1)) < 1e-3
        # each Delta_0 component is pulled toward its own Delta_j, so they mirror each other
        assert cdf_distance(mu3, self.mirrored(mu4, mu3)) < 1e-3
        assert mu3.grid @ mu3.masses < -0.01 < 0.01 < mu4.grid @ mu4.masses

    def test_kkt_and_frostman(self, sym_c1):
        assert sym_c1.kkt_violation < 1e-3
        for comp, W, w in zip(sym_c1.components, sym_c1.potentials_on_grid, sym_c1.constants):
            s = comp.masses > 1e-3 / comp.grid.size
            assert np.all(np.abs(W[s] - w) < 1e-3)
            assert np.all(W >= w - 1e-3)

    def test_energy_descent(self, ref, sym_c1):
        e = np.array(sym_c1.energies)
        assert np.all(np.diff(e) <= 1e-12 * np.abs(e[:-1]))
        arcs = []
        for comp, iv in zip(sym_c1.components, sym_c1.intervals):
            F = arcsine_cdf(iv, comp.grid)
            m = np.diff(np.concatenate([[0.0], F]))
            arcs.append(m / m.sum())
        assert sym_c1.energy < discrete_energy(sym_c1, arcs)

    def test_variational_inequality(self, rng, sym_c1):
        for _ in range(100):
            total = 0.0
            for comp, W in zip(sym_c1.components, sym_c1.potentials_on_grid):
                nu = rng.dirichlet(np.full(comp.grid.size, 0.3))
                total += W @ (nu - comp.masses)
            assert total >= -1e-3

    def test_potential_symmetry(self, sym_c1):
        z = np.array([5.0, 0.5j, 1.5 + 1j, -4 + 3j, 2.5 + 0.3j])
        W1 = combined_potential(sym_c1, sym_c1.C, 1, -z)
        W2 = combined_potential(sym_c1, sym_c1.C, 2, z)
        np.testing.assert_allclose(W1, W2, atol=1e-6)
        G1 = rate_function(sym_c1, sym_c1.C, P, 1, -z)
        G2 = rate_function(sym_c1, sym_c1.C, P, 2, z)
        np.testing.assert_allclose(G1, G2, atol=1e-5)

    def test_finite_limit_at_infinity(self, sym_c1):
        assert 2 * 0.25 + 0.25 - 0.5 * 1.5 == 0.0
        a = combined_potential(sym_c1, sym_c1.C, 1, 1e5)
        b = combined_potential(sym_c1, sym_c1.C, 1, 1e6)
        assert abs(a) < 1e-4 and abs(b - a) < 1e-5

    def test_rate_values(self, sym_c1):
        # convergence region far from Delta_j, and rate 1 where W_j = omega_j on the support
        assert rate_function(sym_c1, sym_c1.C, P, 2, 5.0) < 1
        mu2 = sym_c1.components[1]
        x = mu2.grid[np.argmax(mu2.masses)]
        assert rate_function(sym_c1, sym_c1.C, P, 2, x) == pytest.approx(1.0, abs=5e-3)


def test_c2_full_support_on_delta0(sym_c2):
    assert sym_c2.kkt_violation < 1e-3
    for comp in sym_c2.components[2:]:
        assert comp.support().size == comp.grid.size


def test_nonconvergence_raises(ref):
    with pytest.raises(ConvergenceError):
        solve_equilibrium(interaction_matrix_linear(P), standard_intervals(ref), grid_size=100, tol=1e-9, max_iter=20)


def test_interval_count_checked():
    with pytest.raises(ValueError):
        solve_equilibrium(InteractionMatrix([[2.0]]), [Interval(-1, 1), Interval(2, 3)])
