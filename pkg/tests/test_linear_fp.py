import mpmath as mp
import numpy as np
import pytest

from fourier_pade.errors import DegreeCeilingError, PoleError
from fourier_pade.linear_fp import (fourier_coefficient, fourier_coefficients_direct, fourier_coefficients_exchanged,
                                    remainder, remainder_on_delta0, sign_change_polynomial, solve_linear_fp)
from fourier_pade.measures import Interval, markov_transform
from fourier_pade.orthopoly import PolynomialRep

ONE = PolynomialRep.constant(1.0, Interval(-3, 3))


def cheb_coefficient(f, k):
    """c_k of f against the Chebyshev orthonormal family, 30 digits."""
    with mp.workdps(30):
        lk = (lambda th: 1 / mp.sqrt(mp.pi)) if k == 0 else (lambda th: mp.sqrt(2 / mp.pi) * mp.cos(k * th))
        return float(mp.quad(lambda th: f(mp.cos(th)) * lk(th), [0, mp.pi]))


class TestFourierCoefficients:
    def test_c0_closed_form(self, single):
        exact = cheb_coefficient(lambda x: mp.log((x - 2) / (x - 3)), 0)
        assert fourier_coefficient(single, ONE, 1, 0) == pytest.approx(exact, rel=1e-13)

    @pytest.mark.parametrize("k", [1, 4, 9])
    def test_routes_agree_with_mpmath(self, single, k):
        exact = cheb_coefficient(lambda x: mp.log((x - 2) / (x - 3)), k)
        assert fourier_coefficient(single, ONE, 1, k, method="direct") == pytest.approx(exact, rel=1e-10)
        assert fourier_coefficient(single, ONE, 1, k, method="exchanged") == pytest.approx(exact, rel=1e-12)

    def test_mirror_parity(self, ref):
        # sigma_hat_1(-x) = -sigma_hat_2(x) on the symmetric system
        c1 = fourier_coefficients_direct(ref, ONE, 1, 7)
        c2 = fourier_coefficients_direct(ref, ONE, 2, 7)
        k = np.arange(8)
        np.testing.assert_allclose(c1, (-1.0) ** (k + 1) * c2, atol=1e-14)

    def test_exchanged_requires_k_at_least_degree(self, ref):
        Q = PolynomialRep.from_roots([2.5], Interval(-3, 3))
        with pytest.raises(ValueError):
            fourier_coefficients_exchanged(ref, Q, 1, [0])

    def test_unknown_method(self, ref):
        with pytest.raises(ValueError):
            fourier_coefficient(ref, ONE, 1, 0, method="nope")


class TestSolve:
    def test_empty_index(self, single):
        a = solve_linear_fp(single, (0,))
        assert a.Q.degree == 0 and a.Q(0.7) == 1.0
        assert np.all(a.P[0].coeffs == 0)

    def test_n11_against_mpmath(self, ref):
        # monic Q = x^2 + b x + c with c_2(Q sigma_hat_j) = 0 for j = 1, 2
        with mp.workdps(30):
            rows = []
            for lo, hi in ((-3, -2), (2, 3)):
                sh = lambda x, lo=lo, hi=hi: mp.log((x - lo) / (x - hi))
                rows.append([cheb_coefficient(lambda x, p=p: x ** p * sh(x), 2) for p in (2, 1, 0)])
        A = np.array(rows)
        b, c = np.linalg.solve(A[:, 1:], -A[:, 0])
        a = solve_linear_fp(ref, (1, 1))
        np.testing.assert_allclose(a.Q.to_monomial(), [c, b, 1.0], atol=1e-12)
        assert -3 < a.zeros[0][0] < -2 and 2 < a.zeros[1][0] < 3

    def test_n11_even(self, ref):
        a = solve_linear_fp(ref, (1, 1))
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(a.Q(-x), a.Q(x), atol=1e-9)

    @pytest.mark.parametrize("n", [(1, 1), (2, 1), (4, 3), (0, 5), (6, 6)])
    def test_structure_and_residuals(self, ref, n):
        a = solve_linear_fp(ref, n)
        assert a.Q.degree == sum(n) and a.Q.is_monic
        for j, iv in enumerate(ref.sigmas):
            z = a.zeros[j]
            assert len(z) == n[j] and np.all(iv.interval.contains(z, closed=False))
            assert len(np.unique(z)) == len(z)
        assert set(a.fourier_residuals) == {(j, k) for j in (1, 2) for k in range(sum(n) + n[j - 1])}
        assert a.max_residual < 1e-12

    def test_moment_route_agrees(self, ref):
        a = solve_linear_fp(ref, (3, 2))
        b = solve_linear_fp(ref, (3, 2), method="moment")
        for za, zb in zip(a.zeros, b.zeros):
            np.testing.assert_allclose(za, zb, atol=1e-9)

    def test_ceiling(self, ref):
        with pytest.raises(DegreeCeilingError):
            solve_linear_fp(ref, (30, 30))

    def test_wrong_length(self, ref):
        with pytest.raises(ValueError):
            solve_linear_fp(ref, (1,))


class TestRemainder:
    def test_empty_index_is_markov(self, single):
        a = solve_linear_fp(single, (0,))
        assert remainder(a, single, 1, 0.5j) == pytest.approx(markov_transform(single.branch(1), 0.5j), rel=1e-14)

    def test_routes_agree(self, ref):
        a = solve_linear_fp(ref, (2, 2))
        z = np.array([0.5j, -4 + 1j, 2.5 + 0.2j])
        for j in (1, 2):
            np.testing.assert_allclose(remainder(a, ref, j, z), remainder(a, ref, j, z, method="integral"),
                                       rtol=1e-8)

    def test_decreasing_along_diagonal(self, ref):
        vals = [abs(remainder(solve_linear_fp(ref, (k, k)), ref, 2, 5.0, method="integral")) for k in range(1, 7)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_fourier_route_matches_direct_at_low_degree(self, ref):
        a = solve_linear_fp(ref, (2, 1))
        z = np.array([0.5j, 2.5 + 0.3j, -4.0, 1.5 + 1j])
        for j in (1, 2):
            np.testing.assert_allclose(remainder(a, ref, j, z, method="fourier"), remainder(a, ref, j, z), rtol=1e-11,
                                       atol=1e-14)
        assert isinstance(remainder(a, ref, 1, -4.0, method="fourier"), float)

    def test_fourier_route_near_delta_j(self, ref):
        # the plain subtraction is roundoff-dominated here; the Fourier route is not
        a = solve_linear_fp(ref, (0, 8))
        z = np.array([2.5 + 0.2j, 3.15, 1.9 + 0.1j])
        f = remainder(a, ref, 2, z, method="fourier")
        i = remainder(a, ref, 2, z, method="integral")
        d = remainder(a, ref, 2, z)
        np.testing.assert_allclose(f, i, rtol=1e-9)
        assert np.max(np.abs(d - i) / np.abs(i)) > 1e-6

    def test_fourier_route_on_support(self, ref):
        with pytest.raises(PoleError):
            remainder(solve_linear_fp(ref, (1, 1)), ref, 2, 2.5, method="fourier")

    def test_tail_matches_direct_on_delta0(self, ref):
        a = solve_linear_fp(ref, (2, 1))
        t = np.linspace(-0.95, 0.95, 7)
        for j in (1, 2):
            direct = a.Q(t) * markov_transform(ref.branch(j), t) - a.P[j - 1](t)
            np.testing.assert_allclose(remainder_on_delta0(a, ref, j, t), direct, atol=1e-11)


class TestSignChanges:
    def test_single_branch_count(self, single):
        a = solve_linear_fp(single, (1,))
        assert sign_change_polynomial(a, single, 1).degree == 2

    def test_counts_21(self, ref):
        a = solve_linear_fp(ref, (2, 1))
        assert sign_change_polynomial(a, ref, 1).degree == 5
        assert sign_change_polynomial(a, ref, 2).degree == 4

    def test_mirror_images(self, ref):
        a = solve_linear_fp(ref, (1, 1))
        w1 = sign_change_polynomial(a, ref, 1).zeros
        w2 = sign_change_polynomial(a, ref, 2).zeros
        np.testing.assert_allclose(w1, -w2[::-1], atol=1e-9)

    def test_match_solver_nodes(self, ref):
        a = solve_linear_fp(ref, (3, 2))
        for j in (1, 2):
            np.testing.assert_allclose(sign_change_polynomial(a, ref, j).zeros, a.node_sets[j - 1].nodes, atol=1e-8)
