import math

import mpmath as mp
import numpy as np
import pytest

from fourier_pade.errors import DegreeCeilingError
from fourier_pade.linear_fp import solve_linear_fp
from fourier_pade.measures import markov_transform
from fourier_pade.multipoint_pade import (MultiIndex, NodeSet, node_fixed_point, remainder_identity_residual,
                                          sigma0_start_nodes, solve_multipoint, split_denominator)
from fourier_pade.orthopoly import max_coeff_difference


def test_multi_index_basics():
    n = MultiIndex((2, 1))
    assert n.size == 3 and n.m == 2 and n[1] == 2 and n.nodes_count(1) == 5 and n.nodes_count(2) == 4
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_ceiling(ref):
    with pytest.raises(DegreeCeilingError):
        solve_multipoint(ref, (26, 25), [np.zeros(76), np.zeros(75)])


def test_single_branch_degree_one(single):
    x = np.array([-1 / math.sqrt(2), 1 / math.sqrt(2)])
    res = solve_multipoint(single, (1,), [x])
    with mp.workdps(30):
        w = lambda t: (t - x[0]) * (t - x[1])
        c = mp.quad(lambda t: t / w(t), [2, 3]) / mp.quad(lambda t: 1 / w(t), [2, 3])
    np.testing.assert_allclose(res.q.zeros, [float(c)], atol=1e-14)
    assert res.q.is_monic


def test_symmetric_nodes_give_even_q(ref):
    n = MultiIndex((1, 1))
    X = sigma0_start_nodes(ref, n)
    res = solve_multipoint(ref, n, X)
    x = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(res.q(-x), res.q(x), atol=1e-9 * np.max(np.abs(res.q(x))))


@pytest.mark.parametrize("n", [(1, 1), (2, 1), (3, 2), (0, 3)])
def test_linear_fp_nodes_reproduce_q(ref, n):
    lin = solve_linear_fp(ref, n)
    res = solve_multipoint(ref, n, lin.node_sets)
    assert max_coeff_difference(lin.Q, res.q) < 1e-8 * np.max(np.abs(lin.Q.coeffs))


@pytest.mark.parametrize("n", [(1, 1), (2, 1), (3, 3)])
def test_iterative_and_moment_routes_agree(ref, n):
    n = MultiIndex(n)
    X = sigma0_start_nodes(ref, n)
    a = solve_multipoint(ref, n, X)
    b = solve_multipoint(ref, n, X, method="moment")
    for za, zb in zip(a.zeros, b.zeros):
        np.testing.assert_allclose(za, zb, atol=1e-8)


def test_split_factors(ref):
    res = solve_multipoint(ref, (1, 1), sigma0_start_nodes(ref, MultiIndex((1, 1))))
    for j in (1, 2):
        qj, qt = split_denominator(res, j)
        assert qj.degree == 1 and qt.degree == 1
        assert max_coeff_difference(res.q, qj * qt) < 1e-10
    res2 = solve_multipoint(ref, (2, 0), sigma0_start_nodes(ref, MultiIndex((2, 0))))
    q2, qt2 = split_denominator(res2, 2)
    assert q2.degree == 0 and max_coeff_difference(res2.q, qt2) < 1e-12


def test_zero_count_per_interval(ref):
    res = solve_multipoint(ref, (3, 2), sigma0_start_nodes(ref, MultiIndex((3, 2))))
    assert len(res.zeros[0]) == 3 and np.all((res.zeros[0] > -3) & (res.zeros[0] < -2))
    assert len(res.zeros[1]) == 2 and np.all((res.zeros[1] > 2) & (res.zeros[1] < 3))


def test_node_validation(ref):
    with pytest.raises(ValueError, match="nodes"):
        solve_multipoint(ref, (1, 1), [np.zeros(2), np.zeros(3)])
    with pytest.raises(ValueError, match="outside"):
        solve_multipoint(ref, (1, 0), [np.array([0.0, 1.5]), np.array([0.0])])
    with pytest.raises(ValueError):
        NodeSet(1, [0.5, 0.1])


class TestRemainderIdentity:
    def test_single_branch_z10(self, single):
        res = solve_multipoint(single, (1,), [np.array([-0.5, 0.5])])
        d, i = remainder_identity_residual(res, single, 1, 10.0)
        assert abs(d - i) < 1e-9 * abs(d)

    def test_empty_index(self, ref):
        res = solve_multipoint(ref, (0, 0), [np.zeros(0), np.zeros(0)])
        z = 0.3 + 1j
        d, i = remainder_identity_residual(res, ref, 2, z)
        exact = markov_transform(ref.branch(2), z)
        assert d == pytest.approx(exact, rel=1e-13) and i == pytest.approx(exact, rel=1e-13)

    def test_far_field(self, single):
        res = solve_multipoint(single, (1,), [np.array([-0.5, 0.5])])
        d, i = remainder_identity_residual(res, single, 1, 1e4)
        d0, i0 = remainder_identity_residual(res, single, 1, 1e2)
        # deg w = deg q^2 here, so both sides decay like 1/z
        assert abs(i * 1e4 / (i0 * 1e2) - 1) < 0.1
        assert abs(d / i - 1) < 1e-6

    def test_complex_points(self, ref):
        n = MultiIndex((3, 2))
        res = solve_multipoint(ref, n, sigma0_start_nodes(ref, n))
        z = np.array([0.5j, 1.5 + 1j, -2.5 + 0.3j, 4 + 0.2j])
        for j in (1, 2):
            d, i = remainder_identity_residual(res, ref, j, z)
            # the direct side carries absolute roundoff of size eps * |sigma_hat|
            floor = 1e-13 * np.abs(markov_transform(ref.branch(j), z))
            assert np.all(np.abs(d - i) <= 1e-8 * np.abs(i) + floor)


def test_fixed_point_symmetric_nodes(ref):
    fp = node_fixed_point(ref, (2, 2), "nonlinear")
    np.testing.assert_allclose(fp.nodes[0], -fp.nodes[1][::-1], atol=1e-8)
    assert fp.trace[-1] < 1e-10
