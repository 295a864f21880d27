import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from localmajority.graph import ball, regular_tree
from localmajority.theory import (
    MAX_CHAIN_N, amplification, check_condition, closed_form_bound, complete_graph_chain,
    default_max_rounds, first_step_bound, omega_prime, recursion_step, recursion_trace,
    red_poll_probability, time_constant, tree_population,
)

NUS = range(2, 11)


# ---------------------------------------------------------------- bias condition

def test_condition_satisfied_example():
    c = check_condition(0.05, 5, 0.6)
    assert c.nu == 2
    assert abs(c.lhs - 0.57) <= 1e-12
    assert c.satisfied and c.margin > 0


def test_condition_unsatisfied_example():
    c = check_condition(0.25, 5, 0.99)
    assert abs(c.lhs - 2.25) <= 1e-12
    assert not c.satisfied


def test_alpha_max_boundary():
    c = check_condition(0.05, 5, 1.0)
    assert abs(c.alpha_max - (1 - math.sqrt(2 / 3)) / 2) <= 1e-12


@given(st.floats(0.001, 0.499), st.sampled_from([5, 6, 7, 9, 11, 21]), st.floats(0.05, 1.0))
def test_condition_invariants(alpha, d, beta):
    c = check_condition(alpha, d, beta)
    assert c.satisfied == (c.lhs < beta)
    assert c.lhs >= 0
    if c.alpha_max is not None:
        assert 0 < c.alpha_max < 0.5
        f = amplification(c.nu)
        assert abs(f * 4 * c.alpha_max * (1 - c.alpha_max) - beta) <= 1e-9
        if alpha < c.alpha_max * (1 - 1e-9):
            assert c.satisfied


@pytest.mark.parametrize("args", [(0.1, 4, 0.5), (0.0, 5, 0.5), (0.5, 5, 0.5), (0.1, 5, 0.0), (0.1, 5, 1.2)])
def test_condition_rejects(args):
    with pytest.raises(ValueError):
        check_condition(*args)


def test_amplification_nu_one_rejected():
    with pytest.raises(ValueError):
        amplification(1)


# ---------------------------------------------------------------- recursion

def _binomial_tail_exact(p: Fraction, nu: int) -> Fraction:
    return sum(math.comb(2 * nu, i) * p ** i * (1 - p) ** (2 * nu - i) for i in range(nu, 2 * nu + 1))


def test_recursion_half():
    assert recursion_step(0.5, 2) == 11 / 16


def test_recursion_fixed_points():
    for nu in NUS:
        assert recursion_step(0.0, nu) == 0.0
        assert recursion_step(1.0, nu) == 1.0


def test_p1_exact():
    p1 = recursion_step(0.05, 2)
    assert abs(p1 - 0.01401875) <= 1e-9
    assert abs(p1 - float(_binomial_tail_exact(Fraction(1, 20), 2))) <= 1e-16


@given(st.integers(0, 1000), st.integers(1, 12))
def test_recursion_matches_scipy(i, nu):
    p = i / 1000
    assert abs(recursion_step(p, nu) - stats.binom.sf(nu - 1, 2 * nu, p)) <= 1e-12


@pytest.mark.parametrize("nu", NUS)
def test_recursion_monotone(nu):
    rng = np.random.default_rng(nu)
    pairs = np.sort(rng.uniform(0, 1, size=(1000, 2)), axis=1)
    for p, q in pairs:
        assert recursion_step(p, nu) <= recursion_step(q, nu) + 1e-15


@pytest.mark.parametrize("nu", NUS)
def test_first_step_inequality(nu):
    for a in np.linspace(0.0005, 0.4995, 1000):
        assert recursion_step(float(a), nu) <= first_step_bound(float(a), nu) * (1 + 1e-12)


def test_trace_example():
    tr = recursion_trace(0.05, 2, 5)
    assert tr.p[0] == 0.05
    assert abs(tr.p[1] - 0.01401875) <= 1e-12
    assert abs(tr.first_step_bound - 0.75 * 0.19 ** 2) <= 1e-12
    assert abs(tr.bound[1] - 0.25 * (3 * 0.19) ** 2) <= 1e-12
    assert all(tr.dominated)
    assert all(a > b for a, b in zip(tr.p, tr.p[1:]))
    assert tr.first_step_ok


def test_trace_dominated_when_condition_holds():
    checked = 0
    for d in range(5, 22):
        nu = (d - 1) // 2
        for a in np.linspace(0.001, 0.499, 100):
            if check_condition(float(a), d, 0.99).satisfied:
                tr = recursion_trace(float(a), nu, 20)
                assert all(tr.dominated[1:]), (d, a)
                checked += 1
    assert checked > 100


def test_trace_condition_violated_is_reported_not_raised():
    tr = recursion_trace(0.25, 2, 10)
    assert math.isinf(tr.bound[-1]) or tr.bound[-1] > 1
    assert len(tr.p) == 11


def test_trace_underflow_clamps():
    tr = recursion_trace(0.01, 10, 8)
    assert tr.p[-1] == 0.0 and any(tr.clamped)
    assert tr.clamped.index(True) == 3 and all(tr.dominated)
    assert all(0 <= p <= 1 for p in tr.p)


def test_closed_form_overflow_is_inf():
    assert closed_form_bound(0.45, 2, 2000) == math.inf


def test_trace_rejects():
    with pytest.raises(ValueError):
        recursion_trace(0.1, 2, 0)


# ---------------------------------------------------------------- time scales

def test_time_constant_d5():
    assert abs(time_constant(5, 0.1) - 1.1 / (math.log(2) / math.log(5))) <= 1e-12
    assert abs(time_constant(5, 0.1) - 2.554) < 1e-3


def test_time_constant_even_d_uses_nu():
    # d = 6 gives nu = 2, so the constant is 1.1 log 6 / log 2
    assert time_constant(6) == pytest.approx(1.1 * math.log(6) / math.log(2))
    with pytest.raises(ValueError):
        time_constant(4)


def test_omega_prime_example():
    assert abs(omega_prime(10**6, 5) - 1.336) < 1e-3


def test_default_max_rounds():
    assert default_max_rounds(10**4, 5) == 50
    assert default_max_rounds(10**4, 3) == 50
    big = default_max_rounds(10**300, 5)
    assert big == 10 * math.ceil(time_constant(5) * omega_prime(10**300, 5)) and big > 50


# ---------------------------------------------------------------- tree population

@pytest.mark.parametrize("d,h,k", [(5, 2, 26), (7, 0, 1), (3, 1, 4), (3, 0, 1)])
def test_tree_population_examples(d, h, k):
    assert tree_population(d, h) == k


@pytest.mark.parametrize("d", [3, 5, 7])
@pytest.mark.parametrize("h", [0, 1, 2, 3])
def test_tree_population_matches_built_tree(d, h):
    assert tree_population(d, h) == len(ball(regular_tree(d, h), 0, h))


def test_tree_population_rejects():
    with pytest.raises(ValueError):
        tree_population(2, 3)
    with pytest.raises(ValueError):
        tree_population(5, -1)


# ---------------------------------------------------------------- complete-graph chain

def test_hypergeometric_example():
    assert red_poll_probability(5, 3, 2) == 0.5
    # scipy oracle: P(X >= 2), X ~ Hypergeom(M=4 others, n=2 red, N=3 drawn)
    assert red_poll_probability(5, 3, 2) == pytest.approx(stats.hypergeom.sf(1, 4, 2, 3))


@pytest.mark.parametrize("n,k", [(5, 3), (11, 3), (11, 5), (25, 7), (8, 1)])
def test_chain_structure(n, k):
    c = complete_graph_chain(n, k, 0.1)
    assert np.allclose(c.transition.sum(axis=1), 1, atol=1e-12, rtol=0)
    assert c.absorb_blue[0] == 1.0 and c.absorb_blue[n] == 0.0
    assert c.expected_time[0] == 0 and c.expected_time[n] == 0
    assert c.transition[0, 0] == 1.0 and c.transition[n, n] == 1.0
    assert np.all((c.absorb_blue >= -1e-12) & (c.absorb_blue <= 1 + 1e-12))
    assert abs(c.initial.sum() - 1) <= 1e-12


def test_chain_transition_against_brute_force():
    # n = 5, k = 3, r = 2: enumerate every joint outcome of the five independent polls
    n, k, r = 5, 3, 2
    c = complete_graph_chain(n, k, 0.2)
    q_red = red_poll_probability(n, k, r - 1)
    q_blue = red_poll_probability(n, k, r)
    dist = np.zeros(n + 1)
    for mask in range(1 << n):
        bits = [(mask >> i) & 1 for i in range(n)]
        prob = 1.0
        for i, b in enumerate(bits):
            q = q_red if i < r else q_blue
            prob *= q if b else 1 - q
        dist[sum(bits)] += prob
    assert np.allclose(dist, c.transition[r], atol=1e-15)


def test_chain_symmetry():
    c = complete_graph_chain(11, 3, 0.1)
    assert np.allclose(c.absorb_blue + c.absorb_blue[::-1], 1, atol=1e-10)


def test_chain_guards():
    with pytest.raises(ValueError):
        complete_graph_chain(MAX_CHAIN_N + 1, 3, 0.1)
    with pytest.raises(ValueError):
        complete_graph_chain(5, 4, 0.1)
    with pytest.raises(ValueError):
        complete_graph_chain(5, 5, 0.1)
