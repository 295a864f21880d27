import collections
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from localmajority.errors import AttemptsExhaustedError, ConfigError, OddDegreeSumError
from localmajority.generators import GenSpec, gen_configuration, gen_gnp, gen_regular, generate, gnp_probability
from localmajority.tape import Purpose, RandomnessTape


def _edge_key(g):
    return tuple(map(tuple, g.edges().tolist()))


def _simple_graphs_with_degrees(degrees):
    """Every labelled simple graph with this degree sequence, by brute force."""
    n = len(degrees)
    pairs = list(itertools.combinations(range(n), 2))
    m = sum(degrees) // 2
    out = []
    for edges in itertools.combinations(pairs, m):
        deg = [0] * n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        if deg == list(degrees):
            out.append(tuple(edges))
    return out


def test_k4_from_degrees():
    g = gen_configuration([3, 3, 3, 3], RandomnessTape(0))
    assert _edge_key(g) == tuple(itertools.combinations(range(4), 2))


def test_odd_sum():
    with pytest.raises(OddDegreeSumError):
        gen_configuration([1, 1, 1], RandomnessTape(0))
    with pytest.raises(OddDegreeSumError):
        GenSpec("degree-sequence", degrees=(1, 1, 1))


def test_zero_degree_rejected():
    with pytest.raises(ValueError):
        gen_configuration([0, 2, 1, 1], RandomnessTape(0))


def test_attempts_exhausted_is_distinct():
    # a star K_{1,3} plus a disjoint edge cannot be connected
    with pytest.raises(AttemptsExhaustedError):
        gen_configuration([3, 1, 1, 1, 1, 1], RandomnessTape(0), max_attempts=50)
    assert not issubclass(AttemptsExhaustedError, OddDegreeSumError)


def test_two_regular_five_vertices_is_always_a_five_cycle():
    cycles = _simple_graphs_with_degrees([2] * 5)
    connected = [e for e in cycles if len(e) == 5]
    # every 2-regular simple graph on 5 labelled vertices is a 5-cycle: 4!/2 = 12 of them
    assert len(cycles) == len(connected) == 12
    allowed = set(cycles)
    for s in range(10_000):
        g = gen_configuration([2] * 5, RandomnessTape(s))
        assert _edge_key(g) in allowed
        assert g.is_connected()


def test_uniform_over_cubic_graphs_on_six_vertices():
    outcomes = _simple_graphs_with_degrees([3] * 6)
    assert len(outcomes) == 70            # labelled cubic graphs on 6 vertices
    counts = collections.Counter(
        _edge_key(gen_configuration([3] * 6, RandomnessTape(s))) for s in range(10_000))
    assert set(counts) <= set(outcomes)
    observed = np.array([counts.get(o, 0) for o in outcomes])
    p = stats.chisquare(observed).pvalue
    assert p > 1e-3, p


def test_regular_small():
    assert _edge_key(gen_regular(4, 3, RandomnessTape(0))) == tuple(itertools.combinations(range(4), 2))
    with pytest.raises(OddDegreeSumError):
        gen_regular(5, 3, RandomnessTape(0))
    with pytest.raises(ValueError):
        gen_regular(4, 4, RandomnessTape(0))


def test_regular_large():
    g = gen_regular(10_000, 5, RandomnessTape(0))
    assert (g.degrees == 5).all()
    assert g.is_connected()


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=4, max_size=40), st.integers(0, 2**63))
def test_configuration_preserves_degrees(degrees, seed):
    if sum(degrees) % 2:
        degrees[0] += 1
    try:
        g = gen_configuration(degrees, RandomnessTape(seed), max_attempts=200, require_connected=False)
    except AttemptsExhaustedError:
        return
    assert g.degrees.tolist() == degrees


def test_determinism():
    spec = GenSpec("regular", seed=42, n=500, d=5)
    assert _edge_key(generate(spec)) == _edge_key(generate(spec))
    spec = GenSpec("gnp", seed=42, n=300, p=0.05)
    assert _edge_key(generate(spec)) == _edge_key(generate(spec))


def test_gnp_extremes():
    assert gen_gnp(20, 1.0, RandomnessTape(3)).m == 190
    assert gen_gnp(20, 0.0, RandomnessTape(3)).m == 0


def test_gnp_pair_draws_match_tape():
    tape = RandomnessTape(77)
    n, p = 40, 0.3
    g = gen_gnp(n, p, tape)
    ref = {(u, v) for u in range(n) for v in range(u + 1, n)
           if float(tape.uniform(Purpose.EDGE_INCLUSION, u, v)) < p}
    assert set(_edge_key(g)) == ref


def test_gnp_edge_count_concentration():
    n, p = 100, 0.05
    pairs = n * (n - 1) // 2
    counts = np.array([gen_gnp(n, p, RandomnessTape(s)).m for s in range(1000)])
    mean, sd = pairs * p, math.sqrt(pairs * p * (1 - p))
    assert abs(counts.mean() - mean) <= 4 * sd / math.sqrt(len(counts))
    assert (np.abs(counts - mean) <= 6 * sd).all()


def test_gnp_min_degree():
    n = 10_000
    p = gnp_probability(n, 3)
    ok = sum(gen_gnp(n, p, RandomnessTape(s)).degrees.min() >= 0.5 * math.log(n) for s in range(5))
    assert ok == 5


@pytest.mark.parametrize("kwargs", [
    dict(family="nope"),
    dict(family="regular", n=10),
    dict(family="gnp", n=10, p=1.5),
    dict(family="regular", n=4, d=5),
    dict(family="degree-sequence"),
    dict(family="regular", n=10, d=3, max_attempts=0),
])
def test_genspec_validation(kwargs):
    with pytest.raises((ConfigError, OddDegreeSumError)):
        GenSpec(**kwargs)
