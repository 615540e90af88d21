from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enumdist.core import INF, ONE, Dyadic, lenlex_key, strings_of_length
from enumdist.enumerator import (
    advance_continuous,
    advance_discrete,
    complexity,
    continuous_bound,
    discrete_bound,
    mixture_semimeasure,
    mixture_weight,
    schedule,
)
from enumdist.machine import IDENTITY_TRANSDUCER, MachineConfig, run_monotone, run_prefix
from enumdist.semimeasure import SemimeasureTable, from_leaves, lebesgue

# K_18("0101"): m_18("0101") = 27/2**17, checked against the stream oracle below.
K18_0101 = 13
KRAFT_18 = Fraction(108959, 131072)


def stream_oracle(t: int, depth: int = 16):
    """m_t and M_t from running every t-bit stream directly.

    A stream of exactly t bits reaches every minimal program of length <= t,
    so counting streams weighs each program by 2**-|p|.
    """
    m, M = {}, {}
    for s in strings_of_length(t):
        out = run_prefix(s, t * t)
        if out.halted:
            m[out.output] = m.get(out.output, 0) + 1
        mono = run_monotone(s, t * t, MachineConfig())[:depth]
        for k in range(len(mono) + 1):
            M[mono[:k]] = M.get(mono[:k], 0) + 1
    return ({x: Fraction(v, 2**t) for x, v in m.items()}, {x: Fraction(v, 2**t) for x, v in M.items()})


def test_schedule():
    assert schedule(0) == (0, 0) and schedule(7) == (7, 49)
    with pytest.raises(ValueError):
        schedule(-1)


def test_stage_zero_is_empty():
    assert discrete_bound(0).mass == {}
    assert continuous_bound(0).tree.items() == []
    assert complexity(discrete_bound(0), "") == INF


def test_halt_program_gives_half_at_stage_one():
    b = advance_discrete(discrete_bound(0))
    assert b.stage == 1 and b[""] == Fraction(1, 2)


@pytest.mark.parametrize("t", [5, 9, 12])
def test_bounds_match_stream_oracle(t):
    m, M = stream_oracle(t)
    d, c = discrete_bound(t), continuous_bound(t)
    assert {x: v.to_fraction() for x, v in d.mass.items()} == m
    assert {x: v.to_fraction() for x, v in c.tree.items()} == M


def test_identity_transducer_lower_bound():
    t = 12
    c = continuous_bound(t)
    n_max = t - len(IDENTITY_TRANSDUCER)
    for n in range(n_max + 1):
        for x in strings_of_length(n):
            assert c[x] >= Dyadic(1, len(IDENTITY_TRANSDUCER) + n)


def test_k_of_0101_at_stage_18():
    b = discrete_bound(18)
    assert b["0101"] == Fraction(27, 2**17)
    assert complexity(b, "0101") == K18_0101
    assert b.kraft() == KRAFT_18


def test_complexity_examples():
    b = discrete_bound(0)
    assert complexity(b, "0") == INF
    assert complexity(type(b)(3, {"0": Dyadic(1, 3)}), "0") == 4


def test_restrict_reproduces_earlier_stages(stage_bounds):
    top = stage_bounds[18][0]
    for s in range(19):
        assert top.restrict(s).mass == stage_bounds[s][0].mass


def test_advance_matches_direct(stage_bounds):
    c = continuous_bound(0)
    for t in range(1, 8):
        c = advance_continuous(c)
        assert c.tree == stage_bounds[t][1].tree


def test_discrete_below_continuous_up_to_pairing_constant(stage_bounds):
    # a halting program printing x also prints x on the monotone machine
    for t in (10, 14, 18):
        d, c = stage_bounds[t]
        for x, v in d.mass.items():
            if len(x) <= c.tree.depth:
                assert v <= c[x]


def test_mixture_examples():
    lam = SemimeasureTable(4, dict(lebesgue(4).items()))
    assert mixture_semimeasure([(ONE, lam)]) == lam
    assert mixture_semimeasure([(Dyadic(1, 1), lam), (Dyadic(1, 1), lam)]) == lam
    with pytest.raises(ValueError):
        mixture_semimeasure([(ONE, lam), (Dyadic(1, 3), lam)])


def test_mixture_weights_sum_below_one():
    total = sum((mixture_weight(i).to_fraction() for i in range(2000)), Fraction(0))
    assert total < Fraction(1, 2) + Fraction(1, 100)
    assert all(mixture_weight(i) > 0 for i in range(50))


leaf_masses = st.lists(st.integers(0, 4), min_size=8, max_size=8)


@settings(max_examples=60, deadline=None)
@given(leaf_masses, leaf_masses)
def test_mixture_dominates_components(a, b):
    mu1 = from_leaves({x: Fraction(v, 32) for x, v in zip(strings_of_length(3), a)})
    mu2 = from_leaves({x: Fraction(v, 32) for x, v in zip(strings_of_length(3), b)})
    w1, w2 = Dyadic(1, 1), Dyadic(1, 2)
    mix = mixture_semimeasure([(w1, mu1), (w2, mu2)])
    assert mix.is_semimeasure()
    for x, _ in sorted(mu2.items(), key=lambda kv: lenlex_key(kv[0])):
        assert mix.mass(x) >= w2 * mu2.mass(x)
        assert mix.mass(x) >= w1 * mu1.mass(x)
