import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enumdist.core import INF, NEG_INF
from enumdist.enumerator import discrete_bound
from enumdist.information import (
    TRANSFORMS,
    ConditionalCache,
    adjunction_harness,
    conservation_harness,
    decode_pair,
    dumps_json,
    info_finite,
    info_lower_bound,
    info_report,
    info_sup_bound,
    length_header,
    load_corpus,
    make_corpus,
    pair_code,
    record_rows,
    resolved_ids,
    save_corpus,
    summarize,
)

bits = st.text(alphabet="01", max_size=20)


@pytest.fixture(scope="module")
def b14():
    return discrete_bound(14)


def oracle_K(bound, x):
    """lognorm of the halting mass, recomputed from the raw program records."""
    m = sum((Fraction(1, 2 ** len(r.program)) for r in bound.records if r.output == x), Fraction(0))
    if not m:
        return INF
    k = 0
    while Fraction(2) ** k < m:
        k += 1
    while Fraction(2) ** (k - 1) >= m:
        k -= 1
    return abs(k - 1)


def test_length_header_examples():
    assert length_header(0) == "0"
    assert length_header(1) == "1" + "0" + "1"
    assert length_header(5) == "111" + "0" + "101"
    with pytest.raises(ValueError):
        length_header(-1)


@given(bits, bits)
def test_pair_code_round_trip(a, b):
    assert decode_pair(pair_code(a, b)) == (a, b)


@given(bits)
def test_decode_inverts_whenever_defined(z):
    xy = decode_pair(z)
    if xy is not None:
        assert pair_code(*xy) == z


@given(st.integers(0, 5000), st.integers(0, 5000))
def test_length_headers_prefix_free(m, n):
    hm, hn = length_header(m), length_header(n)
    if m != n:
        assert not hm.startswith(hn) and not hn.startswith(hm)


@pytest.mark.parametrize("a,b,expected", [
    ("0", "0", (5, 5, 15, -5)),
    ("0", "1", (5, 7, 15, -3)),
    ("", "0", (1, 5, 8, -2)),
])
def test_info_finite_pins(b14, a, b, expected):
    rep = info_finite(a, b, b14)
    oracle = (oracle_K(b14, a), oracle_K(b14, b), oracle_K(b14, pair_code(a, b)))
    assert (rep.K_a, rep.K_b, rep.K_ab) == oracle
    assert (rep.K_a, rep.K_b, rep.K_ab, rep.I) == expected
    assert rep.resolved and rep.unresolved == []


def test_info_finite_unresolved(b14):
    rep = info_finite("01", "01", b14)
    assert rep.I is None and rep.unresolved == ["K_ab"]


def test_stage_zero_report_is_empty():
    rep = info_report("0", "1", ConditionalCache(0))
    assert rep.I is None
    assert rep.unresolved == ["K_a", "K_b", "K_ab"]
    assert rep.i_bound == NEG_INF and rep.sup_bound == NEG_INF and rep.witness is None


@pytest.mark.parametrize("a,b", [("0", "0"), ("01", "01"), ("0", "1"), ("", "")])
def test_sequence_bounds_running_max(a, b):
    cache = ConditionalCache(12)
    lows = [info_lower_bound(a, b, cache, stage=s) for s in range(13)]
    sups = [info_sup_bound(a, b, cache, stage=s)[0] for s in range(13)]
    assert lows == sorted(lows) and sups == sorted(sups)
    assert lows[-1] == -1


def test_sup_witness_pin():
    rep = info_report("01", "01", ConditionalCache(12))
    assert rep.sup_bound == 2 and rep.witness == "01"


def test_cache_restrict_matches_fresh_sweep():
    cache = ConditionalCache(12)
    assert dict(cache("01", 9).mass) == dict(discrete_bound(9, "01").mass)
    assert dict(cache.unconditional(7).mass) == dict(discrete_bound(7).mass)


def test_corpus_shape_and_round_trip(tmp_path):
    pairs = make_corpus(200, seed=3)
    assert pairs == make_corpus(200, seed=3)
    assert all(len(a) <= 12 and len(b) <= 12 for a, b in pairs)
    assert {len(a) for a, _ in pairs} == set(range(13))
    path = tmp_path / "corpus.csv"
    save_corpus(pairs, path)
    assert load_corpus(path) == pairs
    save_corpus([], path)
    assert load_corpus(path) == []


def test_transforms():
    assert TRANSFORMS["drop_last"]("") is None
    assert TRANSFORMS["drop_last"]("011") == "01"
    assert TRANSFORMS["duplicate"]("01") == "0101"
    assert TRANSFORMS["xor_halves"]("0110") == "11"
    assert TRANSFORMS["xor_halves"]("01010") == "00"


def test_identity_conserves_exactly(b14):
    corpus = make_corpus(60, seed=1)
    recs = conservation_harness("identity", corpus, b14)
    assert len(recs) == 60
    assert all(r.slack == 0 for r in recs if r.slack is not None)
    s = summarize(recs)
    assert s.total == 60 and s.resolved == len(resolved_ids(recs))
    assert s.constant in (0, None)


def test_partial_transform_is_recorded(b14):
    recs = conservation_harness("drop_last", [("", "0"), ("01", "0")], b14)
    assert recs[0].status == "partial" and recs[0].slack is None


def test_adjunction_draws_from_resolved_pairs(b14):
    corpus = make_corpus(100, seed=2)
    recs = adjunction_harness(corpus, b14, draws=20, seed=5)
    for r in recs:
        assert info_finite(*corpus[r.pair_id], b14).I is not None
        assert len(r.w) == 2
    assert adjunction_harness([("0101010101", "1")], b14) == []


def test_json_rows_encode_infinities(b14):
    recs = conservation_harness("identity", [("01", "01")], b14)
    rows = json.loads(dumps_json(record_rows(recs)))
    assert rows[0]["slack"] is None
    assert json.loads(dumps_json([{"v": INF, "w": NEG_INF}])) == [{"v": "inf", "w": "-inf"}]
