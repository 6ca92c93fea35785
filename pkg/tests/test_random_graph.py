from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indivisible.graphs import Partition, has_extension_witness, is_witness, pair, stage_prefix
from indivisible.oracles import canonical_random, matching, relabeled
from indivisible.random_graph import (
    PartialIso,
    Verdict,
    WitnessSearchExhausted,
    back_and_forth,
    canonical_edge,
    gab_membership,
    least_witness,
    pairs_over,
    random_side_search,
    witness_formula,
)


def test_canonical_edge_bit_rule():
    assert canonical_edge(0, 1)  # bit 0 of 1
    assert canonical_edge(1, 2)  # bit 1 of 2
    assert not canonical_edge(0, 2)
    assert not canonical_edge(4, 4)


@given(st.integers(0, 500), st.integers(0, 500))
def test_canonical_edge_symmetric(x, y):
    assert canonical_edge(x, y) == canonical_edge(y, x)


@st.composite
def pairs_in(draw, top=12):
    support = draw(st.lists(st.integers(0, top), unique=True, max_size=6))
    k = draw(st.integers(0, len(support)))
    return pair(support[:k], support[k:])


@given(pairs_in())
def test_witness_formula_is_a_witness(p):
    w = witness_formula(p)
    assert w not in p.support
    assert is_witness(canonical_edge, p, w)
    assert gab_membership(p, w, canonical_random())


def test_witness_formula_frozen_values():
    assert witness_formula(pair()) == 1
    assert witness_formula(pair([0])) == 3
    assert witness_formula(pair([], [0])) == 2
    assert witness_formula(pair([1], [3])) == 16 + 2


def test_prefix_has_all_small_witnesses():
    g = stage_prefix(canonical_edge, 63)
    for p in pairs_over(list(range(4)), 4):
        assert has_extension_witness(g, p) is not None


def test_least_witness_matches_scan():
    p = pair([2], [0, 1])
    w = least_witness(canonical_edge, p, 100)
    assert w == next(x for x in range(100) if is_witness(canonical_edge, p, x))
    assert least_witness(canonical_edge, pair([0, 1, 2, 3, 4, 5, 6]), 10) is None


@pytest.mark.parametrize("perm", [{}, {0: 1, 1: 0}, {0: 5, 5: 3, 3: 11, 11: 0}, {2: 7, 7: 2}])
def test_back_and_forth_against_relabelled_copy(perm):
    g1 = canonical_random()
    g2 = relabeled(g1, perm)
    iso = back_and_forth(g1, g2, 8, 16)
    assert set(range(8)) <= iso.domain and set(range(8)) <= iso.range
    assert iso.violations(g1.edge, g2.edge) == []


def test_back_and_forth_identity_copy_is_identity():
    iso = back_and_forth(canonical_random(), canonical_random(), 6, 12)
    assert iso.pairs == {v: v for v in range(12)}


def test_back_and_forth_exhausts_on_non_random_target():
    with pytest.raises(WitnessSearchExhausted) as info:
        back_and_forth(canonical_random(), matching(), 4, 20)
    assert info.value.bound == 20


def test_partial_iso_violations():
    iso = PartialIso({0: 0, 1: 2})
    assert iso.violations(canonical_edge, canonical_edge) == [(0, 1)]
    assert iso.inverse() == {0: 0, 2: 1}


def test_pairs_over_order():
    ps = list(pairs_over([0, 1], 2))
    assert ps[0] == pair()
    assert len(ps) == 1 + 4 + 4
    sizes = [p.size() for p in ps]
    assert sizes == sorted(sizes)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5))
def test_random_side_search_on_residue_partition(m):
    reports = random_side_search(Partition(lambda v: int(v % m == 0)), depth=2, bound=256)
    assert reports[0].verdict is Verdict.WITNESSED
    for r in reports.values():
        assert r.verdict in (Verdict.WITNESSED, Verdict.UNKNOWN_AT_BOUND)


def test_random_side_search_never_claims_non_random():
    # The side {0} cannot witness anything inside itself; the answer is only "unknown".
    reports = random_side_search(Partition(lambda v: int(v != 0)), depth=2, bound=64)
    assert reports[0].verdict is Verdict.UNKNOWN_AT_BOUND
    assert reports[0].failing_pair is not None


def test_all_pairs_over_eight_vertices_exact():
    for n in range(9):
        for support in itertools.combinations(range(8), n):
            p = pair(support[: n // 2], support[n // 2:])
            assert is_witness(canonical_edge, p, witness_formula(p))
