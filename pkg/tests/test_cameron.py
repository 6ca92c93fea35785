from __future__ import annotations

import pytest

from indivisible.cameron import (
    CutSplit,
    LeastFailureReport,
    NotFound,
    UnsupportedOracle,
    aca_gadget,
    case3_membership,
    decider_partition,
    least_failing_pair,
    pairs_of_size,
    universal_partition,
    verify_case3,
)
from indivisible.graphs import pair
from indivisible.oracles import canonical_random, complete, empty, expression_oracle, kforest_layout, matching


def test_matching_least_failing_pair():
    rep = least_failing_pair(matching(), 3, 6)
    assert isinstance(rep, LeastFailureReport)
    assert rep.n == 2 and rep.pair == pair([0, 1])
    assert rep.provenance == "structural" and "neighbour" in rep.certificate
    assert '"n": 2' in rep.dumps()


def test_matching_case3_partition_and_verification():
    rep = least_failing_pair(matching(), 3, 6)
    split = CutSplit.canonical(rep.pair)
    x1 = [v for v in range(40) if case3_membership(matching(), rep.pair, split, v) == 1]
    assert x1 == [1]
    results = verify_case3(matching(), rep.pair, split, 40)
    assert [r.status for r in results] == ["certified", "certified"]
    assert all(r.pair.size() < rep.pair.size() for r in results)


def test_complete_graph_fails_at_size_one():
    rep = least_failing_pair(complete(), 3, 4)
    assert rep.n == 1 and rep.pair == pair([], [0])


def test_empty_graph_fails_at_size_one():
    rep = least_failing_pair(empty(), 3, 4)
    assert rep.n == 1 and rep.pair == pair([0])


def test_random_graph_has_no_failure():
    rep = least_failing_pair(canonical_random(), 2, 4)
    assert isinstance(rep, NotFound) and not rep
    assert rep.unconfirmed == []


def test_uncertified_candidates_are_not_reported_as_failures():
    # Expression oracles carry no certificates; a genuinely failing pair stays unconfirmed.
    g = expression_oracle("v == u + 1 and u % 2 == 0")
    rep = least_failing_pair(g, 2, 3, search_bound=64)
    assert not rep and pair([0, 1]) in rep.unconfirmed


def test_kforest_fails_at_its_isolated_vertex():
    rep = least_failing_pair(kforest_layout(), 2, 5)
    assert rep and rep.n == 1 and rep.pair == pair([0])


def test_pairs_of_size_order_and_count():
    ps = list(pairs_of_size(2, 2))
    assert len(ps) == 3 * 4
    codes = [p.code() for p in ps]
    assert codes == sorted(codes)


def test_cut_split_validation():
    with pytest.raises(ValueError):
        CutSplit(frozenset(), frozenset({1}))
    with pytest.raises(ValueError):
        CutSplit(frozenset({1}), frozenset({1}))
    with pytest.raises(ValueError):
        CutSplit.canonical(pair([3]))
    s = CutSplit.canonical(pair([4, 1], [2]))
    assert s.u0 == {1} and s.u1 == {2, 4}
    assert s.inherited(pair([4, 1], [2]), 1) == pair([4], [2])


def test_verify_case3_flags_a_non_failing_pair():
    # <{0},{1}> has witnesses in the random graph; the inherited side pairs get witnessed.
    p = pair([0, 2])
    results = verify_case3(canonical_random(), p, CutSplit.canonical(p), 64)
    assert "violated" in [r.status for r in results]


def test_decider_partitions():
    assert decider_partition(empty().isolated_decider, 5) == 0
    with pytest.raises(UnsupportedOracle):
        decider_partition(canonical_random().public().isolated_decider, 1)
    assert universal_partition(complete(), 3) == 0
    assert universal_partition(matching(), 3) == 1


@pytest.mark.parametrize("table", [{n: n + 1 for n in range(100)}, {n: 2 * n for n in range(100)}])
def test_aca_gadget_isolation_matches_range(table):
    g = aca_gadget(table)
    rng = set(table.values())
    for m in range(100):
        v = 2 * m + 1
        explored = any(g.edge(u, v) for u in range(0, 200, 2))
        assert explored == (m in rng)
        assert g.isolated_decider(v) == (m not in rng)


def test_aca_gadget_rejects_non_injective():
    with pytest.raises(ValueError):
        aca_gadget({0: 1, 1: 1})
    with pytest.raises(ValueError):
        aca_gadget("n // 2")
    assert aca_gadget("3*n").edge(2, 7)
