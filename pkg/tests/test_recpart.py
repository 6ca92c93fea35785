from __future__ import annotations

import copy

import pytest
from conftest import scenario

from indivisible.cli import config_from_json
from indivisible.machines import AdversaryRegistry, constant, identity, never
from indivisible.oracles import empty, matching, sparse
from indivisible.recpart import (
    CONFIRMED,
    CONSISTENT,
    VIOLATED,
    PreconditionError,
    RecRequirementState,
    StageView,
    check_trace,
    claimed_by,
    injury_summary,
    looks_satisfied,
    rec_run,
    stable_tail,
    verify_diagonalization,
)


def load(name):
    cfg = config_from_json(scenario(name))
    oracle, registry = cfg.build_oracle(), cfg.build_registry()
    return oracle, registry, rec_run(oracle, registry, cfg.horizon, cfg.params.get("dovetail_budget", 256))


@pytest.fixture(scope="module")
def matching_run():
    return load("recpart_matching.json")


@pytest.fixture(scope="module")
def hub_run():
    return load("recpart_hub.json")


def endings(tr):
    return [st.satisfied_via for st in tr.final]


def test_matching_scenario_endings(matching_run):
    oracle, registry, tr = matching_run
    assert endings(tr) == ["S2", "S4", "S2", "S1"]
    assert tr.final[1].witness == {"x": 27, "y": 54}
    assert check_trace(tr, oracle) == []
    assert stable_tail(tr, 10) == {0: "S2", 1: "S4", 2: "S2", 3: "S1"}
    assert verify_diagonalization(tr, oracle, 1, registry).verdict == CONFIRMED


def test_matching_scenario_injuries(matching_run):
    _, _, tr = matching_run
    assert sorted({s for s, _, _ in tr.initializations}) == [23, 41]
    summary = injury_summary(tr)
    assert set(summary) == {1, 2, 3} and all(d["last"] == 41 for d in summary.values())


def test_hub_scenario_endings(hub_run):
    oracle, registry, tr = hub_run
    assert endings(tr) == ["S5", "S4", "S2", "S1"]
    assert tr.final[0].witness == {"x": 0, "y": 1, "z": 51}
    assert tr.final[1].witness == {"x": 61, "y": 122}
    assert check_trace(tr, oracle) == []
    for e in (0, 1):
        assert verify_diagonalization(tr, oracle, e, registry).verdict == CONFIRMED


def test_precondition_for_other_endings(hub_run):
    oracle, registry, tr = hub_run
    with pytest.raises(PreconditionError):
        verify_diagonalization(tr, oracle, 3, registry)


def test_without_certificates_only_consistent(hub_run):
    oracle, registry, tr = hub_run
    bare = oracle.public()
    assert verify_diagonalization(tr, bare, 0, registry).verdict == CONSISTENT
    assert verify_diagonalization(tr, bare, 1, registry).verdict == CONSISTENT


def test_construction_only_sees_public_oracle():
    # Certificates must not change the run: same oracle with and without them.
    g = sparse([(3, 9), (5, 7)], schedule_lag=2, schedule_limit=30)
    r = AdversaryRegistry((identity(), constant(0)))
    a = rec_run(g, r, 30)
    b = rec_run(g.public(), r, 30)
    assert list(a.trace_lines()) == list(b.trace_lines())


# -- negative controls -------------------------------------------------------------

def corrupt(tr, fn):
    bad = copy.deepcopy(tr)
    fn(bad)
    return bad


def test_flipped_s_member_is_a_commitment_violation(hub_run):
    oracle, registry, tr = hub_run
    z = tr.final[0].witness["z"]

    def flip(t):
        t.assignment[z] = 1 - t.assignment[z]
        t.records[z]["assign"] = t.assignment[z]

    bad = corrupt(tr, flip)
    names = {v.invariant for v in check_trace(bad, oracle)}
    assert "commitment" in names and "priority" in names
    assert verify_diagonalization(bad, oracle, 0, registry).verdict == VIOLATED


def test_flipped_image_is_caught(matching_run):
    oracle, registry, tr = matching_run
    y = tr.final[1].witness["y"]

    def flip(t):
        t.assignment[y] = 1 - t.assignment[y]
        t.records[y]["assign"] = t.assignment[y]

    bad = corrupt(tr, flip)
    assert verify_diagonalization(bad, oracle, 1, registry).verdict == VIOLATED


def test_forged_witness_is_violated(matching_run):
    oracle, registry, tr = matching_run

    def forge(t):
        last = t.records[-1]
        st_ = next(d for d in last["states"] if d["e"] == 1)
        st_["witness"] = {"x": 28, "y": 56}

    bad = corrupt(tr, forge)
    assert verify_diagonalization(bad, oracle, 1, registry).verdict == VIOLATED


def test_wrong_claim_and_missing_initialization(matching_run):
    oracle, _, tr = matching_run

    def tamper(t):
        rec = next(r for r in t.records if r["claim"] is not None)
        rec["initialized"] = []

    names = {v.invariant for v in check_trace(corrupt(tr, tamper), oracle)}
    assert "priority" in names

    def tamper_claim(t):
        rec = next(r for r in t.records if r["claim"] is not None)
        rec["claim"] = None

    assert "priority" in {v.invariant for v in check_trace(corrupt(tr, tamper_claim), oracle)}


def test_bad_sigma(matching_run):
    oracle, _, tr = matching_run

    def tamper(t):
        st_ = t.final[1]
        gap = next(v for v in range(len(st_.sigma_e)) if v not in st_.xs)
        st_.sigma_e = st_.sigma_e[:gap] + "1" + st_.sigma_e[gap + 1:]

    assert "sigma-soundness" in {v.invariant for v in check_trace(corrupt(tr, tamper), oracle)}


def test_vertex_zero_side(matching_run):
    oracle, _, tr = matching_run
    bad = corrupt(tr, lambda t: t.assignment.__setitem__(0, 1))
    assert "vertex-0" in {v.invariant for v in check_trace(bad, oracle)}


# -- pieces ----------------------------------------------------------------------

def test_claimed_by_least_index():
    a = RecRequirementState(0, i_e=0, d_set=[4])
    b = RecRequirementState(1, i_e=1, s_set=[5])
    edge = matching().edge
    assert claimed_by([a, b], 5, edge) == 0  # 5 is adjacent to 4 in D_0
    assert claimed_by([b], 5, edge) == 1
    assert claimed_by([a, b], 9, edge) is None


def _view(oracle, registry, s, assignment):
    adj = [0] * (s + 1)
    for v in range(s + 1):
        for u in range(v):
            if oracle.edge(u, v):
                adj[u] |= 1 << v
                adj[v] |= 1 << u
    return StageView(oracle, registry, s, adj, assignment)


def test_looks_satisfied_cases():
    g = matching()
    r = AdversaryRegistry((never(), constant(1), identity()))
    side = {v: v % 2 for v in range(20)}
    view = _view(g, r, 10, side)
    assert looks_satisfied(RecRequirementState(0), view)[0] == "S1"
    tag, w = looks_satisfied(RecRequirementState(1), view)
    assert tag == "S2" and w["kind"] == "collision"
    tag, w = looks_satisfied(RecRequirementState(2), view)
    assert tag == "S2" and w["kind"] == "both-sides"
    one_side = {v: 0 for v in range(20)}
    view = _view(g, r, 10, one_side)
    assert looks_satisfied(RecRequirementState(2, i_e=0, x_e=12), view)[0] == "S3"
    st_ = RecRequirementState(2, i_e=0, x_e=3, d_set=[3])
    assert looks_satisfied(st_, view) == ("S4", {"x": 3, "y": 3})
    iso_view = _view(empty(), r, 10, one_side)
    st_ = RecRequirementState(2, i_e=0, x_e=3, s_set=[4])
    assert looks_satisfied(st_, iso_view) is None
    assert looks_satisfied(RecRequirementState(2, i_e=0), iso_view) is None


def test_state_json_round_trip(hub_run):
    _, _, tr = hub_run
    for st_ in tr.final:
        again = RecRequirementState.from_json(st_.to_json())
        assert again.to_json()["d_set"] == st_.to_json()["d_set"]
        assert again.enrolled == st_.enrolled
