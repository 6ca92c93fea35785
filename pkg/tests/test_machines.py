from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from indivisible.machines import (
    BLOCKED,
    AdversaryRegistry,
    DovetailError,
    DovetailState,
    RegistryError,
    Search,
    constant,
    delayed,
    dovetail_step,
    evaluate,
    identity,
    load_registry,
    never,
    parity,
    raw_evaluate,
    registry_from_json,
    table_override,
    threshold,
)


def reg(*advs):
    return AdversaryRegistry(tuple(advs))


def test_use_convention():
    r = reg(identity(), constant(7))
    assert evaluate(r, 0, 3, 3) is None  # input not below the stage
    assert evaluate(r, 0, 3, 4) == 3
    assert evaluate(r, 1, 0, 7) is None  # output not below the stage
    assert evaluate(r, 1, 0, 8) == 7
    assert raw_evaluate(r, 1, 0, 0) == 7


def test_delay_and_divergence():
    r = reg(delayed(parity(), 10), never())
    assert raw_evaluate(r, 0, 5, 9) is None
    assert raw_evaluate(r, 0, 5, 10) == 1
    assert raw_evaluate(r, 1, 0, 10**6) is None
    assert r[0].halting_stage(5) == 10
    assert r[1].halting_stage(5) is None


@given(st.integers(0, 200), st.integers(0, 200), st.integers(0, 50))
def test_halting_is_monotone(x, s, d):
    r = reg(delayed(threshold(10), d))
    if evaluate(r, 0, x, s) is not None:
        assert evaluate(r, 0, x, s + 1) == evaluate(r, 0, x, s)


def test_table_override():
    r = reg(table_override(identity(), {3: None, 4: 0}))
    assert raw_evaluate(r, 0, 3, 100) is None
    assert raw_evaluate(r, 0, 4, 100) == 0
    assert raw_evaluate(r, 0, 5, 100) == 5


def test_registry_from_json_and_errors(tmp_path):
    r = registry_from_json([
        {"name": "c", "combinator": "constant", "params": {"value": 1}},
        {"combinator": "expr", "params": {"expr": "x * 2", "domain": "x < 5"}, "delay": "x"},
        {"combinator": "table", "params": {"table": {"0": 1}}},
        {"combinator": "threshold", "params": {"at": 3}},
    ])
    assert r.names()[0] == "c"
    assert raw_evaluate(r, 1, 4, 4) == 8
    assert raw_evaluate(r, 1, 4, 3) is None
    assert raw_evaluate(r, 1, 6, 100) is None
    assert raw_evaluate(r, 2, 0, 0) == 1 and raw_evaluate(r, 2, 1, 9) is None
    for bad in ({"combinator": "nope"}, {"combinator": "constant"}, {"combinator": "parity", "delay": -1},
                {"combinator": "expr", "params": {"expr": "import os"}}):
        with pytest.raises(RegistryError):
            registry_from_json([bad])
    with pytest.raises(RegistryError):
        registry_from_json({"not": "a list"})
    path = tmp_path / "r.json"
    path.write_text("[{")
    with pytest.raises(RegistryError):
        load_registry(path)
    path.write_text(json.dumps([{"combinator": "parity"}]))
    assert len(load_registry(path)) == 1
    with pytest.raises(IndexError):
        r[9]


def test_dovetail_interleaves_and_resumes():
    a = Search("a", lambda i: "A" if i == 5 else None)
    b = Search("b", lambda i: "B" if i == 2 else None)
    st_ = dovetail_step(DovetailState.start(2), [a, b], budget=4)
    assert st_.winner is None and st_.cursors == (2, 2)
    st_ = dovetail_step(st_, [a, b], budget=4)
    assert st_.winner == 1 and st_.result == "B"
    with pytest.raises(DovetailError):
        dovetail_step(st_, [a, b], 1)


def test_dovetail_blocked_costs_nothing():
    blocked = Search("wait", lambda i: BLOCKED)
    hit = Search("hit", lambda i: i if i == 3 else None)
    st_ = dovetail_step(DovetailState.start(2), [blocked, hit], budget=10)
    assert st_.winner == 1 and st_.cursors == (0, 4) and st_.steps == 4
    st2 = dovetail_step(DovetailState.start(1), [blocked], budget=10)
    assert st2.steps == 0 and st2.winner is None
    with pytest.raises(DovetailError):
        dovetail_step(DovetailState.start(1), [blocked, hit], 1)


def test_dovetail_tie_goes_to_earlier_search():
    s = [Search("x", lambda i: "x"), Search("y", lambda i: "y")]
    assert dovetail_step(DovetailState.start(2), s, 5).winner == 0
