"""Diagonalizing copy of infinitely many disjoint finite cliques of every size.

Each stage adds a finished clique of size ``unpair1(s) + 1`` and seeds a
working component for requirement ``s``.  Requirement ``e`` grows its
component one vertex at a time as adversary ``e`` classifies the newest
vertex, and freezes it as soon as the side-``i`` part reaches the size
``unpair1(m_i) + 1`` it is currently aiming for.

Adversaries here are queried through :func:`raw_evaluate`: the use
convention would suppress every computation, because vertex numbers outgrow
stage numbers almost immediately.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .machines import AdversaryRegistry, raw_evaluate
from .oracles import unpair1

__all__ = [
    "unpair1",
    "DiagRequirementState",
    "DiagTrace",
    "diag_run",
    "count_finished",
    "check_trace",
]


def _side(value: int) -> int:
    return 0 if value == 0 else 1


@dataclass
class DiagRequirementState:
    e: int
    m0: int = 0
    m1: int = 0
    c_set: list[int] = field(default_factory=list)
    c_sides: tuple[list[int], list[int]] = field(default_factory=lambda: ([], []))

    def target(self, i: int) -> int:
        return unpair1(self.m0 if i == 0 else self.m1) + 1

    def to_json(self) -> dict:
        return {
            "e": self.e,
            "m0": self.m0,
            "m1": self.m1,
            "c_set": list(self.c_set),
            "c_sides": [list(self.c_sides[0]), list(self.c_sides[1])],
        }


@dataclass
class Frozen:
    stage: int
    e: int
    component: list[int]
    sides: tuple[list[int], list[int]]
    side: int
    m_before: int

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "e": self.e,
            "component": self.component,
            "sides": [self.sides[0], self.sides[1]],
            "side": self.side,
            "m_before": self.m_before,
        }


@dataclass
class DiagTrace:
    horizon: int
    size: int
    records: list[dict]
    finished_log: list[Frozen]
    base_cliques: list[list[int]]
    final: list[DiagRequirementState]
    registry_names: list[str]

    def trace_lines(self) -> Iterator[str]:
        for rec in self.records:
            yield json.dumps(rec, sort_keys=True, separators=(",", ":"))

    def components(self) -> list[list[int]]:
        """Connected components at the horizon (every one a clique)."""
        return components_from_records(self.records)

    def edges(self) -> Iterator[tuple[int, int]]:
        for c in self.components():
            for i, u in enumerate(c):
                for v in c[i + 1:]:
                    yield (u, v)


def components_from_records(records: list[dict]) -> list[list[int]]:
    comp: dict[int, list[int]] = {}
    for rec in records:
        comp[rec["base_clique"][0]] = list(rec["base_clique"])
        comp[rec["seed"]] = [rec["seed"]]
        for act in rec["per_e_actions"]:
            v = act["vertex"]
            if act["action"] == "extend":
                comp[min(act["attach"])].append(v)
            elif act["action"] == "reset":
                comp[v] = [v]
    return sorted(sorted(c) for c in comp.values())


def diag_run(registry: AdversaryRegistry, horizon: int) -> DiagTrace:
    """Run stages ``0..horizon``.

    Stage 0 is handled like every other stage (base ``K_1 = {0}``, seed
    ``C^0 = {1}``).  Within a stage the fresh vertices go to the base clique,
    then the seed, then the acting requirements in increasing ``e``.
    """
    states = [DiagRequirementState(e) for e in range(len(registry))]
    next_vertex = 0
    records: list[dict] = []
    finished: list[Frozen] = []
    bases: list[list[int]] = []

    for s in range(horizon + 1):
        p = unpair1(s)
        acting = []
        for st in states[: min(s, len(states))]:
            if st.c_set and raw_evaluate(registry, st.e, st.c_set[-1], s) is not None:
                acting.append(st)
        k = p + 2 + len(acting)
        fresh = list(range(next_vertex, next_vertex + k))
        next_vertex += k
        base, seed, extra = fresh[: p + 1], fresh[p + 1], fresh[p + 2:]
        bases.append(base)
        if s < len(states):
            states[s].c_set = [seed]
            states[s].c_sides = ([], [])

        actions = []
        resets = []
        for st, x in zip(acting, extra):
            sides: tuple[list[int], list[int]] = ([], [])
            values = {}
            for z in st.c_set:
                val = raw_evaluate(registry, st.e, z, s)
                values[z] = val
                sides[_side(val)].append(z)
            st.c_sides = sides
            hit = next((i for i in (0, 1) if len(sides[i]) == st.target(i)), None)
            if hit is None:
                actions.append(
                    {"e": st.e, "action": "extend", "vertex": x, "attach": list(st.c_set),
                     "value": values[st.c_set[-1]]}
                )
                st.c_set = st.c_set + [x]
            else:
                m_before = st.m0 if hit == 0 else st.m1
                frozen = Frozen(s, st.e, list(st.c_set), (list(sides[0]), list(sides[1])), hit, m_before)
                finished.append(frozen)
                resets.append(frozen.to_json())
                actions.append({"e": st.e, "action": "reset", "vertex": x, "side": hit,
                                "value": values[st.c_set[-1]]})
                if hit == 0:
                    st.m0 += 1
                else:
                    st.m1 += 1
                st.c_set = [x]
                st.c_sides = ([], [])

        records.append(
            {
                "s": s,
                "k": k,
                "base_clique": base,
                "seed": seed,
                "per_e_actions": actions,
                "resets": resets,
                "states": [st.to_json() for st in states[: min(s + 1, len(states))]],
            }
        )

    return DiagTrace(horizon, next_vertex, records, finished, bases, states, registry.names())


@dataclass
class CountResult:
    count: int
    partial: bool  # some base vertex was unclassified at the horizon


def count_finished(trace: DiagTrace, e: int, side: int, n: int, registry: AdversaryRegistry) -> CountResult:
    """Finished ``K_n`` copies inside side ``side`` of adversary ``e``'s partition.

    Counts the frozen components of requirement ``e`` whose side part had
    exactly ``n`` vertices, plus base cliques of size ``n`` lying entirely in
    the side.  ``n = 0`` always counts zero.
    """
    if n <= 0:
        return CountResult(0, False)
    count = sum(1 for fz in trace.finished_log if fz.e == e and len(fz.sides[side]) == n)
    partial = False
    for base in trace.base_cliques:
        if len(base) != n:
            continue
        vals = [raw_evaluate(registry, e, v, trace.horizon) for v in base]
        if any(v is None for v in vals):
            partial = True
            continue
        if all(_side(v) == side for v in vals):
            count += 1
    return CountResult(count, partial)


def base_counts(trace: DiagTrace) -> Counter:
    return Counter(len(b) for b in trace.base_cliques)


@dataclass
class Violation:
    invariant: str
    stage: int | None
    detail: str

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "stage": self.stage, "detail": self.detail}


def check_records(records: list[dict]) -> list[Violation]:
    """Replay a trace and check clique shape, freezing, reset soundness, bounds and progress.

    Works from the JSON records alone, so it also serves stored traces.
    """
    out: list[Violation] = []
    comp_of: dict[int, int] = {}
    members: dict[int, list[int]] = {}
    frozen: set[int] = set()
    working: dict[int, int] = {}  # e -> component root
    prev_m: dict[int, tuple[int, int]] = {}
    n_vertices = 0

    def new_component(vs: list[int], s: int) -> int:
        nonlocal n_vertices
        for v in vs:
            if v in comp_of:
                out.append(Violation("fresh-endpoint", s, f"vertex {v} reused"))
        root = vs[0]
        for v in vs:
            comp_of[v] = root
        members[root] = list(vs)
        n_vertices = max(n_vertices, max(vs) + 1)
        return root

    for rec in records:
        s = rec["s"]
        if len(rec["base_clique"]) != unpair1(s) + 1:
            out.append(Violation("base-size", s, f"base clique has {len(rec['base_clique'])} vertices"))
        frozen.add(new_component(rec["base_clique"], s))
        working[s] = new_component([rec["seed"]], s)
        for r in rec["resets"]:
            fz_sides = r["sides"]
            i = r["side"]
            if len(fz_sides[i]) != unpair1(r["m_before"]) + 1:
                out.append(Violation("reset-soundness", s, f"R_{r['e']} froze a side of size {len(fz_sides[i])}"))
            before = prev_m.get(r["e"], (0, 0))
            if before[i] != r["m_before"]:
                out.append(Violation("reset-soundness", s, f"R_{r['e']} m_{i} mismatch"))
        for act in rec["per_e_actions"]:
            e, v = act["e"], act["vertex"]
            root = working.get(e)
            if act["action"] == "extend":
                attach = sorted(act["attach"])
                if root is None or sorted(members[root]) != attach:
                    out.append(Violation("clique", s, f"vertex {v} attached to a non-component {attach}"))
                    continue
                if root in frozen:
                    out.append(Violation("frozen-forever", s, f"edge added to frozen component of {root}"))
                if v in comp_of:
                    out.append(Violation("fresh-endpoint", s, f"vertex {v} reused"))
                comp_of[v] = root
                members[root].append(v)
            else:
                if root is not None:
                    frozen.add(root)
                working[e] = new_component([v], s)
        for st in rec["states"]:
            e = st["e"]
            bound = unpair1(st["m0"]) + unpair1(st["m1"]) + 2
            if len(st["c_set"]) > bound:
                out.append(Violation("c-bound", s, f"|C^{e}| = {len(st['c_set'])} > {bound}"))
            root = working.get(e)
            if root is not None and sorted(members[root]) != sorted(st["c_set"]):
                out.append(Violation("c-clique", s, f"C^{e} is not its working component"))
            before = prev_m.get(e, (0, 0))
            now = (st["m0"], st["m1"])
            bumped = sum(now) - sum(before)
            resets_e = [r for r in rec["resets"] if r["e"] == e]
            if bumped != len(resets_e) or now[0] < before[0] or now[1] < before[1]:
                out.append(Violation("progress", s, f"R_{e} counters {before} -> {now} with {len(resets_e)} resets"))
            for r in resets_e:
                i = r["side"]
                if now[i] != before[i] + 1 or now[1 - i] != before[1 - i]:
                    out.append(Violation("reset-soundness", s, f"R_{e} bumped the wrong counter"))
            prev_m[e] = now
    return out


def check_trace(trace: DiagTrace, registry: AdversaryRegistry | None = None) -> list[Violation]:
    """Replay checks plus, when the registry is given, recomputation of every frozen side split."""
    out = check_records(trace.records)
    if registry is not None:
        for fz in trace.finished_log:
            for z in fz.component:
                val = raw_evaluate(registry, fz.e, z, fz.stage)
                if val is None or z not in fz.sides[_side(val)]:
                    out.append(Violation("reset-soundness", fz.stage, f"vertex {z} misclassified for R_{fz.e}"))
    return out
