"""Finite-injury partition defeating every registered candidate isomorphism.

Vertex ``s`` is placed at stage ``s``.  Requirement ``R_e`` tries to make
adversary ``e`` map an isolated vertex to a non-isolated vertex of the side
``X_{i_e}`` containing ``Phi_e(0)``, or the other way round.  It guesses the
isolated set with a bit string ``sigma_e`` and backs each guess with a
commitment: vertices in ``S_e`` go to ``X_{i_e}``, neighbours of ``D_e``
go to ``X_{1-i_e}``.  The construction sees only the public part of the
oracle (edges and the finite-degree schedule); the verifier may use the
oracle's certificates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .graphs import GraphOracle
from .machines import BLOCKED, AdversaryRegistry, DovetailState, Search, dovetail_step, evaluate


@dataclass
class PendingDovetail:
    y: int
    started: int
    state: DovetailState

    def to_json(self) -> dict:
        return {"y": self.y, "started": self.started, **self.state.to_json()}


@dataclass
class RecRequirementState:
    e: int
    i_e: int | None = None
    x_e: int | None = None
    sigma_e: str | None = None
    d_set: list[int] = field(default_factory=list)
    s_set: list[int] = field(default_factory=list)
    dovetail: PendingDovetail | None = None
    satisfied_via: str | None = None
    witness: dict | None = None
    xs: list[int] = field(default_factory=list)  # x values since the last initialization
    waiting: int | None = None  # pending sigma bit when the next-x lookahead is parked
    enrolled: dict[int, int] = field(default_factory=dict)  # D/S member -> enrollment stage

    def initialize(self) -> None:
        self.__init__(self.e)

    def to_json(self) -> dict:
        return {
            "e": self.e,
            "i_e": self.i_e,
            "x_e": self.x_e,
            "sigma_e": self.sigma_e,
            "d_set": list(self.d_set),
            "s_set": list(self.s_set),
            "dovetail": self.dovetail.to_json() if self.dovetail else None,
            "satisfied_via": self.satisfied_via,
            "witness": self.witness,
            "xs": list(self.xs),
            "waiting": self.waiting,
            "enrolled": {str(k): v for k, v in sorted(self.enrolled.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> RecRequirementState:
        st = cls(d["e"], d["i_e"], d["x_e"], d["sigma_e"], list(d["d_set"]), list(d["s_set"]))
        st.satisfied_via = d.get("satisfied_via")
        st.witness = d.get("witness")
        st.xs = list(d.get("xs", []))
        st.waiting = d.get("waiting")
        st.enrolled = {int(k): v for k, v in d.get("enrolled", {}).items()}
        return st


def claimed_by(
    states: Sequence[RecRequirementState], v: int, edge: Callable[[int, int], bool]
) -> int | None:
    """Least ``e`` with ``v`` in ``S_e`` or ``v`` adjacent to a member of ``D_e``."""
    for st in states:
        if v in st.s_set or any(edge(v, y) for y in st.d_set if y != v):
            return st.e
    return None


class StageView:
    """What a requirement may see at stage ``s``: ``G_s``, the assignment so far, and ``Phi_{e,s}``."""

    def __init__(self, oracle: GraphOracle, registry: AdversaryRegistry, s: int,
                 adj: list[int], assignment: dict[int, int]):
        self.oracle = oracle
        self.registry = registry
        self.s = s
        self.adj = adj
        self.assignment = assignment
        self._cache: dict[int, dict[int, int]] = {}

    def isolated(self, x: int) -> bool:
        return self.adj[x] == 0

    def halted(self, e: int) -> dict[int, int]:
        """``{x: Phi_{e,s}(x)}`` for every ``x < s`` that has halted."""
        if e not in self._cache:
            vals = {}
            for x in range(self.s):
                y = evaluate(self.registry, e, x, self.s)
                if y is not None:
                    vals[x] = y
            self._cache[e] = vals
        return self._cache[e]


def looks_satisfied(st: RecRequirementState, view: StageView) -> tuple[str, dict] | None:
    """First of S1..S5 that holds at this stage, with its witness data."""
    vals = view.halted(st.e)
    if 0 not in vals:
        return "S1", {}
    seen: dict[int, int] = {}
    for a in sorted(vals):
        y = vals[a]
        if y in seen:
            return "S2", {"a": seen[y], "b": a, "y": y, "kind": "collision"}
        seen[y] = a
    on0 = [a for a in sorted(vals) if view.assignment.get(vals[a]) == 0]
    on1 = [a for a in sorted(vals) if view.assignment.get(vals[a]) == 1]
    if on0 and on1:
        return "S2", {"a": on0[0], "b": on1[0], "kind": "both-sides"}
    if st.x_e is not None and st.x_e not in vals:
        return "S3", {"x": st.x_e}
    dset = set(st.d_set)
    for x in sorted(vals):
        if vals[x] in dset and not view.isolated(x):
            return "S4", {"x": x, "y": vals[x]}
    if st.s_set:
        for x in sorted(vals):
            if view.isolated(x):
                y = vals[x]
                z = next((z for z in st.s_set if z != y and view.oracle.edge(y, z)), None)
                if z is not None:
                    return "S5", {"x": x, "y": y, "z": z}
    return None


@dataclass
class RecTrace:
    horizon: int
    assignment: dict[int, int]
    records: list[dict]
    initializations: list[tuple[int, int, str]]
    final: list[RecRequirementState]
    registry_names: list[str]

    def trace_lines(self) -> Iterator[str]:
        for rec in self.records:
            yield json.dumps(rec, sort_keys=True, separators=(",", ":"))

    def side(self, v: int) -> int | None:
        return self.assignment.get(v)


def rec_run(
    oracle: GraphOracle,
    registry: AdversaryRegistry,
    horizon: int,
    dovetail_budget: int = 256,
    lookahead: int | None = None,
) -> RecTrace:
    """Run stages ``0..horizon`` against the public part of ``oracle``.

    ``lookahead`` bounds the search for the next vertex that looks isolated
    (default: the horizon); a requirement whose search comes up empty parks
    in a WAITING status and retries at later stages.
    """
    public = oracle.public()
    edge = public.edge
    schedule = list(public.finite_degree_schedule or ())
    look = horizon if lookahead is None else lookahead
    states = [RecRequirementState(e) for e in range(len(registry))]
    assignment = {0: 0}
    adj = [0]
    records = [{"s": 0, "assign": 0, "claim": None, "actions": [], "initialized": [],
                "states": []}]
    inits: list[tuple[int, int, str]] = []

    def next_isolated(after: int, s: int) -> int | None:
        """Least ``v > after`` isolated in some ``G_t`` with ``t >= s`` (searching ``v <= look``)."""
        for v in range(after + 1, look + 1):
            if v <= s:
                if adj[v] == 0:
                    return v
            elif not any(edge(u, v) for u in range(v)):
                return v
        return None

    def place_x(st: RecRequirementState, old: int | None, bit: int | None, s: int) -> dict:
        nxt = next_isolated(-1 if old is None else old, s)
        if nxt is None:
            st.waiting = -1 if bit is None else bit
            return {"status": "WAITING"}
        sigma = st.sigma_e or ""
        if old is not None:
            sigma += str(bit)
        sigma += "0" * (nxt - len(sigma))
        st.sigma_e = sigma
        st.x_e = nxt
        st.xs.append(nxt)
        st.waiting = None
        return {"x": nxt}

    for s in range(1, horizon + 1):
        mask = 0
        for u in range(s):
            if edge(u, s):
                mask |= 1 << u
                adj[u] |= 1 << s
        adj.append(mask)
        view = StageView(public, registry, s, adj, assignment)
        actions = []
        for st in states[: min(s, len(states))]:
            sat = looks_satisfied(st, view)
            if sat is not None:
                st.satisfied_via, st.witness = sat
                actions.append({"e": st.e, "case": 1, "via": sat[0]})
                continue
            st.satisfied_via, st.witness = None, None
            if st.waiting is not None:
                old = st.x_e
                bit = None if st.waiting == -1 else st.waiting
                res = place_x(st, old, bit, s)
                actions.append({"e": st.e, "case": "retry", **res})
                continue
            vals = view.halted(st.e)
            if st.i_e is None:
                st.i_e = assignment[vals[0]]
                actions.append({"e": st.e, "case": 2, "i": st.i_e})
                continue
            if st.x_e is None:
                res = place_x(st, None, None, s)
                actions.append({"e": st.e, "case": 3, **res})
                continue
            y = vals[st.x_e]
            if any(assignment.get(u) == st.i_e for u in range(s) if adj[y] >> u & 1):
                st.dovetail = None
                res = place_x(st, st.x_e, 0, s)
                actions.append({"e": st.e, "case": "4.1", "y": y, **res})
                continue
            if st.dovetail is None or st.dovetail.y != y:
                st.dovetail = PendingDovetail(y, s, DovetailState.start(2))
            pend = st.dovetail
            higher = states[: st.e + 1]

            def probe_schedule(j: int, y=y, s=s):
                if j >= len(schedule) or schedule[j][1] > s:
                    return BLOCKED
                return ("finite", y) if schedule[j][0] == y else None

            def probe_neighbor(j: int, y=y, s=s, base=pend.started, higher=higher):
                v = base + 1 + j
                if v <= s or v == y or not edge(y, v):
                    return None
                if claimed_by(higher, v, edge) is not None:
                    return None
                return ("neighbor", v)

            pend.state = dovetail_step(
                pend.state,
                [Search("finite-degree", probe_schedule), Search("neighbor", probe_neighbor)],
                dovetail_budget,
            )
            if pend.state.winner is None:
                actions.append({"e": st.e, "case": "4.2", "y": y, "dovetail": pend.to_json()})
                continue
            kind, v = pend.state.result
            st.dovetail = None
            if kind == "finite":
                st.d_set = sorted(set(st.d_set) | {v})
                st.enrolled[v] = s
                res = place_x(st, st.x_e, 1, s)
                actions.append({"e": st.e, "case": "4.2.1", "y": y, "isolated_now": adj[y] == 0, **res})
            else:
                st.s_set = sorted(set(st.s_set) | {v})
                st.enrolled[v] = s
                res = place_x(st, st.x_e, 0, s)
                actions.append({"e": st.e, "case": "4.2.2", "y": y, "z": v, **res})

        snapshot = [st.to_json() for st in states[: min(s, len(states))]]
        claim = claimed_by(states[: min(s, len(states))], s, edge)
        initialized = []
        if claim is None:
            side = 0
        else:
            st = states[claim]
            side = st.i_e if s in st.s_set else 1 - st.i_e
            for lower in states[claim + 1: min(s, len(states))]:
                lower.initialize()
                initialized.append(lower.e)
                inits.append((s, lower.e, "higher priority claim"))
        assignment[s] = side
        records.append({"s": s, "assign": side, "claim": claim, "actions": actions,
                        "initialized": initialized, "states": snapshot})

    return RecTrace(horizon, assignment, records, inits, states, registry.names())


# -- verification ------------------------------------------------------------

CONFIRMED = "CONFIRMED"
CONSISTENT = "CONSISTENT-AT-HORIZON"
VIOLATED = "VIOLATED"


class PreconditionError(ValueError):
    pass


@dataclass
class VerifyResult:
    verdict: str
    reasons: list[str]

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "reasons": self.reasons}


def _explored_neighbors(oracle: GraphOracle, v: int, horizon: int) -> list[int]:
    return [u for u in range(horizon + 1) if u != v and oracle.edge(u, v)]


def verify_diagonalization(trace: RecTrace, oracle: GraphOracle, e: int,
                           registry: AdversaryRegistry | None = None) -> VerifyResult:
    """Check the final S4/S5 ending of ``R_e`` against the full oracle.

    ``CONFIRMED`` when certificates close every check, ``CONSISTENT-AT-HORIZON``
    when only the explored part agrees, ``VIOLATED`` when something is wrong.
    """
    rec = trace.records[-1]
    st = next((d for d in rec["states"] if d["e"] == e), None)
    if st is None or st["satisfied_via"] not in ("S4", "S5"):
        raise PreconditionError(f"R_{e} did not end in S4 or S5")
    w, i = st["witness"], st["i_e"]
    h = trace.horizon
    bad: list[str] = []
    open_: list[str] = []
    x, y = w["x"], w["y"]
    if registry is not None and evaluate(registry, e, x, h + 1) != y:
        bad.append(f"Phi_{e}({x}) != {y}")
    if trace.side(y) != i:
        bad.append(f"{y} is not in X_{i}")
    if st["satisfied_via"] == "S4":
        if y not in st["d_set"]:
            bad.append(f"{y} is not in D_{e}")
        if not _explored_neighbors(oracle, x, h):
            bad.append(f"{x} has no explored neighbour")
        for u in _explored_neighbors(oracle, y, h):
            if trace.side(u) != 1 - i:
                bad.append(f"neighbour {u} of {y} is in X_{i}")
        nb = oracle.neighbor_bound(y) if oracle.neighbor_bound else None
        if nb is None or nb > h + 1:
            open_.append(f"neighbours of {y} beyond {h} are not certified")
    else:
        z = w["z"]
        if z not in st["s_set"]:
            bad.append(f"{z} is not in S_{e}")
        if not oracle.edge(y, z):
            bad.append(f"({y},{z}) is not an edge")
        if _explored_neighbors(oracle, x, h):
            bad.append(f"{x} has an explored neighbour")
        if z <= h:
            if trace.side(z) != i:
                bad.append(f"{z} was placed in X_{trace.side(z)}, promised X_{i}")
        else:
            open_.append(f"{z} lies beyond the horizon")
        certified = oracle.isolated_decider(x) if oracle.isolated_decider else (
            oracle.neighbor_bound(x) == 0 if oracle.neighbor_bound and oracle.neighbor_bound(x) is not None else None
        )
        if certified is None:
            open_.append(f"isolation of {x} is not certified")
        elif not certified:
            bad.append(f"{x} is not isolated in G")
    if bad:
        return VerifyResult(VIOLATED, bad)
    if open_:
        return VerifyResult(CONSISTENT, open_)
    return VerifyResult(CONFIRMED, ["all checks closed by certificates"])


@dataclass
class Violation:
    invariant: str
    stage: int | None
    detail: str

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "stage": self.stage, "detail": self.detail}


def check_trace(trace: RecTrace, oracle: GraphOracle) -> list[Violation]:
    """Priority discipline, commitment keeping, sigma soundness and D-enrollment over a trace."""
    out: list[Violation] = []
    edge = oracle.edge
    h = trace.horizon
    if trace.assignment.get(0) != 0:
        out.append(Violation("vertex-0", 0, "vertex 0 not in X_0"))
    if sorted(trace.assignment) != list(range(h + 1)):
        out.append(Violation("assignment", None, "assignment does not cover 0..horizon exactly"))
    last_init: dict[int, int] = {}
    for rec in trace.records[1:]:
        s = rec["s"]
        states = [RecRequirementState.from_json(d) for d in rec["states"]]
        claim = claimed_by(states, s, edge)
        if claim != rec["claim"]:
            out.append(Violation("priority", s, f"recorded claim {rec['claim']} but least claimant is {claim}"))
        if claim is None:
            if rec["assign"] != 0:
                out.append(Violation("priority", s, "unclaimed vertex not in X_0"))
        else:
            st = states[claim]
            want = st.i_e if s in st.s_set else 1 - st.i_e
            if rec["assign"] != want:
                out.append(Violation("priority", s, f"claim of R_{claim} sent {s} to the wrong side"))
            expect = [d.e for d in states if d.e > claim]
            if rec["initialized"] != expect:
                out.append(Violation("priority", s, f"expected initialization of {expect}"))
        for e in rec["initialized"]:
            last_init[e] = s
        for st in states:
            if st.x_e is not None and (st.sigma_e is None or len(st.sigma_e) != st.x_e):
                out.append(Violation("sigma-length", s, f"|sigma_{st.e}| != x_{st.e}"))
        for act in rec["actions"]:
            if act.get("case") == "4.2.1":
                y = act["y"]
                sched = {v for v, _ in (oracle.finite_degree_schedule or ())}
                if y not in sched:
                    out.append(Violation("d-enrollment", s, f"{y} entered D_{act['e']} without being scheduled"))
                if not act["isolated_now"]:
                    out.append(Violation("d-enrollment", s, f"{y} entered D_{act['e']} while not isolated in G_{s}"))

    for st in trace.final:
        i = st.i_e
        for y in st.d_set:
            t = st.enrolled[y]
            for u in range(t + 1, h + 1):
                if u != y and edge(u, y) and trace.assignment[u] != 1 - i:
                    out.append(Violation("commitment", u, f"neighbour {u} of {y} in D_{st.e} placed in X_{i}"))
        for z in st.s_set:
            if z <= h and trace.assignment[z] != i:
                out.append(Violation("commitment", z, f"{z} in S_{st.e} placed in X_{1 - i}"))
        if st.sigma_e is not None:
            for v, bit in enumerate(st.sigma_e):
                if v in st.xs:
                    continue
                if bit != "0":
                    out.append(Violation("sigma-soundness", None, f"gap position {v} of sigma_{st.e} is {bit}"))
                truly = oracle.isolated_decider(v) if oracle.isolated_decider else None
                if truly is True or (truly is None and not _explored_neighbors(oracle, v, h)):
                    out.append(Violation("sigma-soundness", None, f"gap position {v} of sigma_{st.e} is isolated"))
    return out


def stable_tail(trace: RecTrace, tail: int) -> dict[int, str | None]:
    """For each ``e``: the looks-satisfied tag if it held unchanged over the last ``tail`` stages."""
    out = {}
    for e in range(len(trace.final)):
        tags = set()
        for rec in trace.records[-tail:]:
            d = next((d for d in rec["states"] if d["e"] == e), None)
            tags.add(d["satisfied_via"] if d else None)
        out[e] = tags.pop() if len(tags) == 1 else None
    return out


def injury_summary(trace: RecTrace) -> dict[int, dict]:
    per: dict[int, dict] = {}
    for s, e, cause in trace.initializations:
        d = per.setdefault(e, {"count": 0, "last": None})
        d["count"] += 1
        d["last"] = s
    return per
