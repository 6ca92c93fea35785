"""Computable copy of a graph whose isolated vertices are exactly the even numbers.

Vertex ``x`` of ``G`` is tracked by a stage map ``f_s``.  Isolated vertices of
``G_s`` sit on an initial segment of the evens, the rest on an initial segment
of the odds.  When a new vertex joins some currently isolated ones, those move
to fresh odd numbers and the isolated vertices that remain are re-packed onto
the evens.  Odd images never move again, so ``f = lim f_s`` exists.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterator

from .graphs import GraphOracle

log = logging.getLogger(__name__)


class NormalizerError(ValueError):
    pass


@dataclass
class StageRecord:
    s: int
    case: int
    f_delta: dict[int, int]
    dropped: list[int]
    new_edges: list[tuple[int, int]]

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "case": self.case,
            "f_delta": {str(k): v for k, v in sorted(self.f_delta.items())},
            "dropped": self.dropped,
            "new_edges": [list(e) for e in self.new_edges],
        }


@dataclass
class NormalizerState:
    """``history[s]`` is ``f_s`` as a dict; ``g_adj[x]`` is the neighbour bitmask of ``x`` in ``G_horizon``."""

    stage: int
    f_map: dict[int, int]
    h_edges: set[tuple[int, int]]
    history: list[dict[int, int]]
    records: list[StageRecord]
    g_adj: list[int]

    def g_edge(self, x: int, y: int) -> bool:
        return bool(self.g_adj[x] >> y & 1)

    def trace_lines(self) -> Iterator[str]:
        for rec in self.records:
            yield json.dumps(rec.to_json(), sort_keys=True, separators=(",", ":"))


def _least_free(used: set[int], start: int) -> int:
    m = start
    while m in used:
        m += 2
    return m


def normalize_run(oracle: GraphOracle, horizon: int) -> NormalizerState:
    f: dict[int, int] = {0: 0}
    adj = [0]
    isolated = {0}
    history = [dict(f)]
    records = [StageRecord(0, 1, {0: 0}, [], [])]
    h_edges: set[tuple[int, int]] = set()
    next_odd = 1  # odd images never leave the range, so this pointer only grows

    for s1 in range(1, horizon + 1):
        nbrs = [y for y in range(s1) if oracle.edge(y, s1)]
        mask = 0
        for y in nbrs:
            mask |= 1 << y
            adj[y] |= 1 << s1
        adj.append(mask)
        used = set(f.values())
        old = dict(f)
        newly = sorted(y for y in nbrs if y in isolated)

        if not nbrs:
            case = 1
            f[s1] = _least_free(used, 0)
            isolated.add(s1)
        elif not newly:
            case = 2
            next_odd = _least_free(used, next_odd)
            f[s1] = next_odd
        else:
            case = 3
            ks = []
            k = next_odd
            for _ in range(len(newly) + 1):
                k = _least_free(used, k)
                ks.append(k)
                k += 2
            next_odd = k
            isolated.difference_update(newly)
            for i, a in enumerate(sorted(isolated)):
                f[a] = 2 * i
            for x, k in zip(newly, ks):
                f[x] = k
            f[s1] = ks[-1]

        new_edges = sorted(tuple(sorted((f[s1], f[y]))) for y in nbrs)
        h_edges.update(new_edges)
        delta = {x: v for x, v in f.items() if old.get(x) != v}
        dropped = sorted(set(old.values()) - set(f.values()))
        records.append(StageRecord(s1, case, delta, dropped, new_edges))
        history.append(dict(f))

    return NormalizerState(horizon, f, h_edges, history, records, adj)


def _inverses(state: NormalizerState) -> list[dict[int, int]]:
    return [{v: x for x, v in f.items()} for f in state.history]


def stable_edge(state: NormalizerState, n: int, m: int, inverses: list[dict[int, int]] | None = None) -> bool:
    """``E_H(n, m)`` read at the least stage where both are present; other stages must agree.

    ``inverses`` (the inverted stage maps) may be passed in to avoid
    recomputing them for every pair.
    """
    invs = _inverses(state) if inverses is None else inverses
    verdicts = [state.g_edge(inv[n], inv[m]) for inv in invs if n in inv and m in inv]
    if not verdicts:
        raise NormalizerError(f"H-vertices {n} and {m} never appear together within the horizon")
    if any(v != verdicts[0] for v in verdicts):
        raise NormalizerError(f"edge ({n},{m}) is not stable across stages")
    return verdicts[0]


@dataclass(frozen=True)
class LimitValue:
    value: int
    stage: int
    provisional: bool  # even images may still drop after the horizon


UNSTABLE = "unstable-at-horizon"


def limit_map(state: NormalizerState, x: int) -> LimitValue | str:
    """Last value of ``f_s(x)`` and the stage it was set.

    Odd values are permanent, so they count as stable even when set at the
    final stage; an even value that changed at the final stage is reported as
    unstable.
    """
    if x > state.stage:
        raise NormalizerError(f"vertex {x} is beyond the horizon {state.stage}")
    value = state.history[-1][x]
    since = state.stage
    while since > x and state.history[since - 1].get(x) == value:
        since -= 1
    if value % 2 == 0 and since == state.stage and state.stage > x:
        return UNSTABLE
    return LimitValue(value, since, value % 2 == 0)


@dataclass
class Violation:
    invariant: str
    stage: int | None
    detail: str

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "stage": self.stage, "detail": self.detail}


def _is_prefix(values: list[int], parity: int) -> bool:
    return sorted(values) == list(range(parity, parity + 2 * len(values), 2))


def check_stages(state: NormalizerState) -> list[Violation]:
    """Per-stage invariants: injectivity, range shape, isolation parity, drops, odd permanence, edge stability."""
    out: list[Violation] = []
    known: dict[int, int] = {}
    recorded: dict[int, int] = {}
    odd_owner: dict[int, int] = {}
    prev_range: set[int] = set()
    for s, f in enumerate(state.history):
        values = list(f.values())
        if len(set(values)) != len(values):
            out.append(Violation("injective", s, "f_s is not injective"))
        rng = set(values)
        if not (_is_prefix([v for v in rng if v % 2 == 0], 0) and _is_prefix([v for v in rng if v % 2], 1)):
            out.append(Violation("range-shape", s, "H_s is not an even prefix plus an odd prefix"))
        below = (1 << (s + 1)) - 1
        for x, v in f.items():
            iso = state.g_adj[x] & below == 0
            if iso != (v % 2 == 0):
                out.append(Violation("isolated-iff-even", s, f"vertex {x} isolated={iso} but f_s({x})={v}"))
        for m in prev_range - rng:
            if m % 2:
                out.append(Violation("dropped-even", s, f"odd {m} left the range"))
        for x, v in f.items():
            if v % 2:
                owner = odd_owner.setdefault(v, x)
                if owner != x:
                    out.append(Violation("odd-permanent", s, f"odd {v} moved from {owner} to {x}"))
        for v, x in odd_owner.items():
            if f.get(x) != v:
                out.append(Violation("odd-permanent", s, f"f_s({x}) left odd value {v}"))
        # Edge stability: compare every pair with the verdict recorded when it first co-occurred.
        hmask = 0
        for v in rng:
            hmask |= 1 << v
        hadj: dict[int, int] = {}
        for x, v in f.items():
            m = 0
            nb = state.g_adj[x] & below
            while nb:
                low = nb & -nb
                m |= 1 << f[low.bit_length() - 1]
                nb ^= low
            hadj[v] = m
        for v in rng:
            k = known.get(v, 0) & hmask
            if (hadj[v] & k) != (recorded.get(v, 0) & k):
                out.append(Violation("edge-stability", s, f"edges at H-vertex {v} changed"))
            fresh = hmask & ~known.get(v, 0)
            recorded[v] = recorded.get(v, 0) | (hadj[v] & fresh)
            known[v] = known.get(v, 0) | hmask
        prev_range = rng
    return out


def check_limits(state: NormalizerState, min_each: int = 1) -> tuple[list[Violation], list[str]]:
    """Limit-map injectivity, isomorphism on stabilized vertices, and onto-at-scale.

    Returns ``(violations, warnings)``.  Onto-at-scale is skipped with a
    warning when either kind of vertex is scarcer than ``min_each``.
    """
    out: list[Violation] = []
    warnings: list[str] = []
    stable = {}
    for x in range(state.stage + 1):
        lv = limit_map(state, x)
        if isinstance(lv, LimitValue):
            stable[x] = lv.value
    if len(set(stable.values())) != len(stable):
        out.append(Violation("limit-injective", None, "two stabilized vertices share a limit"))
    xs = sorted(stable)
    invs = _inverses(state)
    for i, x in enumerate(xs):
        for y in xs[i + 1:]:
            if state.g_edge(x, y) != stable_edge(state, stable[x], stable[y], invs):
                out.append(Violation("limit-isomorphism", None, f"edge status of ({x},{y}) not preserved"))
    final = state.history[-1]
    n_iso = sum(1 for v in final.values() if v % 2 == 0)
    n_non = len(final) - n_iso
    if n_iso < min_each or n_non < min_each:
        msg = f"onto-at-scale skipped: {n_iso} isolated, {n_non} non-isolated explored"
        log.warning(msg)
        warnings.append(msg)
    else:
        # Odd images are permanent and must be stable; even images can still drop.
        images = set(stable.values())
        current = set(final.values())
        for v in range(1, 2 * n_non, 2):
            if v not in images:
                out.append(Violation("onto-at-scale", None, f"odd {v} is not a stable image"))
        for v in range(0, 2 * n_iso, 2):
            if v not in current:
                out.append(Violation("onto-at-scale", None, f"even {v} is not an image"))
    return out, warnings


def check_all(state: NormalizerState, min_each: int = 1) -> tuple[list[Violation], list[str]]:
    limits, warnings = check_limits(state, min_each)
    return check_stages(state) + limits, warnings
