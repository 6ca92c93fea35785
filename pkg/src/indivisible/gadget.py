"""Graph whose least failing extension-pair size tracks a Σ⁰₂ predicate.

Given ``phi(n, x, y)``, strategy ``n`` holds a candidate witness ``x_n`` and an
``n``-element set ``F_n``.  While ``forall y <= s phi(n, x_n, y)`` holds no
vertex may join all of ``F_n``; when it fails, the strategy supplies
extension witnesses for its active ``n``-pairs, moves ``x_n`` and takes a
fresh ``F_n``.  So ``<F_n, {}>`` fails in the limit exactly when
``exists x forall y phi(n, x, y)``.

Two desk-scale adaptations keep the vertex count manageable (see README):
witnesses are only allocated for active pairs that have no witness yet, and
strategy ``n`` only looks at pairs over a window ``{0..w_n(s)}`` with
``w_n(s) = min(m_{s-1}, s, W_n)``, where ``W_n`` is the largest window
holding at most ``pair_budget`` ``n``-pairs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterator

from .dsl import Expression
from .graphs import ExtensionPair


class UnsupportedPredicate(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class PhiPredicate:
    """``phi(n, x, y)`` given as an expression; ``shift`` counts applications of :func:`preprocess`."""

    expr: str
    y_bound: int | None = None
    shift: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "_fn", Expression(self.expr, ("n", "x", "y")))

    def __call__(self, n: int, x: int, y: int) -> bool:
        if n < self.shift:
            return False
        return bool(self._fn(n - self.shift, x, y))

    def to_json(self) -> dict:
        return {"expr": self.expr, "y_bound": self.y_bound, "shift": self.shift}

    @classmethod
    def from_json(cls, d: dict) -> PhiPredicate:
        return cls(d["expr"], d.get("y_bound"), d.get("shift", 0))


def preprocess(phi: PhiPredicate) -> PhiPredicate:
    """``phi'(n, x, y) = n > 0 and phi(n-1, x, y)``, so ``psi'(0)`` is false."""
    return PhiPredicate(phi.expr, phi.y_bound, phi.shift + 1)


def psi_oracle(phi: PhiPredicate, n: int, x_search_bound: int) -> bool:
    """``exists x <= x_search_bound forall y <= y_bound phi(n, x, y)``; needs the ``y_bound`` certificate."""
    if phi.y_bound is None:
        raise UnsupportedPredicate("psi is Σ⁰₂; refusing to decide it without a y_bound")
    return any(all(phi(n, x, y) for y in range(phi.y_bound + 1)) for x in range(x_search_bound + 1))


def window_cap(n: int, pair_budget: int) -> int:
    """Largest ``w`` such that the ``n``-pairs over ``{0..w}`` number at most ``pair_budget``."""
    w = n - 1
    while comb(w + 2, n) * 2**n <= pair_budget:
        w += 1
    return w


def _pair_key(p: tuple[tuple[int, ...], tuple[int, ...]]) -> int:
    return ExtensionPair(frozenset(p[0]), frozenset(p[1])).code()


def _pairs_with_new(n: int, old_w: int, new_w: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """``n``-pairs over ``{0..new_w}`` that use at least one vertex above ``old_w``."""
    for support in itertools.combinations(range(new_w + 1), n):
        if support[-1] <= old_w:
            continue
        for signs in itertools.product((0, 1), repeat=n):
            yield (
                tuple(v for v, b in zip(support, signs) if b == 0),
                tuple(v for v, b in zip(support, signs) if b == 1),
            )


@dataclass
class GadgetState:
    stage: int
    m_s: int
    nbrs: list[set[int]]
    x_params: dict[int, int]
    f_params: dict[int, tuple[int, ...]]
    y_log: list[list[int]]
    active_counts: list[dict[int, int]]
    records: list[dict]
    n_cap: int
    pair_budget: int
    phi: PhiPredicate

    def f_param(self, n: int) -> tuple[int, ...]:
        if n not in self.f_params:
            raise AssertionError(f"default F-set for n={n} consulted")
        return self.f_params[n]

    def trace_lines(self) -> Iterator[str]:
        for rec in self.records:
            yield json.dumps(rec, sort_keys=True, separators=(",", ":"))

    def has_witness(self, x0, x1, upto: int) -> bool:
        return _has_witness(self.nbrs, x0, x1, upto)

    def edges(self) -> Iterator[tuple[int, int]]:
        for v, ns in enumerate(self.nbrs):
            for u in sorted(ns):
                if u < v:
                    yield (u, v)


def _has_witness(nbrs: list[set[int]], x0, x1, upto: int) -> bool:
    """Some ``v <= upto`` outside the pair joined to all of ``x0`` and none of ``x1``."""
    excluded = set(x0) | set(x1)
    if x0:
        base = min((nbrs[a] for a in x0), key=len)
        cands = (v for v in base if v <= upto)
    else:
        cands = iter(range(upto + 1))
    for v in cands:
        if v in excluded:
            continue
        nv = nbrs[v]
        if all(a in nv for a in x0) and not any(b in nv for b in x1):
            return True
    return False


def gadget_run(phi: PhiPredicate, horizon: int, n_cap: int = 4, pair_budget: int = 10000) -> GadgetState:
    """Run stages ``0..horizon``; only strategies ``n <= n_cap`` ever act."""
    if phi.y_bound is not None and psi_oracle(phi, 0, horizon):
        raise PreconditionError("psi(0) holds; run preprocess first")
    caps = {n: window_cap(n, pair_budget) for n in range(1, n_cap + 1)}
    nbrs: list[set[int]] = [set(), set()]
    x_params = {1: 0}
    f_params: dict[int, tuple[int, ...]] = {1: (1,)}
    records = [
        {"s": 0, "m_s": 0, "Y": [], "k": {}, "witnesses": [], "x": {}, "F": {}, "n_cap": n_cap, "windows": {}},
        {"s": 1, "m_s": 1, "Y": [], "k": {}, "witnesses": [], "x": {"1": 0}, "F": {"1": [1]}, "n_cap": n_cap,
         "windows": {}},
    ]
    y_log: list[list[int]] = [[], []]
    active_counts: list[dict[int, int]] = [{}, {}]
    m_prev = 1
    window = {n: -1 for n in caps}
    pending: dict[int, dict] = {n: {} for n in caps}

    for s in range(2, horizon + 1):
        ys = [
            n for n in range(1, min(s, n_cap + 1))
            if any(not phi(n, x_params[n], y) for y in range(s + 1))
        ]
        yset = set(ys)
        witnesses: list[tuple[int, tuple[int, ...], tuple[int, ...], int]] = []
        k: dict[int, int] = {}
        windows = {}
        for n in ys:
            w = min(m_prev, s, caps[n])
            if w > window[n]:
                for p in _pairs_with_new(n, window[n], w):
                    pending[n][p] = None
                window[n] = w
            windows[n] = w
            blockers = [f_params[m] for m in range(1, n) if m not in yset]
            kept = {}
            chosen = []
            for p in sorted(pending[n], key=_pair_key):
                x0, x1 = p
                if _has_witness(nbrs, x0, x1, m_prev):
                    continue  # witnessed once, witnessed forever
                x0set = set(x0)
                if any(x0set.issuperset(fm) for fm in blockers):
                    kept[p] = None
                    continue
                chosen.append(p)
            pending[n] = kept
            k[n] = len(chosen)
            for x0, x1 in chosen:
                witnesses.append((n, x0, x1, 0))

        m_s = m_prev + s + sum(k[n] + n for n in ys)
        nxt = m_prev + 1
        nbrs.extend(set() for _ in range(m_s - m_prev))
        wit_json = []
        for i, (n, x0, x1, _) in enumerate(witnesses):
            v = nxt + i
            for a in x0:
                nbrs[v].add(a)
                nbrs[a].add(v)
            wit_json.append({"v": v, "n": n, "A": list(x0), "B": list(x1)})
        nxt += len(witnesses)
        x_changes, f_changes = {}, {}
        for n in ys:
            x_new = next((x for x in range(s + 1) if all(phi(n, x, y) for y in range(s + 1))), s + 1)
            x_params[n] = x_new
            f_params[n] = tuple(range(nxt, nxt + n))
            nxt += n
            x_changes[str(n)] = x_new
            f_changes[str(n)] = list(f_params[n])
        x_params[s] = 0
        f_params[s] = tuple(range(nxt, nxt + s))
        nxt += s
        assert nxt == m_s + 1
        x_changes[str(s)] = 0
        f_changes[str(s)] = list(f_params[s])
        y_log.append(ys)
        active_counts.append(k)
        records.append(
            {"s": s, "m_s": m_s, "Y": ys, "k": {str(n): c for n, c in k.items()}, "witnesses": wit_json,
             "x": x_changes, "F": f_changes, "n_cap": n_cap,
             "windows": {str(n): w for n, w in windows.items()}}
        )
        m_prev = m_s

    return GadgetState(horizon, m_prev, nbrs, x_params, f_params, y_log, active_counts, records,
                       n_cap, pair_budget, phi)


# -- trace replay and checks ---------------------------------------------------

@dataclass
class Replay:
    """Parameters and graph rebuilt from JSON records alone."""

    m: list[int]
    nbrs: list[set[int]]
    birth: list[int]
    x_hist: dict[int, list[tuple[int, int]]] = field(default_factory=dict)  # n -> [(stage, x)]
    f_hist: dict[int, list[tuple[int, tuple[int, ...]]]] = field(default_factory=dict)

    def f_at(self, n: int, s: int) -> tuple[int, ...] | None:
        cur = None
        for t, f in self.f_hist.get(n, []):
            if t > s:
                break
            cur = f
        return cur


@dataclass
class Violation:
    invariant: str
    stage: int | None
    detail: str

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "stage": self.stage, "detail": self.detail}


def replay(records: list[dict]) -> tuple[Replay, list[Violation]]:
    out: list[Violation] = []
    rp = Replay([], [set()], [0])
    for rec in records:
        s, m_s = rec["s"], rec["m_s"]
        m_prev = rp.m[-1] if rp.m else -1
        if s >= 2:
            expect = m_prev + s + sum(int(rec["k"][str(n)]) + n for n in rec["Y"])
            if m_s != expect:
                out.append(Violation("stage-arithmetic", s, f"m_s = {m_s}, expected {expect}"))
            if len(rec["witnesses"]) != sum(int(c) for c in rec["k"].values()):
                out.append(Violation("stage-arithmetic", s, "witness count differs from sum of k_n"))
        if m_s <= m_prev:
            out.append(Violation("m-increasing", s, f"m_s = {m_s} not above {m_prev}"))
        while len(rp.nbrs) <= m_s:
            rp.nbrs.append(set())
            rp.birth.append(s)
        nxt = m_prev + 1
        for wit in rec["witnesses"]:
            v = wit["v"]
            if v != nxt:
                out.append(Violation("fresh-order", s, f"witness {v} out of order (expected {nxt})"))
            nxt = v + 1
            if len(wit["A"]) + len(wit["B"]) != wit["n"] or set(wit["A"]) & set(wit["B"]):
                out.append(Violation("witness-fidelity", s, f"witness {v} carries a malformed pair"))
            for a in wit["A"]:
                if a > m_prev:
                    out.append(Violation("fresh-endpoint", s, f"edge {a}-{v} has two new endpoints"))
                rp.nbrs[v].add(a)
                rp.nbrs[a].add(v)
            if any(b in rp.nbrs[v] for b in wit["B"]):
                out.append(Violation("witness-fidelity", s, f"witness {v} joined to its B side"))
        for key in sorted(rec["F"], key=int):
            n = int(key)
            f = tuple(rec["F"][key])
            if s >= 2 and f and f[0] != nxt:
                out.append(Violation("fresh-order", s, f"F_{n} does not start at the next fresh vertex"))
            nxt = f[-1] + 1 if f else nxt
            if len(f) != n:
                out.append(Violation("F-size", s, f"|F_{n}| = {len(f)}"))
            rp.f_hist.setdefault(n, []).append((s, f))
        for key, x in rec["x"].items():
            n = int(key)
            hist = rp.x_hist.setdefault(n, [])
            if hist and x < hist[-1][1]:
                out.append(Violation("x-monotone", s, f"x_{n} decreased from {hist[-1][1]} to {x}"))
            hist.append((s, x))
        if s >= 2 and nxt != m_s + 1:
            out.append(Violation("fresh-order", s, f"{m_s + 1 - nxt} fresh vertices unaccounted for"))
        rp.m.append(m_s)
        # Protection and x < min F, for every realized n at this stage.
        for n in sorted(rp.f_hist):
            f = rp.f_at(n, s)
            if f is None:
                continue
            xs = rp.x_hist.get(n)
            x = xs[-1][1] if xs else 0
            if f and x >= min(f):
                out.append(Violation("x-below-F", s, f"x_{n} = {x} not below min F_{n}"))
            common = set.intersection(*(rp.nbrs[a] for a in f)) if f else set()
            if any(v <= m_s for v in common):
                out.append(Violation("protection", s, f"vertex {min(common)} is joined to all of F_{n}"))
    return rp, out


def check_records(records: list[dict]) -> list[Violation]:
    return replay(records)[1]


def stabilization(records: list[dict], m: int) -> int | None:
    """Stage of the last change of ``F_m`` (``None`` if ``F_m`` never appears)."""
    last = None
    for rec in records:
        if str(m) in rec["F"]:
            last = rec["s"]
    return last


def failure_protected(records: list[dict], m: int, from_stage: int | None = None) -> bool:
    """No vertex joins all of the stabilized ``F_m`` at any stage from ``from_stage`` to the horizon."""
    horizon = records[-1]["s"]
    stab = stabilization(records, m)
    if stab is None or stab >= horizon:
        raise PreconditionError(f"F_{m} has not stabilized within the horizon")
    start = stab if from_stage is None else from_stage
    if start < stab:
        raise PreconditionError(f"F_{m} changed at stage {stab}, after {start}")
    rp, _ = replay(records)
    f = rp.f_at(m, horizon)
    common = set.intersection(*(rp.nbrs[a] for a in f))
    return not any(rp.birth[v] >= start or v <= rp.m[start] for v in common)


def unwitnessed_pairs(state: GadgetState, m: int, top: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """``m``-pairs over ``{0..top}`` with no witness anywhere in the final graph."""
    return [p for p in _pairs_with_new(m, -1, top) if not state.has_witness(p[0], p[1], state.m_s)]


def correspondence(state: GadgetState, n: int, top: int, x_search_bound: int) -> dict:
    """Compare ``exists m <= n psi(m)`` with what the run shows.

    Forward: some ``m <= n`` has a stabilized, protected ``F_m``.  Backward:
    every ``m``-pair over ``{0..top}`` with ``m <= n`` has a witness.
    """
    truth = any(psi_oracle(state.phi, m, x_search_bound) for m in range(n + 1))
    if truth:
        ok_m = None
        for m in range(1, n + 1):
            try:
                if failure_protected(state.records, m):
                    ok_m = m
                    break
            except PreconditionError:
                continue
        return {"n": n, "psi": True, "agrees": ok_m is not None, "protected_m": ok_m}
    missing = {m: len(unwitnessed_pairs(state, m, top)) for m in range(1, n + 1)}
    return {"n": n, "psi": False, "agrees": not any(missing.values()), "unwitnessed": missing}
