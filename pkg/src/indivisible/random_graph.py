"""The canonical random graph, closed-form extension witnesses, and back-and-forth."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .graphs import ExtensionPair, GraphOracle, Partition, is_witness


def canonical_edge(x: int, y: int) -> bool:
    """``x < y`` are adjacent iff bit ``x`` of ``y`` is set."""
    if x == y:
        return False
    u, v = (x, y) if x < y else (y, x)
    return bool(v >> u & 1)


def witness_formula(p: ExtensionPair) -> int:
    """``2**t + sum(2**a for a in A)`` with ``t = max(A ∪ B) + 1`` (``t = 0`` when empty).

    The result exceeds every vertex of the pair, has bit ``a`` set for each
    ``a`` in A and bit ``b`` clear for each ``b`` in B, so it witnesses the
    pair in the canonical presentation.
    """
    support = p.support
    t = max(support) + 1 if support else 0
    return (1 << t) + sum(1 << a for a in p.a_side)


def gab_membership(p: ExtensionPair, v: int, oracle: GraphOracle | Callable[[int, int], bool]) -> bool:
    """Membership of ``v`` in the vertex set of the subgraph G_{A,B}."""
    edge = oracle.edge if isinstance(oracle, GraphOracle) else oracle
    return is_witness(edge, p, v)


@dataclass
class PartialIso:
    """Finite injective map from vertices of one graph to another."""

    pairs: dict[int, int] = field(default_factory=dict)

    @property
    def domain(self) -> set[int]:
        return set(self.pairs)

    @property
    def range(self) -> set[int]:
        return set(self.pairs.values())

    def inverse(self) -> dict[int, int]:
        return {w: v for v, w in self.pairs.items()}

    def violations(self, edge1: Callable[[int, int], bool], edge2: Callable[[int, int], bool]) -> list[tuple[int, int]]:
        """Domain pairs whose edge status is not preserved (empty for a partial isomorphism)."""
        bad = []
        items = sorted(self.pairs.items())
        if len(set(self.pairs.values())) != len(items):
            bad.append((-1, -1))
        for (u, fu), (v, fv) in itertools.combinations(items, 2):
            if edge1(u, v) != edge2(fu, fv):
                bad.append((u, v))
        return bad


class WitnessSearchExhausted(LookupError):
    """Least-witness search reached its bound; carries the unmet pair."""

    def __init__(self, pair: ExtensionPair, graph: str, bound: int, partial: PartialIso):
        super().__init__(f"no witness for {pair!r} in {graph} below {bound}")
        self.pair = pair
        self.graph = graph
        self.bound = bound
        self.partial = partial


def least_witness(
    edge: Callable[[int, int], bool], p: ExtensionPair, bound: int, exclude: set[int] | None = None
) -> int | None:
    for x in range(bound):
        if exclude and x in exclude:
            continue
        if is_witness(edge, p, x):
            return x
    return None


def _pair_over(edge: Callable[[int, int], bool], mapping: dict[int, int], v: int) -> ExtensionPair:
    """Extension pair that an image of ``v`` must witness over the mapped vertices."""
    a = frozenset(w for u, w in mapping.items() if edge(v, u))
    b = frozenset(w for u, w in mapping.items() if not edge(v, u))
    return ExtensionPair(a, b)


class SearchBudgetExceeded(RuntimeError):
    pass


def back_and_forth(
    g1: GraphOracle, g2: GraphOracle, k: int, bound: int, max_nodes: int = 200_000
) -> PartialIso:
    """``k`` rounds of forth-then-back extension, with witnesses below ``bound``.

    A forth step maps the least unmatched vertex of ``g1`` to a witness in
    ``g2`` of the extension pair it induces over the current range; a back
    step does the same from ``g2`` to ``g1``.  Candidates are tried in
    increasing order and the search backtracks when a step has no witness
    below ``bound``.  Plain greedy least-witness choices can force witnesses
    of tower size in bit-coded presentations; backtracking under a cap avoids
    that.  The result is the lexicographically least run that succeeds.
    """
    fwd: dict[int, int] = {}
    inv: dict[int, int] = {}
    steps = 2 * k
    stack: list[tuple[int, int, Iterator[int]]] = []  # (source vertex, forth?, candidate iterator)
    nodes = 0
    first_fail: ExtensionPair | None = None

    def candidates(step: int) -> tuple[int, Iterator[int]]:
        if step % 2 == 0:
            v = next(i for i in itertools.count() if i not in fwd)
            p = _pair_over(g1.edge, fwd, v)
            return v, (x for x in range(bound) if x not in inv and is_witness(g2.edge, p, x))
        w = next(i for i in itertools.count() if i not in inv)
        p = _pair_over(g2.edge, inv, w)
        return w, (x for x in range(bound) if x not in fwd and is_witness(g1.edge, p, x))

    def viable() -> bool:
        """Forward check: every vertex below ``k`` still unmatched on either side keeps a candidate."""
        for edge_s, edge_t, mapping, used in ((g1.edge, g2.edge, fwd, inv), (g2.edge, g1.edge, inv, fwd)):
            for v in range(k):
                if v in mapping:
                    continue
                p = _pair_over(edge_s, mapping, v)
                if not any(x not in used and is_witness(edge_t, p, x) for x in range(bound)):
                    return False
        return True

    stack.append(candidates(0))
    while True:
        step = len(stack) - 1
        src, it = stack[-1]
        choice = next(it, None)
        nodes += 1
        if nodes > max_nodes:
            raise SearchBudgetExceeded(f"back-and-forth explored {max_nodes} nodes without success")
        if choice is None:
            if first_fail is None:
                first_fail = _pair_over(g1.edge if step % 2 == 0 else g2.edge, fwd if step % 2 == 0 else inv, src)
            stack.pop()
            if not stack:
                raise WitnessSearchExhausted(first_fail, (g2 if step % 2 == 0 else g1).description, bound,
                                             PartialIso(dict(fwd)))
            prev_src, _ = stack[-1]
            if (len(stack) - 1) % 2 == 0:
                inv.pop(fwd.pop(prev_src))
            else:
                fwd.pop(inv.pop(prev_src))
            continue
        if step % 2 == 0:
            fwd[src], inv[choice] = choice, src
        else:
            inv[src], fwd[choice] = choice, src
        if not viable():
            if step % 2 == 0:
                inv.pop(fwd.pop(src))
            else:
                fwd.pop(inv.pop(src))
            continue
        if len(stack) == steps:
            return PartialIso(dict(fwd))
        stack.append(candidates(len(stack)))


class Verdict(enum.Enum):
    WITNESSED = "WITNESSED"
    UNKNOWN_AT_BOUND = "UNKNOWN-AT-BOUND"


@dataclass
class SideReport:
    side: int
    verdict: Verdict
    vertices: list[int]
    failing_pair: ExtensionPair | None = None


def pairs_over(vertices: list[int], max_size: int) -> Iterator[ExtensionPair]:
    """All extension pairs over ``vertices`` of size ``<= max_size``, by size then code."""
    for n in range(max_size + 1):
        batch = []
        for support in itertools.combinations(vertices, n):
            for signs in itertools.product((0, 1), repeat=n):
                a = frozenset(v for v, s in zip(support, signs) if s == 0)
                b = frozenset(v for v, s in zip(support, signs) if s == 1)
                batch.append(ExtensionPair(a, b))
        batch.sort(key=ExtensionPair.code)
        yield from batch


def random_side_search(
    p: Partition,
    depth: int,
    bound: int,
    edge: Callable[[int, int], bool] = canonical_edge,
) -> dict[int, SideReport]:
    """Bounded check of the extension property inside each side of a partition.

    For each side, the pairs tested are those of size ``<= depth`` drawn from
    the first ``depth`` vertices of that side; witnesses must lie in the side
    below ``bound``.  A side is never declared non-random: a missing witness
    yields ``UNKNOWN_AT_BOUND``.
    """
    members: dict[int, list[int]] = {0: [], 1: []}
    for v in range(bound):
        members[p(v)].append(v)
    reports = {}
    for side in (0, 1):
        vs = members[side]
        base = vs[:depth]
        report = SideReport(side, Verdict.WITNESSED, base)
        for q in pairs_over(base, depth):
            if not any(is_witness(edge, q, x) for x in vs):
                report.verdict = Verdict.UNKNOWN_AT_BOUND
                report.failing_pair = q
                break
        reports[side] = report
    return reports
