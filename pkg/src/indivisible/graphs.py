"""Finite stage graphs, lazy infinite graph oracles, and shared graph operations.

A :class:`StageGraph` is a finite irreflexive graph on ``{0, ..., size-1}``
stored as one neighbour bitmask per vertex, so symmetry is structural and
extension-pair queries reduce to a few big-integer operations.

A :class:`GraphOracle` is a total edge predicate on the naturals together with
whatever structural certificates its family can honestly provide.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Sequence

BRUTE_FORCE_CAP = 8


class GraphSizeError(ValueError):
    """A brute-force routine was asked to handle a graph above its cap."""


class SideExhausted(LookupError):
    """A partition side had fewer vertices than requested below the bound."""

    def __init__(self, side: int, found: list[int], bound: int):
        super().__init__(
            f"side {side} appears finite at bound {bound}: only {len(found)} vertices"
        )
        self.side = side
        self.found = found
        self.bound = bound


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class StageGraph:
    """Finite graph on ``{0, ..., size-1}``; ``adj[v]`` is the neighbour bitmask of ``v``."""

    size: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.adj) != self.size:
            raise ValueError("adjacency length must equal size")
        full = (1 << self.size) - 1
        for v, m in enumerate(self.adj):
            if m >> v & 1:
                raise ValueError(f"loop at vertex {v}")
            if m & ~full:
                raise ValueError(f"vertex {v} has a neighbour >= size")
            for u in _bits(m):
                if not self.adj[u] >> v & 1:
                    raise ValueError(f"asymmetric edge {v}-{u}")

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[tuple[int, int]]) -> StageGraph:
        adj = [0] * size
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < size and 0 <= v < size):
                raise ValueError(f"edge ({u}, {v}) outside size {size}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(size, tuple(adj))

    @classmethod
    def empty(cls, size: int) -> StageGraph:
        return cls(size, (0,) * size)

    @classmethod
    def complete(cls, size: int) -> StageGraph:
        full = (1 << size) - 1
        return cls(size, tuple(full & ~(1 << v) for v in range(size)))

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edge_list())

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        out = []
        for u, m in enumerate(self.adj):
            out.extend((u, v) for v in _bits(m >> (u + 1) << (u + 1)))
        return out

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v: int) -> list[int]:
        return list(_bits(self.adj[v]))

    def degree(self, v: int) -> int:
        return bin(self.adj[v]).count("1")

    def is_isolated(self, v: int) -> bool:
        return self.adj[v] == 0

    def induced(self, vertices: Sequence[int]) -> StageGraph:
        """Induced subgraph on ``vertices``, relabelled order-preservingly to ``0..k-1``."""
        vs = sorted(set(vertices))
        index = {v: i for i, v in enumerate(vs)}
        adj = []
        for v in vs:
            m = 0
            for u in _bits(self.adj[v]):
                j = index.get(u)
                if j is not None:
                    m |= 1 << j
            adj.append(m)
        return StageGraph(len(vs), tuple(adj))

    def to_json(self) -> dict:
        return {"size": self.size, "edges": [list(e) for e in self.edge_list()]}

    @classmethod
    def from_json(cls, data: dict) -> StageGraph:
        return cls.from_edges(data["size"], (tuple(e) for e in data["edges"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def to_dot(self, name: str = "G", labels: dict[int, str] | None = None) -> str:
        lines = [f"graph {name} {{"]
        for v in range(self.size):
            if labels and v in labels:
                lines.append(f'  {v} [label="{labels[v]}"];')
            else:
                lines.append(f"  {v};")
        for u, v in self.edge_list():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExtensionPair:
    """Disjoint finite vertex sets: ``a_side`` must all be joined, ``b_side`` none."""

    a_side: frozenset[int] = frozenset()
    b_side: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "a_side", frozenset(self.a_side))
        object.__setattr__(self, "b_side", frozenset(self.b_side))
        if self.a_side & self.b_side:
            raise ValueError(f"extension pair sides overlap: {sorted(self.a_side & self.b_side)}")

    def size(self) -> int:
        return len(self.a_side) + len(self.b_side)

    @property
    def support(self) -> frozenset[int]:
        return self.a_side | self.b_side

    def code(self) -> int:
        """Base-3 canonical encoding: digit ``v`` is 1 for ``v`` in A, 2 for ``v`` in B."""
        return sum(3**a for a in self.a_side) + sum(2 * 3**b for b in self.b_side)

    def to_json(self) -> dict:
        return {"A": sorted(self.a_side), "B": sorted(self.b_side)}

    @classmethod
    def from_json(cls, data: dict) -> ExtensionPair:
        return cls(frozenset(data["A"]), frozenset(data["B"]))

    def __repr__(self) -> str:
        return f"<{sorted(self.a_side)}, {sorted(self.b_side)}>"


def pair(a: Iterable[int] = (), b: Iterable[int] = ()) -> ExtensionPair:
    return ExtensionPair(frozenset(a), frozenset(b))


def is_witness(edge: Callable[[int, int], bool], p: ExtensionPair, x: int) -> bool:
    """``x`` lies outside A∪B, is joined to all of A and to none of B."""
    if x in p.a_side or x in p.b_side:
        return False
    return all(edge(x, a) for a in p.a_side) and not any(edge(x, b) for b in p.b_side)


@dataclass(frozen=True)
class GraphOracle:
    """A total, decidable, symmetric irreflexive edge predicate on the naturals.

    Optional certificates (all may be ``None``):

    * ``finite_degree_schedule`` -- (vertex, reveal stage) pairs enumerating
      finite-degree vertices, each listed once.
    * ``isolated_decider`` / ``universal_decider`` -- total predicates.
    * ``neighbor_bound(v)`` -- every neighbour of ``v`` is below the returned
      value (``None`` when the family cannot bound it).
    * ``nonneighbor_bound(v)`` -- every non-neighbour of ``v`` is below it.
    * ``witness_hint(pair)`` -- a candidate extension witness.
    """

    edge_fn: Callable[[int, int], bool]
    description: str
    finite_degree_schedule: tuple[tuple[int, int], ...] | None = None
    isolated_decider: Callable[[int], bool] | None = None
    universal_decider: Callable[[int], bool] | None = None
    neighbor_bound: Callable[[int], int | None] | None = None
    nonneighbor_bound: Callable[[int], int | None] | None = None
    witness_hint: Callable[[ExtensionPair], int | None] | None = None
    spec: dict | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        sched = self.finite_degree_schedule
        if sched is not None:
            sched = tuple((int(v), int(t)) for v, t in sched)
            seen = [v for v, _ in sched]
            if len(seen) != len(set(seen)):
                raise ValueError("finite-degree schedule lists a vertex twice")
            object.__setattr__(self, "finite_degree_schedule", sched)

    def edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if u > v:
            u, v = v, u
        return bool(self.edge_fn(u, v))

    __call__ = edge

    def public(self) -> GraphOracle:
        """The view a construction is allowed: edges and the c.e. schedule only."""
        return GraphOracle(
            self.edge_fn,
            self.description,
            finite_degree_schedule=self.finite_degree_schedule,
            spec=self.spec,
        )

    def complement(self) -> GraphOracle:
        fn = self.edge_fn
        return GraphOracle(
            lambda u, v: not fn(u, v),
            f"complement({self.description})",
            isolated_decider=self.universal_decider,
            universal_decider=self.isolated_decider,
            neighbor_bound=self.nonneighbor_bound,
            nonneighbor_bound=self.neighbor_bound,
            spec={"family": "complement", "of": self.spec} if self.spec else None,
        )

    def with_certificates(self, **kwargs) -> GraphOracle:
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Partition:
    """A total two-colouring ``v -> 0|1`` of the vertices."""

    side: Callable[[int], int]
    description: str = ""

    def __call__(self, v: int) -> int:
        return self.side(v)


def stage_prefix(oracle: GraphOracle | Callable[[int, int], bool], s: int) -> StageGraph:
    """Induced graph on ``{0, ..., s}``."""
    edge = oracle.edge if isinstance(oracle, GraphOracle) else oracle
    adj = [0] * (s + 1)
    for v in range(1, s + 1):
        m = 0
        for u in range(v):
            if edge(u, v):
                m |= 1 << u
                adj[u] |= 1 << v
        adj[v] |= m
    return StageGraph(s + 1, tuple(adj))


def complement(g: StageGraph) -> StageGraph:
    full = (1 << g.size) - 1
    return StageGraph(g.size, tuple(full & ~m & ~(1 << v) for v, m in enumerate(g.adj)))


def has_extension_witness(g: StageGraph, p: ExtensionPair) -> int | None:
    """Least vertex of ``g`` witnessing ``p`` inside this finite graph, if any."""
    for v in p.support:
        if v >= g.size:
            raise ValueError(f"pair vertex {v} outside graph of size {g.size}")
    cand = (1 << g.size) - 1
    for a in p.a_side:
        cand &= g.adj[a]
    for b in p.b_side:
        cand &= ~g.adj[b]
    cand &= ~mask_of(p.support)
    if not cand:
        return None
    return (cand & -cand).bit_length() - 1


def _check_cap(g: StageGraph, cap: int) -> None:
    if g.size > cap:
        raise GraphSizeError(f"graph has {g.size} vertices; brute-force cap is {cap}")


def is_isomorphic_finite(g1: StageGraph, g2: StageGraph, cap: int = BRUTE_FORCE_CAP) -> bool:
    """Exhaustive search for an edge- and non-edge-preserving bijection."""
    _check_cap(g1, cap)
    _check_cap(g2, cap)
    if g1.size != g2.size:
        return False
    if sorted(map(g1.degree, range(g1.size))) != sorted(map(g2.degree, range(g2.size))):
        return False
    n = g1.size
    for perm in itertools.permutations(range(n)):
        if all(
            g1.has_edge(u, v) == g2.has_edge(perm[u], perm[v])
            for u in range(n)
            for v in range(u + 1, n)
        ):
            return True
    return False


def is_strongly_indivisible_finite(g: StageGraph, cap: int = BRUTE_FORCE_CAP) -> bool:
    """Every bipartition (trivial ones included) has a side isomorphic to ``g``."""
    _check_cap(g, cap)
    n = g.size
    for mask in range(1 << n):
        side0 = [v for v in range(n) if not mask >> v & 1]
        side1 = [v for v in range(n) if mask >> v & 1]
        if not any(is_isomorphic_finite(g.induced(side), g, cap) for side in (side0, side1)):
            return False
    return True


def side_iso_prefix(p: Partition, side: int, k: int, bound: int = 1 << 16) -> list[int]:
    """First ``k`` vertices on ``side``: the order isomorphism from ``{0..k-1}`` onto it."""
    found: list[int] = []
    if k == 0:
        return found
    for v in range(bound):
        if p(v) == side:
            found.append(v)
            if len(found) == k:
                return found
    raise SideExhausted(side, found, bound)
