"""The three-case partition from the classification of strongly indivisible graphs.

Case 1 and Case 2 split off the isolated (resp. universal) vertices using a
decider supplied by the oracle.  Case 3 takes a least-size extension pair
that fails, splits its support into two nonempty halves, and colours every
vertex by whether it is correctly joined to the first half.

Failure of an extension pair is a Π⁰₁ fact, so :func:`least_failing_pair`
only ever reports a pair as failing when a structural certificate proves it;
pairs that merely lack a witness below the search bound are listed as
unconfirmed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .dsl import Expression
from .graphs import ExtensionPair, GraphOracle, is_witness
from .oracles import OracleSpecError, aca_gadget_expr, aca_gadget_table, certified_no_witness


class UnsupportedOracle(ValueError):
    """The oracle lacks the certificate or decider an operation needs."""


@dataclass(frozen=True)
class CutSplit:
    u0: frozenset[int]
    u1: frozenset[int]

    def __post_init__(self) -> None:
        if not self.u0 or not self.u1:
            raise ValueError("both halves of a split must be nonempty")
        if self.u0 & self.u1:
            raise ValueError("split halves overlap")

    @classmethod
    def canonical(cls, p: ExtensionPair) -> CutSplit:
        """``U0 = {min(A ∪ B)}``, ``U1`` = the rest."""
        support = sorted(p.support)
        if len(support) < 2:
            raise ValueError("a split needs a pair of size at least 2")
        return cls(frozenset(support[:1]), frozenset(support[1:]))

    def inherited(self, p: ExtensionPair, i: int) -> ExtensionPair:
        """The pair ``<A ∩ U_i, B ∩ U_i>`` that side ``X_i`` fails."""
        u = self.u0 if i == 0 else self.u1
        return ExtensionPair(p.a_side & u, p.b_side & u)


@dataclass
class LeastFailureReport:
    n: int
    pair: ExtensionPair
    certificate: str
    provenance: str = "structural"
    unconfirmed: list[ExtensionPair] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pair": self.pair.to_json(),
            "certificate": self.certificate,
            "provenance": self.provenance,
            "unconfirmed": [p.to_json() for p in self.unconfirmed],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class NotFound:
    """No certified failing pair up to ``n_max``; ``unconfirmed`` lists bound-only candidates."""

    n_max: int
    unconfirmed: list[ExtensionPair] = field(default_factory=list)

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {"n": None, "n_max": self.n_max, "unconfirmed": [p.to_json() for p in self.unconfirmed]}


def not_correctly_joined(oracle: GraphOracle, v: int, ui_a, ui_b) -> bool:
    return any(not oracle.edge(v, a) for a in ui_a) or any(oracle.edge(v, b) for b in ui_b)


def case3_membership(oracle: GraphOracle, p: ExtensionPair, split: CutSplit, v: int) -> int:
    """Side of ``v`` in the Case 3 partition built from failing pair ``p``."""
    if v in split.u0:
        return 0
    if v in split.u1:
        return 1
    if not_correctly_joined(oracle, v, p.a_side & split.u0, p.b_side & split.u0):
        return 0
    return 1


def pairs_of_size(n: int, vertex_bound: int) -> Iterator[ExtensionPair]:
    """Every ``n``-pair over ``{0..vertex_bound}`` in increasing base-3 code order."""
    batch = []
    for support in itertools.combinations(range(vertex_bound + 1), n):
        for signs in itertools.product((0, 1), repeat=n):
            batch.append(
                ExtensionPair(
                    frozenset(v for v, s in zip(support, signs) if s == 0),
                    frozenset(v for v, s in zip(support, signs) if s == 1),
                )
            )
    batch.sort(key=ExtensionPair.code)
    return iter(batch)


Certifier = Callable[[GraphOracle, ExtensionPair], "str | None"]


def default_certifier(oracle: GraphOracle, p: ExtensionPair) -> str | None:
    return certified_no_witness(oracle, p)


def least_failing_pair(
    oracle: GraphOracle,
    n_max: int,
    vertex_bound: int,
    certifier: Certifier | None = default_certifier,
    search_bound: int = 1024,
) -> LeastFailureReport | NotFound:
    """Least ``n <= n_max`` with a certified failing ``n``-pair over ``{0..vertex_bound}``.

    Each candidate is first refuted by the oracle's witness hint or by a scan
    below ``search_bound``; survivors go to ``certifier``.  Candidates the
    certifier cannot settle are collected as unconfirmed.
    """
    unconfirmed: list[ExtensionPair] = []
    for n in range(1, n_max + 1):
        for p in pairs_of_size(n, vertex_bound):
            if oracle.witness_hint is not None:
                hint = oracle.witness_hint(p)
                if hint is not None and is_witness(oracle.edge, p, hint):
                    continue
            if any(is_witness(oracle.edge, p, x) for x in range(search_bound)):
                continue
            cert = certifier(oracle, p) if certifier else None
            if cert is None:
                unconfirmed.append(p)
                continue
            return LeastFailureReport(n, p, cert, unconfirmed=unconfirmed)
    return NotFound(n_max, unconfirmed)


def decider_partition(decider: Callable[[int], bool] | None, v: int) -> int:
    """Cases 1 and 2: side 0 holds exactly the vertices the decider accepts."""
    if decider is None:
        raise UnsupportedOracle("oracle provides no decider for this case")
    return 0 if decider(v) else 1


def universal_partition(oracle: GraphOracle, v: int) -> int:
    """Case 2 via the complement graph, whose isolated vertices are our universal ones."""
    return decider_partition(oracle.complement().isolated_decider, v)


def aca_gadget(f: dict[int, int] | str, check_below: int = 256) -> GraphOracle:
    """Graph with ``2n -- 2f(n)+1``; odd ``2m+1`` is isolated iff ``m`` is not in the range of ``f``."""
    if isinstance(f, str):
        Expression(f, ("n",))
        return aca_gadget_expr(f, check_below)
    try:
        return aca_gadget_table(f)
    except OracleSpecError as exc:
        raise ValueError(str(exc)) from None


@dataclass
class SideFailure:
    side: int
    pair: ExtensionPair
    status: str  # "certified", "bounded", "violated"
    detail: str


def verify_case3(
    oracle: GraphOracle,
    p: ExtensionPair,
    split: CutSplit,
    vertex_bound: int,
) -> list[SideFailure]:
    """Check each side ``X_i`` fails its inherited pair ``<A ∩ U_i, B ∩ U_i>``.

    A side is ``certified`` when a structural certificate closes the search,
    ``bounded`` when only the scan below ``vertex_bound`` is available, and
    ``violated`` when a witness inside the side is found.
    """
    out = []
    for i in (0, 1):
        q = split.inherited(p, i)

        def member(x: int, i=i) -> bool:
            return case3_membership(oracle, p, split, x) == i

        hit = next(
            (x for x in range(vertex_bound + 1) if member(x) and is_witness(oracle.edge, q, x)),
            None,
        )
        if hit is not None:
            out.append(SideFailure(i, q, "violated", f"vertex {hit} witnesses {q!r} inside X_{i}"))
            continue
        cert = certified_no_witness(oracle, q, members=member)
        if cert is not None:
            out.append(SideFailure(i, q, "certified", cert))
        else:
            out.append(SideFailure(i, q, "bounded", f"no witness below {vertex_bound}"))
    return out
