"""Built-in graph oracle families and construction from JSON specs.

Every family carries the certificates it can justify.  Expression-defined
oracles carry none, so anything requiring a certificate treats them as
unconfirmed.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable

from .dsl import Expression, ExpressionError
from .graphs import ExtensionPair, GraphOracle, is_witness
from .random_graph import canonical_edge, witness_formula


class OracleSpecError(ValueError):
    pass


def unpair1(s: int) -> int:
    """First coordinate of the Cantor unpairing: 0→0, 1→0, 2→1, 3→0, 4→1, 5→2, ..."""
    w = (math.isqrt(8 * s + 1) - 1) // 2
    return s - w * (w + 1) // 2


def _false(v: int) -> bool:
    return False


def _true(v: int) -> bool:
    return True


def complete() -> GraphOracle:
    return GraphOracle(
        lambda u, v: True,
        "complete K_omega",
        isolated_decider=_false,
        universal_decider=_true,
        nonneighbor_bound=lambda v: v + 1,
        spec={"family": "complete"},
    )


def empty() -> GraphOracle:
    return GraphOracle(
        lambda u, v: False,
        "empty",
        isolated_decider=_true,
        universal_decider=_false,
        neighbor_bound=lambda v: 0,
        spec={"family": "empty"},
    )


def canonical_random() -> GraphOracle:
    return GraphOracle(
        canonical_edge,
        "canonical random graph",
        isolated_decider=_false,
        universal_decider=_false,
        witness_hint=witness_formula,
        spec={"family": "random"},
    )


def matching() -> GraphOracle:
    """The infinite perfect matching ``2k -- 2k+1``."""
    return GraphOracle(
        lambda u, v: v == u + 1 and u % 2 == 0,
        "infinite matching",
        isolated_decider=_false,
        universal_decider=_false,
        neighbor_bound=lambda v: (v | 1) + 1,
        spec={"family": "matching"},
    )


class _BlockLayout:
    """Consecutive cliques of sizes ``unpair1(s) + 1`` for ``s = 0, 1, 2, ...``."""

    def __init__(self) -> None:
        self.starts = [0]

    def block(self, v: int) -> tuple[int, int]:
        while self.starts[-1] <= v:
            s = len(self.starts) - 1
            self.starts.append(self.starts[-1] + unpair1(s) + 1)
        i = bisect.bisect_right(self.starts, v) - 1
        return self.starts[i], self.starts[i + 1]


def kforest_layout() -> GraphOracle:
    """The uniformly computable copy of infinitely many disjoint ``K_n`` for every ``n``."""
    layout = _BlockLayout()

    def edge(u: int, v: int) -> bool:
        return layout.block(u) == layout.block(v)

    def isolated(v: int) -> bool:
        lo, hi = layout.block(v)
        return hi - lo == 1

    return GraphOracle(
        edge,
        "K_<omega^infty canonical layout",
        isolated_decider=isolated,
        universal_decider=_false,
        neighbor_bound=lambda v: layout.block(v)[1],
        spec={"family": "kforest"},
    )


def aca_gadget_table(table: dict[int, int]) -> GraphOracle:
    """Edges ``2n -- 2f(n)+1`` for a finite injective table ``f``."""
    f = {int(n): int(m) for n, m in table.items()}
    if len(set(f.values())) != len(f):
        raise OracleSpecError("ACA gadget table is not injective")
    inverse = {m: n for n, m in f.items()}

    def edge(u: int, v: int) -> bool:
        if u % 2 == v % 2:
            return False
        even, odd = (u, v) if u % 2 == 0 else (v, u)
        return f.get(even // 2) == (odd - 1) // 2

    def isolated(v: int) -> bool:
        if v % 2 == 0:
            return v // 2 not in f
        return (v - 1) // 2 not in inverse

    def neighbor_bound(v: int) -> int:
        if v % 2 == 0:
            return 2 * f[v // 2] + 2 if v // 2 in f else 0
        n = inverse.get((v - 1) // 2)
        return 0 if n is None else 2 * n + 1

    return GraphOracle(
        edge,
        f"ACA gadget (table of {len(f)})",
        isolated_decider=isolated,
        universal_decider=_false,
        neighbor_bound=neighbor_bound,
        spec={"family": "aca", "table": {str(k): v for k, v in sorted(f.items())}},
    )


def aca_gadget_expr(source: str, check_below: int = 256) -> GraphOracle:
    """ACA gadget for ``f`` given as an expression in ``n``.

    Injectivity is checked on ``n < check_below``.  No isolated decider is
    attached: deciding isolation here amounts to deciding the range of ``f``.
    """
    f = Expression(source, ("n",))
    seen: dict[int, int] = {}
    for n in range(check_below):
        m = int(f(n))
        if m < 0:
            raise OracleSpecError(f"f({n}) = {m} is negative")
        if m in seen:
            raise OracleSpecError(f"f is not injective: f({seen[m]}) = f({n}) = {m}")
        seen[m] = n

    def edge(u: int, v: int) -> bool:
        if u % 2 == v % 2:
            return False
        even, odd = (u, v) if u % 2 == 0 else (v, u)
        return int(f(even // 2)) == (odd - 1) // 2

    return GraphOracle(
        edge,
        f"ACA gadget f(n) = {source}",
        spec={"family": "aca", "expr": source, "check_below": check_below},
    )


def sparse(
    edges: Iterable[tuple[int, int]] = (),
    hubs: Iterable[dict] = (),
    schedule_lag: int | None = None,
    schedule_limit: int = 0,
    description: str | None = None,
) -> GraphOracle:
    """A finite edge list, optional infinite-degree hubs, and an isolated tail.

    A hub ``{"vertex": h, "modulus": k, "residue": r, "start": t}`` is joined
    to every ``v >= t`` with ``v % k == r`` (``v != h``).  All non-hub
    vertices have finite degree; when ``schedule_lag`` is given they are
    enumerated as ``(v, v + lag)`` for ``v < schedule_limit``.
    """
    nbrs: dict[int, set[int]] = {}
    edge_list = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise OracleSpecError(f"loop at {u}")
        nbrs.setdefault(u, set()).add(v)
        nbrs.setdefault(v, set()).add(u)
        edge_list.append(sorted((u, v)))
    hub_list = []
    for h in hubs:
        hub = {
            "vertex": int(h["vertex"]),
            "modulus": int(h["modulus"]),
            "residue": int(h["residue"]),
            "start": int(h.get("start", 0)),
        }
        if hub["modulus"] <= 0:
            raise OracleSpecError("hub modulus must be positive")
        hub_list.append(hub)
    hub_vertices = {h["vertex"] for h in hub_list}

    def hub_adjacent(h: dict, v: int) -> bool:
        return v != h["vertex"] and v >= h["start"] and v % h["modulus"] == h["residue"]

    def edge(u: int, v: int) -> bool:
        if v in nbrs.get(u, ()):
            return True
        for h in hub_list:
            if (h["vertex"] == u and hub_adjacent(h, v)) or (h["vertex"] == v and hub_adjacent(h, u)):
                return True
        return False

    def neighbor_bound(v: int) -> int | None:
        if v in hub_vertices:
            return None
        top = max(nbrs.get(v, ()), default=-1)
        for h in hub_list:
            if hub_adjacent(h, v):
                top = max(top, h["vertex"])
        return top + 1

    def isolated(v: int) -> bool:
        return neighbor_bound(v) == 0

    schedule = None
    if schedule_lag is not None:
        schedule = tuple(
            sorted(((v, v + schedule_lag) for v in range(schedule_limit) if v not in hub_vertices),
                   key=lambda p: (p[1], p[0]))
        )
    spec = {
        "family": "sparse",
        "edges": sorted(edge_list),
        "hubs": hub_list,
    }
    if schedule_lag is not None:
        spec["schedule"] = {"lag": schedule_lag, "limit": schedule_limit}
    return GraphOracle(
        edge,
        description or f"sparse ({len(edge_list)} edges, {len(hub_list)} hubs)",
        finite_degree_schedule=schedule,
        isolated_decider=isolated,
        universal_decider=_false,
        neighbor_bound=neighbor_bound,
        spec=spec,
    )


def expression_oracle(source: str, description: str | None = None) -> GraphOracle:
    """Edge relation given by an expression in ``u < v``; no certificates."""
    e = Expression(source, ("u", "v"))
    return GraphOracle(
        lambda u, v: bool(e(u, v)),
        description or f"expr {source}",
        spec={"family": "expr", "edge": source},
    )


def relabeled(base: GraphOracle, perm: dict[int, int]) -> GraphOracle:
    """Copy of ``base`` with vertex ``v`` standing for ``perm.get(v, v)``."""
    perm = {int(k): int(v) for k, v in perm.items()}
    if sorted(perm) != sorted(perm.values()):
        raise OracleSpecError("relabelling must permute its support")
    inner = base.edge

    def edge(u: int, v: int) -> bool:
        return inner(perm.get(u, u), perm.get(v, v))

    return GraphOracle(
        edge,
        f"relabeled({base.description})",
        spec={"family": "relabeled", "base": base.spec, "perm": {str(k): v for k, v in sorted(perm.items())}},
    )


def oracle_from_spec(spec: dict) -> GraphOracle:
    """Build an oracle from its JSON description (see README for the families)."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise OracleSpecError(f"oracle spec needs a 'family': {spec!r}")
    fam = spec["family"]
    try:
        if fam == "complete":
            return complete()
        if fam == "empty":
            return empty()
        if fam == "random":
            return canonical_random()
        if fam == "matching":
            return matching()
        if fam == "kforest":
            return kforest_layout()
        if fam == "aca":
            if "table" in spec:
                return aca_gadget_table({int(k): v for k, v in spec["table"].items()})
            return aca_gadget_expr(spec["expr"], spec.get("check_below", 256))
        if fam == "sparse":
            sched = spec.get("schedule")
            return sparse(
                (tuple(e) for e in spec.get("edges", [])),
                spec.get("hubs", []),
                schedule_lag=sched["lag"] if sched else None,
                schedule_limit=sched["limit"] if sched else 0,
                description=spec.get("description"),
            )
        if fam == "expr":
            return expression_oracle(spec["edge"], spec.get("description"))
        if fam == "relabeled":
            return relabeled(oracle_from_spec(spec["base"]), spec["perm"])
        if fam == "complement":
            return oracle_from_spec(spec["of"]).complement()
    except (KeyError, TypeError, ExpressionError) as exc:
        raise OracleSpecError(f"bad oracle spec {spec!r}: {exc}") from None
    raise OracleSpecError(f"unknown oracle family {fam!r}")


def certified_no_witness(oracle: GraphOracle, p: ExtensionPair, members=None) -> str | None:
    """Structural proof that ``p`` has no witness anywhere (within ``members`` if given).

    Returns a human-readable certificate or ``None`` when no certificate applies
    or a witness exists below the certified range.
    """
    for a in sorted(p.a_side):
        bound = oracle.neighbor_bound(a) if oracle.neighbor_bound else None
        if bound is not None:
            if any(
                (members is None or members(x)) and is_witness(oracle.edge, p, x) for x in range(bound)
            ):
                return None
            return f"every neighbour of {a} lies below {bound}; none of them is a witness"
    for b in sorted(p.b_side):
        bound = oracle.nonneighbor_bound(b) if oracle.nonneighbor_bound else None
        if bound is not None:
            if any(
                (members is None or members(x)) and is_witness(oracle.edge, p, x) for x in range(bound)
            ):
                return None
            return f"every non-neighbour of {b} lies below {bound}; none of them is a witness"
    return None

