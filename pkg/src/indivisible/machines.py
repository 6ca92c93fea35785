"""Step-indexed adversaries standing in for the partial computable functions.

An adversary is a deterministic program ``x -> value`` (or divergence) plus a
per-input halting delay.  ``raw_evaluate`` reports the program's verdict at a
step budget; ``evaluate`` additionally enforces the use convention: nothing
halts at stage ``s`` unless the input and the output are both below ``s``.
Halting is monotone in the budget by construction.

Registries are loaded from JSON lists of ``{name, combinator, params, delay}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from .dsl import Expression, ExpressionError

PENDING = None


class RegistryError(ValueError):
    """A registry entry could not be built."""


@dataclass(frozen=True)
class Adversary:
    """``value_fn(x)`` is the eventual output (``None`` = diverges); ``delay_fn(x)``
    is the least step budget at which the raw program halts."""

    name: str
    value_fn: Callable[[int], int | None]
    delay_fn: Callable[[int], int] = lambda x: 0
    spec: dict | None = field(default=None, compare=False)

    def run(self, x: int, budget: int) -> int | None:
        value = self.value_fn(x)
        if value is None or budget < self.delay_fn(x):
            return PENDING
        return value

    def halting_stage(self, x: int) -> int | None:
        """Least stage at which ``evaluate`` reports a halt (use convention included)."""
        value = self.value_fn(x)
        if value is None:
            return None
        return max(self.delay_fn(x), x + 1, value + 1)


@dataclass(frozen=True)
class AdversaryRegistry:
    entries: tuple[Adversary, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, e: int) -> Adversary:
        if not 0 <= e < len(self.entries):
            raise IndexError(f"adversary index {e} out of range (registry has {len(self.entries)})")
        return self.entries[e]

    def names(self) -> list[str]:
        return [a.name for a in self.entries]

    def to_json(self) -> list[dict]:
        return [a.spec or {"name": a.name} for a in self.entries]


def raw_evaluate(r: AdversaryRegistry, e: int, x: int, s: int) -> int | None:
    """The program's own verdict at step budget ``s``, without use-convention suppression."""
    return r[e].run(x, s)


def evaluate(r: AdversaryRegistry, e: int, x: int, s: int) -> int | None:
    """``Φ_{e,s}(x)``: the value if it has halted by stage ``s`` with ``x, value < s``."""
    value = r[e].run(x, s)
    if value is None or x >= s or value >= s:
        return PENDING
    return value


# -- combinators ---------------------------------------------------------------

def constant(c: int, name: str | None = None) -> Adversary:
    return Adversary(name or f"constant-{c}", lambda x: c)


def parity(name: str = "parity") -> Adversary:
    return Adversary(name, lambda x: x % 2)


def threshold(t: int, name: str | None = None) -> Adversary:
    return Adversary(name or f"threshold-at-{t}", lambda x: 1 if x >= t else 0)


def identity(name: str = "identity") -> Adversary:
    return Adversary(name, lambda x: x)


def never(name: str = "never") -> Adversary:
    return Adversary(name, lambda x: None)


def table_override(base: Adversary, table: dict[int, int | None], name: str | None = None) -> Adversary:
    fn = base.value_fn

    def value(x: int) -> int | None:
        return table[x] if x in table else fn(x)

    return Adversary(name or f"{base.name}+table", value, base.delay_fn)


def delayed(base: Adversary, delay: int | Callable[[int], int], name: str | None = None) -> Adversary:
    extra = delay if callable(delay) else (lambda x, d=delay: d)
    inner = base.delay_fn
    return Adversary(name or f"delayed-{base.name}", base.value_fn, lambda x: inner(x) + extra(x))


def expression(source: str, name: str | None = None, domain: str | None = None) -> Adversary:
    """Adversary computing an expression in ``x``; diverges where ``domain`` is false."""
    f = Expression(source, ("x",))
    dom = Expression(domain, ("x",)) if domain else None

    def value(x: int) -> int | None:
        if dom is not None and not dom(x):
            return None
        return int(f(x))

    return Adversary(name or source, value)


_SIMPLE = {
    "constant": lambda p: constant(int(p["value"])),
    "parity": lambda p: parity(),
    "threshold": lambda p: threshold(int(p["at"])),
    "identity": lambda p: identity(),
    "never": lambda p: never(),
    "expr": lambda p: expression(p["expr"], domain=p.get("domain")),
}


def adversary_from_spec(spec: dict) -> Adversary:
    """Build one registry entry; ``delay`` may be an integer or an expression in ``x``."""
    try:
        comb = spec["combinator"]
        params = spec.get("params", {}) or {}
        if comb == "table":
            base = adversary_from_spec(params["base"]) if "base" in params else never()
            table = {int(k): (None if v is None else int(v)) for k, v in params["table"].items()}
            adv = table_override(base, table)
        elif comb in _SIMPLE:
            adv = _SIMPLE[comb](params)
        else:
            raise RegistryError(f"unknown combinator {comb!r}")
        delay = spec.get("delay", 0)
        if isinstance(delay, str):
            expr = Expression(delay, ("x",))
            adv = delayed(adv, lambda x: max(0, int(expr(x))))
        elif delay:
            if not isinstance(delay, int) or delay < 0:
                raise RegistryError(f"delay must be a natural number or expression, got {delay!r}")
            adv = delayed(adv, delay)
    except (KeyError, TypeError, ExpressionError) as exc:
        raise RegistryError(f"bad registry entry {spec!r}: {exc}") from None
    name = spec.get("name", adv.name)
    return Adversary(name, adv.value_fn, adv.delay_fn, spec=dict(spec))


def registry_from_json(data: Sequence[dict]) -> AdversaryRegistry:
    if not isinstance(data, list):
        raise RegistryError("registry must be a JSON list")
    return AdversaryRegistry(tuple(adversary_from_spec(d) for d in data))


def load_registry(path: str | Path) -> AdversaryRegistry:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RegistryError(f"{path}: {exc}") from None
    return registry_from_json(data)


# -- dovetailing ---------------------------------------------------------------

BLOCKED = object()


class Search:
    """A resumable unbounded search.

    ``probe(i)`` inspects the ``i``-th candidate and returns a result on
    success, ``None`` to move on, or ``BLOCKED`` when candidate ``i`` is not
    available yet (the cursor stays put and no budget is spent).
    """

    def __init__(self, name: str, probe: Callable[[int], Any]):
        self.name = name
        self.probe = probe


@dataclass(frozen=True)
class DovetailState:
    cursors: tuple[int, ...]
    winner: int | None = None
    result: Any = None
    steps: int = 0

    @classmethod
    def start(cls, n: int) -> DovetailState:
        return cls(tuple([0] * n))

    def to_json(self) -> dict:
        return {"cursors": list(self.cursors), "winner": self.winner, "steps": self.steps}


class DovetailError(RuntimeError):
    pass


def dovetail_step(state: DovetailState, searches: Sequence[Search], budget: int) -> DovetailState:
    """Advance the searches round-robin for at most ``budget`` probes in total.

    The first search to succeed becomes the winner; ties within a round go to
    the earlier search in the list.
    """
    if state.winner is not None:
        raise DovetailError("dovetail already has a winner")
    if len(searches) != len(state.cursors):
        raise DovetailError("cursor count does not match searches")
    cursors = list(state.cursors)
    spent = 0
    while spent < budget:
        progressed = False
        for j, search in enumerate(searches):
            if spent >= budget:
                break
            out = search.probe(cursors[j])
            if out is BLOCKED:
                continue
            progressed = True
            spent += 1
            cursors[j] += 1
            if out is not None:
                return DovetailState(tuple(cursors), j, out, state.steps + spent)
        if not progressed:
            break
    return DovetailState(tuple(cursors), None, None, state.steps + spent)
