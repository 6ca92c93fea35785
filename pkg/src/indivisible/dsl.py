"""A tiny total expression language for oracles, adversaries and predicates.

Expressions are Python-syntax integer/boolean formulas over a fixed set of
free variables.  Only arithmetic, comparisons, boolean connectives, the
conditional expression and a handful of total helper functions are
accepted; there are no loops, attribute access, or calls to anything but the
whitelisted helpers, so every expression terminates.

Division and modulus by zero evaluate to 0, and ``**`` refuses exponents
above ``MAX_EXPONENT``.
"""

from __future__ import annotations

import ast
from typing import Callable

MAX_EXPONENT = 4096


class ExpressionError(ValueError):
    """Raised when an expression uses syntax outside the language."""


def _div(a: int, b: int) -> int:
    return 0 if b == 0 else a // b


def _mod(a: int, b: int) -> int:
    return 0 if b == 0 else a % b


def _pow(a: int, b: int) -> int:
    if b < 0:
        return 0
    if b > MAX_EXPONENT:
        raise ExpressionError(f"exponent {b} exceeds {MAX_EXPONENT}")
    return a**b


def _bit(i: int, v: int) -> int:
    """Bit ``i`` of ``v`` (0 for negative ``i``)."""
    return 0 if i < 0 else (v >> i) & 1


def _isqrt(v: int) -> int:
    import math

    return math.isqrt(v) if v > 0 else 0


FUNCTIONS: dict[str, Callable[..., int]] = {
    "bit": _bit,
    "min": min,
    "max": max,
    "abs": abs,
    "isqrt": _isqrt,
    "_div": _div,
    "_mod": _mod,
    "_pow": _pow,
}

_ALLOWED = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.BoolOp,
    ast.Compare,
    ast.IfExp,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.FloorDiv,
    ast.Mod,
    ast.Pow,
    ast.BitAnd,
    ast.BitOr,
    ast.BitXor,
    ast.LShift,
    ast.RShift,
    ast.USub,
    ast.UAdd,
    ast.Not,
    ast.Invert,
    ast.And,
    ast.Or,
    ast.Eq,
    ast.NotEq,
    ast.Lt,
    ast.LtE,
    ast.Gt,
    ast.GtE,
)


class _Rewrite(ast.NodeTransformer):
    _targets = {ast.FloorDiv: "_div", ast.Mod: "_mod", ast.Pow: "_pow"}

    def visit_BinOp(self, node: ast.BinOp) -> ast.AST:
        self.generic_visit(node)
        name = self._targets.get(type(node.op))
        if name is None:
            return node
        call = ast.Call(
            func=ast.Name(id=name, ctx=ast.Load()),
            args=[node.left, node.right],
            keywords=[],
        )
        return ast.copy_location(call, node)


class Expression:
    """A compiled expression over named integer variables.

    >>> Expression("bit(u, v) == 1", ("u", "v"))(0, 1)
    True
    """

    def __init__(self, source: str, variables: tuple[str, ...]):
        self.source = source
        self.variables = tuple(variables)
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED):
                raise ExpressionError(
                    f"{type(node).__name__} is not allowed in {source!r}"
                )
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, bool)):
                raise ExpressionError(f"only integer constants allowed in {source!r}")
            if isinstance(node, ast.Name):
                if node.id not in self.variables and node.id not in FUNCTIONS:
                    raise ExpressionError(f"unknown name {node.id!r} in {source!r}")
            if isinstance(node, ast.Call):
                if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                    raise ExpressionError(f"only helper calls allowed in {source!r}")
                if node.keywords:
                    raise ExpressionError(f"keyword arguments not allowed in {source!r}")
        tree = ast.fix_missing_locations(_Rewrite().visit(tree))
        args = ", ".join(self.variables)
        lam = ast.parse(f"lambda {args}: None", mode="eval")
        lam.body.body = tree.body  # type: ignore[attr-defined]
        code = compile(ast.fix_missing_locations(lam), f"<expr {source!r}>", "eval")
        namespace = {"__builtins__": {}, **FUNCTIONS}
        self._fn = eval(code, namespace)  # noqa: S307 - AST whitelisted above

    def __call__(self, *values: int) -> int | bool:
        return self._fn(*values)

    def __repr__(self) -> str:
        return f"Expression({self.source!r}, {self.variables!r})"


def compile_expr(source: str, *variables: str) -> Expression:
    return Expression(source, tuple(variables))
