"""The primitive prelude: Int, Bool and List with a few operations.

The calculus itself has no base types; these make the generic
programming examples executable.  Each entry gives the type used by the
checker and the Python function used by the evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .core_ast import TApp, TCon, TForall, TVar, TYPE, Type, arrows

INT = TCon("Int")
BOOL = TCon("Bool")


def list_of(t: Type) -> Type:
    return TApp(TCon("List"), t)


class PrimError(Exception):
    """A primitive operation failed at runtime (division by zero, head of
    an empty list)."""


@dataclass(frozen=True)
class PrimSpec:
    name: str
    ty: Type
    ntypes: int  # leading type abstractions
    nargs: int
    fn: Callable


def _div(a: int, b: int) -> int:
    if b == 0:
        raise PrimError("division by zero")
    return a // b


def _head(xs: tuple):
    if not xs:
        raise PrimError("head of an empty list")
    return xs[0]


def _tail(xs: tuple):
    if not xs:
        raise PrimError("tail of an empty list")
    return xs[1:]


_a, _b = TVar("a"), TVar("b")


def _poly1(body: Type) -> Type:
    return TForall("a", TYPE, body)


def _poly2(body: Type) -> Type:
    return TForall("a", TYPE, TForall("b", TYPE, body))


# ``mapList`` receives an already-evaluated function value; the evaluator
# passes a Python callable in its place (see eval.apply_value).
PRIMS: dict[str, PrimSpec] = {p.name: p for p in [
    PrimSpec("not", arrows(BOOL, BOOL), 0, 1, lambda x: not x),
    PrimSpec("and", arrows(BOOL, BOOL, BOOL), 0, 2, lambda x, y: x and y),
    PrimSpec("or", arrows(BOOL, BOOL, BOOL), 0, 2, lambda x, y: x or y),
    PrimSpec("plus", arrows(INT, INT, INT), 0, 2, lambda x, y: x + y),
    PrimSpec("minus", arrows(INT, INT, INT), 0, 2, lambda x, y: x - y),
    PrimSpec("times", arrows(INT, INT, INT), 0, 2, lambda x, y: x * y),
    PrimSpec("div", arrows(INT, INT, INT), 0, 2, _div),
    PrimSpec("eqInt", arrows(INT, INT, BOOL), 0, 2, lambda x, y: x == y),
    PrimSpec("eqBool", arrows(BOOL, BOOL, BOOL), 0, 2, lambda x, y: x == y),
    PrimSpec("nil", _poly1(list_of(_a)), 1, 0, lambda: ()),
    PrimSpec("cons", _poly1(arrows(_a, list_of(_a), list_of(_a))), 1, 2, lambda x, xs: (x,) + xs),
    PrimSpec("length", _poly1(arrows(list_of(_a), INT)), 1, 1, len),
    PrimSpec("isNil", _poly1(arrows(list_of(_a), BOOL)), 1, 1, lambda xs: not xs),
    PrimSpec("head", _poly1(arrows(list_of(_a), _a)), 1, 1, _head),
    PrimSpec("tail", _poly1(arrows(list_of(_a), list_of(_a))), 1, 1, _tail),
    PrimSpec("mapList", _poly2(arrows(arrows(_a, _b), list_of(_a), list_of(_b))), 2, 2,
             lambda f, xs: tuple(f(x) for x in xs)),
]}

# binary operators written infix in terms
BINOPS: dict[str, tuple[Type, Type, Callable]] = {
    "+": (INT, INT, lambda x, y: x + y),
    "-": (INT, INT, lambda x, y: x - y),
    "*": (INT, INT, lambda x, y: x * y),
    "==": (INT, BOOL, lambda x, y: x == y),
    "&&": (BOOL, BOOL, lambda x, y: x and y),
}
