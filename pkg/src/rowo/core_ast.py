"""Abstract syntax for kinds, types, predicates, terms and environments.

Everything here is an immutable dataclass.  Types are compared with
``alpha_eq`` rather than ``==`` whenever binders may differ; ``==`` is plain
structural equality including bound names.

Besides the user-facing forms there is one internal type node, ``TMap``.
The normalizer produces it for a type operator lifted over a row whose
entries are not yet known (``TMap(F, z)`` stands for ``F z`` with ``z`` a
row variable).  It never comes out of the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def __post_init__(self) -> None:
        assert 0 <= self.start <= self.end, (self.start, self.end)


# ---------------------------------------------------------------- kinds


@dataclass(frozen=True)
class KType:
    """The kind of types, optionally carrying a universe level."""

    level: Optional[int] = None


@dataclass(frozen=True)
class KLab:
    """The kind of labels."""


@dataclass(frozen=True)
class KRow:
    elem: "Kind"


@dataclass(frozen=True)
class KArrow:
    dom: "Kind"
    cod: "Kind"


@dataclass(frozen=True)
class KAny:
    """Internal: the element kind of the empty row ``<>``, which fits any
    row kind.  Never written by users."""


Kind = Union[KType, KLab, KRow, KArrow, KAny]

TYPE = KType()
LAB = KLab()


def erase_levels(k: Kind) -> Kind:
    if isinstance(k, KType):
        return TYPE
    if isinstance(k, KRow):
        return KRow(erase_levels(k.elem))
    if isinstance(k, KArrow):
        return KArrow(erase_levels(k.dom), erase_levels(k.cod))
    return k


def same_kind(a: Kind, b: Kind) -> bool:
    """Kind equality ignoring levels, with ``KAny`` matching anything."""
    if isinstance(a, KAny) or isinstance(b, KAny):
        return True
    if isinstance(a, KType) and isinstance(b, KType):
        return True
    if isinstance(a, KRow) and isinstance(b, KRow):
        return same_kind(a.elem, b.elem)
    if isinstance(a, KArrow) and isinstance(b, KArrow):
        return same_kind(a.dom, b.dom) and same_kind(a.cod, b.cod)
    return a == b


def resolve_any(k: Kind, default: Kind = TYPE) -> Kind:
    """Replace leftover ``KAny`` by ``default``."""
    if isinstance(k, KAny):
        return default
    if isinstance(k, KRow):
        return KRow(resolve_any(k.elem, default))
    if isinstance(k, KArrow):
        return KArrow(resolve_any(k.dom, default), resolve_any(k.cod, default))
    return k


def merge_kinds(a: Kind, b: Kind) -> Kind:
    """The more informative of two compatible kinds."""
    if isinstance(a, KAny):
        return b
    if isinstance(b, KAny):
        return a
    if isinstance(a, KRow) and isinstance(b, KRow):
        return KRow(merge_kinds(a.elem, b.elem))
    if isinstance(a, KArrow) and isinstance(b, KArrow):
        return KArrow(merge_kinds(a.dom, b.dom), merge_kinds(a.cod, b.cod))
    return a


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TArrow:
    """The function type constructor (->) : Type -> Type -> Type."""


@dataclass(frozen=True)
class TCon:
    """A primitive type constant (Int, Bool, List)."""

    name: str


@dataclass(frozen=True)
class TQual:
    pred: "Pred"
    body: "Type"


@dataclass(frozen=True)
class TForall:
    var: str
    kind: Kind
    body: "Type"
    # introduced for a combination sugar; instantiated by the solver
    implicit: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class TLam:
    var: str
    kind: Kind
    body: "Type"


@dataclass(frozen=True)
class TApp:
    fun: "Type"
    arg: "Type"


@dataclass(frozen=True)
class TLabel:
    """A label constant used at the type level."""

    name: str


@dataclass(frozen=True)
class TSing:
    label: "Type"


@dataclass(frozen=True)
class TLabeled:
    label: "Type"
    body: "Type"


@dataclass(frozen=True)
class TRow:
    entries: tuple[TLabeled, ...] = ()


@dataclass(frozen=True)
class TPi:
    row: "Type"


@dataclass(frozen=True)
class TSigma:
    row: "Type"


@dataclass(frozen=True)
class TCombine:
    """``left o+ right`` used as a type; removed during elaboration."""

    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TMap:
    """Internal: operator ``fn`` applied entrywise to a neutral row."""

    fn: "Type"
    row: "Type"


Type = Union[
    TVar, TArrow, TCon, TQual, TForall, TLam, TApp, TLabel, TSing, TLabeled,
    TRow, TPi, TSigma, TCombine, TMap,
]


def arrow(a: Type, b: Type) -> Type:
    return TApp(TApp(TArrow(), a), b)


def arrows(*ts: Type) -> Type:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = arrow(t, out)
    return out


def split_arrow(t: Type) -> Optional[tuple[Type, Type]]:
    if isinstance(t, TApp) and isinstance(t.fun, TApp) and isinstance(t.fun.fun, TArrow):
        return t.fun.arg, t.arg
    return None


def row_of(*pairs: tuple[Type, Type]) -> TRow:
    return TRow(tuple(TLabeled(l, t) for l, t in pairs))


# ---------------------------------------------------------------- predicates


@dataclass(frozen=True)
class PContain:
    dir: str  # "L" or "R"
    sub: Type
    sup: Type


@dataclass(frozen=True)
class PCombine:
    left: Type
    right: Type
    result: Type


Pred = Union[PContain, PCombine]


# ---------------------------------------------------------------- terms
#
# Spans are keyword-only and excluded from equality so that terms built by
# hand compare equal to parsed ones.


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Lam:
    var: str
    ann: Optional[Type]
    body: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class App:
    f: "Term"
    a: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyLam:
    var: str
    kind: Optional[Kind]
    body: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyApp:
    tm: "Term"
    ty: Type
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LabelVal:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LabelIntro:
    label: "Term"
    payload: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Unlabel:
    tm: "Term"
    label: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Prj:
    dir: str
    tm: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Concat:
    l: "Term"
    r: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Inj:
    dir: str
    tm: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Branch:
    l: "Term"
    r: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Syn:
    op: Optional[Type]  # None means the identity operator
    body: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Ana:
    op: Optional[Type]
    body: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FoldPi:
    step: "Term"
    combine: "Term"
    unit: "Term"
    record: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SingIntroPi:
    tm: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SingElimPi:
    tm: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SingIntroSig:
    tm: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SingElimSig:
    tm: "Term"
    span: Optional[SourceSpan] = _span()


# primitive layer


@dataclass(frozen=True)
class Lit:
    value: Union[int, bool]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BinOp:
    op: str
    l: "Term"
    r: "Term"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class EmptyRec:
    """``()``, the empty record."""

    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Ann:
    tm: "Term"
    ty: Type
    span: Optional[SourceSpan] = _span()


Term = Union[
    Var, Lam, App, TyLam, TyApp, LabelVal, LabelIntro, Unlabel, Prj, Concat,
    Inj, Branch, Syn, Ana, FoldPi, SingIntroPi, SingElimPi, SingIntroSig,
    SingElimSig, Lit, BinOp, EmptyRec, Ann,
]


# ---------------------------------------------------------------- environments


@dataclass(frozen=True)
class TyVarEntry:
    name: str
    kind: Kind


@dataclass(frozen=True)
class TmVarEntry:
    name: str
    ty: Type


@dataclass(frozen=True)
class Assume:
    pred: Pred
    ev: str = ""


EnvEntry = Union[TyVarEntry, TmVarEntry, Assume]


class Env:
    """An ordered typing environment with fast lookups.

    Extending returns a new Env; the original is untouched.
    """

    __slots__ = ("entries", "_ty", "_tm")

    def __init__(self, entries: Iterable[EnvEntry] = ()):
        self.entries: tuple[EnvEntry, ...] = tuple(entries)
        self._ty: dict[str, Kind] = {}
        self._tm: dict[str, Type] = {}
        for e in self.entries:
            if isinstance(e, TyVarEntry):
                self._ty[e.name] = e.kind
            elif isinstance(e, TmVarEntry):
                self._tm[e.name] = e.ty

    def extend(self, *es: EnvEntry) -> "Env":
        new = Env.__new__(Env)
        new.entries = self.entries + tuple(es)
        new._ty = dict(self._ty)
        new._tm = dict(self._tm)
        for e in es:
            if isinstance(e, TyVarEntry):
                new._ty[e.name] = e.kind
            elif isinstance(e, TmVarEntry):
                new._tm[e.name] = e.ty
        return new

    def with_ty(self, name: str, kind: Kind) -> "Env":
        return self.extend(TyVarEntry(name, kind))

    def with_tm(self, name: str, ty: Type) -> "Env":
        return self.extend(TmVarEntry(name, ty))

    def with_pred(self, pred: Pred, ev: str = "") -> "Env":
        return self.extend(Assume(pred, ev))

    def kind_of_var(self, name: str) -> Optional[Kind]:
        return self._ty.get(name)

    def type_of_var(self, name: str) -> Optional[Type]:
        return self._tm.get(name)

    def ty_names(self) -> set[str]:
        return set(self._ty)

    def ty_kinds(self) -> dict[str, Kind]:
        return dict(self._ty)

    def hyps(self) -> list[tuple[Pred, str]]:
        return [(e.pred, e.ev) for e in self.entries if isinstance(e, Assume)]

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"Env({list(self.entries)!r})"


# ---------------------------------------------------------------- free variables


def free_vars(t: Union[Type, Pred]) -> set[str]:
    out: set[str] = set()
    _fv(t, frozenset(), out)
    return out


def _fv(t, bound: frozenset, out: set) -> None:
    if isinstance(t, TVar):
        if t.name not in bound:
            out.add(t.name)
    elif isinstance(t, (TForall, TLam)):
        _fv(t.body, bound | {t.var}, out)
    elif isinstance(t, TQual):
        _fv(t.pred, bound, out)
        _fv(t.body, bound, out)
    elif isinstance(t, TApp):
        _fv(t.fun, bound, out)
        _fv(t.arg, bound, out)
    elif isinstance(t, (TSing,)):
        _fv(t.label, bound, out)
    elif isinstance(t, TLabeled):
        _fv(t.label, bound, out)
        _fv(t.body, bound, out)
    elif isinstance(t, TRow):
        for e in t.entries:
            _fv(e, bound, out)
    elif isinstance(t, (TPi, TSigma)):
        _fv(t.row, bound, out)
    elif isinstance(t, TCombine):
        _fv(t.left, bound, out)
        _fv(t.right, bound, out)
    elif isinstance(t, TMap):
        _fv(t.fn, bound, out)
        _fv(t.row, bound, out)
    elif isinstance(t, PContain):
        _fv(t.sub, bound, out)
        _fv(t.sup, bound, out)
    elif isinstance(t, PCombine):
        _fv(t.left, bound, out)
        _fv(t.right, bound, out)
        _fv(t.result, bound, out)


def fresh_name(base: str, avoid: set[str]) -> str:
    """Prime ``base`` until it avoids every name in ``avoid``."""
    name = base
    while name in avoid:
        name += "'"
    return name


# ---------------------------------------------------------------- substitution


def subst_ty(target: Union[Type, Pred], var: str, replacement: Type):
    """Capture-avoiding substitution of ``replacement`` for ``var``."""
    return subst_many(target, {var: replacement})


def subst_many(target, mapping: dict[str, Type]):
    """Simultaneous capture-avoiding substitution."""
    if not mapping:
        return target
    fvs: set[str] = set()
    for r in mapping.values():
        fvs |= free_vars(r)
    return _subst(target, mapping, fvs)


def _subst(t, m: dict, fvs: set):
    if isinstance(t, TVar):
        return m.get(t.name, t)
    if isinstance(t, (TArrow, TCon, TLabel)):
        return t
    if isinstance(t, (TForall, TLam)):
        var, body = t.var, t.body
        inner = m
        if var in m:
            inner = {k: v for k, v in m.items() if k != var}
            if not inner:
                return t
        if var in fvs:
            avoid = fvs | free_vars(body) | set(inner)
            new = fresh_name(var, avoid)
            body = _subst(body, {var: TVar(new)}, {new})
            var = new
        body = _subst(body, inner, fvs)
        if isinstance(t, TForall):
            return TForall(var, t.kind, body, t.implicit)
        return TLam(var, t.kind, body)
    if isinstance(t, TQual):
        return TQual(_subst(t.pred, m, fvs), _subst(t.body, m, fvs))
    if isinstance(t, TApp):
        return TApp(_subst(t.fun, m, fvs), _subst(t.arg, m, fvs))
    if isinstance(t, TSing):
        return TSing(_subst(t.label, m, fvs))
    if isinstance(t, TLabeled):
        return TLabeled(_subst(t.label, m, fvs), _subst(t.body, m, fvs))
    if isinstance(t, TRow):
        return TRow(tuple(_subst(e, m, fvs) for e in t.entries))
    if isinstance(t, TPi):
        return TPi(_subst(t.row, m, fvs))
    if isinstance(t, TSigma):
        return TSigma(_subst(t.row, m, fvs))
    if isinstance(t, TCombine):
        return TCombine(_subst(t.left, m, fvs), _subst(t.right, m, fvs))
    if isinstance(t, TMap):
        return TMap(_subst(t.fn, m, fvs), _subst(t.row, m, fvs))
    if isinstance(t, PContain):
        return PContain(t.dir, _subst(t.sub, m, fvs), _subst(t.sup, m, fvs))
    if isinstance(t, PCombine):
        return PCombine(_subst(t.left, m, fvs), _subst(t.right, m, fvs), _subst(t.result, m, fvs))
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------- alpha equivalence


def alpha_eq(a, b) -> bool:
    """True iff ``a`` and ``b`` differ only in bound variable names."""
    return _aeq(a, b, {}, {}, 0)


def _aeq(a, b, ma: dict, mb: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, TVar):
        la, lb = ma.get(a.name), mb.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if isinstance(a, (TArrow, TCon, TLabel)):
        return a == b
    if isinstance(a, (TForall, TLam)):
        if a.kind != b.kind:
            return False
        return _aeq(a.body, b.body, {**ma, a.var: depth}, {**mb, b.var: depth}, depth + 1)
    if isinstance(a, TQual):
        return _aeq(a.pred, b.pred, ma, mb, depth) and _aeq(a.body, b.body, ma, mb, depth)
    if isinstance(a, (TApp,)):
        return _aeq(a.fun, b.fun, ma, mb, depth) and _aeq(a.arg, b.arg, ma, mb, depth)
    if isinstance(a, TMap):
        return _aeq(a.fn, b.fn, ma, mb, depth) and _aeq(a.row, b.row, ma, mb, depth)
    if isinstance(a, TSing):
        return _aeq(a.label, b.label, ma, mb, depth)
    if isinstance(a, TLabeled):
        return _aeq(a.label, b.label, ma, mb, depth) and _aeq(a.body, b.body, ma, mb, depth)
    if isinstance(a, TRow):
        return len(a.entries) == len(b.entries) and all(
            _aeq(x, y, ma, mb, depth) for x, y in zip(a.entries, b.entries)
        )
    if isinstance(a, (TPi, TSigma)):
        return _aeq(a.row, b.row, ma, mb, depth)
    if isinstance(a, TCombine):
        return _aeq(a.left, b.left, ma, mb, depth) and _aeq(a.right, b.right, ma, mb, depth)
    if isinstance(a, PContain):
        return a.dir == b.dir and _aeq(a.sub, b.sub, ma, mb, depth) and _aeq(a.sup, b.sup, ma, mb, depth)
    if isinstance(a, PCombine):
        return (
            _aeq(a.left, b.left, ma, mb, depth)
            and _aeq(a.right, b.right, ma, mb, depth)
            and _aeq(a.result, b.result, ma, mb, depth)
        )
    raise TypeError(f"not a type: {a!r}")


def type_size(t) -> int:
    """Number of nodes; used by tests and search bounds."""
    if isinstance(t, (TVar, TArrow, TCon, TLabel)):
        return 1
    if isinstance(t, (TForall, TLam)):
        return 1 + type_size(t.body)
    if isinstance(t, TQual):
        return 1 + type_size(t.pred) + type_size(t.body)
    if isinstance(t, TApp):
        return 1 + type_size(t.fun) + type_size(t.arg)
    if isinstance(t, TMap):
        return 1 + type_size(t.fn) + type_size(t.row)
    if isinstance(t, TSing):
        return 1 + type_size(t.label)
    if isinstance(t, TLabeled):
        return 1 + type_size(t.label) + type_size(t.body)
    if isinstance(t, TRow):
        return 1 + sum(type_size(e) for e in t.entries)
    if isinstance(t, (TPi, TSigma)):
        return 1 + type_size(t.row)
    if isinstance(t, TCombine):
        return 1 + type_size(t.left) + type_size(t.right)
    if isinstance(t, PContain):
        return 1 + type_size(t.sub) + type_size(t.sup)
    if isinstance(t, PCombine):
        return 1 + type_size(t.left) + type_size(t.right) + type_size(t.result)
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------- term alpha equivalence

_TERM_CHILDREN = {
    App: ("f", "a"),
    LabelIntro: ("label", "payload"),
    Unlabel: ("tm", "label"),
    Prj: ("tm",),
    Inj: ("tm",),
    Concat: ("l", "r"),
    Branch: ("l", "r"),
    FoldPi: ("step", "combine", "unit", "record"),
    SingIntroPi: ("tm",),
    SingElimPi: ("tm",),
    SingIntroSig: ("tm",),
    SingElimSig: ("tm",),
    BinOp: ("l", "r"),
}


def term_alpha_eq(a, b) -> bool:
    """Alpha equivalence on surface terms (term and type binders)."""
    return _taeq(a, b, {}, {}, {}, {}, 0)


def _taeq(a, b, ta, tb, ya, yb, d) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        la, lb = ta.get(a.name), tb.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if isinstance(a, Lam):
        if (a.ann is None) != (b.ann is None):
            return False
        if a.ann is not None and not _aeq(a.ann, b.ann, ya, yb, d):
            return False
        return _taeq(a.body, b.body, {**ta, a.var: d}, {**tb, b.var: d}, ya, yb, d + 1)
    if isinstance(a, TyLam):
        if a.kind != b.kind:
            return False
        return _taeq(a.body, b.body, ta, tb, {**ya, a.var: d}, {**yb, b.var: d}, d + 1)
    if isinstance(a, TyApp):
        return _aeq(a.ty, b.ty, ya, yb, d) and _taeq(a.tm, b.tm, ta, tb, ya, yb, d)
    if isinstance(a, Ann):
        return _aeq(a.ty, b.ty, ya, yb, d) and _taeq(a.tm, b.tm, ta, tb, ya, yb, d)
    if isinstance(a, (Syn, Ana)):
        if (a.op is None) != (b.op is None):
            return False
        if a.op is not None and not _aeq(a.op, b.op, ya, yb, d):
            return False
        return _taeq(a.body, b.body, ta, tb, ya, yb, d)
    if isinstance(a, Lit):
        # True == 1 in Python, so compare the value's type as well
        return type(a.value) is type(b.value) and a.value == b.value
    if isinstance(a, (LabelVal, EmptyRec)):
        return a == b
    kids = _TERM_CHILDREN.get(type(a))
    if kids is None:
        raise TypeError(f"not a term: {a!r}")
    if isinstance(a, (Prj, Inj)) and a.dir != b.dir:
        return False
    if isinstance(a, BinOp) and a.op != b.op:
        return False
    return all(_taeq(getattr(a, k), getattr(b, k), ta, tb, ya, yb, d) for k in kids)
