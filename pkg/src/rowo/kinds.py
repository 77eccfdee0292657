"""Context formation, kinding and predicate formation.

``kind_of`` implements the ordinary kinding judgment including the two
lifting rules: a row of constructors applied to a type is a row, and a
constructor applied to a row is a row.  Row literals are delegated to the
active row theory.

``level_of`` is the stratified variant used as an optional lint: every
``Type`` carries a universe level (unannotated ``Type`` means level 0) and
quantifiers and qualifiers bump the level of what they bind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core_ast import (
    Assume, Env, KAny, KArrow, KLab, KRow, KType, Kind, PCombine, PContain,
    Pred, SourceSpan, TApp, TArrow, TCombine, TCon, TForall, TLabel, TLabeled,
    TLam, TMap, TPi, TQual, TRow, TSigma, TSing, TVar, TmVarEntry, TyVarEntry,
    Type, erase_levels, merge_kinds, resolve_any, same_kind, split_arrow,
)

PRIM_KINDS: dict[str, Kind] = {
    "Int": KType(),
    "Bool": KType(),
    "List": KArrow(KType(), KType()),
}


@dataclass
class KindError(Exception):
    reason: str  # UnboundVar, KindMismatch, RowTheoryRejected, NotARow, NotAConstructor, LevelViolation
    detail: str
    span: Optional[SourceSpan] = None
    expected: Optional[Kind] = field(default=None)
    got: Optional[Kind] = field(default=None)

    def __str__(self) -> str:
        return f"{self.reason}: {self.detail}"


def _show(x) -> str:
    from .surface import show_kind, show_pred, show_type
    if isinstance(x, (KType, KLab, KRow, KArrow, KAny)):
        return show_kind(x)
    if isinstance(x, (PContain, PCombine)):
        return show_pred(x)
    return show_type(x)


def _default_theory():
    from .rows import SIMPLE
    return SIMPLE


# ---------------------------------------------------------------- environments


def env_ok(env: Env, theory=None) -> None:
    theory = theory or _default_theory()
    ty_seen: set[str] = set()
    tm_seen: set[str] = set()
    prefix = Env()
    for e in env.entries:
        if isinstance(e, TyVarEntry):
            if e.name in ty_seen:
                raise KindError("UnboundVar", f"type variable {e.name} bound twice")
            ty_seen.add(e.name)
        elif isinstance(e, TmVarEntry):
            if e.name in tm_seen:
                raise KindError("UnboundVar", f"term variable {e.name} bound twice")
            tm_seen.add(e.name)
            k = kind_of(prefix, e.ty, theory)
            if not isinstance(k, KType):
                raise KindError("KindMismatch", f"type of {e.name} has kind {_show(k)}", expected=KType(), got=k)
        elif isinstance(e, Assume):
            pred_ok(prefix, e.pred, theory)
        prefix = prefix.extend(e)


# ---------------------------------------------------------------- kinding


def kind_of(env: Env, t: Type, theory=None) -> Kind:
    """The kind of ``t``; the empty row's unconstrained element kind
    defaults to Type."""
    return resolve_any(raw_kind(env, t, theory or _default_theory()))


def raw_kind(env: Env, t: Type, theory) -> Kind:
    """Like ``kind_of`` but may leave ``KAny`` for empty-row elements."""
    return _Kinder(theory).kind(env, t)


class _Kinder:
    def __init__(self, theory):
        self.theory = theory

    def kind(self, env: Env, t: Type) -> Kind:
        if isinstance(t, TVar):
            k = env.kind_of_var(t.name)
            if k is None:
                raise KindError("UnboundVar", f"unbound type variable {t.name}")
            return k
        if isinstance(t, TArrow):
            return KArrow(KType(), KArrow(KType(), KType()))
        if isinstance(t, TCon):
            if t.name not in PRIM_KINDS:
                raise KindError("UnboundVar", f"unknown type constant {t.name}")
            return PRIM_KINDS[t.name]
        if isinstance(t, TLabel):
            return KLab()
        if isinstance(t, TSing):
            self.expect(env, t.label, KLab())
            return KType()
        if isinstance(t, TLabeled):
            self.expect(env, t.label, KLab())
            return self.kind(env, t.body)
        if isinstance(t, TQual):
            self.pred(env, t.pred)
            self.expect(env, t.body, KType())
            return KType()
        if isinstance(t, TForall):
            self.expect(env.with_ty(t.var, t.kind), t.body, KType())
            return KType()
        if isinstance(t, TLam):
            return KArrow(t.kind, self.kind(env.with_ty(t.var, t.kind), t.body))
        if isinstance(t, (TPi, TSigma)):
            k = self.kind(env, t.row)
            if not isinstance(k, KRow):
                raise KindError("NotARow", f"{_show(t.row)} has kind {_show(k)}, expected a row")
            return k.elem
        if isinstance(t, TRow):
            return self.row_literal(env, t)
        if isinstance(t, TCombine):
            kl, kr = self.kind(env, t.left), self.kind(env, t.right)
            for side, k in ((t.left, kl), (t.right, kr)):
                if not isinstance(k, KRow):
                    raise KindError("NotARow", f"{_show(side)} has kind {_show(k)}, expected a row")
            if not same_kind(kl, kr):
                raise KindError("KindMismatch", f"cannot combine rows of kinds {_show(kl)} and {_show(kr)}", expected=kl, got=kr)
            return merge_kinds(kl, kr)
        if isinstance(t, TMap):
            kf, kr = self.kind(env, t.fn), self.kind(env, t.row)
            if isinstance(kf, KArrow) and isinstance(kr, KRow) and same_kind(kf.dom, kr.elem):
                return KRow(kf.cod)
            raise KindError("KindMismatch", f"cannot map {_show(t.fn)} over {_show(t.row)}")
        if isinstance(t, TApp):
            return self.app(env, t)
        raise KindError("KindMismatch", f"not a type: {t!r}")

    def app(self, env: Env, t: TApp) -> Kind:
        kf = self.kind(env, t.fun)
        kx = self.kind(env, t.arg)
        return apply_kind(kf, kx, t)

    def expect(self, env: Env, t: Type, k: Kind) -> None:
        got = self.kind(env, t)
        if not same_kind(got, k):
            raise KindError("KindMismatch", f"{_show(t)} has kind {_show(got)}, expected {_show(k)}", expected=k, got=got)

    def row_literal(self, env: Env, t: TRow) -> Kind:
        elem: Kind = KAny()
        for e in t.entries:
            self.expect(env, e.label, KLab())
            k = self.kind(env, e.body)
            if not same_kind(k, elem):
                raise KindError("KindMismatch", f"row entries have kinds {_show(elem)} and {_show(k)}", expected=elem, got=k)
            elem = merge_kinds(elem, k)
        from .equiv import normalize_label
        labels = [normalize_label(env, e.label) for e in t.entries]
        problem = self.theory.row_kind_problem(labels)
        if problem is not None:
            raise KindError("RowTheoryRejected", f"{_show(t)}: {problem}")
        return KRow(elem)

    def pred(self, env: Env, p: Pred) -> None:
        if isinstance(p, PContain):
            rows = (p.sub, p.sup)
        else:
            rows = (p.left, p.right, p.result)
        ks = []
        for r in rows:
            k = self.kind(env, r)
            if not isinstance(k, KRow):
                raise KindError("NotARow", f"{_show(r)} has kind {_show(k)}, expected a row")
            ks.append(k)
        for k in ks[1:]:
            if not same_kind(k, ks[0]):
                raise KindError("KindMismatch", f"predicate {_show(p)} relates rows of kinds {_show(ks[0])} and {_show(k)}", expected=ks[0], got=k)


def apply_kind(kf: Kind, kx: Kind, t: Optional[Type] = None) -> Kind:
    """Kind of an application, including the two lifting rules."""
    if isinstance(kf, KAny):
        return KAny()
    if isinstance(kf, KArrow):
        if same_kind(kf.dom, kx):
            return kf.cod
        if isinstance(kx, KRow) and same_kind(kf.dom, kx.elem):
            return KRow(kf.cod)
        where = f" in {_show(t)}" if t is not None else ""
        raise KindError("KindMismatch", f"argument has kind {_show(kx)}, expected {_show(kf.dom)}{where}", expected=kf.dom, got=kx)
    if isinstance(kf, KRow) and isinstance(kf.elem, KArrow):
        if same_kind(kf.elem.dom, kx):
            return KRow(kf.elem.cod)
        where = f" in {_show(t)}" if t is not None else ""
        raise KindError("KindMismatch", f"argument has kind {_show(kx)}, expected {_show(kf.elem.dom)}{where}", expected=kf.elem.dom, got=kx)
    if isinstance(kf, KRow) and isinstance(kf.elem, KAny):
        return KRow(KAny())
    where = f" {_show(t.fun)}" if t is not None else ""
    raise KindError("NotAConstructor", f"cannot apply{where} of kind {_show(kf)}")


def pred_ok(env: Env, p: Pred, theory=None) -> None:
    _Kinder(theory or _default_theory()).pred(env, p)


# ---------------------------------------------------------------- stratified levels


def kind_level(k: Kind) -> int:
    if isinstance(k, KType):
        return k.level or 0
    if isinstance(k, KRow):
        return kind_level(k.elem)
    if isinstance(k, KArrow):
        return max(kind_level(k.dom), kind_level(k.cod))
    return 0


def with_levels(k: Kind) -> Kind:
    """Fill in level 0 wherever a Type has none."""
    if isinstance(k, KType):
        return k if k.level is not None else KType(0)
    if isinstance(k, KRow):
        return KRow(with_levels(k.elem))
    if isinstance(k, KArrow):
        return KArrow(with_levels(k.dom), with_levels(k.cod))
    return k


def subkind(a: Kind, b: Kind) -> bool:
    """Cumulativity: a type at level i also lives at every j >= i."""
    if isinstance(a, KAny) or isinstance(b, KAny):
        return True
    if isinstance(a, KType) and isinstance(b, KType):
        return (a.level or 0) <= (b.level or 0)
    if isinstance(a, KRow) and isinstance(b, KRow):
        return subkind(a.elem, b.elem)
    if isinstance(a, KArrow) and isinstance(b, KArrow):
        return subkind(b.dom, a.dom) and subkind(a.cod, b.cod)
    return a == b


def _join(a: Kind, b: Kind) -> Kind:
    if isinstance(a, KAny):
        return b
    if isinstance(b, KAny):
        return a
    if isinstance(a, KType) and isinstance(b, KType):
        return KType(max(a.level or 0, b.level or 0))
    if isinstance(a, KRow) and isinstance(b, KRow):
        return KRow(_join(a.elem, b.elem))
    if isinstance(a, KArrow) and isinstance(b, KArrow):
        return KArrow(_join(a.dom, b.dom), _join(a.cod, b.cod))
    return a


def level_of(env: Env, t: Type, theory=None) -> tuple[Kind, int]:
    """Minimal leveled kind of ``t`` and its level."""
    k = _Leveler(theory or _default_theory()).kind(env, t)
    k = resolve_any(k, KType(0))
    return k, kind_level(k)


def pred_level(env: Env, p: Pred, theory=None) -> int:
    return _Leveler(theory or _default_theory()).pred(env, p)


class _Leveler:
    """Stratified kinding.  Plain kinding is run first so that level
    errors are only reported for otherwise well-kinded types."""

    def __init__(self, theory):
        self.theory = theory

    def kind(self, env: Env, t: Type) -> Kind:
        if isinstance(t, TVar):
            k = env.kind_of_var(t.name)
            if k is None:
                raise KindError("UnboundVar", f"unbound type variable {t.name}")
            return with_levels(k)
        if isinstance(t, TArrow):
            z = KType(0)
            return KArrow(z, KArrow(z, z))
        if isinstance(t, TCon):
            return with_levels(PRIM_KINDS[t.name])
        if isinstance(t, TLabel):
            return KLab()
        if isinstance(t, TSing):
            return KType(0)
        if isinstance(t, TLabeled):
            return self.kind(env, t.body)
        if isinstance(t, TQual):
            i = self.pred(env, t.pred)
            j = self.type_level(env, t.body)
            return KType(max(i + 1, j))
        if isinstance(t, TForall):
            i = kind_level(with_levels(t.kind))
            j = self.type_level(env.with_ty(t.var, with_levels(t.kind)), t.body)
            return KType(max(i + 1, j))
        if isinstance(t, TLam):
            dom = with_levels(t.kind)
            return KArrow(dom, self.kind(env.with_ty(t.var, dom), t.body))
        if isinstance(t, (TPi, TSigma)):
            k = self.kind(env, t.row)
            if not isinstance(k, KRow):
                raise KindError("NotARow", f"{_show(t.row)} is not a row")
            return k.elem
        if isinstance(t, TRow):
            elem: Kind = KAny()
            for e in t.entries:
                elem = _join(elem, self.kind(env, e.body))
            return KRow(elem)
        if isinstance(t, TCombine):
            return _join(self.kind(env, t.left), self.kind(env, t.right))
        if isinstance(t, TMap):
            return self.apply(self.kind(env, t.fn), self.kind(env, t.row), t)
        if isinstance(t, TApp):
            sp = split_arrow(t)
            if sp is not None:
                return KType(max(self.type_level(env, sp[0]), self.type_level(env, sp[1])))
            if isinstance(t.fun, TArrow):
                # a partially applied arrow: level follows the argument
                kx = self.kind(env, t.arg)
                lv = KType(kind_level(kx))
                if isinstance(kx, KRow):
                    return KRow(KArrow(lv, lv))
                return KArrow(lv, lv)
            return self.apply(self.kind(env, t.fun), self.kind(env, t.arg), t)
        raise KindError("KindMismatch", f"not a type: {t!r}")

    def type_level(self, env: Env, t: Type) -> int:
        k = self.kind(env, t)
        if not isinstance(k, (KType, KAny)):
            raise KindError("KindMismatch", f"{_show(t)} is not a type")
        return kind_level(k)

    def apply(self, kf: Kind, kx: Kind, t: Type) -> Kind:
        def check(dom: Kind) -> None:
            if not subkind(kx, dom):
                raise KindError(
                    "LevelViolation",
                    f"{_show(t)}: argument at kind {_show(kx)} exceeds {_show(dom)}",
                    expected=dom, got=kx,
                )

        if isinstance(kf, KArrow):
            if same_kind(kf.dom, kx):
                check(kf.dom)
                return kf.cod
            if isinstance(kx, KRow) and same_kind(kf.dom, kx.elem):
                kx = kx.elem
                check(kf.dom)
                return KRow(kf.cod)
        if isinstance(kf, KRow) and isinstance(kf.elem, KArrow):
            check(kf.elem.dom)
            return KRow(kf.elem.cod)
        return apply_kind(kf, kx, t)

    def pred(self, env: Env, p: Pred) -> int:
        rows = (p.sub, p.sup) if isinstance(p, PContain) else (p.left, p.right, p.result)
        return max(kind_level(self.kind(env, r)) for r in rows)


def check_levels(env: Env, t: Type, theory=None) -> tuple[Kind, int]:
    """Plain kinding followed by the level lint."""
    kind_of(env, t, theory)
    return level_of(env, t, theory)


def erase(k: Kind) -> Kind:
    return erase_levels(k)
