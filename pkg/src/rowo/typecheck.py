"""Bidirectional typing that elaborates surface terms into a core language
with explicit evidence.

``infer`` synthesizes a type, ``check`` pushes an expected type inward.
Qualified types are eliminated as soon as they appear at the head of an
inferred type: the solver is asked for evidence and an ``CEvApp`` node is
inserted.  Qualified types are introduced only while checking against a
known type (a signature, or the body type of ``syn``/``ana``/``foldPi``),
producing ``CEvAbs`` nodes.

The bodies of ``syn``, ``ana`` and ``foldPi`` are checked against one of
three quantified shapes.  ``nc`` decomposes the row as
``(y1 o+ <l |> u> ~ z, z o+ y2 ~ rho)`` and is valid in every theory;
``comm`` uses ``<l |> u> o+ y ~ rho`` and ``contain`` uses
``<l |> u> <: rho``.  The latter two are accepted for the minimal and
simple theories only.  In ``auto`` mode the shape is picked by the number
of type abstractions that open the body (5, 3 or 2).
"""

from __future__ import annotations

import dataclasses
import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Optional, Union, get_args

from .core_ast import (
    Ana, Ann, App, BinOp, Branch, Concat, EmptyRec, Env, FoldPi, Inj,
    KArrow, KRow, KType, Kind, LAB, Lam, LabelIntro, LabelVal, Lit,
    PCombine, PContain, Pred, Prj, SingElimPi, SingElimSig, SingIntroPi,
    SingIntroSig, SourceSpan, Syn, TApp, TArrow, TCombine, TCon, TForall,
    TLabel, TLabeled, TLam, TMap, TPi, TQual, TRow, TSigma, TSing, TVar,
    TYPE, Term, TyApp, TyLam, Type, Unlabel, Var, alpha_eq, arrow,
    free_vars, fresh_name, same_kind, split_arrow, subst_ty,
)
from .equiv import Normalizer
from .kinds import KindError, kind_of, level_of, subkind, with_levels
from .prims import BINOPS, BOOL, INT, PRIMS
from .rows import (
    AConst, Arity, ContainEv, ELit, ERefl, EVar, EvExpr, Solver,
    TheoryError, UnsolvedError, arity_of, get_theory, show_ev,
    validate_combine, validate_contain,
)
from .surface import Decl, Program, show_kind, show_pred, show_term, show_type

FORMS = ("nc", "comm", "contain")


class TypingError(Exception):
    """A typing failure.  ``reason`` is one of Mismatch, UnboundTermVar,
    PredicateUnsolved, NotAFunction, NotARecord, NotAVariant,
    AnnotationRequired."""

    def __init__(self, reason: str, detail: str = "", span: Optional[SourceSpan] = None,
                 expected: Optional[Type] = None, got: Optional[Type] = None,
                 pred: Optional[Pred] = None, decl: Optional[str] = None):
        self.reason = reason
        self.detail = detail
        self.span = span
        self.expected = expected
        self.got = got
        self.pred = pred
        self.decl = decl
        super().__init__(str(self))

    def __str__(self) -> str:
        msg = f"{self.reason}: {self.detail}" if self.detail else self.reason
        if self.expected is not None and self.got is not None:
            msg += f"\n  expected: {show_type(self.expected)}\n  got:      {show_type(self.got)}"
        if self.decl:
            msg = f"in {self.decl}: {msg}"
        return msg


# ---------------------------------------------------------------- core terms


@dataclass(frozen=True)
class CVar:
    name: str


@dataclass(frozen=True)
class CLam:
    var: str
    ty: Type
    body: "Core"
    annotated: bool = True
    written: Optional[Type] = field(default=None, compare=False)  # annotation as in the source


@dataclass(frozen=True)
class CApp:
    f: "Core"
    a: "Core"


@dataclass(frozen=True)
class CTyLam:
    var: str
    kind: Kind
    body: "Core"
    implicit: bool = False
    annotated: bool = True


@dataclass(frozen=True)
class CTyApp:
    tm: "Core"
    ty: Type
    arity: Optional[Arity]  # present when the argument is a row
    implicit: bool = False
    written: Optional[Type] = field(default=None, compare=False)


@dataclass(frozen=True)
class CEvAbs:
    var: str
    pred: Pred
    body: "Core"


@dataclass(frozen=True)
class CEvApp:
    tm: "Core"
    ev: EvExpr
    pred: Pred


@dataclass(frozen=True)
class CLabel:
    name: str


@dataclass(frozen=True)
class CLabelIntro:
    label: "Core"
    payload: "Core"


@dataclass(frozen=True)
class CUnlabel:
    tm: "Core"
    label: "Core"


@dataclass(frozen=True)
class CPrj:
    dir: str
    tm: "Core"
    ev: EvExpr
    row: Type  # the projected row


@dataclass(frozen=True)
class CConcat:
    l: "Core"
    r: "Core"
    ev: EvExpr
    row: Type  # the combined row


@dataclass(frozen=True)
class CInj:
    dir: str
    tm: "Core"
    ev: EvExpr
    row: Type  # the target row


@dataclass(frozen=True)
class CBranch:
    l: "Core"
    r: "Core"
    ev: EvExpr
    row: Type
    result: Type


@dataclass(frozen=True)
class CSyn:
    op: Optional[Type]  # as written
    phi: Optional[Type]  # normal form; None is the identity
    kind: Kind  # element kind of ``row``
    row: Type
    arity: Arity
    form: str
    body: "Core"


@dataclass(frozen=True)
class CAna:
    op: Optional[Type]
    phi: Optional[Type]
    kind: Kind
    row: Type
    arity: Arity
    form: str
    result: Type
    body: "Core"


@dataclass(frozen=True)
class CFold:
    step: "Core"
    combine: "Core"
    unit: "Core"
    record: "Core"
    row: Type
    arity: Arity
    form: str
    result: Type


@dataclass(frozen=True)
class CSing:
    which: str  # introPi, elimPi, introSig, elimSig
    tm: "Core"
    inserted: bool = False


@dataclass(frozen=True)
class CLit:
    value: Union[int, bool]


@dataclass(frozen=True)
class CBinOp:
    op: str
    l: "Core"
    r: "Core"


@dataclass(frozen=True)
class CEmpty:
    pass


@dataclass(frozen=True)
class CAnn:
    tm: "Core"
    ty: Type


Core = Union[
    CVar, CLam, CApp, CTyLam, CTyApp, CEvAbs, CEvApp, CLabel, CLabelIntro,
    CUnlabel, CPrj, CConcat, CInj, CBranch, CSyn, CAna, CFold, CSing, CLit,
    CBinOp, CEmpty, CAnn,
]

_SING_TERMS = {"introPi": SingIntroPi, "elimPi": SingElimPi,
               "introSig": SingIntroSig, "elimSig": SingElimSig}


def erase(c: Core) -> Term:
    """Drop evidence, inserted coercions and implicit type abstraction and
    application, giving back a surface term."""
    if isinstance(c, CVar):
        return Var(c.name)
    if isinstance(c, CLam):
        ann = (c.written or c.ty) if c.annotated else None
        return Lam(c.var, ann, erase(c.body))
    if isinstance(c, CApp):
        return App(erase(c.f), erase(c.a))
    if isinstance(c, CTyLam):
        if c.implicit:
            return erase(c.body)
        return TyLam(c.var, c.kind if c.annotated else None, erase(c.body))
    if isinstance(c, CTyApp):
        return erase(c.tm) if c.implicit else TyApp(erase(c.tm), c.written or c.ty)
    if isinstance(c, (CEvAbs,)):
        return erase(c.body)
    if isinstance(c, CEvApp):
        return erase(c.tm)
    if isinstance(c, CLabel):
        return LabelVal(c.name)
    if isinstance(c, CLabelIntro):
        return LabelIntro(erase(c.label), erase(c.payload))
    if isinstance(c, CUnlabel):
        return Unlabel(erase(c.tm), erase(c.label))
    if isinstance(c, CPrj):
        return Prj(c.dir, erase(c.tm))
    if isinstance(c, CConcat):
        return Concat(erase(c.l), erase(c.r))
    if isinstance(c, CInj):
        return Inj(c.dir, erase(c.tm))
    if isinstance(c, CBranch):
        return Branch(erase(c.l), erase(c.r))
    if isinstance(c, CSyn):
        return Syn(c.op, erase(c.body))
    if isinstance(c, CAna):
        return Ana(c.op, erase(c.body))
    if isinstance(c, CFold):
        return FoldPi(erase(c.step), erase(c.combine), erase(c.unit), erase(c.record))
    if isinstance(c, CSing):
        inner = erase(c.tm)
        return inner if c.inserted else _SING_TERMS[c.which](inner)
    if isinstance(c, CLit):
        return Lit(c.value)
    if isinstance(c, CBinOp):
        return BinOp(c.op, erase(c.l), erase(c.r))
    if isinstance(c, CEmpty):
        return EmptyRec()
    if isinstance(c, CAnn):
        return Ann(erase(c.tm), c.ty)
    raise TypeError(f"not a core term: {c!r}")


def _show_arity(a: Arity) -> str:
    from .rows import AAdd, AVar
    if isinstance(a, AConst):
        return str(a.n)
    if isinstance(a, AVar):
        return f"#{a.name}"
    if isinstance(a, AAdd):
        return f"{_show_arity(a.left)}+{_show_arity(a.right)}"
    return "?"


def show_core(c: Core, prec: int = 0) -> str:
    """A readable rendering of elaborated terms (not meant to be parsed)."""
    def par(s: str, cond: bool) -> str:
        return f"({s})" if cond else s

    if isinstance(c, CVar):
        return c.name
    if isinstance(c, CLam):
        return par(f"\\({c.var} : {show_type(c.ty)}). {show_core(c.body)}", prec > 0)
    if isinstance(c, CApp):
        return par(f"{show_core(c.f, 1)} {show_core(c.a, 2)}", prec > 1)
    if isinstance(c, CTyLam):
        mark = "?" if c.implicit else ""
        return par(f"/\\{mark}({c.var} : {show_kind(c.kind)}). {show_core(c.body)}", prec > 0)
    if isinstance(c, CTyApp):
        mark = "?" if c.implicit else ""
        ar = f" #{_show_arity(c.arity)}" if c.arity is not None else ""
        return par(f"{show_core(c.tm, 1)} [{mark}{show_type(c.ty)}{ar}]", prec > 1)
    if isinstance(c, CEvAbs):
        return par(f"\\{{{c.var} : {show_pred(c.pred)}}}. {show_core(c.body)}", prec > 0)
    if isinstance(c, CEvApp):
        return par(f"{show_core(c.tm, 1)} {{{show_ev(c.ev)}}}", prec > 1)
    if isinstance(c, CLabel):
        return f"'{c.name}"
    if isinstance(c, CLabelIntro):
        return par(f"{show_core(c.label, 2)} |> {show_core(c.payload, 1)}", prec > 0)
    if isinstance(c, CUnlabel):
        return par(f"{show_core(c.tm, 2)} / {show_core(c.label, 2)}", prec > 1)
    if isinstance(c, CPrj):
        return par(f"prj_{c.dir}{{{show_ev(c.ev)}}} {show_core(c.tm, 2)}", prec > 1)
    if isinstance(c, CInj):
        return par(f"inj_{c.dir}{{{show_ev(c.ev)}}} {show_core(c.tm, 2)}", prec > 1)
    if isinstance(c, CConcat):
        return par(f"{show_core(c.l, 1)} ++{{{show_ev(c.ev)}}} {show_core(c.r, 1)}", prec > 0)
    if isinstance(c, CBranch):
        return par(f"{show_core(c.l, 1)} |||{{{show_ev(c.ev)}}} {show_core(c.r, 1)}", prec > 0)
    if isinstance(c, CSyn):
        phi = show_type(c.phi) if c.phi is not None else "id"
        return par(f"syn[{phi}; {c.form}; {show_type(c.row)}] {show_core(c.body, 2)}", prec > 1)
    if isinstance(c, CAna):
        phi = show_type(c.phi) if c.phi is not None else "id"
        return par(f"ana[{phi}; {c.form}; {show_type(c.row)}] {show_core(c.body, 2)}", prec > 1)
    if isinstance(c, CFold):
        args = " ".join(show_core(x, 2) for x in (c.step, c.combine, c.unit, c.record))
        return par(f"foldPi[{c.form}; {show_type(c.row)}] {args}", prec > 1)
    if isinstance(c, CSing):
        return par(f"{c.which} {show_core(c.tm, 2)}", prec > 1)
    if isinstance(c, CLit):
        return ("true" if c.value else "false") if isinstance(c.value, bool) else str(c.value)
    if isinstance(c, CBinOp):
        return par(f"{show_core(c.l, 2)} {c.op} {show_core(c.r, 2)}", prec > 0)
    if isinstance(c, CEmpty):
        return "()"
    if isinstance(c, CAnn):
        return f"({show_core(c.tm)} : {show_type(c.ty)})"
    raise TypeError(f"not a core term: {c!r}")


# ---------------------------------------------------------------- helpers on terms

_TYPE_CLASSES = (TVar, TArrow, TCon, TQual, TForall, TLam, TApp, TLabel, TSing,
                 TLabeled, TRow, TPi, TSigma, TCombine, TMap)


def rename_term_tyvar(t: Term, old: str, new: str) -> Term:
    """Rename free occurrences of type variable ``old`` inside the types
    annotating a term."""
    if isinstance(t, TyLam) and t.var == old:
        return t
    changes = {}
    for f in dataclasses.fields(t):
        if f.name == "span":
            continue
        v = getattr(t, f.name)
        if isinstance(v, _TYPE_CLASSES):
            changes[f.name] = subst_ty(v, old, TVar(new))
        elif hasattr(v, "span") and not isinstance(v, str):
            changes[f.name] = rename_term_tyvar(v, old, new)
    return dataclasses.replace(t, **changes) if changes else t


def leading_tylams(t: Term) -> int:
    n = 0
    while isinstance(t, TyLam):
        n += 1
        t = t.body
    return n


def synthesizes(t: Term) -> bool:
    """Whether ``infer`` can find a type for ``t`` without help."""
    if isinstance(t, Lam):
        return t.ann is not None and synthesizes(t.body)
    if isinstance(t, TyLam):
        return t.kind is not None and synthesizes(t.body)
    if isinstance(t, (Syn, Ana, Prj, Inj)):
        return False
    if isinstance(t, Branch):
        return synthesizes(t.l) and synthesizes(t.r)
    if isinstance(t, Concat):
        return synthesizes(t.l) and synthesizes(t.r)
    if isinstance(t, LabelIntro):
        return synthesizes(t.payload)
    return True


def _match(pat: Type, var: str, target: Type, binding: dict) -> bool:
    """First-order matching of ``pat`` (with hole ``var``) against ``target``."""
    if isinstance(pat, TVar) and pat.name == var:
        if var in binding:
            return alpha_eq(binding[var], target)
        binding[var] = target
        return True
    if type(pat) is not type(target):
        return False
    if isinstance(pat, (TForall, TLam)):
        if not same_kind(pat.kind, target.kind):
            return False
        if pat.var == var:
            return alpha_eq(pat, target)
        body = target.body
        if target.var != pat.var:
            if pat.var in free_vars(target.body):
                return False
            body = subst_ty(target.body, target.var, TVar(pat.var))
        return _match(pat.body, var, body, binding)
    if isinstance(pat, TRow):
        if len(pat.entries) != len(target.entries):
            return False
        return all(_match(a, var, b, binding) for a, b in zip(pat.entries, target.entries))
    for f in dataclasses.fields(pat):
        if f.name == "implicit":
            continue
        a, b = getattr(pat, f.name), getattr(target, f.name)
        if isinstance(a, _TYPE_CLASSES) or isinstance(a, (PContain, PCombine)):
            if not _match(a, var, b, binding):
                return False
        elif a != b:
            return False
    return True


# ---------------------------------------------------------------- the checker


@dataclass
class ElabDecl:
    name: str
    ty: Type
    core: Core
    span: Optional[SourceSpan] = None


def prelude_env() -> Env:
    env = Env()
    for p in PRIMS.values():
        env = env.with_tm(p.name, p.ty)
    return env


class Checker:
    def __init__(self, theory="simple", stratified: bool = False, generic_form: str = "auto",
                 trace: bool = False):
        self.theory = get_theory(theory)
        self.normalizer = Normalizer(self.theory)
        self.stratified = stratified
        if generic_form not in ("auto",) + FORMS:
            raise ValueError(f"unknown generic form {generic_form!r}")
        self.generic_form = generic_form
        self.tracing = trace
        self.trace_lines: list[str] = []
        self._depth = 0
        self._mute = 0
        self._ev = itertools.count()

    # -- small utilities

    def nf(self, env: Env, t: Type) -> Type:
        return self.normalizer.nf(env.ty_kinds(), t)[0]

    def kind(self, env: Env, t: Type, span=None) -> Kind:
        try:
            k = kind_of(env, t, self.theory)
            if self.stratified:
                level_of(env, t, self.theory)
        except KindError as exc:
            if exc.span is None:
                exc.span = span
            raise
        return k

    def expect_type_kind(self, env: Env, t: Type, span=None) -> None:
        k = self.kind(env, t, span)
        if not isinstance(k, KType):
            raise KindError("KindMismatch", f"{show_type(t)} has kind {show_kind(k)}, not Type",
                            span, expected=TYPE, got=k)

    def fresh_ev(self) -> str:
        return f"ev{next(self._ev)}"

    def solver(self, env: Env) -> Solver:
        return Solver(self.theory, env, [(p, EVar(e)) for p, e in env.hyps()])

    def solve(self, env: Env, pred: Pred, span=None) -> EvExpr:
        s = self.solver(env)
        try:
            if isinstance(pred, PContain):
                return s.contain(pred.dir, pred.sub, pred.sup)
            return s.combine(pred.left, pred.right, pred.result)
        except UnsolvedError:
            raise TypingError("PredicateUnsolved", f"cannot derive {show_pred(pred)}", span, pred=pred) from None
        except TheoryError as exc:
            raise TypingError("PredicateUnsolved", f"{show_pred(pred)}: {exc.detail}", span, pred=pred) from None

    def row_arity(self, row: Type, span=None) -> Arity:
        try:
            return arity_of(row)
        except ValueError:
            raise TypingError("AnnotationRequired", f"cannot determine the size of row {show_type(row)}", span) from None

    @contextmanager
    def rule(self, name: str, text: str = ""):
        if self.tracing and not self._mute:
            self.trace_lines.append("  " * self._depth + name + (f"  {text}" if text else ""))
        self._depth += 1
        try:
            yield
        finally:
            self._depth -= 1

    @contextmanager
    def muted(self):
        self._mute += 1
        try:
            yield
        finally:
            self._mute -= 1

    @staticmethod
    def as_row(ty: Type, which: str) -> Optional[Type]:
        if isinstance(ty, TLabeled):
            return TRow((ty,))
        if which == "Pi" and isinstance(ty, TPi):
            return ty.row
        if which == "Sigma" and isinstance(ty, TSigma):
            return ty.row
        return None

    def record_row(self, ty: Type, span) -> Type:
        r = self.as_row(ty, "Pi")
        if r is None:
            raise TypingError("NotARecord", f"expected a record, got {show_type(ty)}", span, got=ty)
        return r

    def variant_row(self, ty: Type, span) -> Type:
        r = self.as_row(ty, "Sigma")
        if r is None:
            raise TypingError("NotAVariant", f"expected a variant, got {show_type(ty)}", span, got=ty)
        return r

    def variant_fn(self, ty: Type, span) -> tuple[Type, Type]:
        sp = split_arrow(ty)
        if sp is None:
            raise TypingError("NotAFunction", f"expected a function on variants, got {show_type(ty)}", span, got=ty)
        return self.variant_row(sp[0], span), sp[1]

    def mismatch(self, expected: Type, got: Type, span, detail: str = "types differ") -> TypingError:
        return TypingError("Mismatch", detail, span, expected=expected, got=got)

    # -- signatures

    def prepare_signature(self, env: Env, sig: Type, span=None) -> Type:
        self.expect_type_kind(env, sig, span)
        t = self.desugar(env, self.nf(env, sig))
        t = self.nf(env, t)
        self.expect_type_kind(env, t, span)
        return t

    def desugar(self, env: Env, t: Type) -> Type:
        """Replace each ``a o+ b`` used as a type by a fresh variable ``z``
        bound by an implicit quantifier with the constraint
        ``a o+ b ~ z``, placed after the quantifier prefix it occurs under."""
        spine: list = []
        inner = env
        while isinstance(t, (TForall, TQual)):
            if isinstance(t, TForall):
                spine.append(t)
                inner = inner.with_ty(t.var, t.kind)
            else:
                spine.append(t)
            t = t.body
        sugars: list[tuple[str, Kind, Type, Type]] = []
        taken = set(inner.ty_names()) | free_vars(t)

        def repl(x, scope: Env):
            if isinstance(x, TCombine):
                left = repl(x.left, scope)
                right = repl(x.right, scope)
                nl, nr = self.nf(scope, left), self.nf(scope, right)
                if isinstance(nl, TRow) and isinstance(nr, TRow):
                    merged = self.theory.combine_literals(nl.entries, nr.entries)
                    if merged is not None:
                        return TRow(tuple(merged))
                bound = set(scope.ty_names()) - set(inner.ty_names())
                if (free_vars(nl) | free_vars(nr)) & bound:
                    raise TypingError("AnnotationRequired", "combination sugar under a local binder is not supported")
                name = fresh_name("z", taken)
                taken.add(name)
                k = kind_of(inner.extend(*[_ty_entry(s[0], s[1]) for s in sugars]), nl, self.theory)
                sugars.append((name, k, nl, nr))
                return TVar(name)
            if isinstance(x, TForall):
                return self.desugar(scope, x)
            if isinstance(x, TLam):
                return TLam(x.var, x.kind, repl(x.body, scope.with_ty(x.var, x.kind)))
            if isinstance(x, TQual):
                return TQual(repl_pred(x.pred, scope), repl(x.body, scope))
            if isinstance(x, (TVar, TArrow, TCon, TLabel)):
                return x
            if isinstance(x, TRow):
                return TRow(tuple(repl(e, scope) for e in x.entries))
            changes = {f.name: repl(getattr(x, f.name), scope) for f in dataclasses.fields(x)
                       if isinstance(getattr(x, f.name), _TYPE_CLASSES)}
            return dataclasses.replace(x, **changes)

        def repl_pred(p: Pred, scope: Env) -> Pred:
            if isinstance(p, PContain):
                return PContain(p.dir, repl(p.sub, scope), repl(p.sup, scope))
            return PCombine(repl(p.left, scope), repl(p.right, scope), repl(p.result, scope))

        # the prefix is rebuilt with desugared predicates, sugar from
        # predicates included
        scope = env
        new_spine = []
        for s in spine:
            if isinstance(s, TForall):
                scope = scope.with_ty(s.var, s.kind)
                new_spine.append(("all", s))
            else:
                new_spine.append(("qual", repl_pred(s.pred, scope)))
        body = repl(t, inner)
        for name, k, l, r in reversed(sugars):
            body = TForall(name, k, TQual(PCombine(l, r, TVar(name)), body), implicit=True)
        for tag, s in reversed(new_spine):
            if tag == "all":
                body = TForall(s.var, s.kind, body, s.implicit)
            else:
                body = TQual(s, body)
        return body

    # -- instantiation

    def inst(self, env: Env, ty: Type, core: Core, span) -> tuple[Type, Core]:
        while True:
            if isinstance(ty, TQual):
                with self.rule("⇒E", show_pred(ty.pred)):
                    ev = self.solve(env, ty.pred, span)
                core = CEvApp(core, ev, ty.pred)
                ty = ty.body
                continue
            if isinstance(ty, TForall) and ty.implicit:
                body = ty.body
                if not (isinstance(body, TQual) and isinstance(body.pred, PCombine)
                        and body.pred.result == TVar(ty.var)):
                    raise TypingError("AnnotationRequired", "cannot instantiate an implicit quantifier", span)
                p = body.pred
                try:
                    res = self.solver(env).find_combine_result(p.left, p.right)
                except TheoryError as exc:
                    raise TypingError("PredicateUnsolved", f"{show_pred(p)}: {exc.detail}", span, pred=p) from None
                if res is None:
                    raise TypingError("PredicateUnsolved", f"cannot derive {show_pred(p)}", span, pred=p)
                core = CTyApp(core, res, self.row_arity(res, span), implicit=True)
                ty = self.nf(env, subst_ty(body, ty.var, res))
                continue
            return ty, core

    # -- inference

    def infer(self, env: Env, t: Term) -> tuple[Type, Core]:
        ty, core = self._infer(env, t)
        return self.inst(env, ty, core, t.span)

    def _infer(self, env: Env, t: Term) -> tuple[Type, Core]:
        sp = t.span
        if isinstance(t, Var):
            ty = env.type_of_var(t.name)
            if ty is None:
                raise TypingError("UnboundTermVar", f"unbound variable {t.name}", sp)
            with self.rule("var", t.name):
                pass
            return ty, CVar(t.name)
        if isinstance(t, Lam):
            if t.ann is None:
                raise TypingError("AnnotationRequired", f"the parameter {t.var} needs a type annotation", sp)
            with self.rule("→I", f"\\{t.var}"):
                self.expect_type_kind(env, t.ann, sp)
                dom = self.nf(env, t.ann)
                bty, bcore = self.infer(env.with_tm(t.var, dom), t.body)
            return self.nf(env, arrow(dom, bty)), CLam(t.var, dom, bcore, written=t.ann)
        if isinstance(t, App):
            return self._app(env, t, None)
        if isinstance(t, TyLam):
            if t.kind is None:
                raise TypingError("AnnotationRequired", f"the type parameter {t.var} needs a kind", sp)
            name, body = self._bind_tylam(env, t)
            with self.rule("∀I", f"/\\{name}"):
                bty, bcore = self.infer(env.with_ty(name, t.kind), body)
            return TForall(name, t.kind, bty), CTyLam(name, t.kind, bcore)
        if isinstance(t, TyApp):
            return self._tyapp(env, t)
        if isinstance(t, LabelVal):
            with self.rule("sing", f"'{t.name}"):
                pass
            return TSing(TLabel(t.name)), CLabel(t.name)
        if isinstance(t, LabelIntro):
            with self.rule("▹I"):
                lab = self._label_of(env, t.label)
                pty, pcore = self.infer(env, t.payload)
            return self.nf(env, TLabeled(lab[0], pty)), CLabelIntro(lab[1], pcore)
        if isinstance(t, Unlabel):
            return self._unlabel(env, t)
        if isinstance(t, Prj):
            with self.rule("ΠE", "refl"):
                ty, core = self.infer(env, t.tm)
                row = self.record_row(ty, sp)
            return ty, CPrj(t.dir, self._sing_in(core, t.tm, "Pi"), ERefl(self.row_arity(row, sp)), row)
        if isinstance(t, Inj):
            with self.rule("ΣI", "refl"):
                ty, core = self.infer(env, t.tm)
                row = self.variant_row(ty, sp)
            return ty, CInj(t.dir, self._sing_in(core, t.tm, "Sig"), ERefl(self.row_arity(row, sp)), row)
        if isinstance(t, Concat):
            with self.rule("ΠI"):
                lty, lcore = self.infer(env, t.l)
                rty, rcore = self.infer(env, t.r)
                l, r = self.record_row(lty, t.l.span), self.record_row(rty, t.r.span)
                res = self._combine_result(env, l, r, sp)
                ev = self.solve(env, PCombine(l, r, res), sp)
            return self.nf(env, TPi(res)), CConcat(self._sing_in(lcore, t.l, "Pi"),
                                                   self._sing_in(rcore, t.r, "Pi"), ev, res)
        if isinstance(t, Branch):
            with self.rule("ΣE"):
                lty, lcore = self.infer(env, t.l)
                rty, rcore = self.infer(env, t.r)
                (l, tl), (r, tr) = self.variant_fn(lty, t.l.span), self.variant_fn(rty, t.r.span)
                if not alpha_eq(tl, tr):
                    raise self.mismatch(tl, tr, sp, "branches return different types")
                res = self._combine_result(env, l, r, sp)
                ev = self.solve(env, PCombine(l, r, res), sp)
            return self.nf(env, arrow(TSigma(res), tl)), CBranch(lcore, rcore, ev, res, tl)
        if isinstance(t, (Syn, Ana)):
            raise TypingError("AnnotationRequired", f"{'syn' if isinstance(t, Syn) else 'ana'} needs a known result type", sp)
        if isinstance(t, FoldPi):
            return self._fold(env, t, None)
        if isinstance(t, (SingIntroPi, SingElimPi, SingIntroSig, SingElimSig)):
            ty, core = self.infer(env, t.tm)
            if not isinstance(ty, TLabeled):
                raise TypingError("Mismatch", f"expected a singleton, got {show_type(ty)}", sp, got=ty)
            which = {SingIntroPi: "introPi", SingElimPi: "elimPi",
                     SingIntroSig: "introSig", SingElimSig: "elimSig"}[type(t)]
            with self.rule("≡", which):
                pass
            return ty, CSing(which, core)
        if isinstance(t, Lit):
            with self.rule("prim", show_term(t)):
                pass
            return (BOOL if isinstance(t.value, bool) else INT), CLit(t.value)
        if isinstance(t, BinOp):
            arg, res, _ = BINOPS[t.op]
            with self.rule("prim", t.op):
                lc = self.check(env, t.l, arg)
                rc = self.check(env, t.r, arg)
            return res, CBinOp(t.op, lc, rc)
        if isinstance(t, EmptyRec):
            with self.rule("ΠI", "()"):
                pass
            return TPi(TRow(())), CEmpty()
        if isinstance(t, Ann):
            self.expect_type_kind(env, t.ty, sp)
            ty = self.prepare_signature(env, t.ty, sp)
            core = self.check(env, t.tm, ty)
            return ty, CAnn(core, ty)
        raise TypingError("Mismatch", f"cannot type {t!r}", sp)

    def _label_of(self, env: Env, lt: Term) -> tuple[Type, Core]:
        ty, core = self.infer(env, lt)
        if not isinstance(ty, TSing):
            raise TypingError("Mismatch", f"expected a label, got {show_type(ty)}", lt.span, got=ty)
        return ty.label, core

    @staticmethod
    def _sing_in(core: Core, src: Term, which: str) -> Core:
        # a labeled term used where a singleton record or variant is
        # expected gets an explicit coercion
        if isinstance(src, LabelIntro):
            return CSing("intro" + which, core, inserted=True)
        return core

    def _combine_result(self, env: Env, l: Type, r: Type, span) -> Type:
        try:
            res = self.solver(env).find_combine_result(l, r)
        except TheoryError as exc:
            p = PCombine(l, r, TVar("?"))
            raise TypingError("PredicateUnsolved", f"{show_pred(p)}: {exc.detail}", span, pred=p) from None
        if res is None:
            p = PCombine(l, r, TVar("?"))
            raise TypingError("PredicateUnsolved", f"cannot derive {show_pred(p)}", span, pred=p)
        return res

    def _bind_tylam(self, env: Env, t: TyLam) -> tuple[str, Term]:
        if t.var in env.ty_names():
            new = fresh_name(t.var, env.ty_names())
            return new, rename_term_tyvar(t.body, t.var, new)
        return t.var, t.body

    def _app(self, env: Env, t: App, expected: Optional[Type]) -> tuple[Type, Core]:
        sp = t.span
        with self.rule("→E"):
            if not synthesizes(t.f) and isinstance(t.f, (Ana, Branch, Lam, Syn)):
                aty, acore = self.infer(env, t.a)
                if expected is None:
                    raise TypingError("AnnotationRequired", "the result type of this application is unknown", sp)
                fcore = self.check(env, t.f, self.nf(env, arrow(aty, expected)))
                return expected, CApp(fcore, acore)
            fty, fcore = self.infer(env, t.f)
            parts = split_arrow(fty)
            if parts is None:
                raise TypingError("NotAFunction", f"{show_term(t.f)} has type {show_type(fty)}", sp, got=fty)
            acore = self.check(env, t.a, parts[0])
        return parts[1], CApp(fcore, acore)

    def _tyapp(self, env: Env, t: TyApp) -> tuple[Type, Core]:
        sp = t.span
        with self.rule("∀E", f"[{show_type(t.ty)}]"):
            fty, fcore = self.infer(env, t.tm)
            if not isinstance(fty, TForall):
                raise TypingError("Mismatch", f"{show_term(t.tm)} is not polymorphic; it has type {show_type(fty)}",
                                  sp, got=fty)
            k = self.kind(env, t.ty, sp)
            if not same_kind(k, fty.kind):
                raise KindError("KindMismatch", f"type argument {show_type(t.ty)} has kind {show_kind(k)}, "
                                f"expected {show_kind(fty.kind)}", sp, expected=fty.kind, got=k)
            if self.stratified:
                lk, _ = level_of(env, t.ty, self.theory)
                if not subkind(lk, with_levels(fty.kind)):
                    raise KindError("LevelViolation", f"type argument {show_type(t.ty)} lives at kind "
                                    f"{show_kind(lk)}, above {show_kind(with_levels(fty.kind))}", sp,
                                    expected=with_levels(fty.kind), got=lk)
            arg = self.nf(env, t.ty)
            arity = self.row_arity(arg, sp) if isinstance(fty.kind, KRow) else None
            res = self.nf(env, subst_ty(fty.body, fty.var, arg))
        return res, CTyApp(fcore, arg, arity, written=t.ty)

    def _unlabel(self, env: Env, t: Unlabel) -> tuple[Type, Core]:
        sp = t.span
        with self.rule("▹E"):
            with self.muted():
                lab, _ = self._label_of(env, t.label)
            if isinstance(t.tm, Prj):
                prj = t.tm
                with self.rule("ΠE"):
                    rty, rcore = self.infer(env, prj.tm)
                    row = self.record_row(rty, prj.span)
                    found = self.solver(env).find_contain_by_label(prj.dir, lab, row)
                    if found is None:
                        p = PContain(prj.dir, TRow((TLabeled(lab, TVar("?")),)), row)
                        raise TypingError("PredicateUnsolved", f"cannot derive {show_pred(p)}", sp, pred=p)
                    target = TRow((TLabeled(lab, found),))
                    ev = self.solve(env, PContain(prj.dir, target, row), sp)
                    tcore: Core = CSing("elimPi", CPrj(prj.dir, self._sing_in(rcore, prj.tm, "Pi"), ev, target),
                                        inserted=True)
                _, lcore = self._label_of(env, t.label)
                return found, CUnlabel(tcore, lcore)
            ty, core = self.infer(env, t.tm)
            _, lcore = self._label_of(env, t.label)
            if not isinstance(ty, TLabeled):
                raise TypingError("Mismatch", f"expected a labeled type, got {show_type(ty)}", sp, got=ty)
            if not alpha_eq(ty.label, lab):
                raise self.mismatch(TLabeled(lab, ty.body), ty, sp, "labels differ")
            if isinstance(t.tm, (Concat, EmptyRec, Syn)):
                core = CSing("elimPi", core, inserted=True)
            elif isinstance(t.tm, Inj):
                core = CSing("elimSig", core, inserted=True)
        return ty.body, CUnlabel(core, lcore)

    # -- checking

    def check(self, env: Env, t: Term, expected: Type) -> Core:
        sp = t.span
        exp = expected
        if isinstance(exp, TForall):
            if exp.implicit or (not isinstance(t, TyLam) and isinstance(t, (Lam, Syn, Ana, Branch))):
                name = exp.var
                body = exp.body
                if name in env.ty_names():
                    name = fresh_name(exp.var, env.ty_names() | free_vars(exp))
                    body = subst_ty(exp.body, exp.var, TVar(name))
                with self.rule("∀I", f"/\\{name}"):
                    core = self.check(env.with_ty(name, exp.kind), t, self.nf(env.with_ty(name, exp.kind), body))
                return CTyLam(name, exp.kind, core, implicit=True)
            if isinstance(t, TyLam):
                if t.kind is not None and not same_kind(t.kind, exp.kind):
                    raise KindError("KindMismatch", f"type parameter {t.var} has kind {show_kind(t.kind)}, "
                                    f"expected {show_kind(exp.kind)}", sp, expected=exp.kind, got=t.kind)
                name, tbody = self._bind_tylam(env, t)
                inner = env.with_ty(name, exp.kind)
                body = self.nf(inner, subst_ty(exp.body, exp.var, TVar(name))) if name != exp.var else exp.body
                with self.rule("∀I", f"/\\{name}"):
                    core = self.check(inner, tbody, body)
                return CTyLam(name, exp.kind, core, annotated=t.kind is not None)
        if isinstance(exp, TQual):
            if isinstance(t, Var):
                ty = env.type_of_var(t.name)
                if ty is not None and alpha_eq(ty, exp):
                    with self.rule("var", t.name):
                        pass
                    return CVar(t.name)
            ev = self.fresh_ev()
            with self.rule("⇒I", show_pred(exp.pred)):
                core = self.check(env.with_pred(exp.pred, ev), t, exp.body)
            return CEvAbs(ev, exp.pred, core)
        if isinstance(t, Lam):
            return self._check_lam(env, t, exp)
        if isinstance(t, TyLam):
            raise self.mismatch(exp, TForall(t.var, t.kind or TYPE, TVar("?")), sp,
                                "a type abstraction needs a polymorphic type")
        if isinstance(t, App) and not synthesizes(t.f) and isinstance(t.f, (Ana, Branch, Lam, Syn)):
            return self._app(env, t, exp)[1]
        if isinstance(t, LabelIntro):
            return self._check_label_intro(env, t, exp)
        if isinstance(t, Prj):
            return self._check_prj(env, t, exp)
        if isinstance(t, Inj):
            return self._check_inj(env, t, exp)
        if isinstance(t, Concat):
            return self._check_concat(env, t, exp)
        if isinstance(t, Branch):
            return self._check_branch(env, t, exp)
        if isinstance(t, Syn):
            return self._check_syn(env, t, exp)
        if isinstance(t, Ana):
            return self._check_ana(env, t, exp)
        if isinstance(t, FoldPi):
            return self._fold(env, t, exp)[1]
        ty, core = self.infer(env, t)
        if not alpha_eq(ty, exp):
            raise self.mismatch(exp, ty, sp)
        return core

    def _check_lam(self, env: Env, t: Lam, exp: Type) -> Core:
        parts = split_arrow(exp)
        if parts is None:
            raise TypingError("NotAFunction", f"a function was given where {show_type(exp)} is expected",
                              t.span, expected=exp)
        dom, cod = parts
        if t.ann is not None:
            self.expect_type_kind(env, t.ann, t.span)
            ann = self.nf(env, t.ann)
            if not alpha_eq(ann, dom):
                raise self.mismatch(dom, ann, t.span, f"annotation on {t.var} disagrees with the expected type")
        with self.rule("→I", f"\\{t.var}"):
            body = self.check(env.with_tm(t.var, dom), t.body, cod)
        return CLam(t.var, dom, body, annotated=t.ann is not None, written=t.ann)

    def _check_label_intro(self, env: Env, t: LabelIntro, exp: Type) -> Core:
        if not isinstance(exp, TLabeled):
            ty, core = self.infer(env, t)
            raise self.mismatch(exp, ty, t.span)
        with self.rule("▹I"):
            lab, lcore = self._label_of(env, t.label)
            if not alpha_eq(lab, exp.label):
                raise self.mismatch(exp, TLabeled(lab, exp.body), t.span, "labels differ")
            pcore = self.check(env, t.payload, exp.body)
        return CLabelIntro(lcore, pcore)

    def _check_prj(self, env: Env, t: Prj, exp: Type) -> Core:
        target = self.record_row(exp, t.span)
        with self.rule("ΠE"):
            ty, core = self.infer(env, t.tm)
            src = self.record_row(ty, t.tm.span)
            ev = self.solve(env, PContain(t.dir, target, src), t.span)
        return CPrj(t.dir, self._sing_in(core, t.tm, "Pi"), ev, target)

    def _check_inj(self, env: Env, t: Inj, exp: Type) -> Core:
        target = self.variant_row(exp, t.span)
        with self.rule("ΣI"):
            ty, core = self.infer(env, t.tm)
            src = self.variant_row(ty, t.tm.span)
            ev = self.solve(env, PContain(t.dir, src, target), t.span)
        return CInj(t.dir, self._sing_in(core, t.tm, "Sig"), ev, target)

    def _check_concat(self, env: Env, t: Concat, exp: Type) -> Core:
        res = self.record_row(exp, t.span)
        with self.rule("ΠI"):
            sl, sr = synthesizes(t.l), synthesizes(t.r)
            if sl:
                lty, lcore = self.infer(env, t.l)
                l = self.record_row(lty, t.l.span)
            if sr:
                rty, rcore = self.infer(env, t.r)
                r = self.record_row(rty, t.r.span)
            if sl and not sr:
                r = self._remainder(env, "right", l, res, t.span)
                rcore = self.check(env, t.r, self.nf(env, TPi(r)))
            elif sr and not sl:
                l = self._remainder(env, "left", r, res, t.span)
                lcore = self.check(env, t.l, self.nf(env, TPi(l)))
            elif not sl and not sr:
                raise TypingError("AnnotationRequired", "neither side of ++ has a known type", t.span)
            ev = self.solve(env, PCombine(l, r, res), t.span)
        return CConcat(self._sing_in(lcore, t.l, "Pi"), self._sing_in(rcore, t.r, "Pi"), ev, res)

    def _remainder(self, env: Env, missing: str, known: Type, res: Type, span) -> Type:
        s = self.solver(env)
        found = s.find_combine_right(known, res) if missing == "right" else s.find_combine_left(known, res)
        if found is None:
            hole = TVar("?")
            p = PCombine(known, hole, res) if missing == "right" else PCombine(hole, known, res)
            raise TypingError("PredicateUnsolved", f"cannot derive {show_pred(p)}", span, pred=p)
        return found

    def _check_branch(self, env: Env, t: Branch, exp: Type) -> Core:
        res, tau = self.variant_fn(exp, t.span)
        with self.rule("ΣE"):
            sl, sr = synthesizes(t.l), synthesizes(t.r)
            if sl:
                lty, lcore = self.infer(env, t.l)
                l, tl = self.variant_fn(lty, t.l.span)
                if not alpha_eq(tl, tau):
                    raise self.mismatch(tau, tl, t.l.span, "branch result differs")
            if sr:
                rty, rcore = self.infer(env, t.r)
                r, tr = self.variant_fn(rty, t.r.span)
                if not alpha_eq(tr, tau):
                    raise self.mismatch(tau, tr, t.r.span, "branch result differs")
            if sl and not sr:
                r = self._remainder(env, "right", l, res, t.span)
                rcore = self.check(env, t.r, self.nf(env, arrow(TSigma(r), tau)))
            elif sr and not sl:
                l = self._remainder(env, "left", r, res, t.span)
                lcore = self.check(env, t.l, self.nf(env, arrow(TSigma(l), tau)))
            elif not sl and not sr:
                raise TypingError("AnnotationRequired", "neither branch has a known type", t.span)
            ev = self.solve(env, PCombine(l, r, res), t.span)
        return CBranch(lcore, rcore, ev, res, tau)

    # -- generic operators

    def choose_form(self, body: Term) -> str:
        allowed = FORMS if self.theory.name != "scoped" else ("nc",)
        if self.generic_form != "auto":
            return self.generic_form
        by_count = {5: "nc", 3: "comm", 2: "contain"}.get(leading_tylams(body))
        if by_count in allowed:
            return by_count
        return "comm" if "comm" in allowed else "nc"

    def body_type(self, env: Env, form: str, kappa: Kind, phi: Optional[Type], rho: Type,
                  tail: Callable[[Type], Type], extra: tuple = ()) -> Type:
        avoid = set(env.ty_names()) | free_vars(rho) | (free_vars(phi) if phi is not None else set())
        for x in extra:
            avoid |= free_vars(x)

        def pick(base: str) -> str:
            n = fresh_name(base, avoid)
            avoid.add(n)
            return n

        l, u = pick("l"), pick("u")
        lt, ut = TVar(l), TVar(u)
        entry = TRow((TLabeled(lt, ut),))
        phi_u = TApp(phi, ut) if phi is not None else ut
        fn = arrow(TSing(lt), tail(phi_u))
        rk = KRow(kappa)
        if form == "nc":
            y1, z, y2 = pick("y1"), pick("z"), pick("y2")
            inner = TQual(PCombine(TVar(y1), entry, TVar(z)), TQual(PCombine(TVar(z), TVar(y2), rho), fn))
            t = TForall(y1, rk, TForall(z, rk, TForall(y2, rk, inner)))
        elif form == "comm":
            y = pick("y")
            t = TForall(y, rk, TQual(PCombine(entry, TVar(y), rho), fn))
        else:
            t = TQual(PContain("L", entry, rho), fn)
        t = TForall(l, LAB, TForall(u, kappa, t))
        return self.nf(env, t)

    def resolve_phi(self, env: Env, op: Optional[Type], full: Type, span) -> tuple[Optional[Type], Kind, Type]:
        """Find the row ``rho`` with ``phi rho == full``."""
        if op is None:
            k = kind_of(env, full, self.theory)
            if not isinstance(k, KRow):
                raise KindError("NotARow", f"{show_type(full)} is not a row", span)
            return None, k.elem, full
        k = self.kind(env, op, span)
        if not (isinstance(k, KArrow) and isinstance(k.cod, KType)):
            raise KindError("NotAConstructor", f"{show_type(op)} has kind {show_kind(k)}, expected k -> Type",
                            span, got=k)
        phi = self.nf(env, op)
        kappa = k.dom
        cands: list[Type] = []
        if isinstance(full, TMap):
            cands.append(full.row)
        if isinstance(full, TRow):
            s = fresh_name("s", set(env.ty_names()) | free_vars(phi) | free_vars(full))
            pat = self.nf(env.with_ty(s, kappa), TApp(phi, TVar(s)))
            entries = []
            for e in full.entries:
                b: dict = {}
                if not _match(pat, s, e.body, b) or s not in b:
                    entries = None
                    break
                entries.append(TLabeled(e.label, b[s]))
            if entries is not None:
                cands.append(TRow(tuple(entries)))
        cands.append(full)
        for rho in cands:
            try:
                rk = kind_of(env, rho, self.theory)
                if not (isinstance(rk, KRow) and same_kind(rk.elem, kappa)):
                    continue
                if alpha_eq(self.nf(env, TApp(phi, rho)), full):
                    return phi, kappa, rho
            except KindError:
                continue
        raise TypingError("AnnotationRequired", f"cannot see {show_type(full)} as {show_type(op)} applied to a row",
                          span)

    def _check_syn(self, env: Env, t: Syn, exp: Type) -> Core:
        full = self.record_row(exp, t.span)
        phi, kappa, rho = self.resolve_phi(env, t.op, full, t.span)
        form = self.choose_form(t.body)
        bty = self.body_type(env, form, kappa, phi, rho, lambda pu: pu)
        with self.rule("Syn", form):
            body = self.check(env, t.body, bty)
        return CSyn(t.op, phi, kappa, rho, self.row_arity(rho, t.span), form, body)

    def _check_ana(self, env: Env, t: Ana, exp: Type) -> Core:
        full, tau = self.variant_fn(exp, t.span)
        phi, kappa, rho = self.resolve_phi(env, t.op, full, t.span)
        form = self.choose_form(t.body)
        bty = self.body_type(env, form, kappa, phi, rho, lambda pu: arrow(pu, tau), (tau,))
        with self.rule("Ana", form):
            body = self.check(env, t.body, bty)
        return CAna(t.op, phi, kappa, rho, self.row_arity(rho, t.span), form, tau, body)

    def _fold(self, env: Env, t: FoldPi, expected: Optional[Type]) -> tuple[Type, Core]:
        with self.rule("FoldΠ"):
            nty, ncore = self.infer(env, t.record)
            rho = self.record_row(nty, t.record.span)
            if expected is None:
                ups, ucore = self.infer(env, t.unit)
            else:
                ups, ucore = expected, self.check(env, t.unit, expected)
            ccore = self.check(env, t.combine, self.nf(env, arrow(ups, arrow(ups, ups))))
            form = self.choose_form(t.step)
            bty = self.body_type(env, form, TYPE, None, rho, lambda pu: arrow(pu, ups), (ups,))
            scode = self.check(env, t.step, bty)
        return ups, CFold(scode, ccore, ucore, self._sing_in(ncore, t.record, "Pi"), rho,
                          self.row_arity(rho, t.span), form, ups)

    # -- programs

    def elaborate(self, p: Program, env: Optional[Env] = None) -> tuple[list[ElabDecl], Env]:
        env = prelude_env() if env is None else env
        out: list[ElabDecl] = []
        for d in p.decls:
            ed = self.elaborate_decl(env, d)
            out.append(ed)
            env = env.with_tm(d.name, ed.ty)
        return out, env

    def elaborate_decl(self, env: Env, d: Decl) -> ElabDecl:
        try:
            scope_check(env, d.body)
            if d.sig is not None:
                sig = self.prepare_signature(env, d.sig, d.span)
                if self.tracing:
                    self.trace_lines.append(f"-- {d.name}")
                core = self.check(env, d.body, sig)
                return ElabDecl(d.name, sig, core, d.span)
            if self.tracing:
                self.trace_lines.append(f"-- {d.name}")
            ty, core = self.infer(env, d.body)
            return ElabDecl(d.name, ty, core, d.span)
        except TypingError as exc:
            exc.decl = exc.decl or d.name
            if exc.span is None:
                exc.span = d.span
            raise
        except KindError as exc:
            if exc.span is None:
                exc.span = d.span
            exc.decl = d.name
            raise


TERM_CLASSES = get_args(Term)


def scope_check(env: Env, t: Term) -> None:
    """Report the first unbound term variable before any typing work, so a
    scope error is not masked by a type error elsewhere in the term."""
    _scope(env, t, frozenset())


def _scope(env: Env, t, bound: frozenset) -> None:
    if isinstance(t, Var):
        if t.name not in bound and env.type_of_var(t.name) is None:
            raise TypingError("UnboundTermVar", f"unbound variable {t.name}", t.span)
        return
    if isinstance(t, Lam):
        _scope(env, t.body, bound | {t.var})
        return
    if not dataclasses.is_dataclass(t):
        return
    for f in dataclasses.fields(t):
        v = getattr(t, f.name)
        if isinstance(v, TERM_CLASSES):
            _scope(env, v, bound)


def _ty_entry(name: str, kind: Kind):
    from .core_ast import TyVarEntry
    return TyVarEntry(name, kind)


# ---------------------------------------------------------------- public API


def infer(env: Env, t: Term, theory="simple", **opts) -> tuple[Type, Core]:
    scope_check(env, t)
    return Checker(theory, **opts).infer(env, t)


def check(env: Env, t: Term, expected: Type, theory="simple", **opts) -> Core:
    scope_check(env, t)
    c = Checker(theory, **opts)
    return c.check(env, t, c.nf(env, expected))


def elaborate_program(p: Program, theory=None, stratified: Optional[bool] = None,
                      generic_form: str = "auto", trace: bool = False) -> list[ElabDecl]:
    c = Checker(theory or p.theory, stratified if stratified is not None else p.mode == "stratified",
                generic_form, trace)
    return c.elaborate(p)[0]


# ---------------------------------------------------------------- core lint


class CoreLint:
    """Recompute the type of an elaborated term from its annotations
    alone, re-checking every piece of literal evidence.  Used to test that
    elaboration is sound independently of the checker's own bookkeeping."""

    def __init__(self, theory="simple"):
        self.theory = get_theory(theory)
        self.norm = Normalizer(self.theory)

    def nf(self, env: Env, t: Type) -> Type:
        return self.norm.nf(env.ty_kinds(), t)[0]

    def _ev(self, env: Env, ev: EvExpr, pred: Pred) -> None:
        if isinstance(ev, ELit):
            e = ev.ev
            if isinstance(e, ContainEv):
                assert isinstance(pred, PContain)
                validate_contain(e)
                self._rows_agree(pred.sub, pred.sup, e)
            else:
                assert isinstance(pred, PCombine)
                validate_combine(e)
        elif isinstance(ev, EVar):
            assert any(name == ev.name for _, name in env.hyps()), f"unknown evidence {ev.name}"

    @staticmethod
    def _rows_agree(sub: Type, sup: Type, e: ContainEv) -> None:
        if isinstance(sub, TRow) and isinstance(sup, TRow):
            for i, j in enumerate(e.map):
                assert alpha_eq(sub.entries[i], sup.entries[j]), "evidence maps unequal entries"

    def _eq(self, a: Type, b: Type, what: str) -> None:
        assert alpha_eq(a, b), f"{what}: {show_type(a)} vs {show_type(b)}"

    def type_of(self, env: Env, c: Core) -> Type:
        if isinstance(c, CVar):
            t = env.type_of_var(c.name)
            assert t is not None, f"unbound {c.name}"
            return t
        if isinstance(c, CLam):
            return self.nf(env, arrow(c.ty, self.type_of(env.with_tm(c.var, c.ty), c.body)))
        if isinstance(c, CApp):
            ft = self.type_of(env, c.f)
            parts = split_arrow(ft)
            assert parts is not None, "application of a non-function"
            self._eq(parts[0], self.type_of(env, c.a), "argument")
            return parts[1]
        if isinstance(c, CTyLam):
            return TForall(c.var, c.kind, self.type_of(env.with_ty(c.var, c.kind), c.body), c.implicit)
        if isinstance(c, CTyApp):
            ft = self.type_of(env, c.tm)
            assert isinstance(ft, TForall)
            return self.nf(env, subst_ty(ft.body, ft.var, c.ty))
        if isinstance(c, CEvAbs):
            return TQual(c.pred, self.type_of(env.with_pred(c.pred, c.var), c.body))
        if isinstance(c, CEvApp):
            ft = self.type_of(env, c.tm)
            assert isinstance(ft, TQual), "evidence applied to an unqualified term"
            self._ev(env, c.ev, ft.pred)
            return ft.body
        if isinstance(c, CLabel):
            return TSing(TLabel(c.name))
        if isinstance(c, CLabelIntro):
            lt = self.type_of(env, c.label)
            assert isinstance(lt, TSing)
            return self.nf(env, TLabeled(lt.label, self.type_of(env, c.payload)))
        if isinstance(c, CUnlabel):
            t = self.type_of(env, c.tm)
            assert isinstance(t, TLabeled)
            return t.body
        if isinstance(c, CPrj):
            t = self.type_of(env, c.tm)
            src = Checker.as_row(t, "Pi")
            self._ev(env, c.ev, PContain(c.dir, c.row, src))
            return self.nf(env, TPi(c.row))
        if isinstance(c, CInj):
            t = self.type_of(env, c.tm)
            src = Checker.as_row(t, "Sigma")
            self._ev(env, c.ev, PContain(c.dir, src, c.row))
            return self.nf(env, TSigma(c.row))
        if isinstance(c, CConcat):
            l = Checker.as_row(self.type_of(env, c.l), "Pi")
            r = Checker.as_row(self.type_of(env, c.r), "Pi")
            self._ev(env, c.ev, PCombine(l, r, c.row))
            return self.nf(env, TPi(c.row))
        if isinstance(c, CBranch):
            for side in (c.l, c.r):
                parts = split_arrow(self.type_of(env, side))
                assert parts is not None
                self._eq(parts[1], c.result, "branch result")
            return self.nf(env, arrow(TSigma(c.row), c.result))
        if isinstance(c, (CSyn, CAna)):
            full = self.nf(env, TApp(c.phi, c.row)) if c.phi is not None else c.row
            chk = Checker(self.theory)
            if isinstance(c, CSyn):
                bty = chk.body_type(env, c.form, c.kind, c.phi, c.row, lambda pu: pu)
                self._eq(bty, self.type_of(env, c.body), "syn body")
                return self.nf(env, TPi(full))
            bty = chk.body_type(env, c.form, c.kind, c.phi, c.row, lambda pu: arrow(pu, c.result), (c.result,))
            self._eq(bty, self.type_of(env, c.body), "ana body")
            return self.nf(env, arrow(TSigma(full), c.result))
        if isinstance(c, CFold):
            chk = Checker(self.theory)
            bty = chk.body_type(env, c.form, TYPE, None, c.row, lambda pu: arrow(pu, c.result), (c.result,))
            self._eq(bty, self.type_of(env, c.step), "fold step")
            self._eq(self.type_of(env, c.unit), c.result, "fold unit")
            self._eq(self.type_of(env, c.record), self.nf(env, TPi(c.row)), "fold record")
            return c.result
        if isinstance(c, CSing):
            return self.type_of(env, c.tm)
        if isinstance(c, CLit):
            return BOOL if isinstance(c.value, bool) else INT
        if isinstance(c, CBinOp):
            return BINOPS[c.op][1]
        if isinstance(c, CEmpty):
            return TPi(TRow(()))
        if isinstance(c, CAnn):
            return c.ty
        raise TypeError(f"not a core term: {c!r}")
