"""Call-by-value evaluation of elaborated terms with labels erased.

Elaborated terms are first compiled to ``RunTerm``, which keeps only what
evaluation needs: variables, evidence expressions and row arities.  Types
and label names do not survive compilation, so a record is a dense tuple
of fields in the row's index order and a variant is a tag with a payload.
Projection, injection, concatenation and branching are driven entirely by
evidence maps; ``syn``, ``ana`` and ``foldPi`` build the evidence for each
index from the row's arity alone.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

from .prims import BINOPS, PRIMS, PrimError, PrimSpec
from .rows import (
    AAdd, AConst, AVar, Arity, CombineEv, ContainEv, ELeft, ELift, ELit,
    ERefl, ERight, ETrans, EVar, EvExpr, combine_from_split, compose_ev,
    identity_ev, recombine_arity,
)
from .typecheck import (
    CAna, CAnn, CApp, CBinOp, CBranch, CConcat, CEmpty, CEvAbs, CEvApp,
    CFold, CInj, CLabel, CLabelIntro, CLam, CLit, CPrj, CSing, CSyn, CTyApp,
    CTyLam, CUnlabel, CVar, Core, ElabDecl,
)

__all__ = [
    "PrimError", "Closure", "TyClosure", "EvClosure", "Unit", "LabeledV",
    "RecordV", "VariantV", "Prim", "PrimFn", "BranchFn", "AnaFn", "Value",
    "compile_core", "evaluate", "apply_value", "apply_contain", "inject",
    "branch_dispatch", "eval_syn", "eval_ana", "eval_fold", "show_value",
    "Runtime", "run_program", "value_labels_free",
]


class InternalError(AssertionError):
    """Evaluation reached a state that well-typed terms cannot reach."""


# ---------------------------------------------------------------- run terms


@dataclass(frozen=True)
class RVar:
    name: str


@dataclass(frozen=True)
class RLam:
    var: str
    body: "RunTerm"


@dataclass(frozen=True)
class RApp:
    f: "RunTerm"
    a: "RunTerm"


@dataclass(frozen=True)
class RTyLam:
    var: str
    body: "RunTerm"


@dataclass(frozen=True)
class RTyApp:
    tm: "RunTerm"
    arity: Optional[Arity]


@dataclass(frozen=True)
class REvAbs:
    var: str
    body: "RunTerm"


@dataclass(frozen=True)
class REvApp:
    tm: "RunTerm"
    ev: EvExpr


@dataclass(frozen=True)
class RUnit:
    pass


@dataclass(frozen=True)
class RLabelIntro:
    label: "RunTerm"
    payload: "RunTerm"


@dataclass(frozen=True)
class RUnlabel:
    tm: "RunTerm"
    label: "RunTerm"


@dataclass(frozen=True)
class RPrj:
    tm: "RunTerm"
    ev: EvExpr


@dataclass(frozen=True)
class RInj:
    tm: "RunTerm"
    ev: EvExpr


@dataclass(frozen=True)
class RConcat:
    l: "RunTerm"
    r: "RunTerm"
    ev: EvExpr


@dataclass(frozen=True)
class RBranch:
    l: "RunTerm"
    r: "RunTerm"
    ev: EvExpr


@dataclass(frozen=True)
class RSyn:
    arity: Arity
    form: str
    body: "RunTerm"


@dataclass(frozen=True)
class RAna:
    arity: Arity
    form: str
    body: "RunTerm"


@dataclass(frozen=True)
class RFold:
    step: "RunTerm"
    combine: "RunTerm"
    unit: "RunTerm"
    record: "RunTerm"
    arity: Arity
    form: str


@dataclass(frozen=True)
class RCoerce:
    which: str  # introPi, elimPi, introSig, elimSig
    tm: "RunTerm"


@dataclass(frozen=True)
class RLit:
    value: Union[int, bool]


@dataclass(frozen=True)
class RBinOp:
    op: str
    l: "RunTerm"
    r: "RunTerm"


@dataclass(frozen=True)
class REmpty:
    pass


RunTerm = Union[
    RVar, RLam, RApp, RTyLam, RTyApp, REvAbs, REvApp, RUnit, RLabelIntro,
    RUnlabel, RPrj, RInj, RConcat, RBranch, RSyn, RAna, RFold, RCoerce, RLit,
    RBinOp, REmpty,
]


def _strip_contain(e: ContainEv) -> ContainEv:
    return ContainEv(e.src_arity, e.dst_arity, e.map)


def strip_ev(e: EvExpr) -> EvExpr:
    """Drop the type witnesses carried by literal evidence."""
    if isinstance(e, ELit):
        ev = e.ev
        if isinstance(ev, ContainEv):
            return ELit(_strip_contain(ev))
        return ELit(CombineEv(ev.left_arity, ev.right_arity, ev.split,
                              _strip_contain(ev.left_in), _strip_contain(ev.right_in)))
    if isinstance(e, ETrans):
        return ETrans(strip_ev(e.first), strip_ev(e.second))
    if isinstance(e, (ELeft, ERight, ELift)):
        return type(e)(strip_ev(e.ev))
    return e


def compile_core(c: Core) -> RunTerm:
    if isinstance(c, CVar):
        return RVar(c.name)
    if isinstance(c, CLam):
        return RLam(c.var, compile_core(c.body))
    if isinstance(c, CApp):
        return RApp(compile_core(c.f), compile_core(c.a))
    if isinstance(c, CTyLam):
        return RTyLam(c.var, compile_core(c.body))
    if isinstance(c, CTyApp):
        return RTyApp(compile_core(c.tm), c.arity)
    if isinstance(c, CEvAbs):
        return REvAbs(c.var, compile_core(c.body))
    if isinstance(c, CEvApp):
        return REvApp(compile_core(c.tm), strip_ev(c.ev))
    if isinstance(c, CLabel):
        return RUnit()
    if isinstance(c, CLabelIntro):
        return RLabelIntro(compile_core(c.label), compile_core(c.payload))
    if isinstance(c, CUnlabel):
        return RUnlabel(compile_core(c.tm), compile_core(c.label))
    if isinstance(c, CPrj):
        return RPrj(compile_core(c.tm), strip_ev(c.ev))
    if isinstance(c, CInj):
        return RInj(compile_core(c.tm), strip_ev(c.ev))
    if isinstance(c, CConcat):
        return RConcat(compile_core(c.l), compile_core(c.r), strip_ev(c.ev))
    if isinstance(c, CBranch):
        return RBranch(compile_core(c.l), compile_core(c.r), strip_ev(c.ev))
    if isinstance(c, CSyn):
        return RSyn(c.arity, c.form, compile_core(c.body))
    if isinstance(c, CAna):
        return RAna(c.arity, c.form, compile_core(c.body))
    if isinstance(c, CFold):
        return RFold(compile_core(c.step), compile_core(c.combine), compile_core(c.unit),
                     compile_core(c.record), c.arity, c.form)
    if isinstance(c, CSing):
        return RCoerce(c.which, compile_core(c.tm))
    if isinstance(c, CLit):
        return RLit(c.value)
    if isinstance(c, CBinOp):
        return RBinOp(c.op, compile_core(c.l), compile_core(c.r))
    if isinstance(c, CEmpty):
        return REmpty()
    if isinstance(c, CAnn):
        return compile_core(c.tm)
    raise TypeError(f"not a core term: {c!r}")


# ---------------------------------------------------------------- environments


class Scope:
    """A persistent linked environment keyed by (namespace, name); the
    namespaces are 'tm' for terms, 'ty' for row arities and 'ev' for
    evidence."""

    __slots__ = ("key", "value", "parent")

    def __init__(self, key=None, value=None, parent: Optional["Scope"] = None):
        self.key = key
        self.value = value
        self.parent = parent

    def bind(self, ns: str, name: str, value) -> "Scope":
        return Scope((ns, name), value, self)

    def lookup(self, ns: str, name: str):
        s: Optional[Scope] = self
        key = (ns, name)
        while s is not None:
            if s.key == key:
                v = s.value
                return v.force() if isinstance(v, _Thunk) else v
            s = s.parent
        raise InternalError(f"unbound {ns} variable {name}")


class _Thunk:
    __slots__ = ("compute", "value", "state")

    def __init__(self, compute: Callable[[], Any]):
        self.compute = compute
        self.value = None
        self.state = 0  # 0 pending, 1 running, 2 done

    def force(self):
        if self.state == 2:
            return self.value
        if self.state == 1:
            raise InternalError("cyclic top-level definition")
        self.state = 1
        try:
            self.value = self.compute()
        except BaseException:
            self.state = 0
            raise
        self.state = 2
        return self.value


# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class Closure:
    param: str
    body: RunTerm
    env: Scope = field(compare=False, repr=False)


@dataclass(frozen=True)
class TyClosure:
    param: str
    body: RunTerm
    env: Scope = field(compare=False, repr=False)


@dataclass(frozen=True)
class EvClosure:
    param: str
    body: RunTerm
    env: Scope = field(compare=False, repr=False)


@dataclass(frozen=True)
class Unit:
    """The sole inhabitant of every singleton type."""


@dataclass(frozen=True)
class LabeledV:
    payload: "Value"


@dataclass(frozen=True)
class RecordV:
    fields: tuple["Value", ...]


@dataclass(frozen=True)
class VariantV:
    tag: int
    payload: "Value"


@dataclass(frozen=True)
class Prim:
    value: Any  # int, bool, or a tuple (a list) of raw elements


@dataclass(frozen=True)
class PrimFn:
    spec: PrimSpec
    types_left: int
    args: tuple = ()


@dataclass(frozen=True)
class BranchFn:
    ev: CombineEv
    left: "Value"
    right: "Value"


@dataclass(frozen=True)
class AnaFn:
    arity: int
    form: str
    body: "Value"


Value = Union[Closure, TyClosure, EvClosure, Unit, LabeledV, RecordV, VariantV, Prim,
              PrimFn, BranchFn, AnaFn]

UNIT = Unit()
FUNCTION_VALUES = (Closure, TyClosure, EvClosure, PrimFn, BranchFn, AnaFn)


# -- tolerant views: a singleton record or variant and a labeled value
#    share one representation up to these coercions


def as_record(v: Value) -> RecordV:
    if isinstance(v, RecordV):
        return v
    if isinstance(v, LabeledV):
        return RecordV((v.payload,))
    raise InternalError(f"expected a record, got {v!r}")


def as_variant(v: Value) -> VariantV:
    if isinstance(v, VariantV):
        return v
    if isinstance(v, LabeledV):
        return VariantV(0, v.payload)
    raise InternalError(f"expected a variant, got {v!r}")


def unlabel(v: Value) -> Value:
    if isinstance(v, LabeledV):
        return v.payload
    if isinstance(v, RecordV) and len(v.fields) == 1:
        return v.fields[0]
    if isinstance(v, VariantV) and v.tag == 0:
        return v.payload
    raise InternalError(f"expected a labeled value, got {v!r}")


def _wrap(x) -> Value:
    return x if isinstance(x, (Closure, TyClosure, EvClosure, Unit, LabeledV, RecordV, VariantV,
                               Prim, PrimFn, BranchFn, AnaFn)) else Prim(x)


def _unwrap(v: Value):
    return v.value if isinstance(v, Prim) else v


# ---------------------------------------------------------------- operations


def apply_contain(ev: ContainEv, v: RecordV) -> RecordV:
    """Project the fields selected by a containment."""
    if len(v.fields) != ev.dst_arity:
        raise InternalError(f"record of arity {len(v.fields)} against evidence into {ev.dst_arity}")
    return RecordV(tuple(v.fields[j] for j in ev.map))


def inject(ev: ContainEv, v: VariantV) -> VariantV:
    """Move a variant's tag along a containment."""
    if not 0 <= v.tag < ev.src_arity:
        raise InternalError(f"tag {v.tag} outside evidence of arity {ev.src_arity}")
    return VariantV(ev.map[v.tag], v.payload)


def concat(ev: CombineEv, left: RecordV, right: RecordV) -> RecordV:
    if len(left.fields) != ev.left_arity or len(right.fields) != ev.right_arity:
        raise InternalError("concatenation arity mismatch")
    return RecordV(tuple((left.fields if s == "left" else right.fields)[j] for s, j in ev.split))


def branch_dispatch(ev: CombineEv, left: Value, right: Value, scrutinee: VariantV) -> Value:
    if not 0 <= scrutinee.tag < ev.result_arity:
        raise InternalError(f"tag {scrutinee.tag} outside a row of arity {ev.result_arity}")
    side, j = ev.split[scrutinee.tag]
    return apply_value(left if side == "left" else right, VariantV(j, scrutinee.payload))


def _nc_evidence(n: int, i: int) -> tuple[CombineEv, CombineEv]:
    # y1 (arity i) o+ <l |> u> ~ z (arity i + 1)
    first = combine_from_split([("left", k) for k in range(i)] + [("right", 0)], i, 1)
    # z o+ y2 (arity n - i - 1) ~ rho
    second = combine_from_split([("left", k) for k in range(i + 1)] +
                                [("right", k) for k in range(n - i - 1)], i + 1, n - i - 1)
    return first, second


def instantiate_body(body: Value, form: str, n: int, i: int) -> Value:
    """Apply a generic body to the type arguments, evidence and label
    witness for index ``i`` of a row of arity ``n``."""
    f = apply_type(apply_type(body, None), None)  # l and u
    if form == "nc":
        f = apply_type(apply_type(apply_type(f, i), i + 1), n - i - 1)
        e1, e2 = _nc_evidence(n, i)
        f = apply_evidence(apply_evidence(f, e1), e2)
    elif form == "comm":
        f = apply_evidence(apply_type(f, n - 1), recombine_arity(n, i))
    elif form == "contain":
        f = apply_evidence(f, ContainEv(1, n, (i,)))
    else:
        raise InternalError(f"unknown body form {form}")
    return apply_value(f, UNIT)


def eval_syn(n: int, form: str, body: Value) -> RecordV:
    return RecordV(tuple(instantiate_body(body, form, n, i) for i in range(n)))


def eval_ana(n: int, form: str, body: Value, scrutinee: Value) -> Value:
    v = as_variant(scrutinee)
    if not 0 <= v.tag < n:
        raise InternalError(f"tag {v.tag} outside a row of arity {n}")
    return apply_value(instantiate_body(body, form, n, v.tag), v.payload)


def eval_fold(n: int, form: str, step: Value, combine: Value, unit: Value, rec: Value) -> Value:
    r = as_record(rec)
    if len(r.fields) != n:
        raise InternalError(f"fold over a record of arity {len(r.fields)}, expected {n}")
    acc: Optional[Value] = None
    for i, x in enumerate(r.fields):
        y = apply_value(instantiate_body(step, form, n, i), x)
        acc = y if acc is None else apply_value(apply_value(combine, acc), y)
    return unit if acc is None else acc


# ---------------------------------------------------------------- application


def _call_prim(p: PrimFn) -> Value:
    args = []
    for a in p.args:
        if isinstance(a, FUNCTION_VALUES):
            args.append(lambda x, f=a: _unwrap(apply_value(f, _wrap(x))))
        else:
            args.append(_unwrap(a))
    return _wrap(p.spec.fn(*args))


def apply_value(f: Value, a: Value) -> Value:
    if isinstance(f, Closure):
        return evaluate(f.body, f.env.bind("tm", f.param, a))
    if isinstance(f, PrimFn):
        if f.types_left:
            raise InternalError(f"{f.spec.name} applied before its type arguments")
        p = PrimFn(f.spec, 0, f.args + (a,))
        return _call_prim(p) if len(p.args) == p.spec.nargs else p
    if isinstance(f, BranchFn):
        return branch_dispatch(f.ev, f.left, f.right, as_variant(a))
    if isinstance(f, AnaFn):
        return eval_ana(f.arity, f.form, f.body, a)
    raise InternalError(f"application of a non-function {f!r}")


def apply_type(f: Value, arity: Optional[int]) -> Value:
    if isinstance(f, TyClosure):
        return evaluate(f.body, f.env.bind("ty", f.param, arity))
    if isinstance(f, PrimFn) and f.types_left:
        p = PrimFn(f.spec, f.types_left - 1, f.args)
        if p.types_left == 0 and p.spec.nargs == 0:
            return _call_prim(p)
        return p
    raise InternalError(f"type application of {f!r}")


def apply_evidence(f: Value, ev) -> Value:
    if isinstance(f, EvClosure):
        return evaluate(f.body, f.env.bind("ev", f.param, ev))
    raise InternalError(f"evidence application of {f!r}")


def eval_arity(a: Arity, env: Scope) -> int:
    if isinstance(a, AConst):
        return a.n
    if isinstance(a, AVar):
        n = env.lookup("ty", a.name)
        if not isinstance(n, int):
            raise InternalError(f"row variable {a.name} has no arity")
        return n
    if isinstance(a, AAdd):
        return eval_arity(a.left, env) + eval_arity(a.right, env)
    raise InternalError(f"bad arity {a!r}")


def eval_ev(e: EvExpr, env: Scope):
    if isinstance(e, EVar):
        return env.lookup("ev", e.name)
    if isinstance(e, ELit):
        return e.ev
    if isinstance(e, ERefl):
        return identity_ev(eval_arity(e.arity, env))
    if isinstance(e, ETrans):
        return compose_ev(eval_ev(e.first, env), eval_ev(e.second, env))
    if isinstance(e, ELeft):
        return eval_ev(e.ev, env).left_in
    if isinstance(e, ERight):
        return eval_ev(e.ev, env).right_in
    if isinstance(e, ELift):
        return eval_ev(e.ev, env)
    raise InternalError(f"bad evidence {e!r}")


# ---------------------------------------------------------------- evaluation


def evaluate(t: RunTerm, env: Scope) -> Value:
    if isinstance(t, RVar):
        return env.lookup("tm", t.name)
    if isinstance(t, RLam):
        return Closure(t.var, t.body, env)
    if isinstance(t, RApp):
        f = evaluate(t.f, env)
        return apply_value(f, evaluate(t.a, env))
    if isinstance(t, RTyLam):
        return TyClosure(t.var, t.body, env)
    if isinstance(t, RTyApp):
        f = evaluate(t.tm, env)
        return apply_type(f, None if t.arity is None else eval_arity(t.arity, env))
    if isinstance(t, REvAbs):
        return EvClosure(t.var, t.body, env)
    if isinstance(t, REvApp):
        f = evaluate(t.tm, env)
        return apply_evidence(f, eval_ev(t.ev, env))
    if isinstance(t, RUnit):
        return UNIT
    if isinstance(t, RLabelIntro):
        evaluate(t.label, env)
        return LabeledV(evaluate(t.payload, env))
    if isinstance(t, RUnlabel):
        v = evaluate(t.tm, env)
        evaluate(t.label, env)
        return unlabel(v)
    if isinstance(t, RPrj):
        v = as_record(evaluate(t.tm, env))
        return apply_contain(eval_ev(t.ev, env), v)
    if isinstance(t, RInj):
        v = as_variant(evaluate(t.tm, env))
        return inject(eval_ev(t.ev, env), v)
    if isinstance(t, RConcat):
        l = as_record(evaluate(t.l, env))
        r = as_record(evaluate(t.r, env))
        return concat(eval_ev(t.ev, env), l, r)
    if isinstance(t, RBranch):
        l = evaluate(t.l, env)
        r = evaluate(t.r, env)
        return BranchFn(eval_ev(t.ev, env), l, r)
    if isinstance(t, RSyn):
        return eval_syn(eval_arity(t.arity, env), t.form, evaluate(t.body, env))
    if isinstance(t, RAna):
        return AnaFn(eval_arity(t.arity, env), t.form, evaluate(t.body, env))
    if isinstance(t, RFold):
        step = evaluate(t.step, env)
        comb = evaluate(t.combine, env)
        unit = evaluate(t.unit, env)
        rec = evaluate(t.record, env)
        return eval_fold(eval_arity(t.arity, env), t.form, step, comb, unit, rec)
    if isinstance(t, RCoerce):
        v = evaluate(t.tm, env)
        if t.which == "introPi":
            return RecordV((unlabel(v),))
        if t.which == "introSig":
            return VariantV(0, unlabel(v))
        return LabeledV(unlabel(v))
    if isinstance(t, RLit):
        return Prim(t.value)
    if isinstance(t, RBinOp):
        l = evaluate(t.l, env)
        r = evaluate(t.r, env)
        return Prim(BINOPS[t.op][2](_unwrap(l), _unwrap(r)))
    if isinstance(t, REmpty):
        return RecordV(())
    raise InternalError(f"not a run term: {t!r}")


# ---------------------------------------------------------------- programs


def prelude_scope() -> Scope:
    s = Scope()
    for p in PRIMS.values():
        if p.ntypes == 0 and p.nargs == 0:
            s = s.bind("tm", p.name, _wrap(p.fn()))
        else:
            s = s.bind("tm", p.name, PrimFn(p, p.ntypes))
    return s


class Runtime:
    """Top-level definitions, each evaluated on first use."""

    def __init__(self, scope: Optional[Scope] = None):
        self.scope = scope or prelude_scope()

    def define(self, name: str, core: Core) -> None:
        run = compile_core(core)
        scope_at = self.scope
        self.scope = self.scope.bind("tm", name, _Thunk(lambda: evaluate(run, scope_at)))

    def load(self, decls: list[ElabDecl]) -> "Runtime":
        for d in decls:
            self.define(d.name, d.core)
        return self

    def value(self, name: str) -> Value:
        return self.scope.lookup("tm", name)

    def eval_core(self, core: Core) -> Value:
        return evaluate(compile_core(core), self.scope)


def run_program(decls: list[ElabDecl], entry: str) -> Value:
    return Runtime().load(decls).value(entry)


# ---------------------------------------------------------------- printing


def show_value(v: Value) -> str:
    if isinstance(v, Prim):
        return _show_raw(v.value)
    if isinstance(v, Unit):
        return "()"
    if isinstance(v, LabeledV):
        return show_value(v.payload)
    if isinstance(v, RecordV):
        if not v.fields:
            return "{}"
        return "{" + ", ".join(f"{i} = {show_value(x)}" for i, x in enumerate(v.fields)) + "}"
    if isinstance(v, VariantV):
        return f"#{v.tag}({show_value(v.payload)})"
    if isinstance(v, FUNCTION_VALUES):
        return "<fun>"
    raise InternalError(f"not a value: {v!r}")


def _show_raw(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, tuple):
        return "[" + ", ".join(_show_raw(e) for e in x) + "]"
    return show_value(x)


# ---------------------------------------------------------------- label freedom


def value_labels_free(v: Value, _seen: Optional[set] = None) -> bool:
    """Whether a value, including the code and environments of closures,
    holds no type or label anywhere."""
    from .core_ast import TLabel
    from .typecheck import _TYPE_CLASSES
    seen = _seen if _seen is not None else set()

    def walk(x) -> bool:
        if id(x) in seen:
            return True
        seen.add(id(x))
        if isinstance(x, _TYPE_CLASSES) or isinstance(x, TLabel):
            return False
        if isinstance(x, Scope):
            s = x
            while s is not None:
                val = s.value.value if isinstance(s.value, _Thunk) else s.value
                if val is not None and not walk(val):
                    return False
                s = s.parent
            return True
        if isinstance(x, (tuple, list)):
            return all(walk(e) for e in x)
        if isinstance(x, PrimSpec):
            return True
        if dataclasses.is_dataclass(x):
            return all(walk(getattr(x, f.name)) for f in dataclasses.fields(x))
        return isinstance(x, (int, bool, str, type(None)))

    return walk(v)
