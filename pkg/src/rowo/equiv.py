"""Type and predicate equivalence by normalization.

``normalize`` computes a kind-directed normal form:

* beta reduction, taken only when the argument kind matches the binder
  kind (a lambda applied to a row of its domain kind is a lifting, not a
  redex);
* lifting: a constructor applied to a row literal is pushed into every
  entry, a row literal of constructors applied to a type likewise, and
  ``(K rho) t`` becomes ``K (rho t)`` for ``K`` in {Pi, Sigma};
* Pi or Sigma of a one-entry literal collapses to the labeled type;
* row literals are put in the active theory's canonical order.

Lifting over a row that is not a literal yet (a row variable, say) yields
the internal ``TMap`` node.  Nested maps are fused and maps by the
identity vanish, so ``F (G z)`` and ``(\\s. F (G s)) z`` share one normal
form.
"""

from __future__ import annotations

from typing import Optional

from .core_ast import (
    Env, KAny, KArrow, KLab, KRow, KType, Kind, PCombine, PContain, Pred,
    TApp, TArrow, TCombine, TCon, TForall, TLabel, TLabeled, TLam, TMap, TPi,
    TQual, TRow, TSigma, TSing, TVar, Type, alpha_eq, free_vars, fresh_name,
    merge_kinds, same_kind, subst_ty,
)
from .kinds import PRIM_KINDS, KindError


def _default_theory():
    from .rows import SIMPLE
    return SIMPLE


class Normalizer:
    def __init__(self, theory=None, sing: bool = True):
        self.theory = theory or _default_theory()
        self.sing = sing

    # ------------------------------------------------------------ entry

    def nf(self, ctx: dict[str, Kind], t: Type) -> tuple[Type, Kind]:
        if isinstance(t, TVar):
            k = ctx.get(t.name)
            if k is None:
                raise KindError("UnboundVar", f"unbound type variable {t.name}")
            return t, k
        if isinstance(t, TArrow):
            return t, KArrow(KType(), KArrow(KType(), KType()))
        if isinstance(t, TCon):
            return t, PRIM_KINDS[t.name]
        if isinstance(t, TLabel):
            return t, KLab()
        if isinstance(t, TSing):
            return TSing(self.nf(ctx, t.label)[0]), KType()
        if isinstance(t, TLabeled):
            body, k = self.nf(ctx, t.body)
            return TLabeled(self.nf(ctx, t.label)[0], body), k
        if isinstance(t, TQual):
            return TQual(self.nf_pred(ctx, t.pred), self.nf(ctx, t.body)[0]), KType()
        if isinstance(t, TForall):
            body, _ = self.nf({**ctx, t.var: t.kind}, t.body)
            return TForall(t.var, t.kind, body, t.implicit), KType()
        if isinstance(t, TLam):
            body, kb = self.nf({**ctx, t.var: t.kind}, t.body)
            return TLam(t.var, t.kind, body), KArrow(t.kind, kb)
        if isinstance(t, (TPi, TSigma)):
            row, kr = self.nf(ctx, t.row)
            return self.mk_record(type(t), row, kr)
        if isinstance(t, TRow):
            return self.nf_row(ctx, t)
        if isinstance(t, TCombine):
            l, kl = self.nf(ctx, t.left)
            r, kr = self.nf(ctx, t.right)
            if isinstance(l, TRow) and isinstance(r, TRow):
                merged = self.theory.combine_literals(l.entries, r.entries)
                if merged is not None:
                    return TRow(tuple(self.theory.canonical(merged))), merge_kinds(kl, kr)
            return TCombine(l, r), merge_kinds(kl, kr)
        if isinstance(t, TMap):
            f, kf = self.nf(ctx, t.fn)
            r, kr = self.nf(ctx, t.row)
            return self.lift2(ctx, f, kf, r, kr)
        if isinstance(t, TApp):
            f, kf = self.nf(ctx, t.fun)
            x, kx = self.nf(ctx, t.arg)
            return self.apply(ctx, f, kf, x, kx)
        raise KindError("KindMismatch", f"not a type: {t!r}")

    def nf_pred(self, ctx, p: Pred) -> Pred:
        if isinstance(p, PContain):
            return PContain(p.dir, self.nf(ctx, p.sub)[0], self.nf(ctx, p.sup)[0])
        return PCombine(self.nf(ctx, p.left)[0], self.nf(ctx, p.right)[0], self.nf(ctx, p.result)[0])

    def nf_row(self, ctx, t: TRow) -> tuple[Type, Kind]:
        elem: Kind = KAny()
        entries = []
        for e in t.entries:
            body, k = self.nf(ctx, e.body)
            elem = merge_kinds(elem, k)
            entries.append(TLabeled(self.nf(ctx, e.label)[0], body))
        return TRow(tuple(self.theory.canonical(entries))), KRow(elem)

    # ------------------------------------------------------------ pieces

    def mk_record(self, ctor, row: Type, kr: Kind) -> tuple[Type, Kind]:
        elem = kr.elem if isinstance(kr, KRow) else KAny()
        if self.sing and isinstance(row, TRow) and len(row.entries) == 1:
            return row.entries[0], elem
        return ctor(row), elem

    def apply(self, ctx, f: Type, kf: Kind, x: Type, kx: Kind) -> tuple[Type, Kind]:
        if isinstance(kf, KAny):
            return TApp(f, x), KAny()
        if isinstance(kf, KArrow):
            if same_kind(kf.dom, kx):
                return self.beta(ctx, f, kf, x, kx), kf.cod
            if isinstance(kx, KRow) and same_kind(kf.dom, kx.elem):
                return self.lift2(ctx, f, kf, x, kx)
        if isinstance(kf, KRow):
            if isinstance(kf.elem, KAny):
                return TRow(()), KRow(KAny())
            if isinstance(kf.elem, KArrow):
                return self.lift1(ctx, f, kf, x, kx)
        raise KindError("KindMismatch", "ill-kinded application during normalization")

    def beta(self, ctx, f: Type, kf: KArrow, x: Type, kx: Kind) -> Type:
        if isinstance(f, TLam):
            return self.nf(ctx, subst_ty(f.body, f.var, x))[0]
        if isinstance(f, TLabeled):
            # (l |> phi) t  ~>  l |> phi t
            return TLabeled(f.label, self.apply(ctx, f.body, kf, x, kx)[0])
        if isinstance(f, (TPi, TSigma)):
            # (K rho) t  ~>  K (rho t)
            row, kr = self.lift1(ctx, f.row, KRow(kf), x, kx)
            return self.mk_record(type(f), row, kr)[0]
        return TApp(f, x)

    def lift1(self, ctx, f: Type, kf: KRow, x: Type, kx: Kind) -> tuple[Type, Kind]:
        """A row of constructors applied to a type."""
        fk: KArrow = kf.elem
        out = KRow(fk.cod)
        if isinstance(f, TRow):
            entries = [TLabeled(e.label, self.apply(ctx, e.body, fk, x, kx)[0]) for e in f.entries]
            return TRow(tuple(entries)), out
        if isinstance(f, TMap):
            g, kg = self.nf(ctx, f.fn)
            s = fresh_name("s", free_vars(g) | free_vars(x) | set(ctx))
            h = TLam(s, kg.dom, TApp(TApp(g, TVar(s)), x))
            h, _ = self.nf(ctx, h)
            return self.make_map(h, f.row), out
        s = fresh_name("s", free_vars(x) | set(ctx))
        h = TLam(s, fk, TApp(TVar(s), x))
        return self.make_map(h, f), out

    def lift2(self, ctx, f: Type, kf: Kind, x: Type, kx: Kind) -> tuple[Type, Kind]:
        """A constructor applied to a row."""
        out = KRow(kf.cod)
        if isinstance(x, TRow):
            elem = kx.elem if isinstance(kx, KRow) else KAny()
            entries = [TLabeled(e.label, self.apply(ctx, f, kf, e.body, elem)[0]) for e in x.entries]
            return TRow(tuple(entries)), out
        if isinstance(x, TMap):
            g, kg = self.nf(ctx, x.fn)
            s = fresh_name("s", free_vars(g) | free_vars(f) | set(ctx))
            h = TLam(s, kg.dom, TApp(f, TApp(g, TVar(s))))
            h, _ = self.nf(ctx, h)
            return self.make_map(h, x.row), out
        return self.make_map(f, x), out

    @staticmethod
    def make_map(h: Type, row: Type) -> Type:
        while isinstance(h, TLam):
            if isinstance(h.body, TVar) and h.body.name == h.var:
                return row
            if (isinstance(h.body, TApp) and isinstance(h.body.arg, TVar)
                    and h.body.arg.name == h.var and h.var not in free_vars(h.body.fun)):
                h = h.body.fun
                continue
            break
        return TMap(h, row)


# ---------------------------------------------------------------- public API


def _ctx(env: Optional[Env]) -> dict[str, Kind]:
    return env.ty_kinds() if env is not None else {}


def normalize(env: Optional[Env], t: Type, theory=None) -> Type:
    return Normalizer(theory).nf(_ctx(env), t)[0]


def normalize_with_kind(env: Optional[Env], t: Type, theory=None) -> tuple[Type, Kind]:
    return Normalizer(theory).nf(_ctx(env), t)


def normalize_rep(env: Optional[Env], t: Type, theory=None) -> Type:
    """Normal form without collapsing singleton records and variants."""
    return Normalizer(theory, sing=False).nf(_ctx(env), t)[0]


def normalize_pred(env: Optional[Env], p: Pred, theory=None) -> Pred:
    return Normalizer(theory).nf_pred(_ctx(env), p)


def normalize_label(env: Optional[Env], t: Type) -> Type:
    return Normalizer(None).nf(_ctx(env), t)[0]


def type_equiv(env: Optional[Env], a: Type, b: Type, theory=None) -> bool:
    n = Normalizer(theory)
    ctx = _ctx(env)
    return alpha_eq(n.nf(ctx, a)[0], n.nf(ctx, b)[0])


def pred_equiv(env: Optional[Env], a: Pred, b: Pred, theory=None) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, PContain) and a.dir != b.dir:
        theory = theory or _default_theory()
        if not theory.directions_interchangeable:
            return False
    n = Normalizer(theory)
    ctx = _ctx(env)
    na, nb = n.nf_pred(ctx, a), n.nf_pred(ctx, b)
    if isinstance(a, PContain):
        return alpha_eq(na.sub, nb.sub) and alpha_eq(na.sup, nb.sup)
    return alpha_eq(na.left, nb.left) and alpha_eq(na.right, nb.right) and alpha_eq(na.result, nb.result)
