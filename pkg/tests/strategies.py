"""Hypothesis strategies for small kinds, types and rows."""

from __future__ import annotations

from hypothesis import strategies as st

from rowo.core_ast import (
    KArrow, KRow, KType, LAB, TApp, TArrow, TCon, TForall, TLabel, TLabeled,
    TLam, TPi, TRow, TSigma, TSing, TVar, arrow,
)

VARS = ("a", "b", "c")
LABELS = ("p", "q", "r", "s", "t")
BASES = (TCon("Int"), TCon("Bool"), TApp(TCon("List"), TCon("Int")))


def kinds(max_depth: int = 2):
    base = st.sampled_from([KType(), LAB])
    return st.recursive(base, lambda k: st.one_of(
        st.builds(KRow, k), st.builds(KArrow, k, k)), max_leaves=3)


def raw_types(max_leaves: int = 8):
    """Types without regard to kinds: enough for binder-level properties."""
    leaf = st.one_of(st.sampled_from([TVar(v) for v in VARS]), st.sampled_from(BASES),
                     st.sampled_from([TLabel(l) for l in LABELS]), st.just(TArrow()))

    def extend(t):
        binder = st.sampled_from(VARS)
        return st.one_of(
            st.builds(arrow, t, t),
            st.builds(TApp, t, t),
            st.builds(TForall, binder, st.just(KType()), t),
            st.builds(TLam, binder, st.just(KType()), t),
            st.builds(TSing, t),
            st.builds(lambda l, b: TRow((TLabeled(l, b),)), t, t),
            st.builds(TPi, t),
            st.builds(TSigma, t),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def concrete_rows(max_arity: int = 5, labels=LABELS, payloads=BASES, distinct: bool = True):
    """Row literals over constant labels and base payload types."""
    if distinct:
        lab_lists = st.lists(st.sampled_from(labels), max_size=max_arity, unique=True)
    else:
        lab_lists = st.lists(st.sampled_from(labels), max_size=max_arity)
    return lab_lists.flatmap(lambda ls: st.lists(st.sampled_from(payloads), min_size=len(ls),
                                                 max_size=len(ls)).map(
        lambda ts: TRow(tuple(TLabeled(TLabel(l), t) for l, t in zip(ls, ts)))))


def well_kinded_types(max_leaves: int = 6):
    """Closed types of kind Type built from base types, records and variants."""
    def extend(t):
        entry = st.tuples(st.sampled_from(LABELS), t)
        row = st.lists(entry, max_size=3, unique_by=lambda e: e[0]).map(
            lambda es: TRow(tuple(TLabeled(TLabel(l), b) for l, b in es)))
        return st.one_of(
            st.builds(arrow, t, t),
            st.builds(TPi, row),
            st.builds(TSigma, row),
            st.builds(lambda b: TApp(TCon("List"), b), t),
            st.builds(lambda l: TSing(TLabel(l)), st.sampled_from(LABELS)),
        )

    return st.recursive(st.sampled_from(BASES[:2]), extend, max_leaves=max_leaves)


def surface_terms(max_leaves: int = 10):
    """Closed-enough surface terms for printer round trips (not typed)."""
    from rowo.core_ast import (
        Ana, App, BinOp, Branch, Concat, EmptyRec, FoldPi, Inj, LabelIntro,
        LabelVal, Lam, Lit, Prj, Syn, TyApp, TyLam, Unlabel, Var,
    )

    names = st.sampled_from(["x", "y", "f"])
    labels = st.sampled_from([LabelVal(l) for l in LABELS])
    leaf = st.one_of(st.builds(Var, names), labels, st.builds(Lit, st.integers(0, 9)),
                     st.builds(Lit, st.booleans()), st.just(EmptyRec()))
    types = well_kinded_types(4)
    ops = st.one_of(st.none(), st.just(TLam("a", KType(), TVar("a"))))

    def extend(t):
        return st.one_of(
            st.builds(App, t, t),
            st.builds(Lam, names, types, t),
            st.builds(TyLam, st.sampled_from(VARS), st.sampled_from([KType(), LAB, KRow(KType())]), t),
            st.builds(TyApp, t, types),
            st.builds(LabelIntro, labels, t),
            st.builds(Unlabel, t, labels),
            st.builds(Prj, st.sampled_from("LR"), t),
            st.builds(Inj, st.sampled_from("LR"), t),
            st.builds(Concat, t, t),
            st.builds(Branch, t, t),
            st.builds(Syn, ops, t),
            st.builds(Ana, ops, t),
            st.builds(FoldPi, t, t, t, t),
            st.builds(BinOp, st.sampled_from(["+", "-", "*", "==", "&&"]), t, t),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)
