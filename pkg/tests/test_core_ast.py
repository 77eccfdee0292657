from __future__ import annotations

import pytest
from hypothesis import assume, given

from rowo.core_ast import (
    Env, KArrow, KRow, KType, LAB, SourceSpan, TCombine, TCon, TForall,
    TLabel, TLabeled, TLam, TRow, TVar, alpha_eq, arrow, free_vars,
    erase_levels, same_kind, subst_ty, term_alpha_eq,
)
from rowo.surface import parse_term

from strategies import raw_types

INT, BOOL = TCon("Int"), TCon("Bool")
a, b = TVar("a"), TVar("b")


def test_subst_variable_hit():
    assert subst_ty(a, "a", INT) == INT


def test_subst_avoids_capture():
    t = TForall("b", KType(), arrow(a, b))
    out = subst_ty(t, "a", b)
    assert isinstance(out, TForall) and out.var != "b"
    assert alpha_eq(out, TForall("c", KType(), arrow(b, TVar("c"))))
    assert not alpha_eq(out, TForall("b", KType(), arrow(TVar("b"), TVar("b"))))


def test_subst_descends_through_rows():
    row = TRow((TLabeled(TLabel("l"), a),))
    out = subst_ty(arrow(row, a), "a", BOOL)
    assert out == arrow(TRow((TLabeled(TLabel("l"), BOOL),)), BOOL)


def test_subst_stops_at_shadowing_binder():
    t = TForall("a", KType(), a)
    assert subst_ty(t, "a", INT) == t


def test_alpha_eq_examples():
    assert alpha_eq(TForall("a", KType(), a), TForall("b", KType(), b))
    assert not alpha_eq(a, b)
    la = TLam("a", LAB, TLabeled(a, INT))
    lb = TLam("b", LAB, TLabeled(b, INT))
    assert alpha_eq(la, lb)


def test_alpha_eq_respects_binder_kinds():
    assert not alpha_eq(TForall("a", KType(), a), TForall("a", LAB, a))


def test_free_vars_examples():
    assert free_vars(TForall("a", KType(), arrow(a, b))) == {"b"}
    assert free_vars(INT) == set()
    assert free_vars(TCombine(TRow((TLabeled(TVar("l"), a),)), TVar("z"))) == {"l", "a", "z"}


def test_env_extension_is_persistent():
    e0 = Env().with_ty("z", KRow(KType()))
    e1 = e0.with_tm("x", INT)
    assert e0.type_of_var("x") is None
    assert e1.type_of_var("x") == INT
    assert e1.kind_of_var("z") == KRow(KType())
    assert len(e0) == 1 and len(e1) == 2


def test_source_span_rejects_reversed_range():
    with pytest.raises(AssertionError):
        SourceSpan(3, 2)


def test_kind_helpers():
    assert erase_levels(KArrow(KType(1), KRow(KType(2)))) == KArrow(KType(), KRow(KType()))
    assert same_kind(KType(1), KType(0))
    assert not same_kind(KType(), LAB)


def test_term_alpha_eq_renames_binders():
    t1 = parse_term("\\x:Int. x")
    t2 = parse_term("\\y:Int. y")
    t3 = parse_term("\\y:Int. 1")
    assert term_alpha_eq(t1, t2)
    assert not term_alpha_eq(t1, t3)


@given(raw_types())
def test_identity_substitution(t):
    assert alpha_eq(subst_ty(t, "a", TVar("a")), t)


@given(raw_types(), raw_types(), raw_types())
def test_alpha_eq_is_an_equivalence(x, y, z):
    assert alpha_eq(x, x)
    assert alpha_eq(x, y) == alpha_eq(y, x)
    if alpha_eq(x, y) and alpha_eq(y, z):
        assert alpha_eq(x, z)


@given(raw_types(), raw_types())
def test_renaming_bound_variable_preserves_alpha(body, _):
    t = TForall("a", KType(), body)
    renamed = TForall("fresh", KType(), subst_ty(body, "a", TVar("fresh")))
    assume("fresh" not in free_vars(body))
    assert alpha_eq(t, renamed)


@given(raw_types(), raw_types(), raw_types())
def test_substitutions_commute(t, u, v):
    # the usual premise: the outer replacement must not mention ``a``
    assume("a" not in free_vars(v))
    lhs = subst_ty(subst_ty(t, "a", u), "b", v)
    rhs = subst_ty(subst_ty(t, "b", v), "a", subst_ty(u, "b", v))
    assert alpha_eq(lhs, rhs)


def test_commutation_needs_the_outer_replacement_free_of_the_inner_variable():
    # t = b, u = Int, v = a: side condition b not in fv(u) holds, yet
    # the two orders differ because v mentions a
    lhs = subst_ty(subst_ty(b, "a", INT), "b", a)
    rhs = subst_ty(subst_ty(b, "b", a), "a", subst_ty(INT, "b", a))
    assert lhs == a and rhs == INT


@given(raw_types(), raw_types())
def test_substitution_removes_the_variable(t, u):
    assume("a" not in free_vars(u))
    assert "a" not in free_vars(subst_ty(t, "a", u))
