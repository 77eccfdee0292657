"""The ten acceptance criteria.

Each criterion is computed by a ``criterion_*`` function returning
``(passed, detail)``; the matching test records the line printed in the
run summary (see conftest.py) and then asserts.  Reference signatures
below are written out by hand rather than read from the corpus.
"""

from __future__ import annotations

import dataclasses
import io
import itertools
import random
from dataclasses import replace


from rowo.cli import CliConfig, cmd_check
from rowo.core_ast import (
    Env, KArrow, KRow, KType, LabelVal, PCombine, PContain, TCon, TForall, TLabel, TLabeled,
    TApp, TLam, TPi, TRow, TSigma, TyLam, arrows, erase_levels,
)
from rowo.equiv import normalize, type_equiv
from rowo.eval import (
    FUNCTION_VALUES, Prim, PrimFn, RecordV, Runtime, VariantV, apply_value, as_record,
    as_variant, show_value, unlabel, value_labels_free,
)
from rowo.kinds import KindError, kind_of, level_of
from rowo.prims import INT, PrimSpec
from rowo.rows import SCOPED, SIMPLE, THEORIES, ConcreteRow, TheoryError, UnsolvedError, entail_concrete, validate_combine, validate_contain
from rowo.surface import Parser, Program, parse
from rowo.typecheck import Checker, TypingError, prelude_env

from helpers import ACCEPTANCE, CORPUS, CORPUS_FILES, DATA, read_program
from oracles import EquivOracle, combine_splits, contain_maps, enumerate_universe, labels_overlap, structural_key


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[n])


def _generic(prog: Program) -> Program:
    """Drop the closed examples, keeping the label-generic definitions."""
    keep = tuple(d for d in prog.decls if not d.name.startswith(("test_", "ex_")) and d.name != "main")
    return replace(prog, decls=keep)


def _base(path, extra: str = "", theory: str = "simple"):
    """Elaborate the generic part of a corpus file, then ``extra`` on top."""
    prog = _generic(read_program(path))
    checker = Checker(theory)
    decls, env = checker.elaborate(prog)
    if extra:
        more = Parser(extra, dict(prog.aliases)).parse_program()
        decls = decls + checker.elaborate(more, env)[0]
    return Runtime().load(decls)


# ---------------------------------------------------------------- 1


REFERENCE_ALIASES = """
type Bool2 = Sigma (<True |> Pi <>> o+ <False |> Pi <>>);
type Iter = \\f:Type -> Type, g:Type -> Type, z:Row Type. forall l:Lab, u:Type. (<l |> u> <: z) => Sing l -> f u -> g u;
type Xf = \\f:Type -> Type, g:Type -> Type, a:Type. f a -> g a;
type Functor = \\f:Type -> Type. forall t:Type, u:Type. (t -> u) -> f t -> f u;
type Eq = \\t:Type. t -> t -> Bool;
"""

REFERENCE_SIGS = {
    "sel": "forall l:Lab, t:Type, z:Row Type. (<l |> t> <: z) => Pi z -> Sing l -> t",
    "upd": "forall l:Lab, t:Type, u:Type, z1:Row Type, z2:Row Type. (z1 <: <l |> t>) => "
           "Sing l -> u -> Pi (z1 o+ z2) -> Pi (<l |> u> o+ z2)",
    "con": "forall l:Lab, t:Type, z:Row Type. (<l |> t> <: z) => Sing l -> t -> Sigma z",
    "case": "forall l:Lab, t:Type, u:Type. Sing l -> (t -> u) -> Sigma <l |> t> -> u",
    "ifte": "forall t:Type. Bool2 -> t -> t -> t",
    "reify": "forall z:Row Type, t:Type. (Sigma z -> t) -> Pi (z -> t)",
    "reflect": "forall z:Row Type, t:Type. Pi (z -> t) -> Sigma z -> t",
    "MapPi": "forall z:Row Type, f:Type -> Type, g:Type -> Type. Iter f g z -> Pi (f z) -> Pi (g z)",
    "MapSigma": "forall z:Row Type, f:Type -> Type, g:Type -> Type. Iter f g z -> Sigma (f z) -> Sigma (g z)",
    "rapply": "forall f:Type -> Type, g:Type -> Type, z:Row Type. Pi (Xf f g z) -> Pi (f z) -> Pi (g z)",
    "fmapS": "forall z:Row (Type -> Type). Pi (Functor z) -> Functor (Sigma z)",
    "fmapP": "forall z:Row (Type -> Type). Pi (Functor z) -> Functor (Pi z)",
    "eqS": "forall z:Row Type. Pi (Eq z) -> Eq (Sigma z)",
    "eqP": "forall z:Row Type. Pi (Eq z) -> Eq (Pi z)",
}

TYPE_OPERATORS = {"Iter": "maps.ro", "Xf": "maps.ro", "Functor": "functor.ro", "Eq": "eq.ro"}


def criterion_1():
    aliases = dict(parse(REFERENCE_ALIASES).aliases)
    found: set[tuple[str, str]] = set()
    problems = []
    for theory_name in ("minimal", "simple"):
        theory = THEORIES[theory_name]
        env0 = prelude_env()
        for path in CORPUS_FILES:
            if path.name == "monad.ro":
                continue
            prog = _generic(read_program(path))
            try:
                decls, _ = Checker(theory_name).elaborate(prog)
            except (TypingError, KindError) as exc:
                problems.append(f"{path.name} under {theory_name}: {exc}")
                continue
            for d in decls:
                if d.name not in REFERENCE_SIGS:
                    continue
                want = Parser(REFERENCE_SIGS[d.name], aliases).parse_type()
                want = Checker(theory_name).prepare_signature(env0, want)
                if type_equiv(env0, d.ty, want, theory):
                    found.add((d.name, theory_name))
                else:
                    problems.append(f"{d.name} under {theory_name}: signature differs")
        for name, file in TYPE_OPERATORS.items():
            mine = dict(read_program(CORPUS / file).aliases)[name]
            ref = aliases[name]
            try:
                same = kind_of(Env(), mine, theory) == kind_of(Env(), ref, theory)
            except KindError as exc:
                problems.append(f"{name} under {theory_name}: {exc}")
                continue
            if same and type_equiv(Env(), mine, ref, theory):
                found.add((name, theory_name))
            else:
                problems.append(f"{name} under {theory_name}: definition differs")
    names = set(REFERENCE_SIGS) | set(TYPE_OPERATORS)
    missing = sorted(f"{n}/{t}" for n in names for t in ("minimal", "simple") if (n, t) not in found)
    ok = not problems and not missing
    return ok, f"{len(names)} definitions x 2 theories; problems={problems[:3]} missing={missing}"


def test_criterion_1_corpus_typechecks():
    ok, detail = criterion_1()
    record(1, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 2


def _reason(path) -> str:
    p = read_program(path)
    try:
        Checker(p.theory).elaborate(p)
    except TypingError as exc:
        return exc.reason
    except KindError as exc:
        return exc.reason
    return "ok"


def criterion_2():
    got = {
        "contain-only eqS": _reason(DATA / "eq_contain.ro"),
        "simple overlap": _reason(DATA / "overlap.ro"),
        "scoped shadowed": _reason(DATA / "scoped_shadowed.ro"),
        "scoped reorder": _reason(DATA / "scoped_reorder.ro"),
    }
    want = {"contain-only eqS": "PredicateUnsolved", "simple overlap": "PredicateUnsolved",
            "scoped shadowed": "PredicateUnsolved", "scoped reorder": "ok"}
    # the same four goals straight through the solver
    x_int, x_bool = TLabeled(TLabel("x"), INT), TLabeled(TLabel("x"), TCon("Bool"))
    y_int = TLabeled(TLabel("y"), INT)
    direct = []
    try:
        entail_concrete(SCOPED, PContain("L", TRow((x_bool,)), TRow((x_int, x_bool))))
        direct.append("shadowed accepted")
    except UnsolvedError:
        pass
    ev = entail_concrete(SCOPED, PContain("L", TRow((y_int,)), TRow((x_int, y_int))))
    if ev.map != (1,):
        direct.append(f"reorder evidence {ev.map}")
    try:
        entail_concrete(SIMPLE, PCombine(TRow((x_int,)), TRow((x_bool,)), TRow((x_int, x_bool))))
        direct.append("overlap accepted")
    except (TheoryError, UnsolvedError):
        pass
    ok = got == want and not direct
    return ok, f"{got} solver={direct or 'agrees'}"


def test_criterion_2_negative_typing():
    ok, detail = criterion_2()
    record(2, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 3


LABELS = ("a", "b", "c", "d", "e")
BASES = (TCon("Int"), TCon("Bool"), TApp(TCon("List"), TCon("Int")))


def _entry(rng, label=None):
    return TLabeled(TLabel(label or rng.choice(LABELS)), rng.choice(BASES))


def _random_row(rng, n):
    return [TLabeled(TLabel(l), rng.choice(BASES)) for l in rng.sample(LABELS, n)]


def _perturb(rng, entries):
    entries = list(entries)
    if entries and rng.random() < 0.4:
        k = rng.randrange(len(entries))
        entries[k] = TLabeled(entries[k].label, rng.choice(BASES))
    return entries


def _canon(entries) -> TRow:
    return TRow(tuple(SIMPLE.canonical(list(entries))))


def _contain_case(rng):
    sup = _random_row(rng, rng.randint(0, 5))
    if rng.random() < 0.6:
        sub = _perturb(rng, rng.sample(sup, rng.randint(0, len(sup))))
    else:
        sub = _random_row(rng, rng.randint(0, 5))
    sub_r, sup_r = TRow(tuple(sub)), TRow(tuple(sup))
    maps = contain_maps(_canon(sub), _canon(sup))
    try:
        ev = entail_concrete(SIMPLE, PContain(rng.choice("LR"), sub_r, sup_r))
    except UnsolvedError:
        return not maps, False
    validate_contain(ev, ConcreteRow.of(_canon(sub)), ConcreteRow.of(_canon(sup)))
    return ev.map in maps, True


def _combine_case(rng):
    res = _random_row(rng, rng.randint(0, 5))
    if rng.random() < 0.6:
        cut = rng.randint(0, len(res))
        order = rng.sample(res, len(res))
        left, right = _perturb(rng, order[:cut]), order[cut:]
        if right and rng.random() < 0.15:
            left = left + [TLabeled(right[0].label, rng.choice(BASES))]  # overlap
        if res and rng.random() < 0.15:
            res = res[1:]
    else:
        left = _random_row(rng, rng.randint(0, 3))
        right = _random_row(rng, rng.randint(0, 3))
    l_r, r_r, res_r = TRow(tuple(left)), TRow(tuple(right)), TRow(tuple(res))
    if labels_overlap(l_r, r_r):
        try:
            entail_concrete(SIMPLE, PCombine(l_r, r_r, res_r))
        except TheoryError:
            return True, False
        return False, True
    splits = combine_splits(_canon(left), _canon(right), _canon(res))
    try:
        ev = entail_concrete(SIMPLE, PCombine(l_r, r_r, res_r))
    except UnsolvedError:
        return not splits, False
    validate_combine(ev)
    return ev.split in splits, True


def criterion_3(n_each: int = 5000):
    rng = random.Random(2024)
    bad = accepted = 0
    for make in (_contain_case, _combine_case):
        for _ in range(n_each):
            agree, solved = make(rng)
            bad += not agree
            accepted += solved
    ok = bad == 0
    return ok, (f"{2 * n_each} goals ({accepted} solved, {2 * n_each - accepted} rejected), "
                f"{bad} disagreements with brute force")


def test_criterion_3_evidence_oracle():
    ok, detail = criterion_3()
    record(3, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- shared row universe for 4 and 5


PAYLOADS = {
    "Int": [Prim(0), Prim(1), Prim(2)],
    "Bool": [Prim(False), Prim(True)],
    "Pi <>": [RecordV(())],
}
EQ_FOR = {"Int": "eqInt", "Bool": "eqBool", "Pi <>": "(\\(p q : Pi <>). true)"}


def _rows(max_arity: int = 4):
    for n in range(max_arity + 1):
        for tys in itertools.product(PAYLOADS, repeat=n):
            yield list(zip("abcd", tys))


def _row_text(row) -> str:
    return "<" + ", ".join(f"{l} |> {t}" for l, t in row) + ">"


def _record_text(row, field) -> str:
    if not row:
        return "()"
    return " ++ ".join(f"'{l} |> {field(l, t)}" for l, t in row)


def _variants(row):
    return [VariantV(i, p) for i, (_, t) in enumerate(row) for p in PAYLOADS[t]]


def _norm(v):
    """A label-free observation that identifies the interchangeable
    representations of singleton records and variants."""
    if isinstance(v, (RecordV,)):
        return ("rec", tuple(_norm(x) for x in v.fields))
    if isinstance(v, VariantV):
        return ("var", v.tag, _norm(v.payload))
    if isinstance(v, Prim):
        return v.value
    if isinstance(v, FUNCTION_VALUES):
        return "<fun>"
    return ("lab", _norm(unlabel(v)))


# ---------------------------------------------------------------- 4


def _con_fn(label: str, ty: str, row: str) -> str:
    return "(\\x:" + ty + ". con [" + label + "] [" + ty + "] [" + row + "] '" + label + " x)"


def criterion_4():
    rows = list(_rows())
    checked, bad = 0, []
    for row in rows:
        R = _row_text(row)
        src = (f"idS = reflect [{R}] [Sigma {R}] (reify [{R}] [Sigma {R}] (\\v:Sigma {R}. v));\n"
               f"dd : Pi ({R} -> Sigma {R});\n"
               f"dd = {_record_text(row, lambda l, t: _con_fn(l, t, R))};\n"
               f"rd = reify [{R}] [Sigma {R}] (reflect [{R}] [Sigma {R}] dd);\n")
        rt = _base(CORPUS / "duality.ro", src)
        ids, dd, rd = rt.value("idS"), as_record(rt.value("dd")), as_record(rt.value("rd"))
        if len(dd.fields) != len(row) or len(rd.fields) != len(row):
            bad.append((R, "arity"))
        for v in _variants(row):
            checked += 1
            if _norm(as_variant(apply_value(ids, v))) != _norm(v):
                bad.append((R, "reflect.reify", v))
            i = v.tag
            a = apply_value(rd.fields[i], v.payload)
            b = apply_value(dd.fields[i], v.payload)
            if _norm(as_variant(a)) != _norm(as_variant(b)):
                bad.append((R, "reify.reflect", v))
    ok = not bad
    return ok, f"{len(rows)} rows, {checked} inputs per direction, {len(bad)} mismatches {bad[:2]}"


def test_criterion_4_duality_roundtrip():
    ok, detail = criterion_4()
    record(4, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 5


def _records(row):
    for vals in itertools.product(*(PAYLOADS[t] for _, t in row)):
        yield RecordV(tuple(vals))


def criterion_5():
    checked, bad = 0, []
    for row in _rows():
        R = _row_text(row)
        src = (f"ds : Pi (Eq {R});\nds = {_record_text(row, lambda l, t: EQ_FOR[t])};\n"
               f"eS = eqS [{R}] ds;\neP = eqP [{R}] ds;\n")
        rt = _base(CORPUS / "eq.ro", src)
        eS, eP = rt.value("eS"), rt.value("eP")
        vs = _variants(row)
        for v, w in itertools.product(vs, vs):
            checked += 1
            got = apply_value(apply_value(eS, v), w).value
            if got != (_norm(v) == _norm(w)):
                bad.append(("eqS", R, v, w))
        rs = list(_records(row))
        for r, s in itertools.product(rs, rs):
            checked += 1
            got = apply_value(apply_value(eP, r), s).value
            if got != (r == s):
                bad.append(("eqP", R, r, s))
    ok = not bad
    return ok, f"{checked} comparisons over rows of arity <= 4, {len(bad)} mismatches {bad[:2]}"


def test_criterion_5_equality():
    ok, detail = criterion_5()
    record(5, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 6


def _int_fn(name, fn) -> PrimFn:
    return PrimFn(PrimSpec(name, arrows(INT, INT), 0, 1, fn), 0)


def _affine(rng):
    a, b = rng.randint(-3, 3), rng.randint(-5, 5)
    return (a, b), _int_fn(f"{a}x+{b}", lambda x: a * x + b)


def criterion_6(samples: int = 1000):
    src = ("fP : (Int -> Int) -> Pi (FR Int) -> Pi (FR Int);\nfP = fmapP [FR] ex_functors [Int] [Int];\n"
           "fS : (Int -> Int) -> Sigma (FR Int) -> Sigma (FR Int);\nfS = fmapS [FR] ex_functors [Int] [Int];\n")
    prog = read_program(CORPUS / "functor.ro")
    keep = tuple(d for d in prog.decls if not d.name.startswith("test_"))
    checker = Checker("simple")
    decls, env = checker.elaborate(replace(prog, decls=keep))
    decls = decls + checker.elaborate(Parser(src, dict(prog.aliases)).parse_program(), env)[0]
    rt = Runtime().load(decls)
    fP, fS = rt.value("fP"), rt.value("fS")
    ident = _int_fn("id", lambda x: x)
    rng = random.Random(6)
    fails = {"P id": 0, "P comp": 0, "S id": 0, "S comp": 0}

    def rand_list():
        return Prim(tuple(rng.randint(-9, 9) for _ in range(rng.randint(0, 4))))

    for _ in range(samples):
        rec = RecordV((rand_list(), Prim(rng.randint(-9, 9))))
        var = VariantV(0, rand_list()) if rng.random() < 0.5 else VariantV(1, Prim(rng.randint(-9, 9)))
        (a1, b1), f = _affine(rng)
        (a2, b2), g = _affine(rng)
        gf = _int_fn("g.f", lambda x, a1=a1, b1=b1, a2=a2, b2=b2: a2 * (a1 * x + b1) + b2)
        for tag, fm, x in (("P", fP, rec), ("S", fS, var)):
            if show_value(apply_value(apply_value(fm, ident), x)) != show_value(x):
                fails[f"{tag} id"] += 1
            lhs = apply_value(apply_value(fm, gf), x)
            rhs = apply_value(apply_value(fm, g), apply_value(apply_value(fm, f), x))
            if show_value(lhs) != show_value(rhs):
                fails[f"{tag} comp"] += 1
    ok = not any(fails.values())
    return ok, f"{samples} samples per law; failures {fails}"


def test_criterion_6_functor_laws():
    ok, detail = criterion_6()
    record(6, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 7


BINDERS = (TForall, TLam, TyLam)


def _walk_labels(x, bound, out):
    if isinstance(x, TLabel):
        if x.name not in bound:
            out.add(x.name)
        return
    if isinstance(x, LabelVal):
        out.add(x.name)
        return
    if isinstance(x, tuple):
        for y in x:
            _walk_labels(y, bound, out)
        return
    if not dataclasses.is_dataclass(x) or isinstance(x, type):
        return
    inner = bound | {x.var} if isinstance(x, BINDERS) else bound
    for f in dataclasses.fields(x):
        _walk_labels(getattr(x, f.name), inner, out)


def _rename(x, m, bound):
    if isinstance(x, TLabel):
        return x if x.name in bound else TLabel(m[x.name])
    if isinstance(x, LabelVal):
        return replace(x, name=m[x.name])
    if isinstance(x, tuple):
        return tuple(_rename(y, m, bound) for y in x)
    if not dataclasses.is_dataclass(x) or isinstance(x, type):
        return x
    inner = bound | {x.var} if isinstance(x, BINDERS) else bound
    changes = {}
    for f in dataclasses.fields(x):
        v = getattr(x, f.name)
        nv = _rename(v, m, inner)
        if nv is not v:
            changes[f.name] = nv
    return replace(x, **changes) if changes else x


def program_labels(prog: Program) -> set[str]:
    out: set[str] = set()
    for d in prog.decls:
        _walk_labels(d.sig, frozenset(), out)
        _walk_labels(d.body, frozenset(), out)
    return out


def rename_program(prog: Program, m: dict[str, str]) -> Program:
    decls = tuple(replace(d, sig=_rename(d.sig, m, frozenset()), body=_rename(d.body, m, frozenset()))
                  for d in prog.decls)
    return replace(prog, decls=decls)


def observe(v, ty, inverse):
    """A result with every positional record field or variant tag keyed by
    the (original) label its static type gives it."""
    if isinstance(ty, TLabeled) and isinstance(ty.label, TLabel):
        return ("one", inverse[ty.label.name], observe(unlabel(v), ty.body, inverse))
    if isinstance(ty, TPi) and isinstance(ty.row, TRow):
        fields = as_record(v).fields
        return ("rec", tuple(sorted((inverse[e.label.name], repr(observe(x, e.body, inverse)))
                                    for x, e in zip(fields, ty.row.entries))))
    if isinstance(ty, TSigma) and isinstance(ty.row, TRow):
        w = as_variant(v)
        e = ty.row.entries[w.tag]
        return ("var", inverse[e.label.name], observe(w.payload, e.body, inverse))
    if isinstance(v, Prim):
        return ("prim", v.value)
    if isinstance(v, FUNCTION_VALUES):
        return ("fun",)
    return ("other", show_value(v))


ERASURE_PROGRAMS = [*CORPUS_FILES, DATA / "scoped_reorder.ro", DATA / "eq_nc.ro", DATA / "syn_copy.ro"]


def _results(prog: Program, inverse):
    checker = Checker(prog.theory, stratified=prog.mode == "stratified")
    decls = checker.elaborate(prog)[0]
    rt = Runtime().load(decls)
    out, clean = {}, True
    for d in decls:
        if not d.name.startswith("test_"):
            continue
        v = rt.value(d.name)
        clean = clean and value_labels_free(v)
        out[d.name] = observe(v, normalize(None, d.ty, checker.theory), inverse)
    return out, clean


def criterion_7(renamings: int = 100):
    rng = random.Random(77)
    diffs, dirty, runs = [], 0, 0
    pool = ["w" + "".join(p) for p in itertools.product("abcdefghijk", repeat=2)]
    for path in ERASURE_PROGRAMS:
        prog = read_program(path)
        labels = sorted(program_labels(prog))
        ident = {l: l for l in labels}
        base, clean = _results(prog, ident)
        dirty += not clean
        for _ in range(renamings):
            targets = rng.sample(pool, len(labels))
            m = dict(zip(labels, targets))
            got, clean = _results(rename_program(prog, m), {v: k for k, v in m.items()})
            runs += 1
            dirty += not clean
            if got != base:
                diffs.append((path.name, m))
    # no Value constructor has a field that could hold a label or a type
    from rowo import eval as ev
    value_classes = [ev.Closure, ev.TyClosure, ev.EvClosure, ev.Unit, ev.LabeledV, ev.RecordV,
                     ev.VariantV, ev.Prim, ev.PrimFn, ev.BranchFn, ev.AnaFn]
    label_fields = [f"{c.__name__}.{f.name}" for c in value_classes for f in dataclasses.fields(c)
                    if "label" in f.name.lower() or "Label" in str(f.type) or "Type" == str(f.type)]
    ok = not diffs and not dirty and not label_fields
    return ok, (f"{len(ERASURE_PROGRAMS)} programs x {renamings} renamings ({runs} runs), "
                f"{len(diffs)} differences, {dirty} label-carrying values, label fields {label_fields}")


def test_criterion_7_label_erasure():
    ok, detail = criterion_7()
    record(7, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 8


def _all_corpus_types():
    for path in CORPUS_FILES:
        prog = read_program(path)
        checker = Checker(prog.theory, stratified=prog.mode == "stratified")
        for d in checker.elaborate(prog)[0]:
            yield d.ty
        for _, t in prog.aliases:
            yield t


def criterion_8():
    notes = []
    prog = read_program(CORPUS / "monad.ro")
    try:
        Checker("simple", stratified=True).elaborate(prog)
    except (TypingError, KindError) as exc:
        notes.append(f"monad.ro rejected: {exc}")
    monad = dict(prog.aliases)["Monad"]
    env = Env().with_ty("m", KArrow(KType(0), KType(0)))
    row = monad.body.row if isinstance(monad, TLam) else None
    k, lvl = level_of(env, row)
    if not (isinstance(k, KRow) and k.elem == KType(1) and lvl == 1):
        notes.append(f"Monad row at {k}, level {lvl}")
    # the same dictionary cannot go through a level-0 selector
    low = ("%stratified\n" + (CORPUS / "monad.ro").read_text().replace("t:Type^1, z:Row Type^1", "t:Type, z:Row Type"))
    try:
        p = parse(low)
        Checker("simple", stratified=True).elaborate(p)
        notes.append("level-0 selector accepted")
    except (TypingError, KindError):
        pass
    n, disagree = 0, 0
    for t in _all_corpus_types():
        n += 1
        if erase_levels(level_of(Env(), t)[0]) != kind_of(Env(), t):
            disagree += 1
    if disagree:
        notes.append(f"{disagree} level-erasure disagreements")
    ok = not notes
    return ok, f"Monad row Row Type^1 at level {lvl}; {n} corpus types, level erasure agrees; {notes}"


def test_criterion_8_stratification():
    ok, detail = criterion_8()
    record(8, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 9


def criterion_9():
    universe = enumerate_universe(4, 14)
    oracle = EquivOracle(universe)
    classes = oracle.classes(universe)
    bad = 0
    reps = {}
    for members in classes.values():
        rep = members[0]
        for m in members[1:]:
            if not type_equiv(None, rep, m):
                bad += 1
        reps.setdefault(structural_key(normalize(None, rep)), []).append(rep)
    split = sum(len(v) - 1 for v in reps.values())
    ok = bad == 0 and split == 0
    return ok, (f"{len(universe)} seed types, {len(oracle.terms)} after closure, {len(classes)} classes; "
                f"{bad} missed equivalences, {split} false equivalences")


def test_criterion_9_equivalence_oracle():
    ok, detail = criterion_9()
    record(9, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 10


SEL_RULES = ["∀I", "∀I", "∀I", "⇒I", "→I", "→I", "▹E", "ΠE"]


def criterion_10():
    out = io.StringIO()
    code = cmd_check(CliConfig("check", [str(CORPUS / "prelude.ro")], trace=True), out, io.StringIO())
    lines = out.getvalue().splitlines()
    start = lines.index("-- sel")
    section = []
    for line in lines[start + 1:]:
        if line.startswith("-- "):
            break
        section.append(line.split()[0])
    it = iter(section)
    ok = code == 0 and all(r in it for r in SEL_RULES)
    return ok, f"sel derivation: {' '.join(section)}"


def test_criterion_10_sel_trace():
    ok, detail = criterion_10()
    record(10, ok, detail)
    assert ok, detail
