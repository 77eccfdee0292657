"""Row theories, evidence and the predicate solver.

A row at runtime is just an arity; containment evidence is an injective
map between index ranges and combination evidence says, for each index of
the result, which side and which position it came from.  Evidence for
predicates over row variables is kept symbolic (``EvExpr``) until the rows
become concrete at evaluation time.

Three theories are provided:

* ``MINIMAL``: literal rows of length at most one; every multi-entry fact
  has to come from hypotheses.
* ``SIMPLE``: each concrete label at most once, order irrelevant (rows are
  kept sorted by label name), combination only of disjoint rows.
* ``SCOPED``: labels may repeat, the leftmost occurrence wins, and entries
  may only be reordered past provably different labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .core_ast import (
    Env, PCombine, PContain, Pred, TCombine, TLabel, TLabeled, TMap,
    TRow, TVar, Type, alpha_eq,
)


class UnsolvedError(Exception):
    def __init__(self, pred: Pred, detail: str = ""):
        self.pred = pred
        self.detail = detail
        super().__init__(detail or "predicate not derivable")


class TheoryError(Exception):
    def __init__(self, pred: Optional[Pred], detail: str):
        self.pred = pred
        self.detail = detail
        super().__init__(detail)


# ---------------------------------------------------------------- concrete rows


@dataclass(frozen=True)
class ConcreteRow:
    """``entries`` are (label, type) pairs; labels may be erased (None)."""

    entries: tuple[tuple[Optional[Type], Optional[Type]], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.entries)

    @staticmethod
    def of(row: TRow) -> "ConcreteRow":
        return ConcreteRow(tuple((e.label, e.body) for e in row.entries))

    @staticmethod
    def erased(n: int) -> "ConcreteRow":
        return ConcreteRow(((None, None),) * n)

    def to_type(self) -> TRow:
        return TRow(tuple(TLabeled(l, t) for l, t in self.entries))


def pick(row: ConcreteRow, i: int) -> ConcreteRow:
    if not 0 <= i < row.arity:
        raise IndexError(f"index {i} out of range for a row of arity {row.arity}")
    return ConcreteRow((row.entries[i],))


def delete(row: ConcreteRow, i: int) -> ConcreteRow:
    if not 0 <= i < row.arity:
        raise IndexError(f"index {i} out of range for a row of arity {row.arity}")
    return ConcreteRow(row.entries[:i] + row.entries[i + 1:])


# ---------------------------------------------------------------- evidence


@dataclass(frozen=True)
class ContainEv:
    src_arity: int
    dst_arity: int
    map: tuple[int, ...]
    # (source type, target type) per source index; None once erased
    witnesses: Optional[tuple[tuple[Type, Type], ...]] = field(default=None, compare=False)


@dataclass(frozen=True)
class CombineEv:
    left_arity: int
    right_arity: int
    split: tuple[tuple[str, int], ...]  # ("left" | "right", index)
    left_in: ContainEv
    right_in: ContainEv

    @property
    def result_arity(self) -> int:
        return self.left_arity + self.right_arity


def identity_ev(n: int) -> ContainEv:
    return ContainEv(n, n, tuple(range(n)))


def compose_ev(first: ContainEv, second: ContainEv) -> ContainEv:
    """Transitivity: a <= b then b <= c gives a <= c."""
    assert first.dst_arity == second.src_arity, (first, second)
    return ContainEv(first.src_arity, second.dst_arity, tuple(second.map[j] for j in first.map))


def combine_from_split(split: Sequence[tuple[str, int]], left_arity: int, right_arity: int,
                       left_w=None, right_w=None) -> CombineEv:
    n = len(split)
    lmap = [0] * left_arity
    rmap = [0] * right_arity
    for k, (side, j) in enumerate(split):
        (lmap if side == "left" else rmap)[j] = k
    return CombineEv(
        left_arity, right_arity, tuple(split),
        ContainEv(left_arity, n, tuple(lmap), left_w),
        ContainEv(right_arity, n, tuple(rmap), right_w),
    )


def recombine_arity(n: int, i: int) -> CombineEv:
    """Evidence that the entry at ``i`` combined with everything else gives
    back the whole row of arity ``n``."""
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for a row of arity {n}")
    split = []
    for j in range(n):
        if j < i:
            split.append(("right", j))
        elif j == i:
            split.append(("left", 0))
        else:
            split.append(("right", j - 1))
    return combine_from_split(split, 1, n - 1)


def recombine(row: ConcreteRow, i: int) -> CombineEv:
    return recombine_arity(row.arity, i)


# -- validators


def _label_eq(a: Optional[Type], b: Optional[Type]) -> bool:
    if a is None or b is None:
        return True
    return alpha_eq(a, b)


def _type_eq(a: Optional[Type], b: Optional[Type]) -> bool:
    if a is None or b is None:
        return True
    return alpha_eq(a, b)


def validate_contain(ev: ContainEv, src: Optional[ConcreteRow] = None,
                     dst: Optional[ConcreteRow] = None) -> None:
    """Raise AssertionError unless ``ev`` is a valid containment."""
    assert len(ev.map) == ev.src_arity, "map must be total"
    assert all(0 <= j < ev.dst_arity for j in ev.map), "map out of range"
    assert len(set(ev.map)) == len(ev.map), "map must be injective"
    if ev.witnesses is not None:
        assert len(ev.witnesses) == ev.src_arity
        for a, b in ev.witnesses:
            assert _type_eq(a, b), "witness does not hold"
    if src is not None:
        assert src.arity == ev.src_arity
    if dst is not None:
        assert dst.arity == ev.dst_arity
    if src is not None and dst is not None:
        for i, j in enumerate(ev.map):
            (l1, t1), (l2, t2) = src.entries[i], dst.entries[j]
            assert _label_eq(l1, l2) and _type_eq(t1, t2), f"entry {i} does not match entry {j}"


def validate_combine(ev: CombineEv, left: Optional[ConcreteRow] = None,
                     right: Optional[ConcreteRow] = None,
                     result: Optional[ConcreteRow] = None) -> None:
    n = ev.result_arity
    assert len(ev.split) == n, "split must be total"
    lefts = sorted(j for s, j in ev.split if s == "left")
    rights = sorted(j for s, j in ev.split if s == "right")
    assert all(s in ("left", "right") for s, _ in ev.split)
    assert lefts == list(range(ev.left_arity)), "left side not covered exactly once"
    assert rights == list(range(ev.right_arity)), "right side not covered exactly once"
    validate_contain(ev.left_in, left, result)
    validate_contain(ev.right_in, right, result)
    assert ev.left_in.dst_arity == n and ev.right_in.dst_arity == n
    for k, (s, j) in enumerate(ev.split):
        inj = ev.left_in if s == "left" else ev.right_in
        assert inj.map[j] == k, "split does not invert the injections"


# ---------------------------------------------------------------- symbolic evidence


@dataclass(frozen=True)
class AConst:
    n: int


@dataclass(frozen=True)
class AVar:
    name: str


@dataclass(frozen=True)
class AAdd:
    left: "Arity"
    right: "Arity"


Arity = Union[AConst, AVar, AAdd]


@dataclass(frozen=True)
class EVar:
    name: str


@dataclass(frozen=True)
class ELit:
    ev: Union[ContainEv, CombineEv]


@dataclass(frozen=True)
class ERefl:
    arity: Arity


@dataclass(frozen=True)
class ETrans:
    first: "EvExpr"
    second: "EvExpr"


@dataclass(frozen=True)
class ELeft:
    ev: "EvExpr"


@dataclass(frozen=True)
class ERight:
    ev: "EvExpr"


@dataclass(frozen=True)
class ELift:
    """Lifting a predicate through a type operator keeps its evidence."""

    ev: "EvExpr"


EvExpr = Union[EVar, ELit, ERefl, ETrans, ELeft, ERight, ELift]


def ev_vars(e: EvExpr) -> set[str]:
    if isinstance(e, EVar):
        return {e.name}
    if isinstance(e, ETrans):
        return ev_vars(e.first) | ev_vars(e.second)
    if isinstance(e, (ELeft, ERight, ELift)):
        return ev_vars(e.ev)
    return set()


def show_ev(e: EvExpr) -> str:
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, ELit):
        ev = e.ev
        if isinstance(ev, ContainEv):
            return "{" + ", ".join(f"{i}->{j}" for i, j in enumerate(ev.map)) + "}"
        return "{" + ", ".join(f"{k}->{s[0].upper()}{j}" for k, (s, j) in enumerate(ev.split)) + "}"
    if isinstance(e, ERefl):
        return "refl"
    if isinstance(e, ETrans):
        return f"({show_ev(e.first)} ; {show_ev(e.second)})"
    if isinstance(e, ELeft):
        return f"left({show_ev(e.ev)})"
    if isinstance(e, ERight):
        return f"right({show_ev(e.ev)})"
    if isinstance(e, ELift):
        return f"lift({show_ev(e.ev)})"
    raise TypeError(e)


def arity_of(row: Type) -> Arity:
    """The runtime arity of a normal row type."""
    if isinstance(row, TRow):
        return AConst(len(row.entries))
    if isinstance(row, TVar):
        return AVar(row.name)
    if isinstance(row, TMap):
        return arity_of(row.row)
    if isinstance(row, TCombine):
        return AAdd(arity_of(row.left), arity_of(row.right))
    if isinstance(row, TLabeled):
        # a labeled row is a one-entry row of rows only at kind Row (Row k);
        # as a row itself its arity is that of the payload
        return arity_of(row.body)
    raise ValueError(f"cannot compute the arity of {row!r}")


# ---------------------------------------------------------------- theories


def _concrete(l: Type) -> bool:
    return isinstance(l, TLabel)


def labels_apart(a: Type, b: Type) -> bool:
    """Provably different labels: two distinct constants."""
    return isinstance(a, TLabel) and isinstance(b, TLabel) and a.name != b.name


Entry = TLabeled


class Theory:
    name = ""
    directions_interchangeable = False
    # three-variable generic form accepted for syn/ana/fold bodies
    allows_comm_form = False

    def row_kind_problem(self, labels: list[Type]) -> Optional[str]:
        return None

    def canonical(self, entries: Sequence[Entry]) -> list[Entry]:
        return list(entries)

    def row_equiv(self, a: ConcreteRow, b: ConcreteRow) -> bool:
        if a.arity != b.arity:
            return False
        ca = self.canonical([TLabeled(l, t) for l, t in a.entries])
        cb = self.canonical([TLabeled(l, t) for l, t in b.entries])
        return all(alpha_eq(x, y) for x, y in zip(ca, cb))

    # literal rules; return None when the rule does not apply
    def contain_literal(self, d: str, sub: Sequence[Entry], sup: Sequence[Entry]) -> Optional[tuple[int, ...]]:
        return None

    def combine_literal(self, left, right, result) -> Optional[list[tuple[str, int]]]:
        return None

    def combine_literals(self, left, right) -> Optional[list[Entry]]:
        """The combined literal, or None when this theory cannot form it."""
        return None

    def remainder(self, known_side: str, known, result) -> Optional[list[Entry]]:
        return None

    def __repr__(self) -> str:
        return f"<theory {self.name}>"


class MinimalTheory(Theory):
    name = "minimal"

    def row_kind_problem(self, labels):
        if len(labels) > 1:
            return "the minimal theory only has singleton rows"
        return None


class SimpleTheory(Theory):
    name = "simple"
    directions_interchangeable = True
    allows_comm_form = True

    def row_kind_problem(self, labels):
        if len(labels) <= 1:
            return None
        names = []
        for l in labels:
            if not _concrete(l):
                return "labels in a row of two or more entries must be distinct constants"
            names.append(l.name)
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})[0]
            return f"label {dup} occurs more than once"
        return None

    def canonical(self, entries):
        if all(_concrete(e.label) for e in entries):
            return sorted(entries, key=lambda e: e.label.name)
        return list(entries)

    @staticmethod
    def _inject(sub, sup, taken: set[int]) -> Optional[list[int]]:
        out = []
        for e in sub:
            for j, f in enumerate(sup):
                if j not in taken and alpha_eq(e.label, f.label):
                    if not alpha_eq(e.body, f.body):
                        return None
                    taken.add(j)
                    out.append(j)
                    break
            else:
                return None
        return out

    def contain_literal(self, d, sub, sup):
        m = self._inject(sub, sup, set())
        return None if m is None else tuple(m)

    def _overlap(self, left, right) -> Optional[str]:
        for e in left:
            for f in right:
                if alpha_eq(e.label, f.label):
                    return show_label(e.label)
        return None

    def combine_literal(self, left, right, result):
        dup = self._overlap(left, right)
        if dup is not None:
            raise TheoryError(None, f"rows to combine share the label {dup}")
        if len(left) + len(right) != len(result):
            return None
        taken: set[int] = set()
        lm = self._inject(left, result, taken)
        if lm is None:
            return None
        rm = self._inject(right, result, taken)
        if rm is None:
            return None
        split: list = [None] * len(result)
        for i, k in enumerate(lm):
            split[k] = ("left", i)
        for j, k in enumerate(rm):
            split[k] = ("right", j)
        return split

    def combine_literals(self, left, right):
        if self._overlap(left, right) is not None:
            return None
        entries = list(left) + list(right)
        if self.row_kind_problem([e.label for e in entries]) is not None:
            return None
        return self.canonical(entries)

    def remainder(self, known_side, known, result):
        taken: set[int] = set()
        if self._inject(known, result, taken) is None:
            return None
        return [e for k, e in enumerate(result) if k not in taken]


class ScopedTheory(Theory):
    name = "scoped"

    def canonical(self, entries):
        # concrete labels may be reordered past different concrete labels,
        # so sort each run of concrete labels stably by name
        out: list[Entry] = []
        run: list[Entry] = []
        for e in entries:
            if _concrete(e.label):
                run.append(e)
            else:
                out.extend(sorted(run, key=lambda x: x.label.name))
                run = []
                out.append(e)
        out.extend(sorted(run, key=lambda x: x.label.name))
        return out

    @staticmethod
    def _extract_prefix(sub, sup) -> Optional[tuple[list[int], list[int]]]:
        """Match ``sub`` as a prefix of a permitted reordering of ``sup``.

        Returns the chosen indices and the indices left over (in order)."""
        remaining = list(range(len(sup)))
        chosen = []
        for e in sub:
            for pos, j in enumerate(remaining):
                f = sup[j]
                if alpha_eq(e.label, f.label):
                    if not alpha_eq(e.body, f.body):
                        return None
                    chosen.append(j)
                    del remaining[pos]
                    break
                if not labels_apart(e.label, f.label):
                    return None
            else:
                return None
        return chosen, remaining

    def _extract(self, d, sub, sup):
        if d == "L":
            return self._extract_prefix(sub, sup)
        n = len(sup)
        res = self._extract_prefix(list(reversed(sub)), list(reversed(sup)))
        if res is None:
            return None
        chosen, remaining = res
        return [n - 1 - j for j in reversed(chosen)], [n - 1 - j for j in reversed(remaining)]

    def contain_literal(self, d, sub, sup):
        res = self._extract(d, sub, sup)
        return None if res is None else tuple(res[0])

    def combine_literal(self, left, right, result):
        if len(left) + len(right) != len(result):
            return None
        res = self._extract_prefix(left, result)
        if res is None:
            return None
        chosen, remaining = res
        rest = [result[k] for k in remaining]
        res2 = self._extract_prefix(right, rest)
        if res2 is None or res2[1]:
            return None
        split: list = [None] * len(result)
        for i, k in enumerate(chosen):
            split[k] = ("left", i)
        for j, p in enumerate(res2[0]):
            split[remaining[p]] = ("right", j)
        return split

    def combine_literals(self, left, right):
        return self.canonical(list(left) + list(right))

    def remainder(self, known_side, known, result):
        d = "L" if known_side == "left" else "R"
        res = self._extract(d, known, result)
        if res is None:
            return None
        return [result[k] for k in res[1]]


MINIMAL = MinimalTheory()
SIMPLE = SimpleTheory()
SCOPED = ScopedTheory()
THEORIES = {"minimal": MINIMAL, "simple": SIMPLE, "scoped": SCOPED}


def get_theory(name_or_theory) -> Theory:
    if isinstance(name_or_theory, Theory):
        return name_or_theory
    try:
        return THEORIES[name_or_theory]
    except KeyError:
        raise ValueError(f"unknown row theory {name_or_theory!r}") from None


def row_equiv(theory, a: ConcreteRow, b: ConcreteRow) -> bool:
    return get_theory(theory).row_equiv(a, b)


def show_label(l: Type) -> str:
    from .surface import show_type
    return show_type(l)


# ---------------------------------------------------------------- solver


@dataclass(frozen=True)
class _Fact:
    dir: str
    sub: Type
    sup: Type
    ev: EvExpr


class Solver:
    """Goal-directed entailment over normalized predicates.

    ``hyps`` pairs each assumed predicate (normal form) with its evidence.
    """

    def __init__(self, theory, env: Optional[Env], hyps: Sequence[tuple[Pred, EvExpr]],
                 depth: int = 16):
        from .equiv import Normalizer
        self.theory = get_theory(theory)
        self.env = env
        self.ctx = env.ty_kinds() if env is not None else {}
        self.norm = Normalizer(self.theory)
        self.depth = depth
        self.combines: list[tuple[PCombine, EvExpr]] = []
        facts: list[_Fact] = []
        for p, e in hyps:
            if isinstance(p, PContain):
                facts.append(_Fact(self._dir(p.dir), p.sub, p.sup, e))
            else:
                self.combines.append((p, e))
                facts.append(_Fact("L", p.left, p.result, ELeft(e)))
                facts.append(_Fact(self._dir("R"), p.right, p.result, ERight(e)))
        self.facts = self._close(facts)

    def _dir(self, d: str) -> str:
        return "L" if self.theory.directions_interchangeable else d

    def _close(self, facts: list[_Fact]) -> list[_Fact]:
        out = list(facts)
        changed = True
        rounds = 0
        while changed and rounds < 4 and len(out) < 200:
            changed = False
            rounds += 1
            for a in list(out):
                for b in list(out):
                    if a.dir == b.dir and alpha_eq(a.sup, b.sub) and not alpha_eq(a.sub, b.sup):
                        if not any(f.dir == a.dir and alpha_eq(f.sub, a.sub) and alpha_eq(f.sup, b.sup) for f in out):
                            out.append(_Fact(a.dir, a.sub, b.sup, ETrans(a.ev, b.ev)))
                            changed = True
        return out

    # -- helpers

    def apply_fn(self, fn: Type, row: Type) -> Type:
        from .core_ast import TApp
        return self.norm.nf(self.ctx, TApp(fn, row))[0]

    def _lift_candidates(self, goal_row: Type, fact_row: Type) -> list[Optional[Type]]:
        """Functions F with F(fact_row) == goal_row; None means identity."""
        out: list[Optional[Type]] = []
        if alpha_eq(goal_row, fact_row):
            out.append(None)
        if isinstance(goal_row, TMap) and alpha_eq(goal_row.row, fact_row):
            out.append(goal_row.fn)
        return out

    def _image(self, fn: Optional[Type], row: Type) -> Type:
        return row if fn is None else self.apply_fn(fn, row)

    # -- containment

    def contain(self, d: str, sub: Type, sup: Type, depth: Optional[int] = None) -> EvExpr:
        d = self._dir(d)
        depth = self.depth if depth is None else depth
        res = self._contain(d, sub, sup, depth)
        if res is None:
            raise UnsolvedError(PContain(d, sub, sup))
        return res

    def _contain(self, d: str, sub: Type, sup: Type, depth: int) -> Optional[EvExpr]:
        if depth <= 0:
            return None
        if alpha_eq(sub, sup):
            return ERefl(arity_of(sub))
        if isinstance(sub, TRow) and isinstance(sup, TRow):
            m = self.theory.contain_literal(d, sub.entries, sup.entries)
            if m is not None:
                w = tuple((sub.entries[i].body, sup.entries[j].body) for i, j in enumerate(m))
                return ELit(ContainEv(len(sub.entries), len(sup.entries), m, w))
        for f in self.facts:
            if f.dir != d:
                continue
            for fn in self._lift_candidates(sup, f.sup):
                if alpha_eq(self._image(fn, f.sub), sub):
                    return f.ev if fn is None else ELift(f.ev)
        # transitivity through a hypothesis
        for f in self.facts:
            if f.dir != d:
                continue
            for fn in self._lift_candidates(sup, f.sup):
                mid = self._image(fn, f.sub)
                if alpha_eq(mid, sub):
                    continue
                e = self._contain(d, sub, mid, depth - 1)
                if e is not None:
                    return ETrans(e, f.ev if fn is None else ELift(f.ev))
        return None

    # -- combination

    def combine(self, left: Type, right: Type, result: Type) -> EvExpr:
        goal = PCombine(left, right, result)
        try:
            self._literal_overlap_check(left, right)
        except TheoryError as exc:
            raise TheoryError(goal, exc.detail) from None
        if isinstance(left, TRow) and isinstance(right, TRow) and isinstance(result, TRow):
            try:
                split = self.theory.combine_literal(left.entries, right.entries, result.entries)
            except TheoryError as exc:
                raise TheoryError(goal, exc.detail) from None
            if split is not None:
                lw = [None] * len(left.entries)
                rw = [None] * len(right.entries)
                for k, (s, j) in enumerate(split):
                    src = left if s == "left" else right
                    pair = (src.entries[j].body, result.entries[k].body)
                    (lw if s == "left" else rw)[j] = pair
                return ELit(combine_from_split(split, len(left.entries), len(right.entries), tuple(lw), tuple(rw)))
        for p, e in self.combines:
            for fn in self._lift_candidates(result, p.result):
                if alpha_eq(self._image(fn, p.left), left) and alpha_eq(self._image(fn, p.right), right):
                    return e if fn is None else ELift(e)
        raise UnsolvedError(goal)

    # -- finding unknown rows

    def _literal_overlap_check(self, left: Type, right: Type) -> None:
        if isinstance(left, TRow) and isinstance(right, TRow) and isinstance(self.theory, SimpleTheory):
            dup = self.theory._overlap(left.entries, right.entries)
            if dup is not None:
                raise TheoryError(PCombine(left, right, TVar("?")), f"rows to combine share the label {dup}")

    def find_combine_result(self, left: Type, right: Type) -> Optional[Type]:
        self._literal_overlap_check(left, right)
        if isinstance(left, TRow) and isinstance(right, TRow):
            merged = self.theory.combine_literals(left.entries, right.entries)
            if merged is not None:
                return TRow(tuple(merged))
        for p, _ in self.combines:
            for fn in self._fn_candidates(((left, p.left), (right, p.right))):
                if alpha_eq(self._image(fn, p.left), left) and alpha_eq(self._image(fn, p.right), right):
                    return self._image(fn, p.result)
        return None

    def find_combine_right(self, left: Type, result: Type) -> Optional[Type]:
        if isinstance(left, TRow) and isinstance(result, TRow):
            rest = self.theory.remainder("left", left.entries, result.entries)
            if rest is not None:
                return TRow(tuple(rest))
        for p, _ in self.combines:
            for fn in self._fn_candidates(((result, p.result), (left, p.left))):
                if alpha_eq(self._image(fn, p.left), left) and alpha_eq(self._image(fn, p.result), result):
                    return self._image(fn, p.right)
        return None

    def find_combine_left(self, right: Type, result: Type) -> Optional[Type]:
        if isinstance(right, TRow) and isinstance(result, TRow):
            rest = self.theory.remainder("right", right.entries, result.entries)
            if rest is not None:
                return TRow(tuple(rest))
        for p, _ in self.combines:
            for fn in self._fn_candidates(((result, p.result), (right, p.right))):
                if alpha_eq(self._image(fn, p.right), right) and alpha_eq(self._image(fn, p.result), result):
                    return self._image(fn, p.left)
        return None

    def _fn_candidates(self, pairs) -> list[Optional[Type]]:
        out: list[Optional[Type]] = [None]
        for goal_row, hyp_row in pairs:
            for fn in self._lift_candidates(goal_row, hyp_row):
                if fn is not None and not any(g is not None and alpha_eq(g, fn) for g in out):
                    out.append(fn)
        return out

    def find_contain_by_label(self, d: str, label: Type, sup: Type) -> Optional[Type]:
        """A type t with <label |> t> contained in ``sup``."""
        d = self._dir(d)
        if isinstance(sup, TRow):
            entries = sup.entries if d == "L" else tuple(reversed(sup.entries))
            for e in entries:
                if alpha_eq(e.label, label):
                    return e.body
                if not labels_apart(e.label, label) and not isinstance(self.theory, SimpleTheory):
                    return None
        if isinstance(sup, TLabeled) and alpha_eq(sup.label, label):
            return sup.body
        for f in self.facts:
            if f.dir != d:
                continue
            for fn in self._lift_candidates(sup, f.sup):
                sub = self._image(fn, f.sub)
                if isinstance(sub, TRow) and len(sub.entries) == 1 and alpha_eq(sub.entries[0].label, label):
                    return sub.entries[0].body
        # through transitivity: a literal containing the label below a fact
        for f in self.facts:
            if f.dir != d:
                continue
            for fn in self._lift_candidates(sup, f.sup):
                sub = self._image(fn, f.sub)
                if not alpha_eq(sub, sup):
                    t = self.find_contain_by_label(d, label, sub) if type_size_ok(sub) else None
                    if t is not None:
                        return t
        return None


def type_size_ok(t: Type) -> bool:
    from .core_ast import type_size
    return type_size(t) < 200


def entail(theory, hyps: Sequence[tuple[Pred, EvExpr]], pred: Pred,
           env: Optional[Env] = None, depth: int = 16) -> EvExpr:
    """Solve ``pred`` from ``hyps``; both are normalized first."""
    from .equiv import normalize_pred
    theory = get_theory(theory)
    nh = [(normalize_pred(env, p, theory), e) for p, e in hyps]
    solver = Solver(theory, env, nh, depth)
    np_ = normalize_pred(env, pred, theory)
    if isinstance(np_, PContain):
        return solver.contain(np_.dir, np_.sub, np_.sup)
    return solver.combine(np_.left, np_.right, np_.result)


def entail_concrete(theory, pred: Pred) -> Union[ContainEv, CombineEv]:
    """Entailment for closed literal rows, returning concrete evidence."""
    e = entail(theory, [], pred)
    if isinstance(e, ELit):
        return e.ev
    if isinstance(e, ERefl) and isinstance(e.arity, AConst):
        return identity_ev(e.arity.n)
    raise UnsolvedError(pred, "evidence is not concrete")
