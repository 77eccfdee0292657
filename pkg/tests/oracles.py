"""Brute-force oracles written independently of the normalizer and solver.

* ``EquivOracle`` saturates the declarative equivalence rules over a
  finite universe of closed types: one-step rewrites (beta, the three
  lifting rules, the singleton rule and row permutation) are added as
  edges, then union-find with congruence closure is run to a fixpoint.
* ``contain_maps`` / ``combine_splits`` enumerate every candidate
  evidence for a goal over concrete rows and keep the valid ones.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional

from rowo.core_ast import (
    KArrow, KRow, KType, LAB, TApp, TArrow, TCon, TLabel, TLabeled, TLam,
    TPi, TRow, TSigma, TVar, Type, alpha_eq, arrow, subst_ty,
)

INT, BOOL, LIST = TCon("Int"), TCon("Bool"), TCon("List")
TY = KType()
TY2 = KArrow(TY, TY)
LABELS = (TLabel("x"), TLabel("y"))


# ---------------------------------------------------------------- kinds


def okind(t: Type):
    """Kind of a closed universe type, or None if ill-kinded."""
    if isinstance(t, TCon):
        return TY2 if t.name == "List" else TY
    if isinstance(t, TArrow):
        return KArrow(TY, TY2)
    if isinstance(t, TLabel):
        return LAB
    if isinstance(t, TVar):
        return TY  # only lambda-bound type variables occur
    if isinstance(t, TLam):
        kb = okind(t.body)
        return None if kb is None else KArrow(t.kind, kb)
    if isinstance(t, TLabeled):
        return okind(t.body)
    if isinstance(t, TRow):
        ks = {okind(e.body) for e in t.entries}
        if len(ks) != 1 or None in ks:
            return None
        return KRow(ks.pop())
    if isinstance(t, (TPi, TSigma)):
        k = okind(t.row)
        if isinstance(k, KRow):
            return k.elem
        return None
    if isinstance(t, TApp):
        kf, kx = okind(t.fun), okind(t.arg)
        if kf is None or kx is None:
            return None
        if isinstance(kf, KArrow) and kf.dom == kx:
            return kf.cod
        if isinstance(kf, KArrow) and isinstance(kx, KRow) and kx.elem == kf.dom:
            return KRow(kf.cod)
        if isinstance(kf, KRow) and isinstance(kf.elem, KArrow) and kf.elem.dom == kx:
            return KRow(kf.elem.cod)
        return None
    return None


# ---------------------------------------------------------------- rewriting


def _is_k(t: Type) -> bool:
    return isinstance(t, (TPi, TSigma))


def _mk_k(template: Type, row: Type) -> Type:
    return TPi(row) if isinstance(template, TPi) else TSigma(row)


def root_steps(t: Type, reductions_only: bool = False) -> Iterator[Type]:
    """Types related to ``t`` by one declarative axiom applied at the root.

    With ``reductions_only`` the row permutations and the one expanding
    step are left out, so repeated steps terminate."""
    if isinstance(t, TApp):
        f, x = t.fun, t.arg
        kf, kx = okind(f), okind(x)
        # beta, only when the argument has the binder's kind
        if isinstance(f, TLam) and kx == f.kind:
            yield subst_ty(f.body, f.var, x)
        # lift1: a row of operators applied to a type
        if isinstance(f, TRow) and isinstance(kf, KRow) and isinstance(kf.elem, KArrow) and kf.elem.dom == kx:
            yield TRow(tuple(TLabeled(e.label, TApp(e.body, x)) for e in f.entries))
        # lift2: an operator applied to a row
        if isinstance(x, TRow) and isinstance(kf, KArrow) and isinstance(kx, KRow) and kx.elem == kf.dom:
            yield TRow(tuple(TLabeled(e.label, TApp(f, e.body)) for e in x.entries))
        # lift3: (K rho) t  ~  K (rho t), with t an argument (not a row)
        if _is_k(f) and isinstance(kf, KArrow) and kf.dom == kx:
            yield _mk_k(f, TApp(f.row, x))
        # application of a labeled operator, reached through sing
        if isinstance(f, TLabeled) and not reductions_only:
            yield TApp(TPi(TRow((f,))), x)
    if _is_k(t) and isinstance(t.row, TRow) and len(t.row.entries) == 1:
        yield t.row.entries[0]
    if isinstance(t, TRow) and len(t.entries) > 1 and not reductions_only:
        names = [e.label.name for e in t.entries if isinstance(e.label, TLabel)]
        if len(names) == len(t.entries) and len(set(names)) == len(names):
            for perm in itertools.permutations(t.entries):
                if perm != t.entries:
                    yield TRow(perm)


def all_steps(t: Type, reductions_only: bool = False) -> Iterator[Type]:
    """One-step rewrites at any position inside ``t``."""
    yield from root_steps(t, reductions_only)
    kids = children(t)
    for i, c in enumerate(kids):
        for c2 in all_steps(c, reductions_only):
            yield rebuild(t, kids[:i] + [c2] + kids[i + 1:])


def children(t: Type) -> list[Type]:
    if isinstance(t, TApp):
        return [t.fun, t.arg]
    if isinstance(t, TLam):
        return [t.body]
    if isinstance(t, TLabeled):
        return [t.label, t.body]
    if isinstance(t, TRow):
        return list(t.entries)
    if isinstance(t, (TPi, TSigma)):
        return [t.row]
    return []


def rebuild(t: Type, kids: list[Type]) -> Type:
    if isinstance(t, TApp):
        return TApp(kids[0], kids[1])
    if isinstance(t, TLam):
        return TLam(t.var, t.kind, kids[0])
    if isinstance(t, TLabeled):
        return TLabeled(kids[0], kids[1])
    if isinstance(t, TRow):
        return TRow(tuple(kids))
    if isinstance(t, (TPi, TSigma)):
        return _mk_k(t, kids[0])
    return t


def _shape(t: Type):
    """Head constructor data that congruence must agree on."""
    if isinstance(t, TLam):
        return ("lam", t.kind)
    if isinstance(t, TRow):
        return ("row", len(t.entries))
    if isinstance(t, (TCon, TLabel)):
        return (type(t).__name__, t.name)
    if isinstance(t, TVar):
        return ("var", t.name)
    return (type(t).__name__,)


def _size(t: Type) -> int:
    return 1 + sum(_size(c) for c in children(t))


# ---------------------------------------------------------------- universe


def enumerate_universe(depth: int = 4, pool: int = 14) -> list[Type]:
    """Well-kinded closed types of nesting depth at most ``depth``.

    Each level draws children from the ``pool`` smallest members of each
    kind plus the ``pool`` most recently built ones, which keeps the space
    finite while still reaching full depth with every constructor.
    """
    by_kind: dict = {TY: [INT, BOOL], TY2: [LIST, TApp(TArrow(), INT)],
                     KRow(TY): [], KRow(TY2): []}
    seen: dict[Type, None] = {}
    for t in by_kind[TY] + by_kind[TY2]:
        seen[t] = None
    for _ in range(depth):
        def small(k):
            xs = sorted(by_kind[k], key=lambda u: (_size(u), repr(u)))[:pool]
            return xs + [u for u in by_kind[k][-pool:] if u not in xs]

        ty, ty2, row, row2 = small(TY), small(TY2), small(KRow(TY)), small(KRow(TY2))
        new: list[Type] = []
        for a in ty[:6]:
            for b in ty[:6]:
                new.append(arrow(a, b))
        for f in ty2:
            for a in ty[:8]:
                new.append(TApp(f, a))
            for r in row[:6]:
                new.append(TApp(f, r))
        for a in ty:
            for l in LABELS:
                new.append(TRow((TLabeled(l, a),)))
                new.append(TLabeled(l, a))
        for a, b in itertools.product(ty[:5], ty[:5]):
            new.append(TRow((TLabeled(LABELS[0], a), TLabeled(LABELS[1], b))))
            new.append(TRow((TLabeled(LABELS[1], b), TLabeled(LABELS[0], a))))
        for f in ty2[:6]:
            for l in LABELS:
                new.append(TRow((TLabeled(l, f),)))
        for f, g in itertools.product(ty2[:4], ty2[:4]):
            new.append(TRow((TLabeled(LABELS[0], f), TLabeled(LABELS[1], g))))
        for r in row:
            new.append(TPi(r))
            new.append(TSigma(r))
        for r in row2:
            new.append(TPi(r))
            new.append(TSigma(r))
            for a in ty[:4]:
                new.append(TApp(r, a))
                new.append(TApp(TPi(r), a))
                new.append(TApp(TSigma(r), a))
        for a in ty[:6]:
            new.append(TLam("t", TY, arrow(TVar("t"), a)))
            new.append(TApp(TLam("t", TY, arrow(TVar("t"), TVar("t"))), a))
        for r in row[:6]:
            new.append(TApp(TLam("t", TY, arrow(TVar("t"), INT)), r))
        for t in new:
            k = okind(t)
            if k is None or t in seen or k not in by_kind:
                continue
            seen[t] = None
            by_kind[k].append(t)
    return list(seen)


# ---------------------------------------------------------------- saturation


class EquivOracle:
    def __init__(self, seeds: Iterable[Type], limit: int = 200_000):
        self.index: dict[Type, int] = {}
        self.terms: list[Type] = []
        for s in seeds:
            self._close(s, limit)
        self.parent = list(range(len(self.terms)))
        self._saturate()

    def _add(self, t: Type) -> tuple[int, bool]:
        i = self.index.get(t)
        if i is not None:
            return i, False
        i = len(self.terms)
        self.index[t] = i
        self.terms.append(t)
        return i, True

    def _close(self, seed: Type, limit: int) -> None:
        """Add ``seed`` with all its subterms and everything reachable by
        one-step rewrites anywhere inside it."""
        todo = [seed]
        while todo:
            t = todo.pop()
            _, fresh = self._add(t)
            if not fresh:
                continue
            if len(self.terms) > limit:
                raise RuntimeError("equivalence universe too large")
            todo.extend(children(t))
            todo.extend(all_steps(t))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        a, b = self.find(i), self.find(j)
        if a == b:
            return False
        self.parent[max(a, b)] = min(a, b)
        return True

    def _saturate(self) -> None:
        for t in list(self.terms):
            i = self.index[t]
            for u in root_steps(t):
                j = self.index.get(u)
                if j is not None:
                    self.union(i, j)
        # congruence closure to a fixpoint
        changed = True
        while changed:
            changed = False
            sig: dict = {}
            for i, t in enumerate(self.terms):
                key = (_shape(t), tuple(self.find(self.index[c]) for c in children(t)))
                j = sig.setdefault(key, i)
                if j != i and self.union(i, j):
                    changed = True

    def equiv(self, a: Type, b: Type) -> bool:
        return self.find(self.index[a]) == self.find(self.index[b])

    def classes(self, members: Iterable[Type]) -> dict[int, list[Type]]:
        out: dict[int, list[Type]] = {}
        for t in members:
            out.setdefault(self.find(self.index[t]), []).append(t)
        return out


def structural_key(t: Type, bound: tuple[str, ...] = ()):
    """A hashable key equal for alpha-equivalent types."""
    if isinstance(t, TVar):
        return ("bv", bound[::-1].index(t.name)) if t.name in bound else ("fv", t.name)
    if isinstance(t, TLam):
        return ("lam", t.kind, structural_key(t.body, bound + (t.var,)))
    kids = tuple(structural_key(c, bound) for c in children(t))
    return (_shape(t), kids)


# ---------------------------------------------------------------- rows


def _entries_match(a: TLabeled, b: TLabeled) -> bool:
    return alpha_eq(a.label, b.label) and alpha_eq(a.body, b.body)


def contain_maps(sub: TRow, sup: TRow) -> list[tuple[int, ...]]:
    """Every injective index map sending each entry of ``sub`` to an equal
    entry of ``sup``."""
    out = []
    for m in itertools.permutations(range(len(sup.entries)), len(sub.entries)):
        if all(_entries_match(sub.entries[i], sup.entries[j]) for i, j in enumerate(m)):
            out.append(m)
    return out


def combine_splits(left: TRow, right: TRow, result: TRow) -> list[tuple[tuple[str, int], ...]]:
    """Every bijection from result indices to left/right positions with
    equal entries."""
    n1, n2 = len(left.entries), len(right.entries)
    if n1 + n2 != len(result.entries):
        return []
    sources = [("left", i) for i in range(n1)] + [("right", j) for j in range(n2)]
    out = []
    for perm in itertools.permutations(sources):
        ok = True
        for k, (side, j) in enumerate(perm):
            e = (left if side == "left" else right).entries[j]
            if not _entries_match(e, result.entries[k]):
                ok = False
                break
        if ok:
            out.append(tuple(perm))
    return out


def labels_overlap(a: TRow, b: TRow) -> bool:
    return any(alpha_eq(e.label, f.label) for e in a.entries for f in b.entries)


def simple_contain_verdict(sub: TRow, sup: TRow) -> bool:
    return bool(contain_maps(sub, sup))


def simple_combine_verdict(left: TRow, right: TRow, result: TRow) -> Optional[bool]:
    """None means the goal is rejected outright (overlapping labels)."""
    if labels_overlap(left, right):
        return None
    return bool(combine_splits(left, right, result))


def depth_of(t: Type) -> int:
    return 1 + max((depth_of(c) for c in children(t)), default=0)
