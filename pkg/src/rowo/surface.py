"""Concrete syntax: lexer, parser and printer for ``.ro`` programs.

A file is a sequence of pragmas and declarations::

    %theory simple
    type Unit = Pi <>;
    sel : forall l:Lab, t:Type, z:Row Type. (<l |> t> <: z) => Pi z -> Sing l -> t;
    sel = /\\l t z. \\r g. prj r / g;

Inside types an identifier that is neither a bound type variable, an alias
nor a primitive type constant is read as a label constant, so ``<x |> Int>``
needs no quote.  Terms always write label constants with a quote (``'x``);
the printer quotes labels everywhere so the output is unambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .core_ast import (
    Ana, Ann, App, BinOp, KAny, Branch, Concat, EmptyRec, FoldPi, Inj, KArrow,
    KLab, KRow, KType, Kind, Lam, LabelIntro, LabelVal, Lit, PCombine,
    PContain, Pred, Prj, SingElimPi, SingElimSig, SingIntroPi, SingIntroSig,
    SourceSpan, Syn, TApp, TArrow, TCombine, TCon, TForall, TLabel, TLabeled,
    TLam, TMap, TPi, TQual, TRow, TSigma, TSing, TVar, Term, TyApp, TyLam,
    Type, Unlabel, Var, alpha_eq, free_vars, split_arrow, subst_ty,
    term_alpha_eq,
)

THEORIES = ("minimal", "simple", "scoped")
PRIM_TYPES = ("Int", "Bool", "List")

KEYWORDS = {
    "forall", "Pi", "Sigma", "Sing", "Type", "Lab", "Row", "prj", "prj_L",
    "prj_R", "inj", "inj_L", "inj_R", "syn", "ana", "foldPi", "singPi",
    "unsingPi", "singSigma", "unsingSigma", "type", "true", "false",
}


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Decl:
    name: str
    sig: Optional[Type]
    body: Term
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...] = ()
    theory: str = "simple"
    mode: str = "plain"
    aliases: tuple[tuple[str, Type], ...] = ()
    # whether the theory came from a pragma (an explicit choice)
    theory_pragma: bool = field(default=False, compare=False)

    def decl(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None


def program_alpha_eq(a: Program, b: Program) -> bool:
    if (a.theory, a.mode, len(a.decls)) != (b.theory, b.mode, len(b.decls)):
        return False
    for x, y in zip(a.decls, b.decls):
        if x.name != y.name or (x.sig is None) != (y.sig is None):
            return False
        if x.sig is not None and not alpha_eq(x.sig, y.sig):
            return False
        if not term_alpha_eq(x.body, y.body):
            return False
    return True


# ---------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Tok:
    kind: str  # ident, label, int, sym, eof
    text: str
    start: int
    end: int


_SYMBOLS = [
    "/\\", "|||", "<:L", "<:R", "<:", "|>", "->", "=>", "++", "==", "&&",
    "\\", ".", ":", ",", ";", "=", "(", ")", "[", "]", "<", ">", "~", "/",
    "+", "-", "*", "^", "%",
]
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"[0-9]+")


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            if word == "o" and text.startswith("+", m.end()) and not text.startswith("++", m.end()):
                toks.append(Tok("sym", "o+", i, m.end() + 1))
                i = m.end() + 1
                continue
            toks.append(Tok("ident", word, i, m.end()))
            i = m.end()
            continue
        if c == "'":
            m = _IDENT.match(text, i + 1)
            if not m:
                raise ParseError("expected a label name after '", SourceSpan(i, i + 1))
            toks.append(Tok("label", m.group(), i, m.end()))
            i = m.end()
            continue
        m = _INT.match(text, i)
        if m:
            toks.append(Tok("int", m.group(), i, m.end()))
            i = m.end()
            continue
        for s in _SYMBOLS:
            if text.startswith(s, i):
                if s in ("<:L", "<:R") and _IDENT.match(text, i + 2) and len(_IDENT.match(text, i + 2).group()) > 1:
                    continue
                toks.append(Tok("sym", s, i, i + len(s)))
                i += len(s)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", SourceSpan(i, i + 1))
    toks.append(Tok("eof", "", n, n))
    return toks


# ---------------------------------------------------------------- parser

_ATOM_START_SYMS = {"(", }


class Parser:
    def __init__(self, text: str, aliases: Optional[dict[str, Type]] = None):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.scope: list[str] = []
        self.aliases: dict[str, Type] = dict(aliases or {})

    # -- token helpers

    @property
    def tok(self) -> Tok:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text == text

    def advance(self) -> Tok:
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected '{text}'")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", SourceSpan(t.start, t.end))

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error("expected an identifier")
        self.advance()
        return t.text

    def span_from(self, start: int) -> SourceSpan:
        end = self.toks[self.pos - 1].end if self.pos > 0 else start
        return SourceSpan(start, max(start, end))

    # -- kinds

    def parse_kind(self) -> Kind:
        k = self.parse_kind_app()
        if self.accept("->"):
            return KArrow(k, self.parse_kind())
        return k

    def parse_kind_app(self) -> Kind:
        if self.accept("Row"):
            return KRow(self.parse_kind_app())
        return self.parse_kind_atom()

    def parse_kind_atom(self) -> Kind:
        if self.accept("Type"):
            if self.accept("^"):
                t = self.tok
                if t.kind != "int":
                    self.error("expected a level")
                self.advance()
                return KType(int(t.text))
            return KType()
        if self.accept("Lab"):
            return KLab()
        if self.accept("("):
            k = self.parse_kind()
            self.expect(")")
            return k
        self.error("expected a kind")

    # -- binder lists: `a b:K, c:K` (kinds optional when allowed)

    def parse_binders(self, default: Optional[Kind]) -> list[tuple[str, Optional[Kind]]]:
        out: list[tuple[str, Optional[Kind]]] = []
        pending: list[str] = []
        while True:
            if self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
                pending.append(self.advance().text)
            elif self.at("(") and self.peek().kind == "ident":
                self.advance()
                names = [self.ident()]
                while not self.at(":"):
                    names.append(self.ident())
                self.expect(":")
                k = self.parse_kind()
                self.expect(")")
                out.extend((n, None) for n in pending)
                pending = []
                out.extend((n, k) for n in names)
            elif self.at(":"):
                if not pending:
                    self.error("expected a binder name before ':'")
                self.advance()
                k = self.parse_kind()
                out.extend((n, k) for n in pending)
                pending = []
                self.accept(",")
            else:
                break
        out.extend((n, default) for n in pending)
        if not out:
            self.error("expected a binder")
        return out

    # -- types

    def parse_type(self) -> Type:
        if self.at("forall"):
            self.advance()
            binders = self.parse_binders(KType())
            self.expect(".")
            return self._bind_types(binders, TForall)
        if self.at("\\"):
            self.advance()
            binders = self.parse_binders(None)
            if any(k is None for _, k in binders):
                self.error("type-level lambda binders need kinds")
            self.expect(".")
            return self._bind_types(binders, TLam)
        if self.at("("):
            preds = self._try_pred_group()
            if preds is not None:
                body = self.parse_type()
                for p in reversed(preds):
                    body = TQual(p, body)
                return body
        x = self.parse_type_or_pred()
        if isinstance(x, (PContain, PCombine)):
            self.expect("=>")
            return TQual(x, self.parse_type())
        if self.accept("|>"):
            return TLabeled(x, self.parse_type())
        return x

    def _bind_types(self, binders, ctor) -> Type:
        for n, _ in binders:
            self.scope.append(n)
        try:
            body = self.parse_type()
        finally:
            del self.scope[len(self.scope) - len(binders):]
        for n, k in reversed(binders):
            body = ctor(n, k, body)
        return body

    def _try_pred_group(self) -> Optional[list[Pred]]:
        save = self.pos
        try:
            self.expect("(")
            preds = [self.parse_pred()]
            while self.accept(","):
                preds.append(self.parse_pred())
            self.expect(")")
            self.expect("=>")
            return preds
        except ParseError:
            self.pos = save
            return None

    def parse_pred(self) -> Pred:
        x = self.parse_type_or_pred()
        if not isinstance(x, (PContain, PCombine)):
            self.error("expected a predicate")
        return x

    def parse_type_or_pred(self) -> Union[Type, Pred]:
        t = self.parse_arrow_type()
        for op, d in (("<:", "L"), ("<:L", "L"), ("<:R", "R")):
            if self.at(op):
                self.advance()
                return PContain(d, t, self.parse_arrow_type())
        if self.accept("o+"):
            u = self.parse_arrow_type()
            if self.accept("~"):
                return PCombine(t, u, self.parse_arrow_type())
            return TCombine(t, u)
        return t

    def parse_arrow_type(self) -> Type:
        t = self.parse_app_type()
        if self.accept("->"):
            return TApp(TApp(TArrow(), t), self.parse_arrow_type())
        return t

    def _type_atom_start(self) -> bool:
        t = self.tok
        if t.kind == "label":
            return True
        if t.kind == "ident":
            return t.text not in KEYWORDS
        return t.kind == "sym" and t.text in ("(", "<")

    def parse_app_type(self) -> Type:
        for kw, ctor in (("Pi", TPi), ("Sigma", TSigma), ("Sing", TSing)):
            if self.accept(kw):
                t: Type = ctor(self.parse_type_atom())
                break
        else:
            t = self.parse_type_atom()
        while self._type_atom_start():
            t = TApp(t, self.parse_type_atom())
        return t

    def parse_type_atom(self) -> Type:
        tok = self.tok
        if tok.kind == "label":
            self.advance()
            return TLabel(tok.text)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.advance()
            return self.resolve_type_name(tok.text)
        if self.accept("("):
            if self.at("->") and self.peek().text == ")":
                self.advance()
                self.advance()
                return TArrow()
            t = self.parse_type()
            self.expect(")")
            return t
        if self.accept("<"):
            entries = []
            if not self.at(">"):
                entries.append(self._row_entry())
                while self.accept(","):
                    entries.append(self._row_entry())
            self.expect(">")
            return TRow(tuple(entries))
        if self.at("Pi") or self.at("Sigma") or self.at("Sing"):
            return self.parse_app_type()
        self.error("expected a type")

    def _row_entry(self) -> TLabeled:
        lab = self.parse_app_type()
        self.expect("|>")
        return TLabeled(lab, self.parse_type())

    def resolve_type_name(self, name: str) -> Type:
        if name in self.scope:
            return TVar(name)
        if name in self.aliases:
            return self.aliases[name]
        if name in PRIM_TYPES:
            return TCon(name)
        return TLabel(name)

    # -- terms

    def parse_term(self) -> Term:
        start = self.tok.start
        if self.at("\\"):
            self.advance()
            params = self._lam_params()
            self.expect(".")
            body = self.parse_term()
            for n, ann in reversed(params):
                body = Lam(n, ann, body, span=self.span_from(start))
            return body
        if self.at("/\\"):
            self.advance()
            binders = self.parse_binders(None)
            self.expect(".")
            for n, _ in binders:
                self.scope.append(n)
            try:
                body = self.parse_term()
            finally:
                del self.scope[len(self.scope) - len(binders):]
            for n, k in reversed(binders):
                body = TyLam(n, k, body, span=self.span_from(start))
            return body
        return self.parse_branch()

    def _lam_params(self) -> list[tuple[str, Optional[Type]]]:
        params: list[tuple[str, Optional[Type]]] = []
        while True:
            if self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
                name = self.advance().text
                if self.accept(":"):
                    params.append((name, self.parse_type()))
                    break
                params.append((name, None))
            elif self.at("("):
                self.advance()
                names = [self.ident()]
                while not self.at(":"):
                    names.append(self.ident())
                self.expect(":")
                ty = self.parse_type()
                self.expect(")")
                params.extend((n, ty) for n in names)
            else:
                break
        if not params:
            self.error("expected a parameter")
        return params

    def _binary(self, sub, ops, ctor, start) -> Term:
        left = sub()
        while self.tok.kind == "sym" and self.tok.text in ops:
            op = self.advance().text
            right = sub()
            left = ctor(op, left, right, self.span_from(start))
        return left

    def parse_branch(self) -> Term:
        start = self.tok.start
        return self._binary(
            self.parse_concat, ("|||",),
            lambda op, l, r, sp: Branch(l, r, span=sp), start)

    def parse_concat(self) -> Term:
        start = self.tok.start
        return self._binary(
            self.parse_labeled, ("++",),
            lambda op, l, r, sp: Concat(l, r, span=sp), start)

    def parse_labeled(self) -> Term:
        start = self.tok.start
        left = self.parse_and()
        if self.accept("|>"):
            right = self.parse_labeled_rhs()
            return LabelIntro(left, right, span=self.span_from(start))
        return left

    def parse_labeled_rhs(self) -> Term:
        if self.at("\\") or self.at("/\\"):
            return self.parse_term()
        return self.parse_labeled()

    def parse_and(self) -> Term:
        start = self.tok.start
        return self._binary(self.parse_eq, ("&&",), lambda op, l, r, sp: BinOp(op, l, r, span=sp), start)

    def parse_eq(self) -> Term:
        start = self.tok.start
        return self._binary(self.parse_add, ("==",), lambda op, l, r, sp: BinOp(op, l, r, span=sp), start)

    def parse_add(self) -> Term:
        start = self.tok.start
        return self._binary(self.parse_mul, ("+", "-"), lambda op, l, r, sp: BinOp(op, l, r, span=sp), start)

    def parse_mul(self) -> Term:
        start = self.tok.start
        return self._binary(self.parse_unlabel, ("*",), lambda op, l, r, sp: BinOp(op, l, r, span=sp), start)

    def parse_unlabel(self) -> Term:
        start = self.tok.start
        return self._binary(
            self.parse_app, ("/",),
            lambda op, l, r, sp: Unlabel(l, r, span=sp), start)

    def _term_atom_start(self) -> bool:
        t = self.tok
        if t.kind in ("label", "int"):
            return True
        if t.kind == "ident":
            return t.text not in KEYWORDS or t.text in ("true", "false")
        return t.kind == "sym" and t.text == "("

    def parse_app(self) -> Term:
        start = self.tok.start
        t = self.parse_head()
        while True:
            if self.at("["):
                self.advance()
                ty = self.parse_type()
                self.expect("]")
                t = TyApp(t, ty, span=self.span_from(start))
            elif self._term_atom_start():
                a = self.parse_term_atom()
                t = App(t, a, span=self.span_from(start))
            else:
                return t

    def parse_head(self) -> Term:
        start = self.tok.start
        tok = self.tok
        if tok.kind == "ident":
            w = tok.text
            if w in ("prj", "prj_L", "prj_R", "inj", "inj_L", "inj_R"):
                self.advance()
                d = "R" if w.endswith("_R") else "L"
                arg = self.parse_term_atom()
                ctor = Prj if w.startswith("prj") else Inj
                return ctor(d, arg, span=self.span_from(start))
            if w in ("syn", "ana"):
                self.advance()
                op = None
                if self.accept("["):
                    op = self.parse_type()
                    self.expect("]")
                arg = self.parse_term_atom()
                ctor = Syn if w == "syn" else Ana
                return ctor(op, arg, span=self.span_from(start))
            if w == "foldPi":
                self.advance()
                args = [self.parse_term_atom() for _ in range(4)]
                return FoldPi(*args, span=self.span_from(start))
            sing = {"singPi": SingIntroPi, "unsingPi": SingElimPi,
                    "singSigma": SingIntroSig, "unsingSigma": SingElimSig}
            if w in sing:
                self.advance()
                arg = self.parse_term_atom()
                return sing[w](arg, span=self.span_from(start))
        return self.parse_term_atom()

    def parse_term_atom(self) -> Term:
        start = self.tok.start
        tok = self.tok
        if tok.kind == "label":
            self.advance()
            return LabelVal(tok.text, span=self.span_from(start))
        if tok.kind == "int":
            self.advance()
            return Lit(int(tok.text), span=self.span_from(start))
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                self.advance()
                return Lit(tok.text == "true", span=self.span_from(start))
            if tok.text not in KEYWORDS:
                self.advance()
                return Var(tok.text, span=self.span_from(start))
        if self.accept("("):
            if self.accept(")"):
                return EmptyRec(span=self.span_from(start))
            t = self.parse_term()
            if self.accept(":"):
                ty = self.parse_type()
                self.expect(")")
                return Ann(t, ty, span=self.span_from(start))
            self.expect(")")
            return t
        self.error("expected a term")

    # -- programs

    def parse_program(self) -> Program:
        theory, mode, pragma = "simple", "plain", False
        sigs: dict[str, Type] = {}
        sig_spans: dict[str, SourceSpan] = {}
        decls: list[Decl] = []
        aliases: list[tuple[str, Type]] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            start = self.tok.start
            if self.accept("%"):
                word = self.ident()
                if word == "theory":
                    name = self.ident()
                    if name not in THEORIES:
                        raise ParseError(f"unknown theory {name!r}", self.span_from(start))
                    theory, pragma = name, True
                elif word == "stratified":
                    mode = "stratified"
                else:
                    raise ParseError(f"unknown pragma {word!r}", self.span_from(start))
                continue
            if self.accept("type"):
                name = self.ident()
                self.expect("=")
                ty = self.parse_type()
                self.expect(";")
                self.aliases[name] = ty
                aliases.append((name, ty))
                continue
            name = self.ident()
            if self.accept(":"):
                ty = self.parse_type()
                self.expect(";")
                if name in sigs or name in seen:
                    raise ParseError(f"duplicate declaration of {name!r}", self.span_from(start))
                sigs[name] = ty
                sig_spans[name] = self.span_from(start)
                continue
            self.expect("=")
            body = self.parse_term()
            self.expect(";")
            if name in seen:
                raise ParseError(f"duplicate declaration of {name!r}", self.span_from(start))
            seen.add(name)
            decls.append(Decl(name, sigs.pop(name, None), body, self.span_from(start)))
        if sigs:
            name = next(iter(sigs))
            raise ParseError(f"signature for {name!r} has no body", sig_spans[name])
        return Program(tuple(decls), theory, mode, tuple(aliases), pragma)


def parse(text: str) -> Program:
    return Parser(text).parse_program()


def parse_type(text: str, scope: tuple[str, ...] = (), aliases: Optional[dict] = None) -> Type:
    p = Parser(text, aliases)
    p.scope = list(scope)
    t = p.parse_type()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


def parse_pred(text: str, scope: tuple[str, ...] = ()) -> Pred:
    p = Parser(text)
    p.scope = list(scope)
    x = p.parse_pred()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return x


def parse_term(text: str, scope: tuple[str, ...] = (), aliases: Optional[dict] = None) -> Term:
    p = Parser(text, aliases)
    p.scope = list(scope)
    t = p.parse_term()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


def parse_kind(text: str) -> Kind:
    p = Parser(text)
    k = p.parse_kind()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return k


# ---------------------------------------------------------------- printer


def show_kind(k: Kind, prec: int = 0) -> str:
    if isinstance(k, KAny):
        return "?"
    if isinstance(k, KType):
        return "Type" if k.level is None else f"Type^{k.level}"
    if isinstance(k, KLab):
        return "Lab"
    if isinstance(k, KRow):
        s = "Row " + show_kind(k.elem, 2)
        return f"({s})" if prec >= 2 else s
    if isinstance(k, KArrow):
        s = show_kind(k.dom, 1) + " -> " + show_kind(k.cod, 0)
        return f"({s})" if prec >= 1 else s
    raise TypeError(k)


def _paren(s: str, cond: bool) -> str:
    return f"({s})" if cond else s


def _lifted_view(t: TMap) -> Type:
    """Present ``TMap(\\s. body, row)`` as ``body[row/s]`` when that reads
    back to the same thing (``s`` used once, not under a binder)."""
    fn = t.fn
    if isinstance(fn, TLam) and _occurs_plain(fn.body, fn.var) == 1 and not (free_vars(t.row) & _binders_in(fn.body)):
        return subst_ty(fn.body, fn.var, t.row)
    return TApp(fn, t.row)


def _occurs_plain(t, v: str) -> int:
    """Count occurrences of ``v``; occurrences under a binder count double."""
    if isinstance(t, TVar):
        return 1 if t.name == v else 0
    if isinstance(t, (TForall, TLam, TQual)):
        return 2 if v in free_vars(t) else 0
    if isinstance(t, (TApp,)):
        return _occurs_plain(t.fun, v) + _occurs_plain(t.arg, v)
    if isinstance(t, TMap):
        return 2 if v in free_vars(t) else 0
    return 2 if v in free_vars(t) else 0


def _binders_in(t) -> set[str]:
    out = set()
    if isinstance(t, (TForall, TLam)):
        out.add(t.var)
        out |= _binders_in(t.body)
    elif isinstance(t, TApp):
        out |= _binders_in(t.fun) | _binders_in(t.arg)
    return out


def show_type(t: Type, prec: int = 0) -> str:
    """Precedences: 0 binders/labeled, 1 arrow, 2 application, 3 atom."""
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TCon):
        return t.name
    if isinstance(t, TLabel):
        return "'" + t.name
    if isinstance(t, TArrow):
        return "(->)"
    if isinstance(t, TForall):
        binders = []
        while isinstance(t, TForall):
            binders.append(f"{t.var}:{show_kind(t.kind)}")
            t = t.body
        return _paren(f"forall {', '.join(binders)}. {show_type(t, 0)}", prec > 0)
    if isinstance(t, TLam):
        binders = []
        while isinstance(t, TLam):
            binders.append(f"{t.var}:{show_kind(t.kind)}")
            t = t.body
        return _paren(f"\\{', '.join(binders)}. {show_type(t, 0)}", prec > 0)
    if isinstance(t, TQual):
        return _paren(f"({show_pred(t.pred)}) => {show_type(t.body, 0)}", prec > 0)
    if isinstance(t, TLabeled):
        return _paren(f"{show_type(t.label, 2)} |> {show_type(t.body, 0)}", prec > 0)
    if isinstance(t, TApp):
        sp = split_arrow(t)
        if sp is not None:
            return _paren(f"{show_type(sp[0], 2)} -> {show_type(sp[1], 1)}", prec > 1)
        return _paren(f"{show_type(t.fun, 2)} {show_type(t.arg, 3)}", prec > 2)
    if isinstance(t, TMap):
        return show_type(_lifted_view(t), prec)
    if isinstance(t, TPi):
        return _paren(f"Pi {show_type(t.row, 3)}", prec > 2)
    if isinstance(t, TSigma):
        return _paren(f"Sigma {show_type(t.row, 3)}", prec > 2)
    if isinstance(t, TSing):
        return _paren(f"Sing {show_type(t.label, 3)}", prec > 2)
    if isinstance(t, TRow):
        inner = ", ".join(f"{show_type(e.label, 2)} |> {show_type(e.body, 0)}" for e in t.entries)
        return f"<{inner}>"
    if isinstance(t, TCombine):
        return f"({show_type(t.left, 1)} o+ {show_type(t.right, 1)})"
    raise TypeError(f"not a type: {t!r}")


def show_pred(p: Pred) -> str:
    if isinstance(p, PContain):
        return f"{show_type(p.sub, 1)} <:{p.dir} {show_type(p.sup, 1)}"
    if isinstance(p, PCombine):
        return f"{show_type(p.left, 1)} o+ {show_type(p.right, 1)} ~ {show_type(p.result, 1)}"
    raise TypeError(p)


def show_term(t: Term, prec: int = 0) -> str:
    """Precedences: 0 binder, 1 |||, 2 ++, 3 |>, 4 &&, 5 ==, 6 + -, 7 *,
    8 /, 9 application, 10 atom."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, LabelVal):
        return "'" + t.name
    if isinstance(t, Lit):
        if isinstance(t.value, bool):
            return "true" if t.value else "false"
        return str(t.value)
    if isinstance(t, EmptyRec):
        return "()"
    if isinstance(t, Lam):
        params = []
        while isinstance(t, Lam):
            params.append(t.var if t.ann is None else f"({t.var} : {show_type(t.ann)})")
            t = t.body
        return _paren(f"\\{' '.join(params)}. {show_term(t, 0)}", prec > 0)
    if isinstance(t, TyLam):
        params = []
        while isinstance(t, TyLam):
            params.append(t.var if t.kind is None else f"({t.var} : {show_kind(t.kind)})")
            t = t.body
        return _paren(f"/\\{' '.join(params)}. {show_term(t, 0)}", prec > 0)
    if isinstance(t, App):
        return _paren(f"{show_term(t.f, 9)} {show_term(t.a, 10)}", prec > 9)
    if isinstance(t, TyApp):
        return _paren(f"{show_term(t.tm, 9)} [{show_type(t.ty)}]", prec > 9)
    if isinstance(t, Ann):
        return f"({show_term(t.tm, 0)} : {show_type(t.ty)})"
    if isinstance(t, LabelIntro):
        return _paren(f"{show_term(t.label, 4)} |> {show_term(t.payload, 3)}", prec > 3)
    if isinstance(t, Unlabel):
        return _paren(f"{show_term(t.tm, 8)} / {show_term(t.label, 9)}", prec > 8)
    if isinstance(t, Concat):
        return _paren(f"{show_term(t.l, 2)} ++ {show_term(t.r, 3)}", prec > 2)
    if isinstance(t, Branch):
        return _paren(f"{show_term(t.l, 1)} ||| {show_term(t.r, 2)}", prec > 1)
    if isinstance(t, BinOp):
        p = {"&&": 4, "==": 5, "+": 6, "-": 6, "*": 7}[t.op]
        right = p + 1
        left = p + 1 if t.op == "==" else p
        return _paren(f"{show_term(t.l, left)} {t.op} {show_term(t.r, right)}", prec > p)
    if isinstance(t, (Prj, Inj)):
        kw = "prj" if isinstance(t, Prj) else "inj"
        if t.dir == "R":
            kw += "_R"
        return _paren(f"{kw} {show_term(t.tm, 10)}", prec > 9)
    if isinstance(t, (Syn, Ana)):
        kw = "syn" if isinstance(t, Syn) else "ana"
        op = "" if t.op is None else f"[{show_type(t.op)}]"
        return _paren(f"{kw}{op} {show_term(t.body, 10)}", prec > 9)
    if isinstance(t, FoldPi):
        args = " ".join(show_term(x, 10) for x in (t.step, t.combine, t.unit, t.record))
        return _paren(f"foldPi {args}", prec > 9)
    sing = {SingIntroPi: "singPi", SingElimPi: "unsingPi",
            SingIntroSig: "singSigma", SingElimSig: "unsingSigma"}
    if type(t) in sing:
        return _paren(f"{sing[type(t)]} {show_term(t.tm, 10)}", prec > 9)
    raise TypeError(f"not a term: {t!r}")


def print_program(p: Program) -> str:
    lines: list[str] = []
    if p.theory_pragma or p.theory != "simple":
        lines.append(f"%theory {p.theory}")
    if p.mode == "stratified":
        lines.append("%stratified")
    for name, ty in p.aliases:
        lines.append(f"type {name} = {show_type(ty)};")
    for d in p.decls:
        if d.sig is not None:
            lines.append(f"{d.name} : {show_type(d.sig)};")
        lines.append(f"{d.name} = {show_term(d.body)};")
    return "\n".join(lines) + ("\n" if lines else "")


# ``print`` is the documented name of the printer; keep the builtin intact
# inside this module by binding it last.
print_ = print_program
