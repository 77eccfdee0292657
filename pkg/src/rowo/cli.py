"""Command-line driver: ``check``, ``run``, ``repl`` and ``corpus``.

Exit codes: 0 success, 1 type or kind error (or a failed corpus
comparison), 2 I/O or parse error, 3 a primitive failed at runtime.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from .core_ast import SourceSpan, TForall, TQual
from .eval import PrimError, Runtime, show_value
from .kinds import KindError
from .surface import ParseError, Parser, Program, parse, show_type
from .typecheck import Checker, ElabDecl, TypingError, show_core

EXIT_OK, EXIT_TYPE, EXIT_IO, EXIT_PRIM = 0, 1, 2, 3


@dataclass
class CliConfig:
    command: str
    paths: list[str] = field(default_factory=list)
    theory: Optional[str] = None
    stratified: bool = False
    trace: bool = False
    print_core: bool = False
    entry: str = "main"
    bless: bool = False


# ---------------------------------------------------------------- diagnostics


def _use_color(stream: TextIO) -> bool:
    mode = os.environ.get("ROWO_COLOR", "auto")
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def report(path: str, text: Optional[str], span: Optional[SourceSpan], kind: str, message: str,
           stream: TextIO) -> None:
    where = path
    if span is not None and text is not None:
        line, col = _line_col(text, span.start)
        where = f"{path}:{line}:{col}"
    label = "error"
    if _use_color(stream):
        label = f"\x1b[31m{label}\x1b[0m"
    stream.write(f"{where}: {label}: {kind}: {message}\n")


def _describe(exc: Exception) -> tuple[str, str]:
    if isinstance(exc, TypingError):
        detail = exc.detail or exc.reason
        if exc.expected is not None and exc.got is not None:
            detail += f" (expected {show_type(exc.expected)}, got {show_type(exc.got)})"
        if exc.decl:
            detail = f"in {exc.decl}: {detail}"
        return exc.reason, detail
    if isinstance(exc, KindError):
        detail = exc.detail
        decl = getattr(exc, "decl", None)
        if decl:
            detail = f"in {decl}: {detail}"
        return exc.reason, detail
    return type(exc).__name__, str(exc)


# ---------------------------------------------------------------- loading


@dataclass
class Loaded:
    path: str
    text: str
    program: Program
    checker: Checker
    decls: list[ElabDecl]


class CliFailure(Exception):
    def __init__(self, code: int):
        self.code = code


def _checker_for(prog: Program, cfg: CliConfig) -> Checker:
    theory = cfg.theory or prog.theory
    stratified = cfg.stratified or prog.mode == "stratified"
    return Checker(theory, stratified=stratified, trace=cfg.trace)


def load(path: str, cfg: CliConfig, err: TextIO) -> Loaded:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        report(path, None, None, "IOError", exc.strerror or str(exc), err)
        raise CliFailure(EXIT_IO) from None
    try:
        prog = parse(text)
    except ParseError as exc:
        report(path, text, exc.span, "ParseError", exc.message, err)
        raise CliFailure(EXIT_IO) from None
    checker = _checker_for(prog, cfg)
    try:
        decls, _ = checker.elaborate(prog)
    except (TypingError, KindError) as exc:
        kind, msg = _describe(exc)
        report(path, text, exc.span, kind, msg, err)
        raise CliFailure(EXIT_TYPE) from None
    return Loaded(path, text, prog, checker, decls)


# ---------------------------------------------------------------- commands


def cmd_check(cfg: CliConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    code = EXIT_OK
    for path in cfg.paths:
        try:
            ld = load(path, cfg, err)
        except CliFailure as f:
            code = max(code, f.code)
            continue
        if cfg.trace:
            out.write("\n".join(ld.checker.trace_lines) + "\n")
        if cfg.print_core:
            for d in ld.decls:
                out.write(f"{d.name} : {show_type(d.ty)}\n  = {show_core(d.core)}\n")
        out.write(f"{path}: ok ({len(ld.decls)} declarations, theory {ld.checker.theory.name})\n")
    return code


def _runnable(ty) -> bool:
    return not isinstance(ty, (TForall, TQual))


def cmd_run(cfg: CliConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if len(cfg.paths) != 1:
        err.write("run expects exactly one file\n")
        return EXIT_IO
    path = cfg.paths[0]
    try:
        ld = load(path, cfg, err)
    except CliFailure as f:
        return f.code
    if cfg.trace:
        out.write("\n".join(ld.checker.trace_lines) + "\n")
    if cfg.print_core:
        for d in ld.decls:
            out.write(f"{d.name} : {show_type(d.ty)}\n  = {show_core(d.core)}\n")
    decl = next((d for d in ld.decls if d.name == cfg.entry), None)
    if decl is None:
        report(path, None, None, "UnknownEntry", f"no declaration named {cfg.entry}", err)
        return EXIT_TYPE
    if not _runnable(decl.ty):
        report(path, ld.text, decl.span, "PolymorphicEntry",
               f"cannot run polymorphic entry {cfg.entry} : {show_type(decl.ty)}", err)
        return EXIT_TYPE
    try:
        v = Runtime().load(ld.decls).value(cfg.entry)
    except PrimError as exc:
        report(path, None, None, "PrimError", str(exc), err)
        return EXIT_PRIM
    out.write(show_value(v) + "\n")
    return EXIT_OK


def corpus_output(ld: Loaded) -> str:
    """The text compared against a file's ``.expected``: one line per
    ``test_*`` entry, in declaration order."""
    rt = Runtime().load(ld.decls)
    lines = []
    for d in ld.decls:
        if not d.name.startswith("test_"):
            continue
        if not _runnable(d.ty):
            lines.append(f"{d.name} = <polymorphic>")
            continue
        try:
            lines.append(f"{d.name} = {show_value(rt.value(d.name))}")
        except PrimError as exc:
            lines.append(f"{d.name} = PrimError: {exc}")
    return "".join(line + "\n" for line in lines)


def cmd_corpus(cfg: CliConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    code = EXIT_OK
    files: list[Path] = []
    for p in cfg.paths or ["."]:
        root = Path(p)
        if root.is_file():
            files.append(root)
        elif root.is_dir():
            files.extend(sorted(root.rglob("*.ro")))
        else:
            report(p, None, None, "IOError", "no such file or directory", err)
            code = EXIT_IO
    passed = 0
    for f in files:
        try:
            ld = load(str(f), cfg, err)
        except CliFailure as fail:
            code = max(code, fail.code)
            out.write(f"FAIL {f}\n")
            continue
        got = corpus_output(ld)
        exp_path = f.with_suffix(".expected")
        if cfg.bless:
            exp_path.write_text(got, encoding="utf-8")
        if exp_path.exists():
            want = exp_path.read_text(encoding="utf-8")
        elif not got:
            want = ""
        else:
            report(str(f), None, None, "MissingExpected", f"{exp_path.name} not found", err)
            code = max(code, EXIT_TYPE)
            out.write(f"FAIL {f}\n")
            continue
        if got == want:
            passed += 1
            out.write(f"ok   {f}\n")
        else:
            code = max(code, EXIT_TYPE)
            out.write(f"FAIL {f}\n")
            for a, b in zip(want.splitlines() + [""] * 100, got.splitlines()):
                if a != b:
                    err.write(f"{f}: expected {a!r}\n{f}:      got {b!r}\n")
                    break
            else:
                err.write(f"{f}: output differs from {exp_path.name}\n")
    out.write(f"{passed}/{len(files)} files passed\n")
    return code


# ---------------------------------------------------------------- REPL


class Repl:
    def __init__(self, cfg: CliConfig, out: TextIO, err: TextIO):
        self.cfg = cfg
        self.out = out
        self.err = err
        self.source = ""  # accepted definitions
        self.pending = ""  # signatures waiting for a body
        self.program = parse("")
        self.checker = Checker(cfg.theory or "simple", stratified=cfg.stratified)
        self.env = None
        self.runtime = Runtime()
        self._reload([])

    def _reload(self, decls: list[ElabDecl]) -> None:
        self.runtime = Runtime().load(decls)

    def _error(self, exc: Exception, text: str) -> None:
        if isinstance(exc, ParseError):
            report("<repl>", text, exc.span, "ParseError", exc.message, self.err)
        else:
            kind, msg = _describe(exc)
            report("<repl>", None, None, kind, msg, self.err)

    def define(self, chunk: str) -> None:
        text = self.source + self.pending + chunk + "\n"
        try:
            prog = parse(text)
        except ParseError as exc:
            if "has no body" in exc.message:
                self.pending += chunk + "\n"
                return
            self._error(exc, text)
            return
        try:
            decls, env = self.checker.elaborate(prog)
        except (TypingError, KindError) as exc:
            self._error(exc, text)
            return
        before = {d.name for d in self.program.decls}
        self.source, self.pending, self.program, self.env = text, "", prog, env
        self._reload(decls)
        for d in decls:
            if d.name not in before:
                self.out.write(f"{d.name} : {show_type(d.ty)}\n")

    def _term(self, text: str):
        p = Parser(text, dict(self.program.aliases))
        t = p.parse_term()
        if p.tok.kind != "eof":
            p.error("unexpected trailing input")
        return t

    def expression(self, text: str, mode: str) -> None:
        try:
            term = self._term(text)
            env = self.env if self.env is not None else self.checker.elaborate(self.program)[1]
            ty, core = self.checker.infer(env, term)
        except (ParseError, TypingError, KindError) as exc:
            self._error(exc, text)
            return
        if mode == "type":
            self.out.write(show_type(ty) + "\n")
        elif mode == "core":
            self.out.write(show_core(core) + "\n")
        else:
            try:
                self.out.write(show_value(self.runtime.eval_core(core)) + "\n")
            except PrimError as exc:
                report("<repl>", None, None, "PrimError", str(exc), self.err)

    def handle(self, line: str) -> bool:
        s = line.strip()
        if not s or s.startswith("--"):
            return True
        if s in (":q", ":quit"):
            return False
        if s.startswith(":t "):
            self.expression(s[3:], "type")
        elif s.startswith(":core "):
            self.expression(s[6:], "core")
        elif s.startswith(":"):
            self.err.write(f"unknown command {s.split()[0]}; try :t, :core or :q\n")
        elif s.endswith(";"):
            self.define(s)
        else:
            self.expression(s, "value")
        return True

    def run(self, inp: TextIO) -> int:
        interactive = hasattr(inp, "isatty") and inp.isatty()
        while True:
            if interactive:
                self.out.write("rowo> ")
                self.out.flush()
            line = inp.readline()
            if not line:
                return EXIT_OK
            if not self.handle(line):
                return EXIT_OK


def cmd_repl(cfg: CliConfig, inp: Optional[TextIO] = None, out: Optional[TextIO] = None,
             err: Optional[TextIO] = None) -> int:
    inp, out, err = inp or sys.stdin, out or sys.stdout, err or sys.stderr
    return Repl(cfg, out, err).run(inp)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rowo", description="Row-typed F-omega: checker and evaluator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theory", choices=("minimal", "simple", "scoped"),
                        help="row theory (overrides the file's %%theory pragma)")
    common.add_argument("--stratified", action="store_true", help="enable universe-level checking")
    common.add_argument("--trace", action="store_true", help="print the typing derivation")
    common.add_argument("--print-core", action="store_true", help="print elaborated terms")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="typecheck files")
    p.add_argument("paths", nargs="+")
    p = sub.add_parser("run", parents=[common], help="evaluate an entry of a file")
    p.add_argument("paths", nargs=1)
    p.add_argument("--entry", default="main")
    sub.add_parser("repl", parents=[common], help="interactive session")
    p = sub.add_parser("corpus", parents=[common], help="check and run a directory of .ro files")
    p.add_argument("paths", nargs="*")
    p.add_argument("--bless", action="store_true", help="rewrite the .expected files")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    ns = build_parser().parse_args(argv)
    cfg = CliConfig(
        command=ns.command, paths=list(getattr(ns, "paths", []) or []), theory=ns.theory,
        stratified=ns.stratified, trace=ns.trace, print_core=ns.print_core,
        entry=getattr(ns, "entry", "main"), bless=getattr(ns, "bless", False),
    )
    handler = {"check": cmd_check, "run": cmd_run, "repl": cmd_repl, "corpus": cmd_corpus}[cfg.command]
    return handler(cfg)


if __name__ == "__main__":
    sys.exit(main())
