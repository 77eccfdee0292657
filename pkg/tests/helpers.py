"""Shared paths and small drivers for the test suite."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from rowo.eval import Runtime, show_value
from rowo.surface import Program, parse
from rowo.typecheck import Checker, ElabDecl

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
DATA = Path(__file__).resolve().parent / "data"

CORPUS_FILES = sorted(CORPUS.glob("*.ro"))


def read_program(path: Path) -> Program:
    return parse(path.read_text(encoding="utf-8"))


def elaborate_text(text: str, theory: Optional[str] = None, stratified: Optional[bool] = None,
                   **opts) -> list[ElabDecl]:
    p = parse(text)
    strat = stratified if stratified is not None else p.mode == "stratified"
    return Checker(theory or p.theory, stratified=strat, **opts).elaborate(p)[0]


def elaborate_file(path: Path, theory: Optional[str] = None, **opts) -> list[ElabDecl]:
    return elaborate_text(path.read_text(encoding="utf-8"), theory, **opts)


def run_text(text: str, entry: str, theory: Optional[str] = None) -> str:
    decls = elaborate_text(text, theory)
    return show_value(Runtime().load(decls).value(entry))


def decl_map(decls: list[ElabDecl]) -> dict[str, ElabDecl]:
    return {d.name: d for d in decls}


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}
