"""Predicate-to-assignment transformation.

Every branch and loop condition becomes an assignment to a fresh boolean
``P<k>_0``; in a compound ``&&``/``||`` chain each atomic part is also
captured as ``P<k>_<j>`` through an assignment expression, so
short-circuited atoms are simply never assigned.
"""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from typing import List, Tuple

from .lang import ast as A
from .lang.render import render_expr

PRED_NAME = re.compile(r"^P\d+_\d+$")


@dataclass(frozen=True)
class PredicateEntry:
    pred_id: str
    ordinal: int
    conjunct_index: int
    control_kind: str  # if | if-else | while
    expression: str
    line: int
    function: str


@dataclass
class PredicateTable:
    entries: List[PredicateEntry]

    def by_id(self):
        return {e.pred_id: e for e in self.entries}

    def names(self):
        return {e.pred_id for e in self.entries}

    def conditions(self):
        """Whole-condition entries (conjunct index 0)."""
        return [e for e in self.entries if e.conjunct_index == 0]

    def to_json(self) -> str:
        return json.dumps({"predicates": [asdict(e) for e in self.entries]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PredicateTable":
        data = json.loads(text)
        return cls([PredicateEntry(**e) for e in data["predicates"]])


def atoms_of(cond: A.Expr) -> List[A.Expr]:
    """Atomic parts of the top-level, unparenthesized &&/|| chain."""
    if isinstance(cond, A.BinOp) and cond.op in ("&&", "||") and not cond.paren:
        return atoms_of(cond.left) + atoms_of(cond.right)
    return [cond]


def _lower(cond: A.Expr, names: List[str], pos: List[int]) -> A.Expr:
    if isinstance(cond, A.BinOp) and cond.op in ("&&", "||") and not cond.paren:
        left = _lower(cond.left, names, pos)
        right = _lower(cond.right, names, pos)
        return A.BinOp(cond.op, left, right, span=cond.span)
    name = names[pos[0]]
    pos[0] += 1
    return A.AssignExpr(name, cond, span=cond.span)


class _Transformer:
    def __init__(self):
        self.count = 0
        self.entries = []

    def condition(self, fn_name, cond, kind, line) -> Tuple[str, A.Expr]:
        self.count += 1
        k = self.count
        whole = f"P{k}_0"
        parts = atoms_of(cond)
        self.entries.append(PredicateEntry(whole, k, 0, kind, render_expr(cond), line, fn_name))
        if len(parts) == 1:
            return whole, cond
        names = [f"P{k}_{j}" for j in range(1, len(parts) + 1)]
        for j, (name, atom) in enumerate(zip(names, parts), start=1):
            self.entries.append(PredicateEntry(name, k, j, kind, render_expr(atom), line, fn_name))
        return whole, _lower(cond, names, [0])

    def block(self, fn_name, stmts):
        out = []
        for s in stmts:
            if isinstance(s, A.If):
                kind = "if" if s.orelse is None else "if-else"
                name, lowered = self.condition(fn_name, s.cond, kind, s.span.line)
                then = self.block(fn_name, s.then)
                orelse = self.block(fn_name, s.orelse) if s.orelse is not None else None
                out.append(A.Assign(name, lowered, span=s.span, synthetic=True))
                out.append(A.If(A.Var(name, span=s.span), then, orelse, span=s.span))
            elif isinstance(s, A.While):
                name, lowered = self.condition(fn_name, s.cond, "while", s.span.line)
                body = self.block(fn_name, s.body)
                cond = A.AssignExpr(name, lowered, span=s.span)
                out.append(A.While(cond, body, span=s.span))
            else:
                out.append(s)
        return tuple(out)


def _check_names(program: A.Program) -> None:
    for fn in program.functions:
        names = {p.name for p in fn.params}
        for s in A.iter_stmts(fn.body):
            if isinstance(s, A.Assign):
                names.add(s.name)
            for e in A.stmt_exprs(s):
                for sub in A.iter_exprs(e):
                    if isinstance(sub, A.AssignExpr):
                        names.add(sub.name)
        clash = sorted(n for n in names if PRED_NAME.match(n))
        if clash:
            raise ValueError(f"identifier {clash[0]!r} in {fn.name} clashes with predicate naming")


def transform_predicates(program: A.Program) -> Tuple[A.Program, PredicateTable]:
    """Lower all conditions of ``program``; returns the new program and
    the table describing each inserted predicate variable."""
    _check_names(program)
    tr = _Transformer()
    functions = []
    for fn in program.functions:
        body = tr.block(fn.name, fn.body)
        functions.append(A.FunctionDecl(fn.name, fn.params, body, span=fn.span))
    return A.Program(tuple(functions), source=program.source), PredicateTable(tr.entries)
