"""AST node types for MIL programs.

Nodes are frozen dataclasses so parsed programs can be shared between
concurrent executions. Source spans and instrumentation metadata are
excluded from equality, so two programs compare equal when their
structure matches regardless of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple


@dataclass(frozen=True)
class Span:
    line: int
    col: int


NO_SPAN = Span(0, 0)


@dataclass(frozen=True)
class SiteRef:
    """Runtime recording info attached to an instrumented definition.

    ``covariates`` holds ``(parent_site_id, base_name, inner)`` triples.
    ``inner`` parents are defined by assignment expressions nested in the
    same right-hand side and are read from the current evaluation only.
    """

    site_id: str
    covariates: Tuple[Tuple[str, str, bool], ...] = ()


class Node:
    __slots__ = ()


class Expr(Node):
    __slots__ = ()


class Stmt(Node):
    __slots__ = ()


# Expressions

@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class StrLit(Expr):
    value: str
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class UnOp(Expr):
    op: str
    operand: Expr
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: Tuple[Expr, ...]
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class AssignExpr(Expr):
    """``(name := value)``: assigns and yields the value."""

    name: str
    value: Expr
    paren: bool = False
    span: Span = field(default=NO_SPAN, compare=False)
    site: Optional[SiteRef] = field(default=None, compare=False)


# Statements

@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False)
    site: Optional[SiteRef] = field(default=None, compare=False)
    synthetic: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Record(Stmt):
    """Phi recording point: records the current value of ``name``."""

    name: str
    span: Span = field(default=NO_SPAN, compare=False)
    site: Optional[SiteRef] = field(default=None, compare=False)


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Tuple[Stmt, ...]
    orelse: Optional[Tuple[Stmt, ...]] = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Tuple[Stmt, ...]
    span: Span = field(default=NO_SPAN, compare=False)
    # phi records executed at the loop header before every condition test
    entry: Tuple[Record, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Print(Stmt):
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Assert(Stmt):
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ExprStmt(Stmt):
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class FunctionDecl(Node):
    name: str
    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    span: Span = field(default=NO_SPAN, compare=False)
    # one SiteRef per parameter once instrumented
    param_sites: Tuple[SiteRef, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Program(Node):
    functions: Tuple[FunctionDecl, ...]
    source: str = field(default="", compare=False, repr=False)

    def function(self, name: str) -> FunctionDecl:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


TYPES = ("int", "float", "bool", "str")


def iter_exprs(expr: Expr):
    """Yield ``expr`` and all sub-expressions in evaluation order."""
    yield expr
    if isinstance(expr, BinOp):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, UnOp):
        yield from iter_exprs(expr.operand)
    elif isinstance(expr, Call):
        for a in expr.args:
            yield from iter_exprs(a)
    elif isinstance(expr, AssignExpr):
        yield from iter_exprs(expr.value)


def iter_stmts(stmts):
    """Yield every statement in ``stmts`` recursively, in preorder."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            if s.orelse is not None:
                yield from iter_stmts(s.orelse)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def stmt_exprs(stmt: Stmt):
    """Top-level expressions owned directly by ``stmt``."""
    if isinstance(stmt, (Assign, Print, Assert, ExprStmt)):
        return (stmt.value,)
    if isinstance(stmt, Return):
        return () if stmt.value is None else (stmt.value,)
    if isinstance(stmt, (If, While)):
        return (stmt.cond,)
    return ()
