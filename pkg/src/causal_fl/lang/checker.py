"""Static pre-pass: definite assignment of variables and call arity."""
from __future__ import annotations

from . import ast as A
from .errors import ArityMismatch, MilSyntaxError, UnresolvedVariable

# name -> (min arity, max arity)
BUILTINS = {
    "int": (1, 1),
    "float": (1, 1),
    "str": (1, 1),
    "len": (1, 1),
    "abs": (1, 1),
    "min": (2, 2),
    "max": (2, 2),
    "substr": (3, 3),
}


def check_program(program: A.Program) -> None:
    arities = {}
    for fn in program.functions:
        if fn.name in arities or fn.name in BUILTINS:
            raise MilSyntaxError(fn.span.line, fn.span.col, f"duplicate function '{fn.name}'")
        seen = set()
        for p in fn.params:
            if p.name in seen:
                raise MilSyntaxError(p.span.line, p.span.col, f"duplicate parameter '{p.name}'")
            seen.add(p.name)
        arities[fn.name] = (len(fn.params), len(fn.params))
    arities.update(BUILTINS)
    for fn in program.functions:
        _Checker(arities).check_function(fn)


class _Checker:
    def __init__(self, arities):
        self.arities = arities

    def check_function(self, fn: A.FunctionDecl) -> None:
        defined = {p.name for p in fn.params}
        self.block(fn.body, defined)

    def block(self, stmts, defined):
        """Returns the definitely-assigned set after ``stmts``, or None if
        control never falls through."""
        for i, s in enumerate(stmts):
            if defined is None:
                raise MilSyntaxError(s.span.line, s.span.col, "unreachable statement")
            defined = self.stmt(s, defined)
        return defined

    def stmt(self, s, defined):
        if isinstance(s, A.Assign):
            defined = self.expr(s.value, defined, True)
            return defined | {s.name}
        if isinstance(s, A.Record):
            return defined
        if isinstance(s, A.If):
            defined = self.expr(s.cond, defined, True)
            then = self.block(s.then, set(defined))
            orelse = self.block(s.orelse, set(defined)) if s.orelse is not None else set(defined)
            if then is None:
                return orelse
            if orelse is None:
                return then
            return then & orelse
        if isinstance(s, A.While):
            after_cond = self.expr(s.cond, defined, True)
            self.block(s.body, set(after_cond))
            return after_cond
        if isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value, defined, True)
            return None
        # Print, Assert, ExprStmt
        return self.expr(s.value, defined, True)

    def expr(self, e, defined, certain):
        """Check uses in ``e``; returns ``defined`` extended with names
        bound by assignment expressions that always execute."""
        if isinstance(e, A.Var):
            if e.name not in defined:
                raise UnresolvedVariable(e.name, e.span.line)
            return defined
        if isinstance(e, A.BinOp):
            defined = self.expr(e.left, defined, certain)
            lazy = e.op in ("&&", "||")
            inner = self.expr(e.right, defined, certain and not lazy)
            return defined if lazy else inner
        if isinstance(e, A.UnOp):
            return self.expr(e.operand, defined, certain)
        if isinstance(e, A.Call):
            if e.name not in self.arities:
                raise MilSyntaxError(e.span.line, e.span.col, f"unknown function '{e.name}'")
            lo, hi = self.arities[e.name]
            if not lo <= len(e.args) <= hi:
                raise ArityMismatch(e.name, lo, len(e.args))
            for a in e.args:
                defined = self.expr(a, defined, certain)
            return defined
        if isinstance(e, A.AssignExpr):
            defined = self.expr(e.value, defined, certain)
            return defined | {e.name} if certain else defined
        return defined
