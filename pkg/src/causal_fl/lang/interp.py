"""Tree-walking interpreter for MIL with recording hooks."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

from . import ast as A
from .errors import ArityMismatch
from .values import NA, is_number, to_str, type_name, wrap_int

DEFAULT_STEP_LIMIT = 10**7
MAX_CALL_DEPTH = 200

COMPLETED = "Completed"
ASSERTION_FAILED = "AssertionFailed"
RUNTIME_ERROR = "RuntimeError"

# (site_id, value, covariate snapshot {parent_site_id: value})
RecordHook = Callable[[str, object, Dict[str, object]], None]


@dataclass(frozen=True)
class ExecutionResult:
    stdout: str
    status: str
    step_count: int
    error_kind: Optional[str] = None
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    def outcome(self):
        """What a test oracle observes: output plus status."""
        return (self.stdout, self.status, self.error_kind)


class MilRuntimeError(Exception):
    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


class ArgumentTypeError(ValueError):
    pass


class _AssertFailed(Exception):
    pass


class _Return:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


_VOID = object()


def _check_type(v, ptype: str):
    """Coerce a value to a declared parameter type or return _VOID."""
    if ptype == "int":
        return v if isinstance(v, int) and not isinstance(v, bool) else _VOID
    if ptype == "float":
        if isinstance(v, float):
            return v
        if isinstance(v, int) and not isinstance(v, bool):
            return float(v)
        return _VOID
    if ptype == "bool":
        return v if isinstance(v, bool) else _VOID
    if ptype == "str":
        return v if isinstance(v, str) else _VOID
    return _VOID


def _mismatch(op, *vals):
    types = ", ".join(type_name(v) for v in vals)
    return MilRuntimeError("TypeMismatch", f"'{op}' on {types}")


def _arith(op, a, b):
    if op == "+" and (isinstance(a, str) or isinstance(b, str)):
        if a is _VOID or b is _VOID:
            raise _mismatch(op, a, b)
        return to_str(a) + to_str(b)
    if not (is_number(a) and is_number(b)):
        raise _mismatch(op, a, b)
    if isinstance(a, int) and isinstance(b, int):
        if op == "+":
            return wrap_int(a + b)
        if op == "-":
            return wrap_int(a - b)
        if op == "*":
            return wrap_int(a * b)
        if b == 0:
            raise MilRuntimeError("DivByZero", f"{a} {op} 0")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        if op == "/":
            return wrap_int(q)
        return wrap_int(a - b * q)
    a = float(a)
    b = float(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0.0:
        raise MilRuntimeError("DivByZero", f"{a} {op} 0.0")
    if op == "/":
        return a / b
    return math.fmod(a, b)


def _compare(op, a, b):
    if a is _VOID or b is _VOID:
        raise _mismatch(op, a, b)
    if op in ("==", "!="):
        if is_number(a) and is_number(b):
            eq = a == b
        elif type(a) is type(b):
            eq = a == b
        else:
            eq = False
        return eq if op == "==" else not eq
    if is_number(a) and is_number(b):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    else:
        raise _mismatch(op, a, b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _cast_int(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            raise MilRuntimeError("BadCast", f"int({to_str(v)})")
        return wrap_int(int(v))
    if isinstance(v, str):
        try:
            return wrap_int(int(v.strip()))
        except ValueError:
            raise MilRuntimeError("BadCast", f"int({v!r})") from None
    raise _mismatch("int", v)


def _cast_float(v):
    if isinstance(v, (bool, int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v.strip())
        except ValueError:
            raise MilRuntimeError("BadCast", f"float({v!r})") from None
    raise _mismatch("float", v)


def _builtin(name, args):
    if name == "int":
        return _cast_int(args[0])
    if name == "float":
        return _cast_float(args[0])
    if name == "str":
        if args[0] is _VOID:
            raise _mismatch("str", args[0])
        return to_str(args[0])
    if name == "len":
        if not isinstance(args[0], str):
            raise _mismatch("len", args[0])
        return len(args[0])
    if name == "abs":
        if not is_number(args[0]):
            raise _mismatch("abs", args[0])
        return wrap_int(abs(args[0])) if isinstance(args[0], int) else abs(args[0])
    if name in ("min", "max"):
        a, b = args
        if not (is_number(a) and is_number(b)):
            raise _mismatch(name, a, b)
        return min(a, b) if name == "min" else max(a, b)
    if name == "substr":
        s, i, j = args
        if not (isinstance(s, str) and isinstance(i, int) and isinstance(j, int)) or isinstance(i, bool) or isinstance(j, bool):
            raise _mismatch("substr", s, i, j)
        if not 0 <= i <= j <= len(s):
            raise MilRuntimeError("IndexError", f"substr({i}, {j}) of length {len(s)}")
        return s[i:j]
    raise MilRuntimeError("Undefined", f"function {name}")


class _Frame:
    __slots__ = ("env", "defsite")

    def __init__(self):
        self.env = {}
        self.defsite = {}


class Interpreter:
    """Executes one program run. Not reentrant: create one per execution."""

    def __init__(self, program: A.Program, hook: Optional[RecordHook] = None,
                 step_limit: int = DEFAULT_STEP_LIMIT, flip: Optional[str] = None):
        if step_limit <= 0:
            raise ValueError("step_limit must be positive")
        self.program = program
        self.functions = {fn.name: fn for fn in program.functions}
        self.hook = hook
        self.step_limit = step_limit
        self.flip = flip
        self.steps = 0
        self.out = []
        self.depth = 0
        # values of assignment expressions evaluated inside the current
        # recorded right-hand side (one dict per nesting level)
        self.inner = []
        self._stmt = {
            A.Assign: self._assign,
            A.If: self._if,
            A.While: self._while,
            A.Print: self._print,
            A.Assert: self._assert,
            A.Return: self._return,
            A.ExprStmt: self._exprstmt,
            A.Record: self._record,
        }

    # entry point
    def run(self, args: Sequence) -> ExecutionResult:
        main = self.functions.get("main")
        if main is None:
            raise ArityMismatch("main", 0, len(args))
        if len(args) != len(main.params):
            raise ArityMismatch("main", len(main.params), len(args))
        coerced = []
        for p, v in zip(main.params, args):
            c = _check_type(v, p.type)
            if c is _VOID:
                raise ArgumentTypeError(f"argument {p.name} expects {p.type}, got {type_name(v)}")
            coerced.append(c)
        old_limit = sys.getrecursionlimit()
        if old_limit < 20000:
            sys.setrecursionlimit(20000)
        try:
            self.call(main, coerced)
            status, kind, msg = COMPLETED, None, ""
        except _AssertFailed as exc:
            status, kind, msg = ASSERTION_FAILED, None, str(exc)
        except MilRuntimeError as exc:
            status, kind, msg = RUNTIME_ERROR, exc.kind, str(exc)
        return ExecutionResult("".join(self.out), status, self.steps, kind, msg)

    def tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise MilRuntimeError("StepLimit", f"exceeded {self.step_limit} steps")

    def call(self, fn: A.FunctionDecl, args):
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            raise MilRuntimeError("StackOverflow", f"call depth {self.depth}")
        frame = _Frame()
        for i, (p, v) in enumerate(zip(fn.params, args)):
            frame.env[p.name] = v
            if fn.param_sites:
                site = fn.param_sites[i]
                frame.defsite[p.name] = site.site_id
                if self.hook is not None:
                    self.hook(site.site_id, v, {})
        r = self.block(fn.body, frame)
        self.depth -= 1
        return r.value if r is not None else _VOID

    def block(self, stmts, frame):
        dispatch = self._stmt
        for s in stmts:
            r = dispatch[type(s)](s, frame)
            if r is not None:
                return r
        return None

    # statements
    def _define(self, name, value, site, frame, snapshot):
        frame.env[name] = value
        if site is not None:
            frame.defsite[name] = site.site_id
            if self.hook is not None:
                self.hook(site.site_id, value, snapshot)

    def _eval_recorded(self, value_expr, site, frame):
        """Evaluate a right-hand side and build the covariate snapshot."""
        if self.hook is None or site is None:
            value = self.eval(value_expr, frame)
            if site is not None and site.site_id == self.flip:
                value = self._negate(value)
            return value, None
        has_inner = any(c[2] for c in site.covariates)
        if has_inner:
            self.inner.append({})
        try:
            value = self.eval(value_expr, frame)
        finally:
            inner = self.inner.pop() if has_inner else None
        if site.site_id == self.flip:
            value = self._negate(value)
        snap = {}
        env, defsite = frame.env, frame.defsite
        for parent, base, is_inner in site.covariates:
            if is_inner:
                snap[parent] = inner.get(parent, NA)
            elif defsite.get(base) == parent:
                snap[parent] = env[base]
            else:
                snap[parent] = NA
        return value, snap

    @staticmethod
    def _negate(value):
        if not isinstance(value, bool):
            raise _mismatch("!", value)
        return not value

    def _assign(self, s, frame):
        if not s.synthetic:
            self.tick()
        value, snap = self._eval_recorded(s.value, s.site, frame)
        if value is _VOID:
            raise MilRuntimeError("TypeMismatch", "void value assigned")
        self._define(s.name, value, s.site, frame, snap)

    def _record(self, s, frame):
        site = s.site
        if site is None:
            return
        if self.hook is not None:
            snap = {}
            env, defsite = frame.env, frame.defsite
            for parent, base, _ in site.covariates:
                snap[parent] = env[base] if defsite.get(base) == parent else NA
            self.hook(site.site_id, frame.env.get(s.name, NA), snap)
        frame.defsite[s.name] = site.site_id

    def _cond(self, expr, frame):
        v = self.eval(expr, frame)
        if not isinstance(v, bool):
            raise _mismatch("condition", v)
        return v

    def _if(self, s, frame):
        self.tick()
        if self._cond(s.cond, frame):
            return self.block(s.then, frame)
        if s.orelse is not None:
            return self.block(s.orelse, frame)
        return None

    def _while(self, s, frame):
        entry = s.entry
        while True:
            self.tick()
            for rec in entry:
                self._record(rec, frame)
            if not self._cond(s.cond, frame):
                return None
            r = self.block(s.body, frame)
            if r is not None:
                return r

    def _print(self, s, frame):
        self.tick()
        v = self.eval(s.value, frame)
        if v is _VOID:
            raise MilRuntimeError("TypeMismatch", "print of void value")
        self.out.append(to_str(v) + "\n")

    def _assert(self, s, frame):
        self.tick()
        v = self._cond(s.value, frame)
        if not v:
            raise _AssertFailed(f"assertion failed at line {s.span.line}")

    def _return(self, s, frame):
        self.tick()
        return _Return(_VOID if s.value is None else self.eval(s.value, frame))

    def _exprstmt(self, s, frame):
        self.tick()
        self.eval(s.value, frame)

    # expressions
    def eval(self, e, frame):
        t = type(e)
        if t is A.Var:
            try:
                return frame.env[e.name]
            except KeyError:
                raise MilRuntimeError("Undefined", e.name) from None
        if t is A.BinOp:
            op = e.op
            if op == "&&" or op == "||":
                left = self.eval(e.left, frame)
                if not isinstance(left, bool):
                    raise _mismatch(op, left)
                if (op == "&&") != left:
                    return left
                right = self.eval(e.right, frame)
                if not isinstance(right, bool):
                    raise _mismatch(op, right)
                return right
            left = self.eval(e.left, frame)
            right = self.eval(e.right, frame)
            if op in ("+", "-", "*", "/", "%"):
                return _arith(op, left, right)
            return _compare(op, left, right)
        if t is A.IntLit or t is A.FloatLit or t is A.StrLit or t is A.BoolLit:
            return e.value
        if t is A.UnOp:
            v = self.eval(e.operand, frame)
            if e.op == "!":
                if not isinstance(v, bool):
                    raise _mismatch("!", v)
                return not v
            if isinstance(v, bool) or not is_number(v):
                raise _mismatch("-", v)
            return wrap_int(-v) if isinstance(v, int) else -v
        if t is A.Call:
            args = [self.eval(a, frame) for a in e.args]
            fn = self.functions.get(e.name)
            if fn is None:
                return _builtin(e.name, args)
            coerced = []
            for p, v in zip(fn.params, args):
                c = _check_type(v, p.type)
                if c is _VOID:
                    raise _mismatch(f"call {e.name}", v)
                coerced.append(c)
            return self.call(fn, coerced)
        if t is A.AssignExpr:
            site = e.site
            value, snap = self._eval_recorded(e.value, site, frame)
            if value is _VOID:
                raise MilRuntimeError("TypeMismatch", "void value assigned")
            self._define(e.name, value, site, frame, snap)
            if site is not None and self.inner:
                self.inner[-1][site.site_id] = value
            return value
        raise TypeError(f"unknown expression node {t.__name__}")


def execute(program: A.Program, args: Sequence = (), hook: Optional[RecordHook] = None,
            step_limit: int = DEFAULT_STEP_LIMIT, flip: Optional[str] = None) -> ExecutionResult:
    """Run ``main`` of ``program`` on ``args``.

    ``hook`` is called at every instrumented definition with the site id,
    the assigned value and the covariate snapshot. ``flip`` names a
    predicate site whose computed value is negated on every evaluation.
    """
    return Interpreter(program, hook, step_limit, flip).run(args)
