"""Lexer and recursive-descent parser for MIL."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

from . import ast as A
from .errors import MilSyntaxError

KEYWORDS = {"fn", "let", "if", "else", "while", "print", "assert", "return", "true", "false"}
INT_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||[-+*/%<>!=(){},;:])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # int, float, str, ident, kw, op, eof
    text: str
    line: int
    col: int
    offset: int


def tokenize(source: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise MilSyntaxError(line, pos - line_start + 1, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1, pos))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


def _unescape(text: str, tok: Token) -> str:
    out = []
    i = 1
    while i < len(text) - 1:
        c = text[i]
        if c == "\\":
            nxt = text[i + 1]
            if nxt not in _ESCAPES:
                raise MilSyntaxError(tok.line, tok.col, f"bad escape \\{nxt}")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, tok: Token, msg: str):
        found = tok.text or "end of input"
        raise MilSyntaxError(tok.line, tok.col, f"{msg}, found {found!r}")

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "kw") and tok.text == text

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind in ("op", "kw") and tok.text == text:
            return self.next()
        self.error(tok, f"expected {text!r}")

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.error(tok, "expected identifier")
        return self.next()

    # grammar
    def parse_program(self) -> A.Program:
        functions = []
        while self.peek().kind != "eof":
            functions.append(self.parse_function())
        if not functions:
            raise MilSyntaxError(1, 1, "program has no functions")
        return A.Program(tuple(functions), source=self.source)

    def parse_function(self) -> A.FunctionDecl:
        start = self.expect("fn")
        name = self.expect_ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident()
                self.expect(":")
                ptype = self.peek()
                if ptype.kind != "ident" or ptype.text not in A.TYPES:
                    self.error(ptype, "expected a type (int, float, bool, str)")
                self.next()
                params.append(A.Param(pname.text, ptype.text, A.Span(pname.line, pname.col)))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        body = self.parse_block()
        return A.FunctionDecl(name.text, tuple(params), body, A.Span(start.line, start.col))

    def parse_block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self.error(self.peek(), "expected '}'")
            stmts.append(self.parse_stmt())
        self.next()
        return tuple(stmts)

    def parse_stmt(self) -> A.Stmt:
        tok = self.peek()
        span = A.Span(tok.line, tok.col)
        if tok.kind == "kw":
            if tok.text == "let":
                self.next()
                name = self.expect_ident()
                self.expect("=")
                value = self.parse_expr()
                self.expect(";")
                return A.Assign(name.text, value, span)
            if tok.text == "if":
                return self.parse_if()
            if tok.text == "while":
                self.next()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                body = self.parse_block()
                return A.While(cond, body, span)
            if tok.text in ("print", "assert"):
                self.next()
                self.expect("(")
                value = self.parse_expr()
                self.expect(")")
                self.expect(";")
                cls = A.Print if tok.text == "print" else A.Assert
                return cls(value, span)
            if tok.text == "return":
                self.next()
                value = None
                if not self.at(";"):
                    value = self.parse_expr()
                self.expect(";")
                return A.Return(value, span)
        if tok.kind == "ident" and self.peek(1).kind == "op" and self.peek(1).text == "=":
            self.next()
            self.next()
            value = self.parse_expr()
            self.expect(";")
            return A.Assign(tok.text, value, span)
        expr = self.parse_expr()
        self.expect(";")
        return A.ExprStmt(expr, span)

    def parse_if(self) -> A.If:
        tok = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_block()
        orelse = None
        if self.at("else"):
            self.next()
            if self.at("if"):
                orelse = (self.parse_if(),)
            else:
                orelse = self.parse_block()
        return A.If(cond, then, orelse, A.Span(tok.line, tok.col))

    def parse_expr(self, level: int = 0) -> A.Expr:
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.peek().kind == "op" and self.peek().text in ops:
            optok = self.next()
            right = self.parse_expr(level + 1)
            left = A.BinOp(optok.text, left, right, span=A.Span(optok.line, optok.col))
        return left

    def parse_unary(self) -> A.Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "-"):
            self.next()
            operand = self.parse_unary()
            return A.UnOp(tok.text, operand, span=A.Span(tok.line, tok.col))
        return self.parse_primary()

    def parse_primary(self) -> A.Expr:
        tok = self.next()
        span = A.Span(tok.line, tok.col)
        if tok.kind == "int":
            value = int(tok.text)
            if value > INT_MAX:
                raise MilSyntaxError(tok.line, tok.col, "integer literal out of range")
            return A.IntLit(value, span=span)
        if tok.kind == "float":
            return A.FloatLit(float(tok.text), span=span)
        if tok.kind == "str":
            return A.StrLit(_unescape(tok.text, tok), span=span)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            return A.BoolLit(tok.text == "true", span=span)
        if tok.kind == "ident":
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.at(","):
                            break
                        self.next()
                self.expect(")")
                return A.Call(tok.text, tuple(args), span=span)
            return A.Var(tok.text, span=span)
        if tok.kind == "op" and tok.text == "(":
            if self.peek().kind == "ident" and self.peek(1).text == ":=":
                name = self.next()
                self.next()
                value = self.parse_expr()
                self.expect(")")
                return A.AssignExpr(name.text, value, span=A.Span(name.line, name.col))
            inner = self.parse_expr()
            self.expect(")")
            if inner.paren:
                return inner
            return _with_paren(inner)
        self.error(tok, "expected expression")


def _with_paren(expr: A.Expr) -> A.Expr:
    from dataclasses import replace

    return replace(expr, paren=True)


def parse(source: str, check: bool = True) -> A.Program:
    """Parse MIL source text into a :class:`~causal_fl.lang.ast.Program`.

    With ``check`` (the default) the static pass for unresolved names and
    call arity runs as well.
    """
    program = Parser(source).parse_program()
    if check:
        from .checker import check_program

        check_program(program)
    return program


def parse_expr(source: str) -> A.Expr:
    p = Parser(source)
    expr = p.parse_expr()
    if p.peek().kind != "eof":
        p.error(p.peek(), "unexpected trailing input")
    return expr
