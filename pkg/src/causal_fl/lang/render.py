"""Canonical pretty-printer: ``parse(render(p)) == p`` for checked programs."""
from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7
_ESC = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _float_text(v: float) -> str:
    text = repr(v)
    if "inf" in text or "nan" in text:
        raise ValueError(f"float literal {text} is not representable in MIL")
    if "e" in text or "E" in text:
        mant, exp = text.lower().split("e")
        if "." not in mant:
            mant += ".0"
        return f"{mant}e{exp}"
    return text


def render_expr(e: A.Expr, parent_prec: int = 0, right: bool = False) -> str:
    """Render ``e``; parentheses appear only where the source had them or
    where precedence requires them."""
    if isinstance(e, A.AssignExpr):
        text = f"({e.name} := {render_expr(e.value)})"
        return f"({text})" if e.paren else text
    if isinstance(e, A.BinOp):
        prec = _PREC[e.op]
        text = f"{render_expr(e.left, prec)} {e.op} {render_expr(e.right, prec, True)}"
        need = prec < parent_prec or (right and prec == parent_prec)
    elif isinstance(e, A.UnOp):
        text = f"{e.op}{render_expr(e.operand, _UNARY_PREC)}"
        # "- -x" would lex fine, but "--x" stays readable only with a space
        if e.op == "-" and text.startswith("--"):
            text = "- " + text[1:]
        need = False
    elif isinstance(e, A.IntLit):
        text = str(e.value)
        need = False
    elif isinstance(e, A.FloatLit):
        text = _float_text(e.value)
        need = False
    elif isinstance(e, A.StrLit):
        text = '"' + "".join(_ESC.get(c, c) for c in e.value) + '"'
        need = False
    elif isinstance(e, A.BoolLit):
        text = "true" if e.value else "false"
        need = False
    elif isinstance(e, A.Var):
        text = e.name
        need = False
    elif isinstance(e, A.Call):
        text = f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
        need = False
    else:
        raise TypeError(type(e).__name__)
    if e.paren or need:
        return f"({text})"
    return text


def _site_note(site) -> str:
    if site is None:
        return ""
    return f"  // {site.site_id}"


def render_block(stmts, indent: int, annotate: bool, out: list) -> None:
    pad = "    " * indent
    for s in stmts:
        if isinstance(s, A.Assign):
            note = _site_note(s.site) if annotate else ""
            out.append(f"{pad}{s.name} = {render_expr(s.value)};{note}")
        elif isinstance(s, A.Record):
            if annotate:
                out.append(f"{pad}// phi {s.site.site_id if s.site else s.name} <- {s.name}")
        elif isinstance(s, A.If):
            _render_if(s, indent, annotate, out, pad)
        elif isinstance(s, A.While):
            if annotate:
                for rec in s.entry:
                    out.append(f"{pad}// phi-entry {rec.site.site_id} <- {rec.name}")
            out.append(f"{pad}while ({render_expr(s.cond)}) {{")
            render_block(s.body, indent + 1, annotate, out)
            out.append(f"{pad}}}")
        elif isinstance(s, A.Print):
            out.append(f"{pad}print({render_expr(s.value)});")
        elif isinstance(s, A.Assert):
            out.append(f"{pad}assert({render_expr(s.value)});")
        elif isinstance(s, A.Return):
            if s.value is None:
                out.append(f"{pad}return;")
            else:
                out.append(f"{pad}return {render_expr(s.value)};")
        elif isinstance(s, A.ExprStmt):
            out.append(f"{pad}{render_expr(s.value)};")
        else:
            raise TypeError(type(s).__name__)


def _render_if(s: A.If, indent, annotate, out, pad, prefix=""):
    out.append(f"{pad if not prefix else ''}{prefix}if ({render_expr(s.cond)}) {{")
    render_block(s.then, indent + 1, annotate, out)
    if s.orelse is None:
        out.append(f"{pad}}}")
    elif len(s.orelse) == 1 and isinstance(s.orelse[0], A.If):
        out.append(f"{pad}}} else ")
        line = out.pop()
        _render_if(s.orelse[0], indent, annotate, out, pad, prefix=line)
    else:
        out.append(f"{pad}}} else {{")
        render_block(s.orelse, indent + 1, annotate, out)
        out.append(f"{pad}}}")


def render(program: A.Program, annotate: bool = False) -> str:
    """Render a program as MIL source.

    With ``annotate`` the instrumented site ids and phi recording points
    are emitted as comments.
    """
    out = []
    for i, fn in enumerate(program.functions):
        if i:
            out.append("")
        params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
        out.append(f"fn {fn.name}({params}) {{")
        render_block(fn.body, 1, annotate, out)
        out.append("}")
    return "\n".join(out) + "\n"
