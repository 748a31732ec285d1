"""SSA versioning and GSA-style recording-site placement.

Each static definition (assignment, assignment expression, parameter)
gets its own version. Merge points get ``phi`` recording sites: after an
``if`` for variables whose reaching definition differs between the arms,
and at loop entry and exit for loop-carried variables. Phi sites are never
evaluated as gating functions; they record the variable's current value
and carry the gating predicate among their parents.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

from .lang import ast as A
from .transform import PRED_NAME, PredicateTable

ASSIGNMENT = "assignment"
PREDICATE = "predicate"
PARAM = "param"
PHI = "phi"


class InternalError(RuntimeError):
    pass


@dataclass
class Site:
    site_id: str
    function: str
    name: str
    version: int
    line: int
    block: int
    kind: str
    parents: List[str]
    value_type_hint: str = "any"
    gate: Optional[str] = None
    phi_kind: Optional[str] = None  # if | entry | exit
    # adjustment set used for modelling: parents plus the gating
    # predicates reached through phi parents
    covariates: List[str] = field(default_factory=list)


@dataclass
class SiteTable:
    sites: List[Site]

    def __post_init__(self):
        self._by_id = {s.site_id: s for s in self.sites}

    def __getitem__(self, site_id: str) -> Site:
        return self._by_id[site_id]

    def __contains__(self, site_id) -> bool:
        return site_id in self._by_id

    def __iter__(self):
        return iter(self.sites)

    def __len__(self):
        return len(self.sites)

    def ids(self):
        return [s.site_id for s in self.sites]

    def to_json(self) -> str:
        return json.dumps({"sites": [asdict(s) for s in self.sites]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SiteTable":
        return cls([Site(**s) for s in json.loads(text)["sites"]])


@dataclass
class InstrumentedProgram:
    ast: A.Program
    site_table: SiteTable
    predicate_table: PredicateTable

    def predicate_sites(self, whole_only: bool = False):
        out = []
        for s in self.site_table:
            if s.kind != PREDICATE:
                continue
            if whole_only and not s.name.endswith("_0"):
                continue
            out.append(s)
        return out


_BOOL_OPS = {"&&", "||", "==", "!=", "<", "<=", ">", ">="}


def _assigned_names(stmts, out: set) -> set:
    for s in A.iter_stmts(stmts):
        if isinstance(s, A.Assign):
            out.add(s.name)
        for e in A.stmt_exprs(s):
            for sub in A.iter_exprs(e):
                if isinstance(sub, A.AssignExpr):
                    out.add(sub.name)
    return out


class _FunctionWalker:
    def __init__(self, fn: A.FunctionDecl, pred_names: set, sites: List[Site]):
        self.fn = fn
        self.pred_names = pred_names
        self.sites = sites
        self.by_id: Dict[str, Site] = {}
        self.versions: Dict[str, int] = {}
        self.next_block = 0
        self.inner: Dict[str, set] = {}

    def new_block(self) -> int:
        b = self.next_block
        self.next_block += 1
        return b

    def new_site(self, name, kind, line, block, parents, hint="any", **extra) -> Site:
        v = self.versions.get(name, 0) + 1
        self.versions[name] = v
        site = Site(f"{self.fn.name}:{name}_{v}", self.fn.name, name, v, line, block, kind,
                    list(dict.fromkeys(parents)), hint, **extra)
        self.sites.append(site)
        self.by_id[site.site_id] = site
        return site

    def hint(self, site_id) -> str:
        return self.by_id[site_id].value_type_hint

    def walk(self):
        block = self.new_block()
        cur = {}
        param_sites = []
        for p in self.fn.params:
            site = self.new_site(p.name, PARAM, self.fn.span.line, block, [], p.type)
            cur[p.name] = site.site_id
            param_sites.append(site.site_id)
        body, _ = self.block(self.fn.body, cur, block)
        return body, param_sites

    # expressions: returns (new_expr, used site ids, static type)
    def expr(self, e, cur, block, created):
        if isinstance(e, A.Var):
            if e.name not in cur:
                raise InternalError(f"use of {e.name} before definition in {self.fn.name}")
            sid = cur[e.name]
            return e, [sid], self.hint(sid)
        if isinstance(e, A.BinOp):
            left, lu, lt = self.expr(e.left, cur, block, created)
            right, ru, rt = self.expr(e.right, cur, block, created)
            if e.op in _BOOL_OPS:
                t = "bool"
            elif "str" in (lt, rt) and e.op == "+":
                t = "str"
            elif lt == rt == "int":
                t = "int"
            elif {lt, rt} <= {"int", "float"}:
                t = "float"
            else:
                t = "any"
            return replace(e, left=left, right=right), lu + ru, t
        if isinstance(e, A.UnOp):
            operand, u, t = self.expr(e.operand, cur, block, created)
            return replace(e, operand=operand), u, "bool" if e.op == "!" else t
        if isinstance(e, A.Call):
            args, uses = [], []
            for a in e.args:
                na, u, _ = self.expr(a, cur, block, created)
                args.append(na)
                uses += u
            t = {"int": "int", "len": "int", "float": "float", "str": "str", "substr": "str"}.get(e.name, "any")
            return replace(e, args=tuple(args)), uses, t
        if isinstance(e, A.AssignExpr):
            inner_created = []
            value, uses, t = self.expr(e.value, cur, block, inner_created)
            kind = PREDICATE if e.name in self.pred_names else ASSIGNMENT
            if kind == PREDICATE:
                t = "bool"
            site = self.new_site(e.name, kind, e.span.line, block, uses, t)
            self.inner[site.site_id] = set(inner_created)
            created.append(site.site_id)
            created.extend(inner_created)
            cur[e.name] = site.site_id
            return replace(e, value=value, site=A.SiteRef(site.site_id)), [site.site_id], t
        if isinstance(e, A.IntLit):
            return e, [], "int"
        if isinstance(e, A.FloatLit):
            return e, [], "float"
        if isinstance(e, A.StrLit):
            return e, [], "str"
        if isinstance(e, A.BoolLit):
            return e, [], "bool"
        raise TypeError(type(e).__name__)

    def block(self, stmts, cur, block):
        """Returns (new statements, reaching definitions after) with None
        for the latter when control cannot fall through."""
        out = []
        for s in stmts:
            if cur is None:
                raise InternalError("statement after terminating statement")
            if isinstance(s, A.Assign):
                created = []
                value, uses, t = self.expr(s.value, cur, block, created)
                kind = PREDICATE if s.name in self.pred_names else ASSIGNMENT
                if kind == PREDICATE:
                    t = "bool"
                site = self.new_site(s.name, kind, s.span.line, block, uses, t)
                self.inner[site.site_id] = set(created)
                cur[s.name] = site.site_id
                out.append(replace(s, value=value, site=A.SiteRef(site.site_id)))
            elif isinstance(s, A.If):
                cond, uses, _ = self.expr(s.cond, cur, block, [])
                gate = uses[0] if isinstance(s.cond, A.Var) and self.by_id[uses[0]].kind == PREDICATE else None
                then_block = self.new_block()
                then, then_cur = self.block(s.then, dict(cur), then_block)
                if s.orelse is not None:
                    else_block = self.new_block()
                    orelse, else_cur = self.block(s.orelse, dict(cur), else_block)
                else:
                    orelse, else_cur = None, dict(cur)
                out.append(replace(s, cond=cond, then=then, orelse=orelse))
                if then_cur is None or else_cur is None:
                    cur = else_cur if then_cur is None else then_cur
                    if cur is not None:
                        block = self.new_block()
                    continue
                block = self.new_block()
                merged = {n: d for n, d in then_cur.items() if else_cur.get(n) == d}
                for name in sorted(set(then_cur) & set(else_cur)):
                    if then_cur[name] == else_cur[name] or PRED_NAME.match(name):
                        continue
                    a, b = then_cur[name], else_cur[name]
                    hints = {self.hint(a), self.hint(b)}
                    phi = self.new_site(name, PHI, s.span.line, block,
                                        [a, b] + ([gate] if gate else []),
                                        hints.pop() if len(hints) == 1 else "any",
                                        gate=gate, phi_kind="if")
                    merged[name] = phi.site_id
                    out.append(A.Record(name, span=s.span, site=A.SiteRef(phi.site_id)))
                cur = merged
            elif isinstance(s, A.While):
                header = self.new_block()
                carried = sorted(n for n in _assigned_names((s,), set())
                                 if n in cur and not PRED_NAME.match(n))
                entry = {}
                for name in carried:
                    entry[name] = self.new_site(name, PHI, s.span.line, header, [cur[name]],
                                                self.hint(cur[name]), phi_kind="entry")
                loop_cur = dict(cur)
                loop_cur.update({n: site.site_id for n, site in entry.items()})
                created = []
                cond, uses, _ = self.expr(s.cond, loop_cur, header, created)
                gate = None
                if isinstance(s.cond, A.AssignExpr) and s.cond.name in self.pred_names:
                    gate = uses[0]
                body_block = self.new_block()
                body, body_cur = self.block(s.body, dict(loop_cur), body_block)
                for name, site in entry.items():
                    if body_cur is not None and body_cur[name] not in site.parents + [site.site_id]:
                        site.parents.append(body_cur[name])
                    if gate:
                        site.parents.append(gate)
                        site.gate = gate
                records = tuple(A.Record(n, span=s.span, site=A.SiteRef(entry[n].site_id)) for n in carried)
                out.append(replace(s, cond=cond, body=body, entry=records))
                block = self.new_block()
                cur = loop_cur
                for name in carried:
                    ex = self.new_site(name, PHI, s.span.line, block,
                                       [entry[name].site_id] + ([gate] if gate else []),
                                       entry[name].value_type_hint, gate=gate, phi_kind="exit")
                    cur[name] = ex.site_id
                    out.append(A.Record(name, span=s.span, site=A.SiteRef(ex.site_id)))
            elif isinstance(s, A.Return):
                value = None
                if s.value is not None:
                    value, _, _ = self.expr(s.value, cur, block, [])
                out.append(replace(s, value=value))
                cur = None
            elif isinstance(s, (A.Print, A.Assert, A.ExprStmt)):
                value, _, _ = self.expr(s.value, cur, block, [])
                out.append(replace(s, value=value))
            elif isinstance(s, A.Record):
                out.append(s)
            else:
                raise TypeError(type(s).__name__)
        return tuple(out), cur


def _gates(site: Site, by_id, seen) -> List[str]:
    out = []
    if site.site_id in seen:
        return out
    seen.add(site.site_id)
    if site.gate:
        out.append(site.gate)
    for p in site.parents:
        ps = by_id[p]
        if ps.kind == PHI:
            out += _gates(ps, by_id, seen)
    return out


def _attach_expr(e, refs):
    if isinstance(e, A.AssignExpr):
        return replace(e, value=_attach_expr(e.value, refs),
                       site=refs[e.site.site_id] if e.site else None)
    if isinstance(e, A.BinOp):
        return replace(e, left=_attach_expr(e.left, refs), right=_attach_expr(e.right, refs))
    if isinstance(e, A.UnOp):
        return replace(e, operand=_attach_expr(e.operand, refs))
    if isinstance(e, A.Call):
        return replace(e, args=tuple(_attach_expr(a, refs) for a in e.args))
    return e


def _attach(stmts, refs):
    out = []
    for s in stmts:
        if isinstance(s, A.Assign):
            s = replace(s, value=_attach_expr(s.value, refs), site=refs[s.site.site_id])
        elif isinstance(s, A.Record):
            s = replace(s, site=refs[s.site.site_id])
        elif isinstance(s, A.If):
            s = replace(s, cond=_attach_expr(s.cond, refs), then=_attach(s.then, refs),
                        orelse=_attach(s.orelse, refs) if s.orelse is not None else None)
        elif isinstance(s, A.While):
            s = replace(s, cond=_attach_expr(s.cond, refs), body=_attach(s.body, refs),
                        entry=tuple(replace(r, site=refs[r.site.site_id]) for r in s.entry))
        elif isinstance(s, (A.Print, A.Assert, A.ExprStmt)):
            s = replace(s, value=_attach_expr(s.value, refs))
        elif isinstance(s, A.Return) and s.value is not None:
            s = replace(s, value=_attach_expr(s.value, refs))
        out.append(s)
    return tuple(out)


def instrument(program: A.Program, predicates: PredicateTable) -> InstrumentedProgram:
    """Version every definition, place phi recording sites, derive causal
    parents, and attach recording info to the program's AST."""
    pred_names = predicates.names()
    sites: List[Site] = []
    walked = []
    inner: Dict[str, set] = {}
    for fn in program.functions:
        w = _FunctionWalker(fn, pred_names, sites)
        body, param_ids = w.walk()
        inner.update(w.inner)
        walked.append((fn, body, param_ids))

    by_id = {s.site_id: s for s in sites}
    refs = {}
    for s in sites:
        if s.kind == PHI:
            s.covariates = list(s.parents)
        else:
            cov = list(s.parents)
            seen = set()
            for p in s.parents:
                if by_id[p].kind == PHI:
                    cov += _gates(by_id[p], by_id, seen)
            s.covariates = list(dict.fromkeys(c for c in cov if c != s.site_id))
        inner_set = inner.get(s.site_id, set())
        refs[s.site_id] = A.SiteRef(
            s.site_id, tuple((c, by_id[c].name, c in inner_set) for c in s.covariates))

    functions = []
    for fn, body, param_ids in walked:
        functions.append(replace(fn, body=_attach(body, refs),
                                 param_sites=tuple(refs[p] for p in param_ids)))
    ast = A.Program(tuple(functions), source=program.source)
    return InstrumentedProgram(ast, SiteTable(sites), predicates)


def build(program: A.Program) -> InstrumentedProgram:
    """Predicate transformation followed by instrumentation."""
    from .transform import transform_predicates

    transformed, table = transform_predicates(program)
    return instrument(transformed, table)
