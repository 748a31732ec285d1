"""Token-level fault seeding.

Mutations rewrite a single token of the source text, so line numbers of
the mutant match the original.
"""
from __future__ import annotations

import difflib
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from ..lang import execute, parse
from ..lang.errors import MilError
from ..lang.parser import tokenize
from ..profiler import TestCase, adaptive_step_limit

log = logging.getLogger(__name__)

ROR = {"<": "<=", "<=": "<", ">": ">=", ">=": ">", "==": "!=", "!=": "=="}
AOR = {"+": "-", "-": "+", "*": "/", "/": "*", "%": "*"}
LCR = {"&&": "||", "||": "&&"}
OPERATORS = ("ror", "aor", "off-by-one", "lcr")


@dataclass
class FaultSpec:
    program: str
    fault_id: str
    lines: List[int]
    description: str = ""
    operator: Optional[str] = None
    original: Optional[str] = None
    mutated: Optional[str] = None
    omission: bool = False
    candidates: List[int] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _is_binary_minus(tokens, i) -> bool:
    prev = tokens[i - 1] if i > 0 else None
    return prev is not None and (prev.kind in ("int", "float", "str", "ident")
                                 or prev.text in (")", "true", "false"))


def mutation_points(source: str, operators: Iterable[str] = OPERATORS):
    """Yield (operator, token, replacement text) for every applicable edit."""
    ops = set(operators)
    toks = tokenize(source)
    for i, t in enumerate(toks):
        if t.kind == "op":
            if "ror" in ops and t.text in ROR:
                yield "ror", t, ROR[t.text]
            elif "aor" in ops and t.text in AOR:
                if t.text == "-" and not _is_binary_minus(toks, i):
                    continue
                yield "aor", t, AOR[t.text]
            elif "lcr" in ops and t.text in LCR:
                yield "lcr", t, LCR[t.text]
        elif t.kind == "int" and "off-by-one" in ops:
            v = int(t.text)
            yield "off-by-one", t, str(v + 1)
            if v > 0:
                yield "off-by-one", t, str(v - 1)


def apply(source: str, tok, replacement: str) -> str:
    return source[:tok.offset] + replacement + source[tok.offset + len(tok.text):]


def changed_lines(original: str, mutant: str) -> List[int]:
    """1-based lines of ``original`` touched by the edit script to ``mutant``."""
    a, b = original.splitlines(), mutant.splitlines()
    out = []
    for tag, i1, i2, _, _ in difflib.SequenceMatcher(a=a, b=b, autojunk=False).get_opcodes():
        if tag == "equal":
            continue
        if i1 == i2:
            out.append(max(1, i1))
        out.extend(range(i1 + 1, i2 + 1))
    return sorted(set(out))


def killed_by(mutant_src: str, suite: Sequence[TestCase], step_limit: int = 10**6) -> List[str]:
    prog = parse(mutant_src)
    return [t.id for t in suite if t.failed(execute(prog, t.args, step_limit=step_limit))]


def seed_faults(source: str, suite: Sequence[TestCase], program_id: str = "program",
                operators: Iterable[str] = OPERATORS, lines: Optional[Iterable[int]] = None,
                min_failing: int = 1, max_failing: Optional[int] = None
                ) -> List[Tuple[str, FaultSpec]]:
    """Killed mutants of ``source`` with their fault specs.

    ``suite`` must carry expected outputs from the original program. A
    mutant is kept if it parses and fails between ``min_failing`` and
    ``max_failing`` tests.
    """
    allowed = set(lines) if lines is not None else None
    limit = adaptive_step_limit(parse(source), suite)
    out = []
    seen = set()
    for op, tok, rep in mutation_points(source, operators):
        if allowed is not None and tok.line not in allowed:
            continue
        mutant = apply(source, tok, rep)
        if mutant in seen:
            continue
        seen.add(mutant)
        try:
            failing = killed_by(mutant, suite, limit)
        except MilError as exc:
            log.debug("mutant at %d:%d does not compile: %s", tok.line, tok.col, exc)
            continue
        if len(failing) < min_failing or (max_failing is not None and len(failing) > max_failing):
            log.debug("discarding %s mutant at line %d (%d failing)", op, tok.line, len(failing))
            continue
        fid = f"{op}-L{tok.line}C{tok.col}"
        if op == "off-by-one":
            fid += "-inc" if int(rep) > int(tok.text) else "-dec"
        desc = f"{op}: '{tok.text}' -> '{rep}' at line {tok.line}"
        out.append((mutant, FaultSpec(program_id, fid, [tok.line], desc, op, tok.text, rep)))
    return out
