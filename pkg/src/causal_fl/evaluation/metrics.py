"""Cost metrics and covariate-imbalance analysis."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..gsa import PHI, PREDICATE, SiteTable
from ..lang import ast as A
from ..profiler import ProfileMatrix
from ..scorer import Ranking

log = logging.getLogger(__name__)


class FaultUnranked(ValueError):
    pass


@dataclass(frozen=True)
class Position:
    above: int
    tie: int
    total: int

    @property
    def exam(self) -> float:
        return (self.above + self.tie / 2) / self.total * 100

    @property
    def rank(self) -> float:
        return self.above + (self.tie + 1) / 2


def fault_position(ranking: Ranking, fault_lines: Iterable[int],
                   universe: Optional[Sequence[int]] = None) -> Position:
    """Position of the best-ranked faulty element.

    Elements of ``universe`` missing from the ranking are unscored and sit
    below every scored element, tied among themselves.
    """
    scores: Dict[int, float] = {e.line: e.score for e in ranking.entries}
    lines = list(universe) if universe is not None else list(scores)
    ext = {ln: scores.get(ln, -math.inf) for ln in lines}
    faulty = [ln for ln in set(fault_lines) if ln in ext]
    if not faulty:
        raise FaultUnranked(f"no faulty line among ranked elements ({sorted(set(fault_lines))})")
    best = max(ext[ln] for ln in faulty)
    above = sum(1 for v in ext.values() if v > best)
    tie = sum(1 for v in ext.values() if v == best)
    return Position(above, tie, len(ext))


def exam_score(ranking: Ranking, fault_lines: Iterable[int],
               universe: Optional[Sequence[int]] = None) -> float:
    try:
        return fault_position(ranking, fault_lines, universe).exam
    except FaultUnranked as exc:
        log.warning("%s; cost 100", exc)
        return 100.0


def effective_rank(ranking: Ranking, fault_lines, universe=None) -> float:
    try:
        return fault_position(ranking, fault_lines, universe).rank
    except FaultUnranked:
        return math.inf


def hit_at_n(ranks: Iterable[float], n: int) -> int:
    if n < 1:
        raise ValueError("N must be at least 1")
    return sum(1 for r in ranks if r <= n)


def _group_stats(a: np.ndarray, b: np.ndarray) -> Tuple[float, float]:
    raw = abs(float(a.mean()) - float(b.mean()))
    na, nb = len(a), len(b)
    pooled = 0.0
    if na + nb > 2:
        va = float(a.var(ddof=1)) if na > 1 else 0.0
        vb = float(b.var(ddof=1)) if nb > 1 else 0.0
        pooled = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    sd = pooled if pooled > 0 else float(np.concatenate([a, b]).std(ddof=0))
    return raw, (raw / sd if sd > 0 else 0.0)


def imbalance_covariates(table: SiteTable, site_id: str) -> List[Tuple[str, str]]:
    """(snapshot owner, covariate) pairs examined for a predicate site.

    For a compound condition the whole-condition site only sees its atoms,
    so the atoms' own covariates are used instead.
    """
    site = table[site_id]
    pairs = [(site_id, c) for c in site.covariates if table[c].kind != PREDICATE]
    atoms = [c for c in site.covariates if table[c].kind == PREDICATE
             and table[c].line == site.line and table[c].function == site.function]
    for a in atoms:
        pairs += [(a, c) for c in table[a].covariates if table[c].kind != PREDICATE]
    return list(dict.fromkeys(pairs))


def covariate_imbalance(profiles: ProfileMatrix, table: SiteTable,
                        site_id: str) -> Optional[Tuple[float, float]]:
    """(raw, standardized) mean absolute gap of numeric covariates between
    the true and false groups of a predicate; None when undefined."""
    groups = {True: [], False: []}
    for r in profiles.rows:
        v = r.sites.get(site_id)
        if isinstance(v, bool):
            groups[v].append(r)
    if not groups[True] or not groups[False]:
        return None
    raws, stds = [], []
    for owner, cov in imbalance_covariates(table, site_id):
        vals = {}
        for g, rows in groups.items():
            xs = [r.covs.get(owner, {}).get(cov) for r in rows]
            vals[g] = np.array([float(x) for x in xs
                                if isinstance(x, (int, float)) and not isinstance(x, bool)
                                and math.isfinite(x)])
        if len(vals[True]) == 0 or len(vals[False]) == 0:
            continue
        raw, std = _group_stats(vals[True], vals[False])
        raws.append(raw)
        stds.append(std)
    if not raws:
        return None
    return float(np.mean(raws)), float(np.mean(stds))


def confounding_prone(table: SiteTable, site_id: str) -> bool:
    """The predicate gates a phi or is adjusted for by another site, i.e.
    it has downstream dependents that it may confound."""
    for s in table:
        if s.site_id == site_id:
            continue
        if s.kind == PHI and s.gate == site_id:
            return True
        if site_id in s.covariates:
            return True
    return False


def _stmt_lines(stmts) -> List[int]:
    out = []
    for s in A.iter_stmts(stmts):
        out.append(s.span.line)
    return out


def enclosing_predicate_line(program: A.Program, line: int) -> Optional[int]:
    """Line of the innermost if/while whose body contains ``line``."""
    best = None

    def walk(stmts):
        nonlocal best
        for s in stmts:
            if isinstance(s, A.If):
                inner = list(s.then) + list(s.orelse or ())
                if _inside(inner, line):
                    best = s.span.line
                walk(s.then)
                walk(s.orelse or ())
            elif isinstance(s, A.While):
                if _inside(s.body, line):
                    best = s.span.line
                walk(s.body)

    for fn in program.functions:
        walk(fn.body)
    return best


def _inside(stmts, line) -> bool:
    lines = _stmt_lines(stmts)
    return bool(lines) and min(lines) <= line <= max(lines)


def candidate_lines(fault_lines: Iterable[int], universe: Sequence[int],
                    program: Optional[A.Program] = None) -> List[int]:
    """Ranked elements standing for the fault.

    Faulty lines that are ranked elements are used directly. Otherwise (an
    omission, or an edit on an unranked statement) the candidates are the
    enclosing predicate plus the nearest ranked lines before and after.
    """
    uni = sorted(set(universe))
    faults = sorted(set(fault_lines))
    direct = [ln for ln in faults if ln in uni]
    if direct:
        return direct
    out = set()
    for ln in faults:
        if program is not None:
            enc = enclosing_predicate_line(program, ln)
            if enc is not None and enc in uni:
                out.add(enc)
        before = [u for u in uni if u < ln]
        after = [u for u in uni if u > ln]
        if before:
            out.add(before[-1])
        if after:
            out.add(after[0])
    return sorted(out)


def nearest_predicate_lines(lines: Iterable[int], predicate_lines: Sequence[int]) -> List[int]:
    """Map each line to the closest predicate line (ties keep both)."""
    preds = sorted(set(predicate_lines))
    out = set()
    for ln in lines:
        if ln in preds:
            out.add(ln)
            continue
        if not preds:
            continue
        d = min(abs(p - ln) for p in preds)
        out.update(p for p in preds if abs(p - ln) == d)
    return sorted(out)
