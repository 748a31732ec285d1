"""Comparison techniques: Ochiai, DStar, Baah-style regression, ESP and
predicate switching."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .gsa import PHI, PREDICATE, InstrumentedProgram, SiteTable
from .lang.interp import execute
from .profiler import ProfileMatrix, TestCase
from .scorer import RankEntry, Ranking, element_lines, line_kind, ranking_from_sites

log = logging.getLogger(__name__)

MAX_SCORE = math.inf  # sentinel above every finite score


@dataclass(frozen=True)
class SpectraCounts:
    ef: int
    ep: int
    nf: int
    np: int


def ochiai(c: SpectraCounts) -> float:
    if c.ef == 0:
        return 0.0
    return c.ef / math.sqrt((c.ef + c.nf) * (c.ef + c.ep))


def dstar(c: SpectraCounts, star: int = 2) -> float:
    if c.ef == 0:
        return 0.0
    denom = c.ep + c.nf
    if denom == 0:
        return MAX_SCORE
    return c.ef ** star / denom


def spectra(profiles: ProfileMatrix, table: SiteTable,
            include_phi: bool = False) -> Dict[int, SpectraCounts]:
    """Per-line counts; a line is covered when any of its sites recorded a
    value."""
    out = {}
    for line, sites in element_lines(table, include_phi).items():
        ids = [s.site_id for s in sites]
        ef = ep = nf = np_ = 0
        for r in profiles.rows:
            covered = any(r.sites.get(s) is not None for s in ids)
            if r.y:
                ef, nf = ef + covered, nf + (not covered)
            else:
                ep, np_ = ep + covered, np_ + (not covered)
        out[line] = SpectraCounts(ef, ep, nf, np_)
    return out


def _spectrum_ranking(name, fn, profiles, table, include_phi) -> Ranking:
    entries = []
    lines = element_lines(table, include_phi)
    for line, c in spectra(profiles, table, include_phi).items():
        sites = lines[line]
        entries.append(RankEntry(name, line, line_kind(sites), fn(c), [s.site_id for s in sites]))
    return Ranking(name, entries)


def ochiai_ranking(profiles, table, include_phi=False) -> Ranking:
    return _spectrum_ranking("ochiai", ochiai, profiles, table, include_phi)


def dstar_ranking(profiles, table, include_phi=False) -> Ranking:
    return _spectrum_ranking("dstar", dstar, profiles, table, include_phi)


def _numeric(v) -> Optional[float]:
    if isinstance(v, bool):
        return float(v)
    if isinstance(v, (int, float)) and math.isfinite(v):
        return float(v)
    return None


def ols_coefficient(columns: List[np.ndarray], y: np.ndarray) -> np.ndarray:
    """OLS on an intercept plus ``columns``; collinear columns are dropped
    greedily in order (their coefficient reported as 0)."""
    n = len(y)
    kept = [np.ones(n)]
    keep_idx = []
    for j, col in enumerate(columns):
        trial = np.column_stack(kept + [col])
        if np.linalg.matrix_rank(trial) == trial.shape[1]:
            kept.append(col)
            keep_idx.append(j)
    beta, *_ = np.linalg.lstsq(np.column_stack(kept), y, rcond=None)
    out = np.zeros(len(columns))
    for k, j in enumerate(keep_idx):
        out[j] = beta[k + 1]
    return out


def baah_lr(profiles: ProfileMatrix, table: SiteTable, site_id: str) -> float:
    """Coefficient of the coverage indicator in Y ~ coverage + parent values."""
    y = np.array(profiles.y, dtype=float)
    cov = np.array([r.sites.get(site_id) is not None for r in profiles.rows], dtype=float)
    if cov.min() == cov.max():
        return 0.0
    cols = [cov]
    for p in table[site_id].parents:
        vals = [r.sites.get(p) for r in profiles.rows]
        num = [_numeric(v) for v in vals]
        cols.append(np.array([0.0 if v is None else v for v in num]))
        cols.append(np.array([1.0 if v is None else 0.0 for v in vals]))
    beta = ols_coefficient(cols, y)
    return max(0.0, float(beta[0]))


def esp(profiles: ProfileMatrix, site_id: str) -> Optional[float]:
    """|mean z-score of failing-run values| against the passing runs, or
    None when the site cannot be scored."""
    passing, failing = [], []
    for r in profiles.rows:
        v = _numeric(r.sites.get(site_id))
        if v is None:
            continue
        (failing if r.y else passing).append(v)
    if len(passing) < 2 or not failing:
        return None
    mu = float(np.mean(passing))
    sd = float(np.std(passing, ddof=1))
    if sd == 0:
        return 0.0 if all(v == mu for v in failing) else MAX_SCORE
    return abs(float(np.mean([(v - mu) / sd for v in failing])))


def _site_ranking(name, fn, table, include_phi) -> Ranking:
    scores = {}
    for s in table:
        if s.kind == PHI and not include_phi:
            continue
        scores[s.site_id] = fn(s)
    return ranking_from_sites(name, table, scores, include_phi)


def baah_ranking(profiles, table, include_phi=False) -> Ranking:
    return _site_ranking("baah", lambda s: baah_lr(profiles, table, s.site_id), table, include_phi)


def esp_ranking(profiles, table, include_phi=False) -> Ranking:
    return _site_ranking("esp", lambda s: esp(profiles, s.site_id), table, include_phi)


def switch_step_limit(base_steps: Sequence[int]) -> int:
    return max(10_000, 20 * max(base_steps, default=0))


def _flip_passes(args) -> List[bool]:
    prog, jobs = args
    out = []
    for test, site_id, limit in jobs:
        res = execute(prog.ast, test.args, step_limit=limit, flip=site_id)
        out.append(not test.failed(res))
    return out


def predicate_switch(prog: InstrumentedProgram, suite: Sequence[TestCase],
                     profiles: ProfileMatrix, jobs: int = 1) -> Dict[str, float]:
    """Fraction of failing tests that pass when every dynamic instance of a
    whole-condition predicate is negated. Only predicates executed in some
    failing test are scored."""
    by_id = {t.id: t for t in suite}
    failing = [r for r in profiles.rows if r.y]
    preds = [s.site_id for s in prog.predicate_sites(whole_only=True)]
    base = [execute(prog.ast, by_id[r.test_id].args).step_count for r in failing]
    limit = switch_step_limit(base)
    work = []
    for r in failing:
        for p in preds:
            if r.sites.get(p) is not None:
                work.append((by_id[r.test_id], p, limit))
    if jobs <= 1 or len(work) < 2:
        passed = _flip_passes((prog, work))
    else:
        chunks = [work[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_flip_passes, [(prog, c) for c in chunks]))
        passed = [None] * len(work)
        for i, part in enumerate(parts):
            passed[i::jobs] = part
    fixed: Dict[str, int] = {}
    for (_, p, _), ok in zip(work, passed):
        fixed[p] = fixed.get(p, 0) + int(ok)
    return {p: fixed[p] / len(failing) for p in sorted(fixed)} if failing else {}


def predswitch_ranking(prog: InstrumentedProgram, suite, profiles, jobs: int = 1) -> Ranking:
    """Only predicate lines are ranked; every other element is unscored."""
    scores = predicate_switch(prog, suite, profiles, jobs)
    entries = []
    for line, sites in element_lines(prog.site_table).items():
        hits = [scores[s.site_id] for s in sites if s.site_id in scores]
        if hits and any(s.kind == PREDICATE for s in sites):
            entries.append(RankEntry("predswitch", line, "predicate", max(hits),
                                     [s.site_id for s in sites]))
    return Ranking("predswitch", entries)


TECHNIQUES = ("unival", "ochiai", "dstar", "baah", "esp", "predswitch")
