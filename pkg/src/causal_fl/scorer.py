"""Counterfactual suspiciousness scoring (analysis and localization).

For each recording site T a forest is fit on (T, covariates of T) -> Y
over the executions where T ran; each representative value t is then
plugged into every such execution and the predictions averaged to get
E[Y | do(T=t)]. The site's score is the spread of these means.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import forest as rf
from .gsa import PHI, PREDICATE, Site, SiteTable
from .profiler import ProfileMatrix
from .strings import cluster_strings

log = logging.getLogger(__name__)

QUANTILES = tuple(round(0.05 + 0.1 * i, 2) for i in range(10))
BOOLEAN_REP = "Boolean"
CATEGORICAL_REP = "Categorical"
NUMERIC_REP = "NumericQuantile"
STRING_REP = "StringCluster"
TREATMENT = "__T__"


class Degenerate(ValueError):
    """Treatment column has fewer than two distinct values."""


class NoEligibleRows(ValueError):
    pass


@dataclass
class RepSet:
    site_id: str
    values: list
    kind: str
    # per-row treatment codes for string clusters, else None
    labels: Optional[list] = None


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def treatment_kind(values: Sequence) -> str:
    if all(isinstance(v, bool) for v in values):
        return BOOLEAN_REP
    if all(_is_num(v) for v in values):
        return NUMERIC_REP
    if all(isinstance(v, str) for v in values):
        return STRING_REP
    return CATEGORICAL_REP


def representative_values(column: Sequence, site_id: str = "", kind: Optional[str] = None,
                          dim: int = 1) -> RepSet:
    vals = [v for v in column if v is not None]
    if len({rf.frame.level_key(v) for v in vals}) < 2:
        raise Degenerate(f"site {site_id} has fewer than two distinct values")
    kind = kind or treatment_kind(vals)
    if kind == BOOLEAN_REP:
        return RepSet(site_id, sorted(set(vals)), kind)
    if kind == NUMERIC_REP:
        qs = np.quantile(np.asarray(vals, dtype=float), QUANTILES)
        reps = list(dict.fromkeys(float(q) for q in qs))
        return RepSet(site_id, reps, kind)
    if kind == STRING_REP:
        labels = cluster_strings([v for v in column if v is not None], dim=dim)
        it = iter(labels)
        full = [next(it) if v is not None else None for v in column]
        return RepSet(site_id, sorted(set(labels)), kind, labels=full)
    return RepSet(site_id, sorted(set(vals), key=rf.frame.level_key), kind)


def suspiciousness(means: Dict) -> float:
    if not means:
        raise ValueError("no counterfactual means")
    vals = list(means.values())
    return float(max(vals) - min(vals))


def site_seed(seed: int, site_id: str) -> int:
    h = hashlib.blake2b(f"{seed}|{site_id}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") >> 1


@dataclass
class SiteScore:
    site_id: str
    line: int
    kind: str
    score: Optional[float]
    means: Dict[str, float] = field(default_factory=dict)
    n_rows: int = 0
    covariates: List[str] = field(default_factory=list)
    reason: str = ""

    @property
    def scored(self) -> bool:
        return self.score is not None

    def to_dict(self):
        return {"site_id": self.site_id, "line": self.line, "kind": self.kind,
                "score": self.score, "means": self.means, "n_rows": self.n_rows,
                "covariates": self.covariates, "reason": self.reason}


@dataclass
class Frame:
    rows: List[int]
    treatment: list
    covariates: Dict[str, list]
    y: List[float]


def site_frame(profiles: ProfileMatrix, site_id: str, covariates: Sequence[str]) -> Frame:
    """Executions where ``site_id`` ran, with the covariate snapshot taken
    at its (last) recording."""
    rows, t, y = [], [], []
    cov = {c: [] for c in covariates}
    for i, r in enumerate(profiles.rows):
        v = r.sites.get(site_id)
        if v is None:
            continue
        rows.append(i)
        t.append(v)
        y.append(float(r.y))
        snap = r.covs.get(site_id, {})
        for c in covariates:
            cov[c].append(snap.get(c))
    return Frame(rows, t, cov, y)


def _treatment_column(reps: RepSet, frame: Frame):
    if reps.kind == STRING_REP:
        return reps.labels, rf.CATEGORICAL
    if reps.kind == BOOLEAN_REP:
        return frame.treatment, rf.BOOLEAN
    if reps.kind == NUMERIC_REP:
        return [float(v) for v in frame.treatment], rf.NUMERIC
    return frame.treatment, rf.CATEGORICAL


def counterfactual_means(model: rf.Forest, frame: Frame, reps: RepSet) -> Dict[str, float]:
    if not frame.rows:
        raise NoEligibleRows(reps.site_id)
    n = len(frame.rows)
    out = {}
    for t in reps.values:
        cols = dict(frame.covariates)
        cols[TREATMENT] = [t] * n
        out[rep_label(t)] = float(np.mean(model.predict_columns(cols)))
    return out


def rep_label(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def score_site(profiles: ProfileMatrix, site: Site, seed: int,
               params: rf.ForestParams = rf.ForestParams(), min_rows: int = 6,
               covariates: Optional[Sequence[str]] = None,
               dump: Optional[list] = None) -> SiteScore:
    covs = list(site.covariates if covariates is None else covariates)
    frame = site_frame(profiles, site.site_id, covs)
    res = SiteScore(site.site_id, site.line, site.kind, None, n_rows=len(frame.rows),
                    covariates=covs)
    if len(frame.rows) < min_rows:
        res.reason = f"executed in {len(frame.rows)} < {min_rows} runs"
        return res
    try:
        reps = representative_values(frame.treatment, site.site_id, dim=1 + len(covs))
    except Degenerate:
        res.reason = "fewer than two distinct values"
        return res
    if len(set(frame.y)) < 2:
        # forest would predict the constant everywhere
        res.score = 0.0
        res.means = {rep_label(t): frame.y[0] for t in reps.values}
        return res
    tcol, tkind = _treatment_column(reps, frame)
    columns = {TREATMENT: tcol, **frame.covariates}
    kinds = {TREATMENT: tkind}
    try:
        model = rf.fit_xy(columns, frame.y, params, site_seed(seed, site.site_id), kinds)
    except rf.DegenerateData as exc:
        res.score = 0.0
        res.reason = str(exc)
        return res
    if dump is not None:
        dump.append({"site_id": site.site_id, "model": json.loads(model.to_json())})
    if reps.kind == STRING_REP:
        reps = RepSet(reps.site_id, reps.values, reps.kind)
    res.means = counterfactual_means(model, frame, reps)
    res.score = suspiciousness(res.means)
    return res


@dataclass
class RankEntry:
    technique: str
    line: int
    kind: str
    score: float
    site_ids: List[str]


@dataclass
class Ranking:
    technique: str
    entries: List[RankEntry]

    def __post_init__(self):
        self.entries.sort(key=lambda e: (-e.score, e.line))

    def scores(self) -> Dict[int, float]:
        return {e.line: e.score for e in self.entries}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["technique", "line", "kind", "score", "site_ids"])
        for e in self.entries:
            w.writerow([e.technique, e.line, e.kind, format_score(e.score), ";".join(e.site_ids)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> List["Ranking"]:
        by_tech: Dict[str, list] = {}
        for row in csv.DictReader(io.StringIO(text)):
            e = RankEntry(row["technique"], int(row["line"]), row["kind"], float(row["score"]),
                          row["site_ids"].split(";") if row["site_ids"] else [])
            by_tech.setdefault(e.technique, []).append(e)
        return [cls(t, es) for t, es in by_tech.items()]


def format_score(s: float) -> str:
    if s == float("inf"):
        return "inf"
    return repr(float(s))


def element_lines(table: SiteTable, include_phi: bool = False) -> Dict[int, List[Site]]:
    """Ranked elements: original lines carrying at least one non-phi site."""
    out: Dict[int, List[Site]] = {}
    for s in table:
        if s.kind == PHI and not include_phi:
            continue
        out.setdefault(s.line, []).append(s)
    return dict(sorted(out.items()))


def line_kind(sites: Iterable[Site]) -> str:
    return "predicate" if any(s.kind == PREDICATE for s in sites) else "assignment"


def ranking_from_sites(technique: str, table: SiteTable, site_scores: Dict[str, float],
                       include_phi: bool = False, default: float = 0.0) -> Ranking:
    """A line's score is the max over its sites; lines with no scored site
    get ``default``."""
    entries = []
    for line, sites in element_lines(table, include_phi).items():
        scored = [site_scores[s.site_id] for s in sites if site_scores.get(s.site_id) is not None]
        entries.append(RankEntry(technique, line, line_kind(sites),
                                 max(scored) if scored else default,
                                 [s.site_id for s in sites]))
    return Ranking(technique, entries)


@dataclass
class UniValResult:
    ranking: Ranking
    sites: Dict[str, SiteScore]
    models: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"ranking": [e.__dict__ for e in self.ranking.entries],
                           "sites": [s.to_dict() for s in self.sites.values()]}, indent=2)


def _score_chunk(args):
    profiles, sites, seed, params, min_rows, overrides = args
    return [score_site(profiles, s, seed, params, min_rows, overrides.get(s.site_id)) for s in sites]


def score_all(profiles: ProfileMatrix, table: SiteTable, seed: int = 42,
              include_phi: bool = False, params: rf.ForestParams = rf.ForestParams(),
              min_rows: int = 6, overrides: Optional[Dict[str, List[str]]] = None,
              jobs: int = 1, dump_models: bool = False) -> UniValResult:
    """Score every eligible site and rank the original lines.

    ``overrides`` replaces the covariate list of selected sites (used for
    adjustment ablations).
    """
    overrides = overrides or {}
    nf = profiles.n_failing()
    if nf == 0 or nf == len(profiles):
        log.warning("suite has %d failing of %d runs; all scores will be 0", nf, len(profiles))
    sites = [s for s in table if include_phi or s.kind != PHI]
    models: list = []
    if jobs <= 1 or dump_models:
        results = [score_site(profiles, s, seed, params, min_rows, overrides.get(s.site_id),
                              dump=models if dump_models else None) for s in sites]
    else:
        chunks = [sites[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_score_chunk,
                             [(profiles, c, seed, params, min_rows, overrides) for c in chunks])
            by_id = {r.site_id: r for part in parts for r in part}
        results = [by_id[s.site_id] for s in sites]
    for r in results:
        if not r.scored:
            log.debug("skipped %s: %s", r.site_id, r.reason)
    by_site = {r.site_id: r for r in results}
    ranking = ranking_from_sites("unival", table, {k: v.score for k, v in by_site.items()},
                                 include_phi)
    return UniValResult(ranking, by_site, models)
