"""Experiment orchestration over a corpus of faulty program versions.

Corpus layout::

    corpus/<program>/program.mil        reference program
    corpus/<program>/suite.json         tests with expected outputs
    corpus/<program>/faults/<id>.mil    faulty version
    corpus/<program>/faults/<id>.json   optional: {"lines": [...], "omission": bool, ...}
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .. import baselines as B
from ..forest import ForestParams
from ..gsa import PREDICATE, build
from ..lang import parse
from ..profiler import adaptive_step_limit, load_suite, run_suite
from ..scorer import element_lines, line_kind, score_all
from .metrics import (candidate_lines, confounding_prone, covariate_imbalance, fault_position,
                      FaultUnranked, nearest_predicate_lines)
from .mutate import changed_lines

log = logging.getLogger(__name__)

DETERMINISTIC = ("ochiai", "dstar", "baah", "esp", "predswitch")
ALL_TECHNIQUES = ("unival",) + DETERMINISTIC


@dataclass(frozen=True)
class Version:
    program: str
    fault_id: str
    program_path: str
    suite_path: str
    mutant_path: str
    meta_path: Optional[str] = None

    @property
    def id(self) -> str:
        return f"{self.program}/{self.fault_id}"


@dataclass(frozen=True)
class Config:
    techniques: tuple = ALL_TECHNIQUES
    repetitions: int = 10
    seed: int = 42
    n_trees: int = 500
    min_rows: int = 6
    include_phi: bool = False

    def to_dict(self):
        return {"techniques": list(self.techniques), "repetitions": self.repetitions,
                "seed": self.seed, "n_trees": self.n_trees, "min_rows": self.min_rows,
                "include_phi": self.include_phi}


def discover(corpus: Path) -> List[Version]:
    corpus = Path(corpus)
    out = []
    for prog_dir in sorted(p for p in corpus.iterdir() if p.is_dir()):
        prog, suite = prog_dir / "program.mil", prog_dir / "suite.json"
        if not prog.exists() or not suite.exists():
            log.warning("skipping %s: missing program.mil or suite.json", prog_dir)
            continue
        for m in sorted((prog_dir / "faults").glob("*.mil")):
            meta = m.with_suffix(".json")
            out.append(Version(prog_dir.name, m.stem, str(prog), str(suite), str(m),
                               str(meta) if meta.exists() else None))
    return out


@dataclass
class Prepared:
    version: Version
    prog: object
    suite: list
    profiles: object
    universe: List[int]
    candidates: List[int]
    predicate_lines: List[int]
    fault_lines: List[int]


def prepare(v: Version) -> Prepared:
    original = Path(v.program_path).read_text()
    mutant_src = Path(v.mutant_path).read_text()
    meta = json.loads(Path(v.meta_path).read_text()) if v.meta_path else {}
    fault_lines = meta.get("lines") or changed_lines(original, mutant_src)
    suite = load_suite(v.suite_path)
    mutant = parse(mutant_src)
    prog = build(mutant)
    limit = adaptive_step_limit(parse(original), suite)
    profiles = run_suite(prog, suite, step_limit=limit)
    lines = element_lines(prog.site_table)
    universe = list(lines)
    preds = [ln for ln, s in lines.items() if line_kind(s) == "predicate"]
    cands = meta.get("candidates") or candidate_lines(fault_lines, universe, mutant)
    return Prepared(v, prog, suite, profiles, universe, cands, preds, fault_lines)


def _position(ranking, lines, universe):
    try:
        p = fault_position(ranking, lines, universe)
        return p.exam, p.rank
    except FaultUnranked as exc:
        log.warning("%s; cost 100", exc)
        return 100.0, math.inf


def _deterministic_cell(args):
    v, cfg = args
    p = prepare(v)
    nf = p.profiles.n_failing()
    info = {"id": v.id, "program": v.program, "fault_id": v.fault_id,
            "fault_lines": p.fault_lines, "candidates": p.candidates,
            "n_tests": len(p.profiles), "n_failing": nf}
    if nf == 0:
        return {**info, "excluded": "no failing test"}
    if nf == len(p.profiles):
        return {**info, "excluded": "no passing test"}
    table = p.prog.site_table
    exam, rank = {}, {}
    for tech in cfg.techniques:
        if tech == "unival":
            continue
        if tech == "predswitch":
            r = B.predswitch_ranking(p.prog, p.suite, p.profiles)
            targets = nearest_predicate_lines(p.candidates, p.predicate_lines)
        else:
            r = {"ochiai": B.ochiai_ranking, "dstar": B.dstar_ranking, "baah": B.baah_ranking,
                 "esp": B.esp_ranking}[tech](p.profiles, table, cfg.include_phi)
            targets = p.candidates
        exam[tech], rank[tech] = _position(r, targets, p.universe)
    fault_preds = [ln for ln in p.fault_lines if ln in p.predicate_lines]
    psite = None
    if fault_preds:
        psite = next(s.site_id for s in element_lines(table)[fault_preds[0]]
                     if s.kind == PREDICATE and s.name.endswith("_0"))
    imb = covariate_imbalance(p.profiles, table, psite) if psite else None
    info.update({
        "exam": exam, "rank": rank, "predicate_fault": psite is not None,
        "fault_site": psite,
        "confounding_prone": bool(psite) and confounding_prone(table, psite),
        "imbalance_raw": imb[0] if imb else None,
        "imbalance_std": imb[1] if imb else None,
        "n_elements": len(p.universe),
    })
    return info


def _unival_cell(args):
    v, cfg, seed = args
    p = prepare(v)
    nf = p.profiles.n_failing()
    if nf == 0 or nf == len(p.profiles):
        return None
    res = score_all(p.profiles, p.prog.site_table, seed, cfg.include_phi,
                    ForestParams(n_trees=cfg.n_trees), cfg.min_rows)
    exam, rank = _position(res.ranking, p.candidates, p.universe)
    scores = [s.score for s in res.sites.values() if s.score is not None]
    return {"exam": exam, "rank": rank, "max_score": max(scores, default=0.0),
            "min_score": min(scores, default=0.0)}


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def _spearman(a, b):
    if len(a) < 3 or len(set(a)) < 2 or len(set(b)) < 2:
        return None
    rho = spearmanr(a, b).statistic
    return None if math.isnan(rho) else float(rho)


def summarize(versions: List[dict], techniques: Sequence[str]) -> dict:
    inc = [v for v in versions if "excluded" not in v]
    out = {"n_versions": len(inc), "mean_exam": {}, "hit@5": {}, "hit@10": {},
           "per_program": {}, "confounding_prone": {}, "imbalance": {}}
    for t in techniques:
        out["mean_exam"][t] = _mean([v["exam"][t] for v in inc])
        ranks = [v["rank"][t] for v in inc]
        out["hit@5"][t] = sum(1 for r in ranks if r <= 5)
        out["hit@10"][t] = sum(1 for r in ranks if r <= 10)
    for prog in sorted({v["program"] for v in inc}):
        vs = [v for v in inc if v["program"] == prog]
        out["per_program"][prog] = {t: _mean([v["exam"][t] for v in vs]) for t in techniques}
    conf = [v for v in inc if v["confounding_prone"]]
    out["confounding_prone"] = {"n": len(conf),
                                "mean_exam": {t: _mean([v["exam"][t] for v in conf])
                                              for t in techniques}}
    imb = sorted((v for v in inc if v["imbalance_std"] is not None),
                 key=lambda v: (-v["imbalance_std"], v["id"]))
    k = math.ceil(len(imb) / 3)
    top = imb[:k]
    out["imbalance"] = {
        "n": len(imb),
        "spearman": {t: _spearman([v["imbalance_std"] for v in imb], [v["exam"][t] for v in imb])
                     for t in techniques},
        "top_tercile": {"n": len(top),
                        "mean_exam": {t: _mean([v["exam"][t] for v in top]) for t in techniques}},
        "note": "boolean covariates excluded; standardized by pooled within-group std",
    }
    return out


def run_experiment(corpus, config: Config = Config(), jobs: int = 1,
                   versions: Optional[List[Version]] = None) -> dict:
    """Evaluate every technique on every version of ``corpus``.

    UniVal is repeated with seeds ``seed, seed+1, ...``; the other
    techniques are deterministic and run once. The result does not depend
    on ``jobs``.
    """
    versions = versions if versions is not None else discover(Path(corpus))
    det_args = [(v, config) for v in versions]
    uni_args = []
    if "unival" in config.techniques:
        uni_args = [(v, config, config.seed + r) for v in versions
                    for r in range(config.repetitions)]
    if jobs <= 1:
        det = [_deterministic_cell(a) for a in det_args]
        uni = [_unival_cell(a) for a in uni_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            det_f = pool.map(_deterministic_cell, det_args)
            uni_f = pool.map(_unival_cell, uni_args, chunksize=1)
            det, uni = list(det_f), list(uni_f)
    uni_by = {}
    for (v, _, seed), res in zip(uni_args, uni):
        uni_by.setdefault(v.id, []).append(res)
    rows = []
    for info in det:
        if "excluded" not in info and "unival" in config.techniques:
            reps = uni_by[info["id"]]
            info["exam"]["unival"] = _mean([r["exam"] for r in reps])
            info["rank"]["unival"] = _mean([r["rank"] for r in reps])
            info["exam_reps"] = {"unival": [r["exam"] for r in reps]}
            info["score_range"] = [min(r["min_score"] for r in reps),
                                   max(r["max_score"] for r in reps)]
        rows.append(info)
    techniques = [t for t in ALL_TECHNIQUES if t in config.techniques]
    for info in rows:
        if "rank" in info:
            info["rank"] = {t: _finite(info["rank"][t]) for t in techniques}
            info["exam"] = {t: info["exam"][t] for t in techniques}
    return {
        "config": config.to_dict(),
        "versions": [r for r in rows if "excluded" not in r],
        "exclusions": [{"id": r["id"], "reason": r["excluded"]} for r in rows if "excluded" in r],
        "summary": summarize([r for r in rows if "excluded" not in r], techniques),
    }


def _finite(x):
    return x if x is not None and math.isfinite(x) else 1e9


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    return "n/a" if x is None else f"{x:.2f}"


def report_markdown(report: dict) -> str:
    s = report["summary"]
    techs = list(s["mean_exam"])
    lines = ["# Fault localization report", "",
             f"Versions evaluated: {s['n_versions']}; excluded: {len(report['exclusions'])}.",
             f"UniVal repetitions: {report['config']['repetitions']} (seed {report['config']['seed']}).",
             "", "## Mean EXAM (%)", "",
             "| technique | mean EXAM | Hit@5 | Hit@10 |", "|---|---|---|---|"]
    for t in techs:
        lines.append(f"| {t} | {_fmt(s['mean_exam'][t])} | {s['hit@5'][t]} | {s['hit@10'][t]} |")
    lines += ["", "## Mean EXAM per program", "", "| program | " + " | ".join(techs) + " |",
              "|---" * (len(techs) + 1) + "|"]
    for prog, row in s["per_program"].items():
        lines.append(f"| {prog} | " + " | ".join(_fmt(row[t]) for t in techs) + " |")
    c = s["confounding_prone"]
    lines += ["", f"## Confounding-prone predicate faults (n={c['n']})", "",
              "| technique | mean EXAM |", "|---|---|"]
    lines += [f"| {t} | {_fmt(c['mean_exam'][t])} |" for t in techs]
    im = s["imbalance"]
    lines += ["", f"## Covariate imbalance vs EXAM (n={im['n']})", "", im["note"] + ".", "",
              "| technique | Spearman rho | top-tercile mean EXAM |", "|---|---|---|"]
    for t in techs:
        lines.append(f"| {t} | {_fmt(im['spearman'][t])} | {_fmt(im['top_tercile']['mean_exam'][t])} |")
    lines += ["", "## Versions", "", "| version | failing/tests | " + " | ".join(techs) + " |",
              "|---" * (len(techs) + 2) + "|"]
    for v in report["versions"]:
        lines.append(f"| {v['id']} | {v['n_failing']}/{v['n_tests']} | "
                     + " | ".join(_fmt(v["exam"][t]) for t in techs) + " |")
    if report["exclusions"]:
        lines += ["", "## Exclusions", ""]
        lines += [f"- {e['id']}: {e['reason']}" for e in report["exclusions"]]
    return "\n".join(lines) + "\n"


def scatter_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["version", "site", "imbalance_raw", "imbalance_std", "exam_unival", "exam_ochiai"])
    for v in report["versions"]:
        if v.get("imbalance_std") is None:
            continue
        w.writerow([v["id"], v["fault_site"], repr(v["imbalance_raw"]), repr(v["imbalance_std"]),
                    repr(v["exam"].get("unival")), repr(v["exam"].get("ochiai"))])
    return buf.getvalue()
