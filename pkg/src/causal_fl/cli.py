"""Command-line entry point: ``causal-fl <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import baselines as B
from .evaluation import Config, report_json, report_markdown, run_experiment, scatter_csv
from .evaluation.experiment import ALL_TECHNIQUES
from .evaluation.mutate import OPERATORS, seed_faults
from .forest import ForestParams
from .gsa import build, instrument
from .lang import DEFAULT_STEP_LIMIT, ArgumentTypeError, MilError, parse, render
from .profiler import ProfileMatrix, load_suite, run_suite
from .scorer import score_all
from .transform import transform_predicates

log = logging.getLogger("causal_fl")


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc


def _program(path):
    try:
        return parse(_read(path))
    except MilError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _suite(path):
    if path is None:
        raise DataError("--suite is required")
    if not Path(path).exists():
        raise DataError(f"suite file not found: {path}")
    try:
        return load_suite(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed suite ({exc})") from exc


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _techniques(choice: str):
    return list(ALL_TECHNIQUES) if choice == "all" else [choice]


def cmd_transform(a):
    prog, table = transform_predicates(_program(a.program))
    out = _out_dir(a.output)
    (out / "transformed.mil").write_text(render(prog))
    (out / "predicates.json").write_text(table.to_json() + "\n")


def cmd_instrument(a):
    prog, table = transform_predicates(_program(a.program))
    ip = instrument(prog, table)
    out = _out_dir(a.output)
    (out / "instrumented.mil").write_text(render(ip.ast, annotate=True))
    (out / "sites.json").write_text(ip.site_table.to_json() + "\n")
    (out / "predicates.json").write_text(table.to_json() + "\n")


def cmd_profile(a):
    ip = build(_program(a.program))
    pm = run_suite(ip, _suite(a.suite), jobs=a.jobs, step_limit=a.step_limit)
    if a.output:
        pm.write_jsonl(a.output)
    else:
        for r in pm.rows:
            sys.stdout.write(r.to_json() + "\n")
    log.info("%d runs, %d failing", len(pm), pm.n_failing())


def _profiles(a, ip):
    if a.from_profiles:
        if not Path(a.from_profiles).exists():
            raise DataError(f"profile file not found: {a.from_profiles}")
        try:
            pm = ProfileMatrix.read_jsonl(a.from_profiles, ip.site_table.ids())
        except (ValueError, KeyError) as exc:
            raise DataError(f"{a.from_profiles}: malformed profiles ({exc})") from exc
        return pm, None
    suite = _suite(a.suite)
    return run_suite(ip, suite, jobs=a.jobs, step_limit=a.step_limit), suite


def _baseline(tech, ip, pm, suite, a):
    if tech == "predswitch":
        if suite is None:
            raise DataError("predswitch needs --suite (it re-executes the program)")
        return B.predswitch_ranking(ip, suite, pm, jobs=a.jobs)
    fn = {"ochiai": B.ochiai_ranking, "dstar": B.dstar_ranking, "baah": B.baah_ranking,
          "esp": B.esp_ranking}[tech]
    return fn(pm, ip.site_table, a.include_phi)


def cmd_localize(a):
    ip = build(_program(a.program))
    pm, suite = _profiles(a, ip)
    if a.from_profiles and a.suite:
        suite = _suite(a.suite)
    parts = []
    for tech in _techniques(a.technique):
        if tech == "unival":
            res = score_all(pm, ip.site_table, a.seed, a.include_phi,
                            ForestParams(n_trees=a.n_trees), a.min_rows, jobs=a.jobs,
                            dump_models=bool(a.dump_model))
            if a.dump_model:
                Path(a.dump_model).write_text(json.dumps(res.models) + "\n")
            if a.report:
                Path(a.report).write_text(res.to_json() + "\n")
            parts.append(res.ranking)
        else:
            parts.append(_baseline(tech, ip, pm, suite, a))
    _emit(_join(parts), a.output)


def _join(rankings):
    text = rankings[0].to_csv()
    for r in rankings[1:]:
        text += r.to_csv().split("\n", 1)[1]
    return text


def cmd_baseline(a):
    if a.technique == "unival":
        raise DataError("use `localize` for unival")
    ip = build(_program(a.program))
    pm, suite = _profiles(a, ip)
    if a.from_profiles and a.suite:
        suite = _suite(a.suite)
    techs = [t for t in _techniques(a.technique) if t != "unival"]
    _emit(_join([_baseline(t, ip, pm, suite, a) for t in techs]), a.output)


def cmd_evaluate(a):
    if not Path(a.corpus).is_dir():
        raise DataError(f"corpus directory not found: {a.corpus}")
    cfg = Config(tuple(_techniques(a.technique)), a.repetitions, a.seed, a.n_trees,
                 a.min_rows, a.include_phi)
    rep = run_experiment(a.corpus, cfg, jobs=a.jobs)
    out = _out_dir(a.output)
    (out / "report.json").write_text(report_json(rep))
    (out / "report.md").write_text(report_markdown(rep))
    (out / "scatter.csv").write_text(scatter_csv(rep))
    sys.stdout.write(report_markdown(rep))


def cmd_seed_faults(a):
    source = _read(a.program)
    _program(a.program)
    suite = _suite(a.suite)
    ops = a.operators.split(",") if a.operators else OPERATORS
    bad = sorted(set(ops) - set(OPERATORS))
    if bad:
        raise DataError(f"unknown operators: {', '.join(bad)}")
    out = _out_dir(a.output)
    muts = seed_faults(source, suite, Path(a.program).stem, ops, min_failing=a.min_failing)
    for src, spec in muts:
        (out / f"{spec.fault_id}.mil").write_text(src)
        (out / f"{spec.fault_id}.json").write_text(json.dumps(spec.to_dict(), indent=1) + "\n")
    print(f"{len(muts)} killed mutants written to {out}")


def _common(p, suite=True):
    p.add_argument("program", help="MIL source file")
    if suite:
        p.add_argument("--suite", help="test suite JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)


def _model_flags(p):
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--include-phi", action="store_true", help="also rank phi recording sites")
    p.add_argument("--n-trees", type=int, default=500)
    p.add_argument("--min-rows", type=int, default=6)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="causal-fl", description="Causal statistical fault localization for MIL programs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", help="lower predicates to assignments")
    p.add_argument("program")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("instrument", help="transform and place recording sites")
    p.add_argument("program")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(fn=cmd_instrument)

    p = sub.add_parser("profile", help="run the suite and write value profiles (JSONL)")
    _common(p)
    p.add_argument("-o", "--output", help="profiles file (default stdout)")
    p.set_defaults(fn=cmd_profile)

    for name, fn, default in (("localize", cmd_localize, "unival"),
                              ("baseline", cmd_baseline, "ochiai")):
        p = sub.add_parser(name, help="rank lines by suspiciousness (CSV)")
        _common(p)
        _model_flags(p)
        p.add_argument("--from-profiles", help="reuse a profiles JSONL instead of running tests")
        p.add_argument("--technique", default=default, choices=list(ALL_TECHNIQUES) + ["all"])
        p.add_argument("--dump-model", help="write fitted forests as JSON")
        p.add_argument("--report", help="write per-site counterfactual means as JSON")
        p.add_argument("-o", "--output", help="ranking CSV (default stdout)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("evaluate", help="run the experiment over a corpus")
    p.add_argument("corpus")
    _model_flags(p)
    p.add_argument("--technique", default="all", choices=list(ALL_TECHNIQUES) + ["all"])
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default="report", help="output directory")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("seed-faults", help="write killed mutants of a program")
    p.add_argument("program")
    p.add_argument("--suite", required=True)
    p.add_argument("--operators", help=f"comma list of {','.join(OPERATORS)}")
    p.add_argument("--min-failing", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_seed_faults)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CAUSAL_FL_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = make_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        make_parser().error("--jobs must be at least 1")
    try:
        args.fn(args)
    except (DataError, MilError, ArgumentTypeError) as exc:
        print(f"causal-fl: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
