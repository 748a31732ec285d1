"""Profiling phase: run the instrumented program on a test suite."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .gsa import InstrumentedProgram
from .lang import ast as A
from .lang.interp import COMPLETED, DEFAULT_STEP_LIMIT, ExecutionResult, execute

EXPECT_OUTPUT = "ExpectOutput"
EXPECT_COMPLETION = "ExpectCompletion"


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    id: str
    args: tuple
    expected_stdout: Optional[str] = None

    @property
    def oracle(self) -> str:
        return EXPECT_COMPLETION if self.expected_stdout is None else EXPECT_OUTPUT

    def failed(self, result: ExecutionResult) -> bool:
        if result.status != COMPLETED:
            return True
        return self.expected_stdout is not None and result.stdout != self.expected_stdout


def load_suite(path) -> List[TestCase]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return suite_from_dict(data)


def suite_from_dict(data) -> List[TestCase]:
    tests = []
    for t in data["tests"]:
        tests.append(TestCase(str(t["id"]), tuple(t.get("args", [])), t.get("expected_stdout")))
    if len({t.id for t in tests}) != len(tests):
        raise ValueError("duplicate test ids in suite")
    return tests


def suite_to_dict(suite: Sequence[TestCase]) -> dict:
    tests = []
    for t in suite:
        entry = {"id": t.id, "args": list(t.args)}
        if t.expected_stdout is not None:
            entry["expected_stdout"] = t.expected_stdout
        tests.append(entry)
    return {"tests": tests}


@dataclass
class ProfileRow:
    test_id: str
    y: int
    sites: Dict[str, object]
    covs: Dict[str, Dict[str, object]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"test_id": self.test_id, "y": self.y, "sites": self.sites, "covs": self.covs})

    @classmethod
    def from_json(cls, line: str) -> "ProfileRow":
        d = json.loads(line)
        return cls(d["test_id"], int(d["y"]), d["sites"], d.get("covs", {}))


@dataclass
class ProfileMatrix:
    rows: List[ProfileRow]
    site_ids: List[str]

    def __len__(self):
        return len(self.rows)

    @property
    def y(self) -> List[int]:
        return [r.y for r in self.rows]

    def n_failing(self) -> int:
        return sum(r.y for r in self.rows)

    def column(self, site_id: str) -> list:
        return [r.sites.get(site_id) for r in self.rows]

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.rows:
                fh.write(r.to_json() + "\n")

    @classmethod
    def read_jsonl(cls, path, site_ids: Optional[List[str]] = None) -> "ProfileMatrix":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(ProfileRow.from_json(line))
        if site_ids is None:
            site_ids = list(rows[0].sites) if rows else []
        return cls(rows, site_ids)


class _Recorder:
    """Keeps the last value of each site and the snapshot taken with it."""

    def __init__(self, site_ids):
        self.values = dict.fromkeys(site_ids)
        self.covs = {}

    def __call__(self, site_id, value, snapshot):
        self.values[site_id] = value
        self.covs[site_id] = snapshot


def profile_test(prog: InstrumentedProgram, test: TestCase, step_limit: int = DEFAULT_STEP_LIMIT):
    rec = _Recorder(prog.site_table.ids())
    result = execute(prog.ast, test.args, hook=rec, step_limit=step_limit)
    row = ProfileRow(test.id, int(test.failed(result)), rec.values,
                     {s: rec.covs[s] for s in prog.site_table.ids() if s in rec.covs})
    return row, result


def _profile_chunk(args):
    prog, tests, step_limit = args
    return [profile_test(prog, t, step_limit)[0] for t in tests]


def run_suite(prog: InstrumentedProgram, suite: Sequence[TestCase], jobs: int = 1,
              step_limit: int = DEFAULT_STEP_LIMIT) -> ProfileMatrix:
    """Execute every test and collect one profile row per test.

    Runtime errors count as failures; values recorded before the error are
    kept. Row order follows the suite, independent of ``jobs``.
    """
    if not suite:
        raise ValueError("test suite is empty")
    if jobs <= 1 or len(suite) < 2:
        rows = [profile_test(prog, t, step_limit)[0] for t in suite]
    else:
        chunks = [list(suite[i::jobs]) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_profile_chunk, [(prog, c, step_limit) for c in chunks]))
        by_id = {r.test_id: r for part in parts for r in part}
        rows = [by_id[t.id] for t in suite]
    return ProfileMatrix(rows, prog.site_table.ids())


def expected_outputs(program: A.Program, args_list, step_limit: int = DEFAULT_STEP_LIMIT):
    """Golden outputs from a reference program, for building suites."""
    return [execute(program, args, step_limit=step_limit) for args in args_list]


def adaptive_step_limit(program: A.Program, suite: Sequence[TestCase]) -> int:
    """Step budget for variants of ``program``: generous relative to the
    longest reference run, small enough that a mutant's infinite loop is
    cut off quickly."""
    longest = max((execute(program, t.args).step_count for t in suite), default=0)
    return max(10_000, 20 * longest)
