import os
from pathlib import Path

import pytest

from causal_fl.gsa import build
from causal_fl.lang import parse
from causal_fl.profiler import TestCase, expected_outputs, run_suite

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURE = CORPUS / "closure62"


@pytest.fixture
def corpus_dir():
    return CORPUS


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE


def make_suite(correct_src, args_list, prefix="t"):
    """Tests whose oracle is the output of ``correct_src``."""
    prog = parse(correct_src)
    outs = expected_outputs(prog, args_list)
    return [TestCase(f"{prefix}{i}", tuple(a), o.stdout) for i, (a, o) in enumerate(zip(args_list, outs))]


def profile(src, suite, jobs=1):
    ip = build(parse(src))
    return ip, run_suite(ip, suite, jobs=jobs)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CAUSAL_FL_FAST"):
        skip = pytest.mark.skip(reason="CAUSAL_FL_FAST set")
        for it in items:
            if "slow" in it.keywords:
                it.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
