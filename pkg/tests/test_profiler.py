import json

import pytest

from causal_fl.gsa import build
from causal_fl.lang import parse
from causal_fl.profiler import (ProfileMatrix, TestCase, adaptive_step_limit, load_suite,
                                profile_test, run_suite, suite_from_dict, suite_to_dict)

from conftest import FIXTURE


@pytest.fixture(scope="module")
def fixture_profiles():
    ip = build(parse((FIXTURE / "faults" / "lt.mil").read_text()))
    suite = load_suite(FIXTURE / "suite.json")
    return ip, suite, run_suite(ip, suite)


def test_caret_corner_hand_trace(fixture_profiles):
    # charno == len(source): the faulty `charno < n` is false, the run fails
    ip, suite, pm = fixture_profiles
    row = next(r for r in pm.rows if r.test_id == "t048")
    assert row.y == 1
    assert row.sites["main:P2_1_1"] is True and row.sites["main:P2_2_1"] is True
    assert row.sites["main:P2_3_1"] is False
    assert row.covs["main:P2_3_1"] == {"main:charno_1": 3, "main:n_1": 3}
    assert row.sites["main:i_1"] is None  # branch body skipped


def test_fixture_suite_shape(fixture_profiles):
    _, suite, pm = fixture_profiles
    assert len(suite) == 50 and pm.n_failing() == 2


def test_unexecuted_function_is_na():
    src = "fn g(x:int){ y = x * 2; return y; } fn main(a:int){ if (a > 100) { print(g(a)); } print(a); }"
    ip = build(parse(src))
    row, _ = profile_test(ip, TestCase("t", (1,), "1\n"))
    assert row.y == 0
    assert all(row.sites[s] is None for s in ("g:x_1", "g:y_1"))


def test_last_value_in_loop():
    src = "fn main(){ i = 0; x = 0; while (i < 10) { i = i + 1; x = i * 7; } print(x); }"
    ip = build(parse(src))
    row, _ = profile_test(ip, TestCase("t", (), None))
    x_loop = next(s.site_id for s in ip.site_table if s.name == "x" and s.kind == "assignment" and s.version > 1)
    assert row.sites[x_loop] == 70
    assert row.covs[x_loop]["main:i_3"] == 10


def test_runtime_error_is_failure_and_keeps_values():
    ip = build(parse("fn main(a:int){ b = a + 1; print(10 / (b - 2)); }"))
    row, res = profile_test(ip, TestCase("t", (1,), None))
    assert res.error_kind == "DivByZero"
    assert row.y == 1 and row.sites["main:b_1"] == 2


def test_expected_stdout_oracle():
    t = TestCase("t", (2,), "3\n")
    ip = build(parse("fn main(a:int){ print(a + 2); }"))
    assert profile_test(ip, t)[0].y == 1


def test_jobs_do_not_change_rows(fixture_profiles, tmp_path):
    ip, suite, pm = fixture_profiles
    par = run_suite(ip, suite, jobs=3)
    assert [r.to_json() for r in par.rows] == [r.to_json() for r in pm.rows]
    path = tmp_path / "p.jsonl"
    pm.write_jsonl(path)
    back = ProfileMatrix.read_jsonl(path, ip.site_table.ids())
    assert [r.to_json() for r in back.rows] == [r.to_json() for r in pm.rows]
    first = json.loads(path.read_text().splitlines()[0])
    assert set(first) == {"test_id", "y", "sites", "covs"}


def test_suite_round_trip():
    suite = [TestCase("a", (1, "x", True, 2.5), "ok\n"), TestCase("b", (), None)]
    assert suite_from_dict(suite_to_dict(suite)) == suite


def test_empty_suite_rejected():
    with pytest.raises(ValueError):
        run_suite(build(parse("fn main(){ }")), [])


def test_adaptive_step_limit_floor():
    prog = parse("fn main(){ print(1); }")
    assert adaptive_step_limit(prog, [TestCase("t", (), None)]) == 10_000
