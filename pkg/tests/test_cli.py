import json
import subprocess
import sys

import pytest

from causal_fl.cli import main
from causal_fl.scorer import Ranking

from conftest import FIXTURE

FAULTY = str(FIXTURE / "faults" / "lt.mil")
SUITE = str(FIXTURE / "suite.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_transform_writes_outputs(tmp_path, capsys):
    code, _, _ = run(capsys, "transform", FIXTURE / "program.mil", "-o", tmp_path)
    assert code == 0
    assert "P2_0 = (P2_1 := excerpt == \"LINE\")" in (tmp_path / "transformed.mil").read_text()
    preds = json.loads((tmp_path / "predicates.json").read_text())["predicates"]
    assert preds[0]["pred_id"] == "P1_0"


def test_instrument_writes_site_table(tmp_path, capsys):
    assert run(capsys, "instrument", FAULTY, "-o", tmp_path)[0] == 0
    sites = json.loads((tmp_path / "sites.json").read_text())
    assert "main:P2_0_1" in json.dumps(sites)
    assert "// main:P2_0_1" in (tmp_path / "instrumented.mil").read_text()


def test_localize_stdout_csv(capsys):
    code, out, _ = run(capsys, "localize", FAULTY, "--suite", SUITE, "--seed", 42, "--n-trees", 60)
    assert code == 0
    (rank,) = Ranking.from_csv(out)
    preds = [e for e in rank.entries if e.kind == "predicate"]
    assert preds[0].line == 11


def test_pipeline_composes(tmp_path, capsys):
    profiles = tmp_path / "p.jsonl"
    assert run(capsys, "profile", FAULTY, "--suite", SUITE, "-o", profiles)[0] == 0
    _, from_file, _ = run(capsys, "localize", FAULTY, "--from-profiles", profiles, "--n-trees", 40)
    _, one_shot, _ = run(capsys, "localize", FAULTY, "--suite", SUITE, "--n-trees", 40, "--jobs", 2)
    assert from_file == one_shot


def test_report_and_dump(tmp_path, capsys):
    rep, dump = tmp_path / "r.json", tmp_path / "m.json"
    code, _, _ = run(capsys, "localize", FAULTY, "--suite", SUITE, "--n-trees", 5,
                     "--report", rep, "--dump-model", dump)
    assert code == 0
    sites = {s["site_id"]: s for s in json.loads(rep.read_text())["sites"]}
    assert set(sites["main:P2_0_1"]["means"]) == {"false", "true"}
    models = json.loads(dump.read_text())
    assert models and len(models[0]["model"]["trees"]) == 5


def test_baseline_all(capsys):
    code, out, _ = run(capsys, "baseline", FAULTY, "--suite", SUITE, "--technique", "all")
    assert code == 0
    assert {r.technique for r in Ranking.from_csv(out)} == {"ochiai", "dstar", "baah", "esp", "predswitch"}


def test_predswitch_needs_suite(tmp_path, capsys):
    profiles = tmp_path / "p.jsonl"
    run(capsys, "profile", FAULTY, "--suite", SUITE, "-o", profiles)
    code, _, err = run(capsys, "baseline", FAULTY, "--from-profiles", profiles, "--technique", "predswitch")
    assert code == 2 and "--suite" in err


def test_missing_suite_exit_2(capsys):
    code, _, err = run(capsys, "localize", FAULTY, "--suite", "missing/suite.json")
    assert code == 2 and "missing/suite.json" in err


def test_bad_program_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.mil"
    bad.write_text("fn main(){ x = ; }")
    code, _, err = run(capsys, "instrument", bad, "-o", tmp_path)
    assert code == 2 and "line 1" in err


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        main(["localize", FAULTY, "--technique", "bogus"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["profile", FAULTY, "--suite", SUITE, "--jobs", "0"])
    assert e.value.code == 1


def test_seed_faults(tmp_path, capsys):
    code, out, _ = run(capsys, "seed-faults", FIXTURE / "program.mil", "--suite", SUITE,
                       "--operators", "ror", "--min-failing", 2, "-o", tmp_path)
    assert code == 0 and "killed mutants" in out
    specs = [json.loads(p.read_text()) for p in tmp_path.glob("*.json")]
    assert specs and all(s["operator"] == "ror" for s in specs)
    assert any(s["lines"] == [11] and s["mutated"] == "<" for s in specs)


def test_evaluate_small(tmp_path, capsys):
    import shutil
    corpus = tmp_path / "c"
    shutil.copytree(FIXTURE, corpus / "closure62")
    out = tmp_path / "out"
    code, md, _ = run(capsys, "evaluate", corpus, "-o", out, "--repetitions", 1, "--n-trees", 30,
                      "--technique", "ochiai")
    assert code == 0 and "closure62/lt" in md
    assert {p.name for p in out.iterdir()} == {"report.json", "report.md", "scatter.csv"}


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "causal_fl.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "localize" in r.stdout
