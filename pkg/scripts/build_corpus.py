"""Regenerate corpus suites and seeded faults.

    python scripts/build_corpus.py [corpus_dir]

Suites are drawn from fixed-seed input generators; expected outputs come
from each reference ``program.mil``. Faults are killed mutants on ranked
lines that fail between 2 and 25% of the suite.
"""
import json
import random
import sys
from pathlib import Path

from causal_fl.evaluation.mutate import seed_faults
from causal_fl.gsa import build
from causal_fl.lang import execute, parse
from causal_fl.profiler import TestCase, suite_to_dict
from causal_fl.scorer import element_lines

SUITE_SIZE = 60
FAULTS_PER_PROGRAM = 4
WORDS = ["alpha", "be", "sea", "d4ta", "x", "queue", "rhythm", "io", "42", "strength", "a1b2"]
SOURCES = ["var x = 1;", "foo(bar)", "a b", "if (x) y();", "return z;", "  indent", "let q=2"]


def gen_billing(rng):
    return [rng.choice([1, 2, 3, 4]), rng.choice([0, 1, 2, 5, 8, 10, 15, 25, 40, 60]),
            rng.random() < 0.5, rng.random() < 0.3, rng.choice([0, 1, 2])]


def gen_textstats(rng):
    k = rng.randint(0, 9)
    text = " ".join(rng.choice(WORDS) for _ in range(k))
    if rng.random() < 0.2:
        text = "  " + text
    return [text, rng.choice([2, 3, 4, 5])]


def gen_calendar(rng):
    y = rng.choice([1900, 1996, 2000, 2001, 2019, 2020, 2023, 2024, 2100])
    return [y, rng.choice([0, 1, 2, 2, 3, 4, 6, 7, 9, 11, 12, 13]), rng.choice([0, 1, 15, 28, 29, 30, 31])]


def gen_grades(rng):
    return [rng.randint(30, 105), rng.randint(30, 100), rng.randint(30, 100),
            rng.choice([0, 0, 1, 3, 8, 15]), rng.random() < 0.3]


def gen_loans(rng):
    return [rng.choice([0, 500, 1000, 5000, 20000, 60000]), rng.choice([0, 6, 12, 36, 60, 72]),
            rng.choice([550, 620, 660, 690, 710, 760, 800]), rng.random() < 0.4]


def gen_closure62(rng):
    s = rng.choice(SOURCES)
    return [s, rng.choice(["LINE", "LINE", "LINE", "FULL"]),
            rng.choice([-1, 0, 1, 2, 3, len(s) - 1, len(s) + 1, len(s) + 3]), rng.random() < 0.3]


GENERATORS = {
    "billing": gen_billing, "textstats": gen_textstats, "calendar": gen_calendar,
    "grades": gen_grades, "loans": gen_loans,
}


def make_suite(program, gen, seed, size=SUITE_SIZE, extra=()):
    rng = random.Random(seed)
    args, seen = [], set()
    while len(args) < size - len(extra):
        a = gen(rng)
        if repr(a) not in seen:
            seen.add(repr(a))
            args.append(a)
    args += list(extra)
    return [TestCase(f"t{i:03d}", tuple(a), execute(program, a).stdout) for i, a in enumerate(args)]


def write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def pick_faults(candidates, k):
    """Prefer predicate-line relational faults, then spread over lines."""
    ranked = sorted(candidates, key=lambda c: (c[2] != "predicate", c[1].operator != "ror",
                                               c[1].lines[0], c[1].fault_id))
    out, used = [], set()
    for src, spec, kind in ranked:
        if spec.lines[0] in used:
            continue
        out.append((src, spec))
        used.add(spec.lines[0])
        if len(out) == k:
            break
    return out


def build_program(root: Path, name: str, gen, seed: int):
    source = (root / name / "program.mil").read_text()
    program = parse(source)
    suite = make_suite(program, gen, seed)
    write(root / name / "suite.json", json.dumps(suite_to_dict(suite), indent=1) + "\n")
    lines = element_lines(build(program).site_table)
    max_failing = max(2, len(suite) // 4)
    muts = seed_faults(source, suite, name, lines=set(lines), min_failing=2, max_failing=max_failing)
    cands = [(src, spec, "predicate" if any(s.kind == "predicate" for s in lines[spec.lines[0]])
              else "assignment") for src, spec in muts]
    for old in (root / name / "faults").glob("*"):
        old.unlink()
    chosen = pick_faults(cands, FAULTS_PER_PROGRAM)
    for src, spec in chosen:
        write(root / name / "faults" / f"{spec.fault_id}.mil", src)
        write(root / name / "faults" / f"{spec.fault_id}.json",
              json.dumps(spec.to_dict(), indent=1) + "\n")
    print(f"{name}: {len(suite)} tests, {len(muts)} killed mutants, kept {len(chosen)}")


def build_fixture(root: Path):
    source = (root / "closure62" / "program.mil").read_text()
    program = parse(source)
    extra = [["abc", "LINE", 3, False], ["foo(bar)", "LINE", 8, True]]
    suite = make_suite(program, gen_closure62, 7, size=50, extra=extra)
    write(root / "closure62" / "suite.json", json.dumps(suite_to_dict(suite), indent=1) + "\n")
    faulty = source.replace("charno <= n", "charno < n", 1)
    write(root / "closure62" / "faults" / "lt.mil", faulty)
    line = next(i for i, l in enumerate(source.splitlines(), 1) if "charno <= n" in l)
    spec = {"program": "closure62", "fault_id": "lt", "lines": [line],
            "description": "'<' used instead of '<=' in the caret bounds check",
            "operator": "ror", "original": "<=", "mutated": "<"}
    write(root / "closure62" / "faults" / "lt.json", json.dumps(spec, indent=1) + "\n")
    print("closure62: fixture written")


def main(argv):
    root = Path(argv[1]) if len(argv) > 1 else Path(__file__).resolve().parent.parent / "corpus"
    build_fixture(root)
    for seed, (name, gen) in enumerate(sorted(GENERATORS.items()), start=100):
        build_program(root, name, gen, seed)


if __name__ == "__main__":
    main(sys.argv)
