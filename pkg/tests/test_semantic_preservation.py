from collections import Counter

from causal_fl.gsa import build
from causal_fl.lang import execute, parse
from causal_fl.transform import transform_predicates

from milgen import Gen

N_PROGRAMS = 100  # the acceptance suite runs the full 500
STEP_LIMIT = 20_000


def preservation_cases(n_programs=N_PROGRAMS):
    """Yield (original outcome, transformed outcome, instrumented outcome)."""
    for seed in range(n_programs):
        g = Gen(seed)
        src = g.program()
        prog = parse(src)
        transformed, _ = transform_predicates(prog)
        inst = build(prog).ast
        for args in g.inputs(5):
            yield tuple(execute(p, args, step_limit=STEP_LIMIT).outcome()
                        for p in (prog, transformed, inst)) + (src, args)


def test_generated_programs_parse_and_vary():
    statuses = Counter()
    for seed in range(60):
        g = Gen(seed)
        prog = parse(g.program())
        for args in g.inputs(2):
            statuses[execute(prog, args, step_limit=STEP_LIMIT).status] += 1
    # the generator reaches completions and runtime errors alike
    assert statuses["Completed"] > 0 and statuses["RuntimeError"] > 0


def test_transformation_preserves_behaviour():
    total = agree = 0
    bad = []
    for orig, tr, inst, src, args in preservation_cases():
        total += 1
        if orig == tr == inst:
            agree += 1
        elif len(bad) < 3:
            bad.append((src, args, orig, tr, inst))
    assert total == 5 * N_PROGRAMS
    assert agree == total, bad
