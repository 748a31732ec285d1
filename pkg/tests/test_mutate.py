from causal_fl.evaluation.mutate import (apply, changed_lines, killed_by, mutation_points,
                                         seed_faults)
from causal_fl.lang import parse

from conftest import make_suite

SRC = """fn main(charno:int, n:int){
    if (0 <= charno && charno <= n) {
        print(charno + 1);
    }
}"""


def _edits(src, ops):
    return [(op, t.text, rep) for op, t, rep in mutation_points(src, ops)]


def test_ror_relaxes_closure_bound():
    (op, tok, rep), *_ = mutation_points(SRC, ["ror"])
    mutant = apply(SRC, tok, rep)
    assert "if (0 < charno && charno <= n)" in mutant
    assert changed_lines(SRC, mutant) == [2]


def test_aor_swaps_operator():
    assert ("aor", "+", "-") in _edits(SRC, ["aor"])
    assert apply("x+1", next(t for _, t, _ in mutation_points("x+1", ["aor"])), "-") == "x-1"


def test_unary_minus_not_mutated():
    assert _edits("fn main(){ print(-3); }", ["aor"]) == []
    assert _edits("fn main(a:int){ print(a - 3); }", ["aor"]) == [("aor", "-", "+")]


def test_lcr_and_off_by_one():
    assert ("lcr", "&&", "||") in _edits(SRC, ["lcr"])
    assert _edits("fn main(){ print(0 + 2); }", ["off-by-one"]) == [
        ("off-by-one", "0", "1"), ("off-by-one", "2", "3"), ("off-by-one", "2", "1")]


def test_mutants_preserve_line_count():
    for _, tok, rep in mutation_points(SRC):
        assert len(apply(SRC, tok, rep).splitlines()) == len(SRC.splitlines())


def test_equivalent_mutant_discarded():
    src = "fn main(a:int){\n if (a >= 0) { print(1); }\n if (a > 3) { print(2); }\n}"
    suite = make_suite(src, [(i,) for i in range(1, 6)])
    muts = seed_faults(src, suite, "p", ["ror"])
    # `a > 0` is equivalent on positive inputs, `a >= 3` is not
    assert [(m.lines, m.mutated) for _, m in muts] == [([3], ">=")]


def test_seeded_faults_are_killed():
    suite = make_suite(SRC, [(c, n) for c in range(-2, 5) for n in range(0, 4)])
    muts = seed_faults(SRC, suite, "closure", min_failing=2)
    assert muts
    for src, spec in muts:
        assert len(killed_by(src, suite)) >= 2
        assert spec.lines == changed_lines(SRC, src)
        parse(src)
    ids = [s.fault_id for _, s in muts]
    assert len(ids) == len(set(ids))


def test_divergent_mutant_killed_quickly():
    src = "fn main(n:int){ i = 0; while (i < n) { i = i + 1; } print(i); }"
    suite = make_suite(src, [(3,), (5,)])
    muts = seed_faults(src, suite, "loop", ["aor"], lines=[1])
    assert any(s.mutated == "-" for _, s in muts)
