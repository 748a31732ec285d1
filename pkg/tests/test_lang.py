import pytest

from causal_fl.lang import (ASSERTION_FAILED, COMPLETED, RUNTIME_ERROR, ArityMismatch,
                            MilSyntaxError, UnresolvedVariable, execute, parse, render)
from causal_fl.lang import ast as A


def test_minimal_program():
    prog = parse("fn main(x:int){ print(x+1); }")
    assert len(prog.functions) == 1
    body = prog.functions[0].body
    assert len(body) == 1 and isinstance(body[0], A.Print)


def test_compound_condition_has_two_conjuncts():
    prog = parse("fn main(c:int, n:int){ if (0 <= c && c < n) { } }")
    cond = prog.functions[0].body[0].cond
    assert isinstance(cond, A.BinOp) and cond.op == "&&"
    assert cond.left.op == "<=" and cond.right.op == "<"


def test_syntax_error_position():
    with pytest.raises(MilSyntaxError) as e:
        parse("fn main(){ x = ; }")
    assert e.value.line == 1


def test_unresolved_variable():
    with pytest.raises(UnresolvedVariable) as e:
        parse("fn main(){\n print(y);\n}")
    assert e.value.name == "y" and e.value.line == 2


def test_maybe_unassigned_is_unresolved():
    with pytest.raises(UnresolvedVariable):
        parse("fn main(p:bool){ if (p) { x = 1; } print(x); }")


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse("fn f(a:int){ return a; } fn main(){ print(f(1, 2)); }")


def test_execute_prints():
    r = execute(parse("fn main(a:int, b:int){ print(a+b); }"), [3, 4])
    assert r.stdout == "7\n" and r.status == COMPLETED


def test_assertion_failure():
    r = execute(parse("fn main(){ assert(false); print(1); }"))
    assert r.status == ASSERTION_FAILED and r.stdout == ""


def test_step_limit():
    r = execute(parse("fn main(){ while (true) { } }"), step_limit=10**6)
    assert r.status == RUNTIME_ERROR and r.error_kind == "StepLimit"


def test_div_by_zero():
    r = execute(parse("fn main(){ print(1 / 0); }"))
    assert r.error_kind == "DivByZero"


def test_bad_cast():
    r = execute(parse('fn main(){ print(int("x1")); }'))
    assert r.status == RUNTIME_ERROR and r.error_kind == "BadCast"


def test_arithmetic_conventions():
    r = execute(parse('fn main(){ print(7/2); print(-7/2); print(-7%3); print("a"+1); }'))
    # integer division truncates toward zero
    assert r.stdout.split() == ["3", "-3", "-1", "a1"]


def test_short_circuit_skips_right_operand():
    r = execute(parse("fn main(){ if (false && 1/0 == 0) { print(1); } print(2); }"))
    assert r.stdout == "2\n" and r.status == COMPLETED


def test_functions_and_recursion():
    src = "fn fact(n:int){ if (n <= 1) { return 1; } return n * fact(n - 1); } fn main(){ print(fact(10)); }"
    assert execute(parse(src)).stdout == "3628800\n"


def test_walrus_binds():
    r = execute(parse("fn main(){ if ((k := 3) > 2) { print(k); } }"))
    assert r.stdout == "3\n"


@pytest.mark.parametrize("src", [
    "fn main(x:int){ print(x+1); }",
    'fn main(s:str){ t = substr(s, 0, 1) + "\\n"; if (!(len(t) > 1) || s == "a") { print(-(1 - 2) * 3); } else { print(t); } }',
    "fn g(a:float){ return a * 2.5; } fn main(){ i = 0; while (i < 3) { print(g(float(i))); i = i + 1; } }",
    "fn main(){ print((1 + 2) * 3 - 4 / (2 - 1) % 3); print(1 - (2 - 3)); }",
])
def test_render_round_trip(src):
    once = parse(src)
    assert parse(render(once)) == once
