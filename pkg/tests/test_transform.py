import json

from causal_fl.gsa import build
from causal_fl.lang import execute, parse, render
from causal_fl.lang import ast as A
from causal_fl.profiler import TestCase, profile_test
from causal_fl.transform import PredicateTable, transform_predicates


def _transform(src):
    return transform_predicates(parse(src))


def test_atom_assignment_inserted():
    prog, table = _transform("fn main(charno:int){\n if (0 <= charno) { print(1); }\n}")
    assert "P1_0 = 0 <= charno;" in render(prog)
    (entry,) = table.entries
    assert (entry.pred_id, entry.conjunct_index, entry.control_kind, entry.line) == ("P1_0", 0, "if", 2)


def test_literal_condition_collapses_to_whole():
    prog, table = _transform("fn main(){ if (true) { print(1); } }")
    first = prog.functions[0].body[0]
    assert isinstance(first, A.Assign) and first.name == "P1_0"
    assert [e.pred_id for e in table.entries] == ["P1_0"]


def test_compound_atoms_in_evaluation_order():
    _, table = _transform("fn main(a:int, b:int){ if (a > 0 && b > 0 || a == b) { } else { } }")
    assert [(e.pred_id, e.expression) for e in table.entries] == [
        ("P1_0", "a > 0 && b > 0 || a == b"),
        ("P1_1", "a > 0"),
        ("P1_2", "b > 0"),
        ("P1_3", "a == b"),
    ]
    assert {e.control_kind for e in table.entries} == {"if-else"}


def test_parenthesized_and_negated_not_split():
    _, table = _transform("fn main(a:int, b:int){ if (!(a > 0 && b > 0) && (a < 1 || b < 1)) { } }")
    assert [e.expression for e in table.entries[1:]] == ["!(a > 0 && b > 0)", "(a < 1 || b < 1)"]


def test_while_predicate_reevaluated():
    prog, table = _transform("fn main(){ i = 0; while (i < 3) { i = i + 1; } print(i); }")
    assert table.entries[0].control_kind == "while"
    assert execute(prog).stdout == "3\n"


def test_short_circuited_atom_is_na():
    src = "fn main(a:bool, b:bool){ if (a && b) { print(1); } }"
    ip = build(parse(src))
    row, _ = profile_test(ip, TestCase("t", (False, True), ""))
    assert row.sites["main:P1_1_1"] is False
    assert row.sites["main:P1_2_1"] is None
    assert row.sites["main:P1_0_1"] is False


def test_predicate_table_json_round_trip():
    _, table = _transform("fn main(a:int){ if (a > 0 || a < -5) { } while (a > 0) { a = a - 1; } }")
    doc = json.loads(table.to_json())
    assert len(doc["predicates"]) == 4
    assert PredicateTable.from_json(table.to_json()) == table


def test_nested_and_function_ordinals():
    src = """fn f(x:int){ if (x > 1) { return 1; } return 0; }
fn main(a:int){ if (a > 0) { if (f(a) == 1) { print(a); } } }"""
    _, table = _transform(src)
    assert [(e.pred_id, e.function) for e in table.conditions()] == [
        ("P1_0", "f"), ("P2_0", "main"), ("P3_0", "main")]
