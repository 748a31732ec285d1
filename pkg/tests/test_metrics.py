import math

import pytest

from causal_fl.evaluation.metrics import (candidate_lines, confounding_prone, covariate_imbalance,
                                          effective_rank, enclosing_predicate_line, exam_score,
                                          fault_position, hit_at_n, nearest_predicate_lines)
from causal_fl.gsa import ASSIGNMENT, PREDICATE, Site, SiteTable, build
from causal_fl.lang import parse
from causal_fl.profiler import ProfileMatrix, ProfileRow
from causal_fl.scorer import RankEntry, Ranking


def _ranking(scores):
    return Ranking("x", [RankEntry("x", ln, "assignment", s, []) for ln, s in scores.items()])


def test_exam_unique_top():
    r = _ranking({i: 1.0 - i / 10 for i in range(1, 11)})
    assert exam_score(r, [1]) == 5.0


def test_exam_four_way_tie():
    r = _ranking({**{i: 0.9 for i in range(1, 5)}, **{i: 0.1 for i in range(5, 11)}})
    assert exam_score(r, [3]) == 20.0
    assert effective_rank(r, [3]) == 2.5


def test_exam_last():
    r = _ranking({i: 1.0 - i / 10 for i in range(1, 11)})
    assert exam_score(r, [10]) == 95.0


def test_multi_line_fault_uses_best():
    r = _ranking({i: 1.0 - i / 10 for i in range(1, 11)})
    assert exam_score(r, [7, 2, 99]) == 15.0


def test_unscored_universe_elements_sit_below():
    r = _ranking({3: 0.5, 5: 0.2})
    pos = fault_position(r, [8], universe=[1, 2, 3, 4, 5, 8])
    assert (pos.above, pos.tie, pos.total) == (2, 4, 6)
    assert fault_position(r, [5], universe=[1, 2, 3, 4, 5, 8]).exam == pytest.approx(25.0)


def test_unranked_fault_costs_100():
    assert exam_score(_ranking({1: 0.3}), [42]) == 100.0
    assert effective_rank(_ranking({1: 0.3}), [42]) == math.inf


def test_hit_at_n():
    assert hit_at_n([1, 5, 12], 10) == 2
    assert hit_at_n([1], 1) == 1
    assert hit_at_n([2.5], 2) == 0
    with pytest.raises(ValueError):
        hit_at_n([1], 0)


def _pred_table(cov_ids):
    sites = [Site(c, "main", c.split(":")[1], 1, 1, 0, ASSIGNMENT, [], "int") for c in cov_ids]
    sites.append(Site("main:P1_0_1", "main", "P1_0", 1, 2, 0, PREDICATE, list(cov_ids), "bool",
                      covariates=list(cov_ids)))
    return SiteTable(sites)


def _rows(groups):
    rows = []
    for i, (val, covs) in enumerate(groups):
        rows.append(ProfileRow(f"r{i}", 0, {"main:P1_0_1": val}, {"main:P1_0_1": covs}))
    return ProfileMatrix(rows, ["main:P1_0_1"])


def test_identical_covariate_is_balanced():
    pm = _rows([(True, {"main:x_1": 3}), (False, {"main:x_1": 3})] * 3)
    assert covariate_imbalance(pm, _pred_table(["main:x_1"]), "main:P1_0_1") == (0.0, 0.0)


def test_unit_standardized_gap():
    # group means 0 and 1, each group's sample std is 1
    true = [-1.0, 0.0, 1.0]
    false = [0.0, 1.0, 2.0]
    pm = _rows([(True, {"main:x_1": v}) for v in true] + [(False, {"main:x_1": v}) for v in false])
    raw, std = covariate_imbalance(pm, _pred_table(["main:x_1"]), "main:P1_0_1")
    assert raw == pytest.approx(1.0) and std == pytest.approx(1.0)


def test_mean_over_covariates():
    true = [(-1.0, -2.0), (0.0, 0.0), (1.0, 2.0)]  # x std 1, z std 2
    false = [(-0.6, -0.4), (0.4, 1.6), (1.4, 3.6)]  # shifts 0.4 and 1.6
    groups = [(True, {"main:x_1": x, "main:z_1": z}) for x, z in true]
    groups += [(False, {"main:x_1": x, "main:z_1": z}) for x, z in false]
    _, std = covariate_imbalance(_rows(groups), _pred_table(["main:x_1", "main:z_1"]), "main:P1_0_1")
    assert std == pytest.approx(0.6)


def test_one_group_empty_is_undefined():
    pm = _rows([(True, {"main:x_1": 1})] * 3)
    assert covariate_imbalance(pm, _pred_table(["main:x_1"]), "main:P1_0_1") is None


def test_confounding_prone():
    ip = build(parse("fn main(a:int){ m = 0; if (a > 0) { m = 1; } if (m > 0) { print(1); } if (a < -3) { print(2); } }"))
    assert confounding_prone(ip.site_table, "main:P1_0_1")
    assert not confounding_prone(ip.site_table, "main:P3_0_1")


SRC = """fn main(a:int){
    b = 0;
    if (a > 2) {
        print(a);
        b = a;
    }
    print(b);
}"""


def test_candidates_for_unranked_line():
    prog = parse(SRC)
    assert enclosing_predicate_line(prog, 4) == 3
    assert candidate_lines([4], [1, 2, 3, 5], prog) == [3, 5]
    assert candidate_lines([5], [1, 2, 3, 5], prog) == [5]
    assert nearest_predicate_lines([4, 1], [3, 7]) == [3]
    assert nearest_predicate_lines([5], [3, 7]) == [3, 7]
