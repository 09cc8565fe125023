import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gentree.analysis import (CapExceeded, compare, ground_truth, interaction_stats, iteration_csv,
                              min_covering_configs, random_baseline, report, sample_configs)
from gentree.engine import EngineParams, run_engine
from gentree.formula import TRUE, evaluate, parse_formula
from gentree.programs import FIG2_SPACE
from gentree.runner import BuiltinRunner, SpecRunner
from gentree.space import parse_space
from gentree.synth import random_program
from oracles import min_cover_size


@pytest.fixture(scope="module")
def fig2_gt():
    return ground_truth(FIG2_SPACE, BuiltinRunner("fig2"))


def test_ground_truth_fig2(fig2_gt, fig2_truth):
    gi = fig2_gt.interactions
    assert gi["L3"] == parse_formula("u=1 & v=1")
    assert gi["L0"] == TRUE
    assert compare(gi, fig2_truth, FIG2_SPACE)["exact"] == 9
    X = FIG2_SPACE.index_matrix()
    for loc, f in gi.items():
        np.testing.assert_array_equal(evaluate(f, FIG2_SPACE, X), fig2_gt.covering[loc])


def test_ground_truth_cap():
    with pytest.raises(CapExceeded):
        ground_truth(FIG2_SPACE, BuiltinRunner("fig2"), cap=1000)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ground_truth_recovers_generating_formulas(seed):
    space, spec = random_program(seed, max_size=1024)
    gt = ground_truth(space, SpecRunner(spec, space))
    live = {l: f for l, f in spec.items() if gt.covering.get(l) is not None}
    assert compare(gt.interactions, live, space)["exact"] == len(live)


def test_compare(fig2_gt, fig2_truth):
    perfect = compare(fig2_truth, fig2_gt, FIG2_SPACE)
    assert (perfect["exact"], perfect["total"], perfect["delta_cov"]) == (9, 9, 0)
    wrong = dict(fig2_truth, L8=parse_formula("s=0"))
    got = compare(wrong, fig2_gt, FIG2_SPACE)
    assert got["exact"] == 8 and got["inexact"] == ["L8"]
    fewer = {k: v for k, v in fig2_truth.items() if k != "L2"}
    got = compare(fewer, fig2_gt, FIG2_SPACE)
    assert got["missing"] == ["L2"] and got["delta_cov"] == -1


def test_sample_configs():
    got = sample_configs(FIG2_SPACE, 50, seed=1)
    assert len(set(got)) == 50 and got == sample_configs(FIG2_SPACE, 50, seed=1)
    assert len(sample_configs(FIG2_SPACE, 10**6, seed=1)) == 3888
    big = parse_space("".join(f"o{i}: 0,1,2,3\n" for i in range(40)))
    assert len(set(sample_configs(big, 20, seed=0))) == 20
    with pytest.raises(ValueError):
        sample_configs(FIG2_SPACE, 0)


def test_random_baseline(fig2_truth):
    full = random_baseline(FIG2_SPACE, BuiltinRunner("fig2"), 3888, seed=0)
    assert compare(full, fig2_truth, FIG2_SPACE)["exact"] == 9
    one = random_baseline(FIG2_SPACE, BuiltinRunner("fig2"), 1, seed=0)
    assert one and all(f == TRUE for f in one.values())


def test_min_covering_fig2(fig2_gt):
    res = min_covering_configs(fig2_gt.interactions, FIG2_SPACE)
    assert res.skipped == []
    assert len(res.configs) <= min_cover_size(fig2_gt.interactions, FIG2_SPACE) + 2
    X = FIG2_SPACE.encode(res.configs)
    for loc, f in fig2_gt.interactions.items():
        assert evaluate(f, FIG2_SPACE, X).any(), loc
    for row in range(len(res.configs)):
        assert any(evaluate(f, FIG2_SPACE, X[row:row + 1])[0] for f in fig2_gt.interactions.values())


def test_min_covering_small_cases():
    S = parse_space("u: 0,1\nv: 0,1\n")
    assert len(min_covering_configs({"A": TRUE}, S).configs) == 1
    res = min_covering_configs({"A": parse_formula("u=1 & v=1"), "B": parse_formula("u=0")}, S)
    assert len(res.configs) == 2
    res = min_covering_configs({"A": parse_formula("u=1 & u=0"), "B": parse_formula("false")}, S)
    assert res.configs == [] and res.skipped == ["A", "B"]


def test_report_fig2(fig2_truth, fig2_gt):
    st_ = run_engine(FIG2_SPACE, BuiltinRunner("fig2"), EngineParams(seed=0))
    rep = report(st_, fig2_gt)
    assert sum(rep.forms.values()) == rep.interactions == 9
    assert rep.max_length == 4 and rep.exact == 9 and rep.delta_cov == 0
    assert rep.convergence[-1] == (st_.configs, 9, 9)
    assert rep.convergence_csv().startswith("configs,exact,total\n")
    assert rep.table().splitlines()[0].split()[:3] == ["configs", "cov", "single"]
    assert iteration_csv(st_).count("\n") == st_.iterations + 1


def test_report_empty():
    rep = report(None)
    assert rep.configs == 0 and sum(rep.forms.values()) == 0 and rep.exact is None


def test_stats_ignore_location_order(fig2_truth):
    items = list(fig2_truth.items())
    assert interaction_stats(dict(items)) == interaction_stats(dict(reversed(items)))
    forms, total, mx, med = interaction_stats(fig2_truth)
    assert forms == {"single": 1, "conj": 1, "disj": 2, "mixed": 5} and (total, mx, med) == (9, 4, 4.0)
