from fractions import Fraction as F
from itertools import combinations

import pytest

from tsilab import estimates as est
from tsilab.averages import construct_average
from tsilab.vectors import FinVec

e = FinVec.unit


# ------------------------------------------------------------- star utilities


def test_star_drops_exactly_the_maximum():
    A = {F(1, 2), F(1, 3), F(2)}
    starred = est.star(A)
    assert starred == {F(1, 2), F(1, 3)}
    assert len(starred) == len(A) - 1
    with pytest.raises(ValueError):
        est.star(set())


def test_star_max_conventions():
    assert est.star_max([{F(1)}]) == 0          # singleton group cancels
    assert est.star_max([]) == 0
    assert est.star_max([{F(1), F(2)}, {F(3)}]) == 1


def test_star_average_observation_exhaustive():
    # all small set systems over a rational grid in [0, 1]
    grid = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
    for N, eps in ((1, F(1, 2)), (2, F(1, 2)), (2, F(1, 4))):
        k = int(N / eps) + 1  # k >= N * D / eps with D = 1
        systems = []
        single = [set(c) for size in range(1, 4) for c in combinations(grid, size)]
        if N == 1:
            systems = [[s] for s in single]
        else:
            systems = [[a, b] for a in single for b in single]
        for sets in systems:
            if sum(len(s) for s in sets) > k:
                continue
            rep = est.check_star_average(k, sets, eps)
            assert rep["holds"], (sets, rep)


# ---------------------------------------------------------------- long average


def test_longaverage_certified_instances(tsirelson, harmonic, ev_t, ev_h):
    blocks = [e(26 + i) for i in range(25)]
    for space, ev in ((tsirelson, ev_t), (harmonic, ev_h)):
        rep = est.check_longaverage(space, blocks, None, 1, 1, F(1, 2), ev=ev)
        assert rep["holds"], rep
    rep2 = est.check_longaverage(harmonic, blocks, None, 1, 2, F(1, 2), ev=ev_h)
    assert rep2["holds"]


def test_longaverage_disjoint_interval_is_trivial(harmonic, ev_h):
    blocks = [e(26 + i) for i in range(25)]
    rep = est.check_longaverage(harmonic, blocks, (1, 20), 1, 1, F(1, 2), ev=ev_h)
    assert rep["part1"]["lhs"] == "0" and rep["part1"]["holds"]


def test_longaverage_hypotheses_enforced(harmonic, ev_h):
    short = [e(3 + i) for i in range(5)]  # k = 5 < 24: hypothesis fails
    with pytest.raises(ValueError):
        est.check_longaverage(harmonic, short, None, 1, 1, F(1, 2), ev=ev_h)
    pairs = [FinVec.uniform(30 + 2 * i, 2, F(1, 2)) for i in range(25)]
    with pytest.raises(ValueError):
        # F ends strictly inside a two-point block: splits it
        est.check_longaverage(harmonic, pairs, (30, 32), 1, 1, F(1, 2), ev=ev_h)


# --------------------------------------------------------------- tree estimates


@pytest.fixture(scope="module")
def refined_trees(tsirelson, harmonic):
    return {
        "geo": construct_average("unit", 1, 1, F(99, 100), refine=True, space=tsirelson),
        "harm": construct_average("unit", 1, 1, F(99, 100), refine=True, space=harmonic),
    }


def test_tree_estimates_hold_on_certified_instances(
        refined_trees, tsirelson, harmonic, ev_t, ev_h):
    for tag, space, ev in (("geo", tsirelson, ev_t), ("harm", harmonic, ev_h)):
        tree = refined_trees[tag]
        for which, kw in (("cor1", {"p": 1}), ("lem4", {"p": 1}),
                          ("lem3", {"p": 2, "p2": 1})):
            rep = est.check_tree_estimates(space, tree, which, ev=ev, **kw)
            assert rep["certified"] and rep["holds"], rep
        rep = est.check_tree_estimates(space, tree, "cor2", ev=ev)
        assert rep["holds"], rep


def test_uncertified_tree_is_inconclusive(harmonic, ev_h):
    tree = construct_average("unit", 1, 1, F(1, 2), space=harmonic)
    rep = est.check_tree_estimates(harmonic, tree, "cor1", ev=ev_h, p=1)
    assert rep["inconclusive"] and not rep["certified"]


def test_tree_estimate_parameter_validation(refined_trees, harmonic, ev_h):
    tree = refined_trees["harm"]
    with pytest.raises(ValueError):
        est.check_tree_estimates(harmonic, tree, "cor1", ev=ev_h, p=2)  # p > j
    with pytest.raises(ValueError):
        est.check_tree_estimates(harmonic, tree, "nope", ev=ev_h)


# ------------------------------------------------------------- delta experiments


def test_delta_upper_level_one_exact(tsirelson, harmonic, ev_t, ev_h):
    for space, ev in ((tsirelson, ev_t), (harmonic, ev_h)):
        rep = est.estimate_delta_upper(space, "unit", 1, F(1, 2), ev=ev)
        assert rep.ratio == F(1, 2) == space.theta(1)
        assert rep.rhs == 1


def test_delta_upper_level_zero(harmonic, ev_h):
    assert est.estimate_delta_upper(harmonic, "unit", 0, ev=ev_h).ratio == 1


def test_delta_upper_level_two_harmonic(harmonic, ev_h):
    rep = est.estimate_delta_upper(harmonic, "unit", 2, F(9, 10), ev=ev_h)
    assert rep.ratio == F(1, 3)  # theta_2 exactly, at desk scale
    assert harmonic.theta(2) <= rep.ratio <= harmonic.theta(2) + F(1, 10)


def test_delta_upper_never_below_theta(tsirelson, harmonic, ev_t, ev_h):
    for space, ev, j in ((tsirelson, ev_t, 1), (harmonic, ev_h, 1), (harmonic, ev_h, 2)):
        rep = est.estimate_delta_upper(space, "unit", j,
                                       F(9, 10) if j == 2 else F(1, 2), ev=ev)
        assert rep.ratio >= space.theta(j)


def test_delta_lower_certificate(tsirelson, harmonic, ev_t, ev_h):
    rep = est.delta_lower_certificate(tsirelson, 1, seed=3, samples=8, ev=ev_t)
    assert rep["value"] == F(1, 2) and rep["all_hold"]
    rep3 = est.delta_lower_certificate(harmonic, 3, seed=3, samples=6, ev=ev_h)
    assert rep3["value"] == F(1, 4) and rep3["all_hold"]


# ------------------------------------------------------------------ flat search


def test_flat_vector_search_harmonic(harmonic, ev_h):
    rep = est.find_flat_vector(harmonic, 1, 1, 1, ev=ev_h)
    assert rep["success"]
    assert rep["best"]["M"] == 2
    # single-level averages are l1-saturated and fail the threshold
    m1 = [c for c in rep["candidates"] if c["status"] == "ok" and c["M"] == 1]
    assert m1 and all(not c["success"] for c in m1)
    best = rep["best"]
    assert F(best["max_ratio"]) < 2


def test_flat_vector_trivial_threshold(harmonic, ev_h):
    # with a huge eps the seminorm bound ||y||_{N,p} <= ||y||/theta_1 makes
    # every candidate succeed; the report flags the degenerate regime
    rep = est.find_flat_vector(harmonic, 1, 1, 10, ev=ev_h)
    assert rep["trivial_bound"] and rep["success"]
