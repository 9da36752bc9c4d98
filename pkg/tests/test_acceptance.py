"""Acceptance gate: every exit criterion at its stated tolerance.

All comparisons are exact rational equalities or inequalities (tolerance 0)
except the level-2 pinch, whose stated ceiling is theta_2 + 1/10.  Run with
``pytest -s tests/test_acceptance.py`` to see one line per criterion.
"""

import time
from fractions import Fraction as F

from tsilab import suites
from tsilab.thetaseq import bound_delta_j_v1, bound_delta_j_v2


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def test_c1_tsirelson_identity():
    t0 = time.time()
    rep = suites.suite_tsirelson_identity(seed=7, count=200, window=12)
    elapsed = time.time() - t0
    ok = rep["ok"] and rep["counts"]["pass"] == 200 and elapsed < 120
    _report("1 (identity)", ok,
            f"{rep['counts']['pass']}/200 exact equalities in {elapsed:.1f}s")


def test_c2_oracle_equivalence():
    rep = suites.suite_norm_oracle(seed=11, rationals=100)
    ok = rep["ok"] and rep["counts"]["fail"] == 0
    _report("2 (oracle)", ok,
            "engine == brute force on the exhaustive 0/1 corpus and "
            "100 rational vectors, exact")


def test_c3_bound_tables():
    ok = True
    for j in range(1, 7):
        ok &= bound_delta_j_v1(suites.TSIRELSON, j) == F(1, 2) ** (j - 1)
        ok &= bound_delta_j_v2(suites.TSIRELSON, j) == F(1, 2) ** j
    _report("3 (bound tables)", ok,
            "geometric v1 = 2^(1-j) and v2 = 2^-j for j = 1..6, exact")


def test_c4_delta_pinch():
    rep = suites.suite_delta_pinch(seed=19)
    items = {it["id"]: it for it in rep["items"]}
    ok = (rep["ok"]
          and items["harm-j1"]["lhs"] == "1/2" and items["harm-j1"]["rhs"] == "1/2")
    _report("4 (level pinch)", ok,
            f"j=1 lower {items['harm-j1']['lhs']} == upper {items['harm-j1']['rhs']}; "
            f"j=2 upper {items['harm-j2']['rhs']} <= theta_2 + 1/10")


def test_c5_schreier_laws():
    laws = suites.suite_schreier_laws(alpha_max=3, window=12)
    sub = suites.suite_prop31(alpha_max=2, F_max=8,
                              sequences=("identity", "evens", "shifted(3)"))
    counterexamples = sum(len(it.get("counterexamples", [])) for it in sub["items"])
    ok = laws["ok"] and sub["ok"] and counterexamples == 0
    _report("5 (family laws)", ok,
            f"hereditary/spreading/nesting/oracle pass; "
            f"{counterexamples} subsequence counterexamples")


def test_c6_inequality_battery():
    ratio = suites.suite_aux_ratio(seed=31, count=100, p_max=4)
    trees = suites.suite_tree_properties(seed=5)
    longavg = suites.suite_long_average(seed=13)
    chain = suites.suite_tree_estimates(seed=17)
    chain_items = {it["id"]: it for it in chain["items"]}
    cor_ok = all(chain_items[f"{tag}-{which}"]["status"] == "pass"
                 for tag in ("geo", "harm") for which in ("cor1", "lem4"))
    ok = ratio["ok"] and trees["ok"] and longavg["ok"] and chain["ok"] and cor_ok
    _report("6 (inequalities)", ok,
            "aux ratio (equality at p=1), tree properties M<=2, long average, "
            "and the estimate chain all hold exactly")


def test_c7_distortion_contract():
    rep = suites.suite_distortion_contract(seed=29, samples=50)
    items = {it["id"]: it for it in rep["items"]}
    ok = (rep["ok"]
          and all(items[f"delta1-n{n}"]["status"] == "pass" for n in (1, 2, 3))
          and all(items[f"envelope-n{n}"]["status"] == "pass" for n in (1, 2, 3))
          and items["experiment-lam-1/2"]["status"] == "pass"
          and items["experiment-lam-2"]["status"] == "inconclusive")
    _report("7 (distortion)", ok,
            f"lower-l1 law on 50 families for n in 1..3; envelope exact; "
            f"lam=1/2 {items['experiment-lam-1/2']['note']}; "
            f"lam=2 inconclusive at desk scale")


def test_c8_regularization():
    rep = suites.suite_regularize_oracle(seed=23, count=20, K=10)
    ok = rep["ok"] and rep["counts"]["pass"] == 20
    _report("8 (regularisation)", ok,
            "DP equals composition enumeration on 20 sequences (n <= 10); "
            "idempotent, exact")
