"""Named verification suites and experiment drivers.

Each suite runs a battery of exact checks and returns a deterministic report:
same configuration, same bytes (no timestamps; explicit seeds).  Items carry
a status of "pass", "fail", or "inconclusive" - an exhausted budget is
inconclusive, never a failure - and a suite is ok iff nothing failed.
"""

from __future__ import annotations

import csv
import io
import json
import random
from fractions import Fraction
from itertools import combinations

from . import distort, estimates, schreier, thetaseq
from .budget import BudgetExceededError
from .averages import construct_average, verify_remark_properties
from .corenorm import NormEvaluator, brute_force_norm
from .rationals import ratio_str
from .thetaseq import ThetaSeq, bound_delta_j_v1, bound_delta_j_v2
from .vectors import FinVec

TSIRELSON = ThetaSeq.geometric(Fraction(1, 2))
TSIRELSON_S1 = ThetaSeq.from_table([Fraction(1, 2)])
HARMONIC = ThetaSeq.harmonic()

_EVALUATORS: dict[str, NormEvaluator] = {}


def shared_evaluator(space: ThetaSeq) -> NormEvaluator:
    """Process-wide evaluator registry; memo reuse across suites and requests."""
    key = space.space_id()
    ev = _EVALUATORS.get(key)
    if ev is None:
        ev = NormEvaluator(space)
        _EVALUATORS[key] = ev
    return ev


def seeded_vectors(rng: random.Random, count: int, window: int = 12,
                   max_size: int = 8, max_num: int = 9, max_den: int = 9):
    out = []
    for _ in range(count):
        size = rng.randint(1, min(max_size, window))
        supp = sorted(rng.sample(range(1, window + 1), size))
        out.append(FinVec.from_pairs(
            [(i, Fraction(rng.randint(1, max_num), rng.randint(1, max_den)))
             for i in supp]))
    return out


def _item(id_, status, **extra):
    row = {"id": id_, "status": status}
    row.update(extra)
    return row


def _finish(name: str, seed, params: dict, items: list[dict]) -> dict:
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for it in items:
        counts[it["status"]] += 1
    return {"suite": name, "seed": seed, "params": params, "items": items,
            "counts": counts, "ok": counts["fail"] == 0}


# ---------------------------------------------------------------------------
# suites


def suite_tsirelson_identity(seed: int = 7, count: int = 200, window: int = 12) -> dict:
    """Norms under the single-level space and the geometric mixed space agree."""
    rng = random.Random(seed)
    ev_geo = shared_evaluator(TSIRELSON)
    ev_s1 = shared_evaluator(TSIRELSON_S1)
    items = []
    for t, vec in enumerate(seeded_vectors(rng, count, window=window)):
        a, b = ev_geo.norm(vec), ev_s1.norm(vec)
        items.append(_item(f"vec{t:03d}", "pass" if a == b else "fail",
                           lhs=ratio_str(a), rhs=ratio_str(b)))
    return _finish("tsirelson-identity", seed, {"count": count, "window": window}, items)


def suite_norm_oracle(seed: int = 11, rationals: int = 100) -> dict:
    """norm() against the complete-enumeration oracle: exhaustive 0/1 corpus
    on the first eight coordinates plus seeded rational vectors."""
    rng = random.Random(seed)
    items = []
    for space, tag in ((TSIRELSON, "geo"), (HARMONIC, "harm")):
        ev = shared_evaluator(space)
        for mask in range(1, 256):
            vec = FinVec.from_pairs([(i + 1, 1) for i in range(8) if mask >> i & 1])
            a, b = ev.norm(vec), brute_force_norm(space, vec)
            if a != b:
                items.append(_item(f"{tag}-01-{mask:03d}", "fail",
                                   lhs=ratio_str(a), rhs=ratio_str(b)))
        items.append(_item(f"{tag}-01-corpus", "pass", note="255 vectors"))
        good = 0
        for t, vec in enumerate(seeded_vectors(rng, rationals // 2, window=8, max_size=8)):
            a, b = ev.norm(vec), brute_force_norm(space, vec)
            if a != b:
                items.append(_item(f"{tag}-rat-{t:03d}", "fail",
                                   lhs=ratio_str(a), rhs=ratio_str(b)))
            else:
                good += 1
        items.append(_item(f"{tag}-rational-corpus", "pass", note=f"{good} vectors"))
    return _finish("norm-oracle", seed, {"rationals": rationals}, items)


def suite_schreier_laws(alpha_max: int = 3, window: int = 12,
                        spread_window: int = 14, oracle_window: int = 10) -> dict:
    """Hereditary, spreading, nesting, and greedy-vs-oracle membership.

    Hereditary and spreading are checked through their single-step forms
    (remove one element / bump one coordinate by one), which generate the
    full laws by induction on the number of steps; the step checks run
    exhaustively over the stated windows.
    """
    items = []

    def subsets(rng_max, max_size=None):
        base = range(1, rng_max + 1)
        for size in range(1, (max_size or rng_max) + 1):
            yield from combinations(base, size)

    for alpha in range(alpha_max + 1):
        bad = []
        for F in subsets(window):
            if not schreier.is_member(F, alpha):
                continue
            for t in range(len(F)):
                G = F[:t] + F[t + 1:]
                if not schreier.is_member(G, alpha):
                    bad.append((F, G))
        items.append(_item(f"hereditary-a{alpha}", "fail" if bad else "pass",
                           note=f"{len(bad)} violations"))

    for alpha in range(alpha_max + 1):
        bad = []
        for F in subsets(spread_window, 6):
            if not schreier.is_member(F, alpha):
                continue
            for t in range(len(F)):
                bumped = F[t] + 1
                if bumped > spread_window:
                    continue
                if t + 1 < len(F) and bumped >= F[t + 1]:
                    continue
                G = F[:t] + (bumped,) + F[t + 1:]
                if not schreier.is_member(G, alpha):
                    bad.append((F, G))
        items.append(_item(f"spreading-a{alpha}", "fail" if bad else "pass",
                           note=f"{len(bad)} violations"))

    for alpha in range(alpha_max):
        bad = [F for F in subsets(window)
               if schreier.is_member(F, alpha) and not schreier.is_member(F, alpha + 1)]
        items.append(_item(f"nesting-a{alpha}", "fail" if bad else "pass",
                           note=f"{len(bad)} violations"))

    for alpha in range(alpha_max + 1):
        bad = [F for F in subsets(oracle_window)
               if schreier.is_member(F, alpha) != schreier.is_member_bruteforce(F, alpha)]
        items.append(_item(f"oracle-a{alpha}", "fail" if bad else "pass",
                           note=f"{len(bad)} disagreements"))

    return _finish("schreier-laws", None,
                   {"alpha_max": alpha_max, "window": window}, items)


def suite_prop31(alpha_max: int = 2, F_max: int = 8,
                 sequences=("identity", "evens", "shifted(3)")) -> dict:
    """The constructed subsequence passes its exhaustive implication check."""
    items = []
    for spec in sequences:
        L = schreier.prop31_construct(spec, F_max + 1)
        rep = schreier.prop31_verify(spec, L, alpha_max, F_max)
        items.append(_item(f"prop31-{spec}", "pass" if rep.ok else "fail",
                           note=f"checked {rep.checked}",
                           counterexamples=rep.counterexamples))
        rep2 = schreier.cor32_verify(spec, L, alpha_max, F_max)
        items.append(_item(f"cor32-{spec}", "pass" if rep2.ok else "fail",
                           note=f"checked {rep2.checked}",
                           counterexamples=rep2.counterexamples))
    return _finish("prop31", None, {"alpha_max": alpha_max, "F_max": F_max}, items)


def suite_regularize_oracle(seed: int = 23, count: int = 20, K: int = 10) -> dict:
    """DP regularisation equals composition brute force; idempotence."""
    rng = random.Random(seed)
    items = []
    for t in range(count):
        vals = []
        cur_num, cur_den = rng.randint(1, 9), 10
        cur = Fraction(cur_num, cur_den)
        for _ in range(K):
            vals.append(cur)
            cur = cur * Fraction(rng.randint(5, 10), 10)
            if cur == 0:
                cur = Fraction(1, 10 ** 6)
        raw = ThetaSeq.from_table(vals)
        reg = thetaseq.regularize(raw, K)
        brute = thetaseq.regularize_bruteforce(raw, K)
        ok1 = list(reg.table) == brute
        reg2 = thetaseq.regularize(reg, K)
        ok2 = reg2.table == reg.table
        ok3 = reg.is_regular_prefix(K)
        ok4 = all(reg.theta(n) >= raw.theta(n) for n in range(1, K + 1))
        status = "pass" if (ok1 and ok2 and ok3 and ok4) else "fail"
        items.append(_item(f"seq{t:02d}", status,
                           note=f"oracle={ok1} idempotent={ok2} regular={ok3} dominates={ok4}"))
    return _finish("regularize-oracle", seed, {"count": count, "K": K}, items)


def suite_aux_ratio(seed: int = 31, count: int = 100, p_max: int = 4) -> dict:
    """||x||_p <= (theta_p/theta_{p-1}) ||x||_{S_1,p-1}, equality at p = 1."""
    rng = random.Random(seed)
    items = []
    for space, tag in ((TSIRELSON, "geo"), (HARMONIC, "harm")):
        ev = shared_evaluator(space)
        bad = 0
        bad_eq = 0
        for vec in seeded_vectors(rng, count // 2, window=10, max_size=6):
            for p in range(1, p_max + 1):
                lhs = ev.norm_p(vec, p)
                rhs = space.theta(p) / space.theta(p - 1) * ev.norm_SNp(vec, 1, p - 1)
                if lhs > rhs:
                    bad += 1
                if p == 1 and lhs != rhs:
                    bad_eq += 1
        items.append(_item(f"{tag}-ratio", "fail" if bad else "pass",
                           note=f"{bad} violations"))
        items.append(_item(f"{tag}-equality-p1", "fail" if bad_eq else "pass",
                           note=f"{bad_eq} strict cases"))
    return _finish("aux-ratio", seed, {"count": count, "p_max": p_max}, items)


def suite_tree_properties(seed: int = 5) -> dict:
    """Constructed trees (M <= 2) satisfy all defining properties."""
    items = []
    for space, tag in ((TSIRELSON, "geo"), (HARMONIC, "harm")):
        ev = shared_evaluator(space)
        for M, eps in ((0, Fraction(1, 2)), (1, Fraction(1, 2)), (2, Fraction(9, 10))):
            tree = construct_average("unit", M, 1, eps, space=space)
            rep = verify_remark_properties(tree, ev, seed=seed)
            items.append(_item(f"{tag}-M{M}", "pass" if rep["ok"] else "fail",
                               note="; ".join(rep["failures"]) or "all properties hold"))
    return _finish("tree-properties", seed, {}, items)


def suite_long_average(seed: int = 13) -> dict:
    """Certified long-average instances hold in both spaces."""
    items = []
    cases = [
        ("geo-singletons-p1", TSIRELSON, [FinVec.unit(26 + i) for i in range(25)], 1, 1),
        ("harm-singletons-p1", HARMONIC, [FinVec.unit(26 + i) for i in range(25)], 1, 1),
        ("harm-singletons-p2", HARMONIC, [FinVec.unit(26 + i) for i in range(25)], 1, 2),
        ("harm-pairs-p1", HARMONIC,
         [FinVec.uniform(30 + 2 * i, 2, Fraction(1, 2)) for i in range(25)], 1, 1),
    ]
    for id_, space, blocks, N, p in cases:
        ev = shared_evaluator(space)
        rep = estimates.check_longaverage(space, blocks, None, N, p, Fraction(1, 2), ev=ev)
        status = "pass" if rep["holds"] else (
            "inconclusive" if rep["part2"]["inconclusive"] else "fail")
        items.append(_item(id_, status, lhs=rep["part1"]["lhs"], rhs=rep["part1"]["rhs"]))
    return _finish("long-average", seed, {}, items)


def suite_tree_estimates(seed: int = 17) -> dict:
    """The estimate chain holds on refine-built trees (certified instances)."""
    items = []
    for space, tag in ((TSIRELSON, "geo"), (HARMONIC, "harm")):
        ev = shared_evaluator(space)
        tree = construct_average("unit", 1, 1, Fraction(99, 100), refine=True, space=space)
        for which, kw in (("cor1", {"p": 1}), ("lem4", {"p": 1}),
                          ("lem3", {"p": 2, "p2": 1}), ("cor2", {})):
            rep = estimates.check_tree_estimates(space, tree, which, ev=ev, **kw)
            if rep.get("inconclusive"):
                status = "inconclusive"
            else:
                status = "pass" if rep["holds"] else "fail"
            items.append(_item(f"{tag}-{which}", status,
                               lhs=rep.get("lhs"), rhs=rep.get("rhs")))
    return _finish("tree-estimates", seed, {}, items)


def suite_bounds_table(j_max: int = 6, P_max: int = 32) -> dict:
    """Closed-form bound values for the geometric space, exactly."""
    items = []
    for j in range(1, j_max + 1):
        v1 = bound_delta_j_v1(TSIRELSON, j, P_max)
        v2 = bound_delta_j_v2(TSIRELSON, j, P_max)
        ok = v1 == Fraction(1, 2) ** (j - 1) and v2 == Fraction(1, 2) ** j
        items.append(_item(f"geo-j{j}", "pass" if ok else "fail",
                           lhs=ratio_str(v1), rhs=ratio_str(v2)))
    return _finish("bounds-table", None, {"j_max": j_max}, items)


def suite_delta_pinch(seed: int = 19) -> dict:
    """Lower certificate theta_j meets the constructed upper ratio."""
    ev = shared_evaluator(HARMONIC)
    items = []
    low = estimates.delta_lower_certificate(HARMONIC, 1, seed=seed, samples=10, ev=ev)
    up = estimates.estimate_delta_upper(HARMONIC, "unit", 1, Fraction(1, 2), ev=ev)
    ok1 = low["value"] == Fraction(1, 2) and low["all_hold"] and up.ratio == Fraction(1, 2)
    items.append(_item("harm-j1", "pass" if ok1 else "fail",
                       lhs=ratio_str(low["value"]), rhs=ratio_str(up.ratio)))
    up2 = estimates.estimate_delta_upper(HARMONIC, "unit", 2, Fraction(9, 10), ev=ev)
    ok2 = HARMONIC.theta(2) <= up2.ratio <= HARMONIC.theta(2) + Fraction(1, 10)
    items.append(_item("harm-j2", "pass" if ok2 else "fail",
                       lhs=ratio_str(HARMONIC.theta(2)), rhs=ratio_str(up2.ratio)))
    return _finish("delta-pinch", seed, {}, items)


def suite_distortion_contract(seed: int = 29, samples: int = 50) -> dict:
    """The witness-norm contracts: lower-l1 law, envelope, experiment."""
    items = []
    ev_geo = shared_evaluator(TSIRELSON)
    ev_harm = shared_evaluator(HARMONIC)
    rng = random.Random(seed)
    corpus = seeded_vectors(rng, 10, window=10, max_size=5, max_num=4, max_den=4)
    for n, space, ev in ((1, TSIRELSON, ev_geo), (2, HARMONIC, ev_harm),
                         (3, TSIRELSON, ev_geo)):
        dn = distort.build(space, n, ev=ev)
        rep = distort.delta1_check(dn, samples=samples, seed=seed + n)
        items.append(_item(f"delta1-n{n}", "pass" if rep["all_hold"] else "fail",
                           note=f"a={rep['a']}"))
        env = distort.envelope_check(dn, corpus)
        items.append(_item(f"envelope-n{n}", "pass" if env["all_hold"] else "fail",
                           lhs=env["lower"], rhs=env["upper"]))
    exp = distort.distortion_experiment(HARMONIC, Fraction(1, 2), seed=seed, ev=ev_harm)
    ok = not exp["inconclusive"] and Fraction(exp["best_ratio"]) > 1
    items.append(_item("experiment-lam-1/2", "pass" if ok else "fail",
                       note=f"ratio={exp.get('best_ratio')}"))
    exp2 = distort.distortion_experiment(HARMONIC, 2, seed=seed, ev=ev_harm)
    items.append(_item("experiment-lam-2",
                       "inconclusive" if exp2["inconclusive"] else "fail",
                       note=exp2.get("note", "")))
    return _finish("distortion-contract", seed, {"samples": samples}, items)


SUITES = {
    "tsirelson-identity": suite_tsirelson_identity,
    "norm-oracle": suite_norm_oracle,
    "schreier-laws": suite_schreier_laws,
    "prop31": suite_prop31,
    "regularize-oracle": suite_regularize_oracle,
    "aux-ratio": suite_aux_ratio,
    "tree-properties": suite_tree_properties,
    "long-average": suite_long_average,
    "tree-estimates": suite_tree_estimates,
    "bounds-table": suite_bounds_table,
    "delta-pinch": suite_delta_pinch,
    "distortion-contract": suite_distortion_contract,
}


def run_suite(name: str, **params) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; have {sorted(SUITES)}")
    return SUITES[name](**params)


# ---------------------------------------------------------------------------
# experiments


def experiment_delta_table(space: ThetaSeq, j_max: int = 4, P_max: int = 32,
                           seed: int = 0) -> dict:
    """Rows (j, theta_j, achieved upper ratio, bound v1, bound v2)."""
    ev = shared_evaluator(space)
    rows = []
    for j in range(1, j_max + 1):
        row = {"j": j, "theta_j": ratio_str(space.theta(j))}
        try:
            rep = estimates.estimate_delta_upper(
                space, "unit", j, Fraction(9, 10) if j >= 2 else Fraction(1, 2), ev=ev)
            row["achieved_ratio"] = ratio_str(rep.ratio)
        except BudgetExceededError as exc:
            row["achieved_ratio"] = None
            row["note"] = str(exc)
        try:
            row["bound_v1"] = thetaseq.bound_delta_j_v1_report(space, j, P_max)["value"]
            v2 = thetaseq.bound_delta_j_v2_report(space, j, P_max)
            row["bound_v2"] = v2["value"]
            if not v2["attained"]:
                row["bound_v2_note"] = v2["note"]
        except thetaseq.UncertifiedTailError as exc:
            row["bound_v1"] = row["bound_v2"] = None
            row["note"] = str(exc)
        rows.append(row)
    return {"experiment": "delta-table", "space": space.space_id(),
            "seed": seed, "rows": rows}


def experiment_distortion(space: ThetaSeq, lam, seed: int = 0) -> dict:
    rep = distort.distortion_experiment(space, lam, seed=seed,
                                        ev=shared_evaluator(space))
    rep["experiment"] = "distortion"
    rep["space"] = space.space_id()
    return rep


EXPERIMENTS = {"delta-table": experiment_delta_table,
               "distortion": experiment_distortion}


# ---------------------------------------------------------------------------
# serialisation


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str)


def report_csv(report: dict) -> str:
    """Flat CSV: one row per item (suites) or per table row (experiments)."""
    buf = io.StringIO()
    if "items" in report:
        writer = csv.writer(buf)
        writer.writerow(["suite", "id", "status", "lhs", "rhs", "slack", "params"])
        for it in report["items"]:
            lhs, rhs = it.get("lhs"), it.get("rhs")
            slack = it.get("slack", "")
            if slack == "" and lhs not in (None, "") and rhs not in (None, ""):
                try:
                    slack = str(Fraction(rhs) - Fraction(lhs))
                except (ValueError, ZeroDivisionError):
                    slack = ""
            extra = {k: v for k, v in it.items()
                     if k not in ("id", "status", "lhs", "rhs", "slack")}
            writer.writerow([report["suite"], it["id"], it["status"],
                             lhs or "", rhs or "", slack,
                             json.dumps(extra, sort_keys=True, default=str)])
    elif "rows" in report:
        keys = sorted({k for row in report["rows"] for k in row})
        writer = csv.DictWriter(buf, fieldnames=keys, restval="")
        writer.writeheader()
        for row in report["rows"]:
            writer.writerow(row)
    else:
        writer = csv.writer(buf)
        for k in sorted(report):
            writer.writerow([k, report[k]])
    return buf.getvalue()
