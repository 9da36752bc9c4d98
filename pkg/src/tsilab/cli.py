"""Command-line front end: a thin HTTP client of the service.

Without --server the client mounts the FastAPI app in-process over an ASGI
transport, so the CLI works standalone while exercising exactly the same
wire surface a remote deployment would.  TSL_BUDGET_MS (or --budget-ms)
arms a global time guard; exhausted budgets exit with code 3, failures with
code 1, usage and input errors with code 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from . import budget

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # no server given: mount the app in-process behind the same HTTP surface
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app
    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        if resp.status_code == 409:
            print(f"budget exceeded: {detail}", file=sys.stderr)
            raise SystemExit(EXIT_BUDGET)
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return resp.json()


def _write_outputs(args, report: dict) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True))
    if getattr(args, "csv", None):
        from .suites import report_csv
        Path(args.csv).write_text(report_csv(report))


def _parse_vec(spec: str):
    if spec.startswith("@"):
        spec = Path(spec[1:]).read_text()
    return json.loads(spec)


def _parse_space(spec: str):
    if spec.startswith("{"):
        return json.loads(spec)
    if spec.startswith("@"):
        return json.loads(Path(spec[1:]).read_text())
    return spec


def _parse_seq(spec):
    """Sequence rules pass through; '[2,4,6,...]' parses as an explicit prefix."""
    if isinstance(spec, str) and spec.lstrip().startswith("["):
        return json.loads(spec)
    return spec


def _parse_aux(spec: str) -> dict:
    parts = dict(kv.split("=") for kv in spec.split(","))
    if "S" in parts:
        return {"kind": "SNp", "N": int(parts["S"]), "p": int(parts.get("p", 0))}
    if "N" in parts:
        return {"kind": "Np", "N": int(parts["N"]), "p": int(parts.get("p", 0))}
    return {"kind": "p", "p": int(parts.get("p", 0))}


# ---------------------------------------------------------------------------
# subcommands


def cmd_norm(client, args) -> int:
    payload = {"space": _parse_space(args.space), "vec": _parse_vec(args.vec),
               "aux": [_parse_aux(a) for a in args.aux or []],
               "witness": bool(args.witness), "cache": args.cache}
    rep = _post(client, "/norm", payload)
    print(rep["norm"])
    for aux in rep["aux"]:
        print(aux["value"])
    if args.witness:
        print(json.dumps(rep["witness"], indent=2))
    _write_outputs(args, rep)
    return EXIT_OK


def cmd_schreier(client, args) -> int:
    if args.action == "member":
        payload = {"elements": [int(v) for v in args.set.split(",") if v],
                   "alpha": args.alpha,
                   "sequence": _parse_seq(args.N) if args.N else None}
        rep = _post(client, "/schreier/member", payload)
        print("true" if rep["member"] else "false")
        return EXIT_OK if rep["member"] or not args.expect_member else EXIT_FAIL
    if args.action == "admissible":
        ivs = [[int(x) for x in p.split("-")] for p in args.intervals.split(",")]
        rep = _post(client, "/schreier/admissible",
                    {"intervals": ivs, "alpha": args.alpha})
        print("true" if rep["member"] else "false")
        return EXIT_OK
    rep = _post(client, "/schreier/construct",
                {"sequence": _parse_seq(args.N), "length": args.len})
    print(",".join(str(v) for v in rep["L"]))
    return EXIT_OK


def cmd_regularize(client, args) -> int:
    payload = {"K": args.K}
    if args.prefix:
        payload["prefix"] = args.prefix.split(",")
    else:
        payload["space"] = _parse_space(args.space)
    rep = _post(client, "/regularize", payload)
    print(",".join(rep["prefix"]))
    _write_outputs(args, rep)
    return EXIT_OK


def cmd_bounds(client, args) -> int:
    payload = {"space": _parse_space(args.space), "j_max": args.j_max,
               "P_max": args.p_max, "lam": args.lam}
    rep = _post(client, "/bounds", payload)
    for row in rep["rows"]:
        print(json.dumps(row, sort_keys=True))
    if "distortion_target_n" in rep:
        print(f"distortion target n: {rep['distortion_target_n']}")
    _write_outputs(args, rep)
    return EXIT_OK


def cmd_average(client, args) -> int:
    payload = {"space": _parse_space(args.space), "base": args.base,
               "M": args.M, "N": args.N, "eps": args.eps,
               "refine": bool(args.refine), "verify": bool(args.verify),
               "seed": args.seed, "support_budget": args.budget_support}
    rep = _post(client, "/average", payload)
    tree = rep["tree"]
    print(f"levels: {[len(l) for l in tree['levels']]}  "
          f"root range: {tree['levels'][-1][0]['vec']['entries'][0][0]}.."
          f"{tree['levels'][-1][0]['vec']['entries'][-1][0]}")
    if args.verify:
        ok = rep["report"]["ok"]
        print(f"properties: {'ok' if ok else 'FAILED'}")
        if not ok:
            return EXIT_FAIL
    _write_outputs(args, rep if args.verify else tree)
    if args.out is None and not args.verify:
        print(json.dumps(tree))
    return EXIT_OK


def cmd_verify(client, args) -> int:
    if args.suite == "tree":
        tree = json.loads(Path(args.tree).read_text())
        tree = tree.get("tree", tree)  # accept wrapped construction reports
        rep = _post(client, "/average/verify",
                    {"space": _parse_space(args.space), "tree": tree,
                     "seed": args.seed or 0})
        print(f"tree properties: {'ok' if rep['ok'] else 'FAILED'}")
        _write_outputs(args, rep)
        return EXIT_OK if rep["ok"] else EXIT_FAIL
    params: dict = {}
    if args.seed is not None:
        params["seed"] = args.seed
    if args.N:
        params["sequences"] = [_parse_seq(args.N)]
    if args.alpha_max is not None:
        params["alpha_max"] = args.alpha_max
    if args.f_max is not None:
        params["F_max"] = args.f_max
    rep = _post(client, f"/verify/{args.suite}", {"params": params})
    counts = rep["counts"]
    for item in rep["items"]:
        if item["status"] != "pass":
            print(f"  {item['status'].upper()}: {item['id']} {item.get('note', '')}")
    print(f"{rep['suite']}: {counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['inconclusive']} inconclusive")
    _write_outputs(args, rep)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def cmd_experiment(client, args) -> int:
    params: dict = {"seed": args.seed or 0}
    if args.name == "delta-table":
        params["j_max"] = args.j_max
        params["P_max"] = args.p_max
    if args.name == "distortion":
        params["lam"] = args.lam
    rep = _post(client, f"/experiment/{args.name}",
                {"space": _parse_space(args.space), "params": params})
    _write_outputs(args, rep)
    if args.name == "delta-table":
        partial = False
        for row in rep["rows"]:
            print(json.dumps(row, sort_keys=True))
            if row.get("achieved_ratio", "") is None:
                partial = True
        if partial:
            print("partial report: some rows exceeded their budget", file=sys.stderr)
            return EXIT_BUDGET
        return EXIT_OK
    print(json.dumps({k: v for k, v in rep.items() if k != "samples"},
                     indent=2, sort_keys=True))
    if rep.get("inconclusive"):
        print("inconclusive at desk scale (partial report)", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="tsilab",
                                  description="exact mixed Tsirelson norm laboratory")
    top.add_argument("--server", help="remote service URL (default: in-process)")
    top.add_argument("--budget-ms", type=int, help="wall-clock budget override")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--csv", help="write a CSV summary here")

    p = sub.add_parser("norm", help="exact norm of a vector")
    p.add_argument("--space", default="tsirelson")
    p.add_argument("--vec", required=True, help='[[index, coeff], ...] or @file')
    p.add_argument("--aux", action="append",
                   help='auxiliary norm: "N=3,p=0", "S=1,p=0", or "p=2"')
    p.add_argument("--witness", action="store_true")
    p.add_argument("--cache", help="server-side memo cache file")
    common(p)
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("schreier", help="family membership and construction")
    p.add_argument("action", choices=["member", "admissible", "construct"])
    p.add_argument("--set", help="comma-separated elements")
    p.add_argument("--alpha", default="1")
    p.add_argument("--intervals", help="a-b,c-d,...")
    p.add_argument("--N", help="sequence rule (identity, evens, shifted(k), ...)")
    p.add_argument("--len", type=int, default=8)
    p.add_argument("--expect-member", action="store_true")
    p.set_defaults(fn=cmd_schreier)

    p = sub.add_parser("regularize", help="exact regularisation of a prefix")
    p.add_argument("--prefix", help="comma-separated rationals")
    p.add_argument("--space", default="harmonic")
    p.add_argument("--K", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_regularize)

    p = sub.add_parser("bounds", help="closed-form level-j bound table")
    p.add_argument("--space", default="tsirelson")
    p.add_argument("--j-max", type=int, default=6)
    p.add_argument("--p-max", type=int, default=32)
    p.add_argument("--lam", help="also report the distortion target level")
    common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("average", help="construct an admissible averaging tree")
    p.add_argument("--space", default="harmonic")
    p.add_argument("--base", default="unit")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--eps", default="1/2")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-support", type=int, default=3000)
    common(p)
    p.set_defaults(fn=cmd_average)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--N", help="sequence rule for the subsequence suites")
    p.add_argument("--alpha-max", type=int)
    p.add_argument("--f-max", type=int)
    p.add_argument("--tree", help="tree JSON file (suite 'tree')")
    p.add_argument("--space", default="harmonic")
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("experiment", help="run an experiment")
    p.add_argument("name", choices=["delta-table", "distortion"])
    p.add_argument("--space", default="harmonic")
    p.add_argument("--seed", type=int)
    p.add_argument("--j-max", type=int, default=4)
    p.add_argument("--p-max", type=int, default=32)
    p.add_argument("--lam", default="1/2")
    common(p)
    p.set_defaults(fn=cmd_experiment)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.budget_ms:
        import os
        os.environ["TSL_BUDGET_MS"] = str(args.budget_ms)
    budget.start_from_env()
    try:
        with make_client(args.server) as client:
            return args.fn(client, args)
    except budget.BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    finally:
        budget.clear()


if __name__ == "__main__":
    sys.exit(main())
