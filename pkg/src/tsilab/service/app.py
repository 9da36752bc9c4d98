"""FastAPI service exposing the exact-norm laboratory.

The service owns one memoising evaluator per space, so repeated queries
against the same space reuse every norm computed so far.  All numeric fields
in responses are exact rational strings.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import schreier, suites, thetaseq
from ..averages import AvgTree, construct_average, verify_remark_properties
from ..budget import BudgetExceededError
from ..rationals import parse_ratio, ratio_str
from ..thetaseq import (PhiNotVanishingError, ThetaSeq, UncertifiedTailError,
                        bound_delta_j_v1_report, bound_delta_j_v2_report,
                        distortion_target_n, space_from_json, space_to_json)
from ..vectors import FinVec
from .models import (AdmissibleRequest, AuxResult, AverageRequest,
                     BoundsRequest, ConstructRequest, ConstructResponse,
                     ExperimentRequest, MemberRequest, MemberResponse,
                     NormRequest, NormResponse, RegularizeRequest,
                     RegularizeResponse, SubseqVerifyRequest, SuiteRequest,
                     TreeVerifyRequest)

app = FastAPI(title="tsilab", description="exact mixed Tsirelson norm laboratory")


@app.middleware("http")
async def _arm_time_budget(request, call_next):
    # TSL_BUDGET_MS caps each request's computation; the deadline is a
    # module-level value, so concurrent requests share the tightest one
    from .. import budget

    budget.start_from_env()
    try:
        return await call_next(request)
    finally:
        budget.clear()


def _space(spec) -> ThetaSeq:
    try:
        return space_from_json(spec)
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except BudgetExceededError as exc:
        raise HTTPException(status_code=409, detail=f"budget exceeded: {exc}") from exc
    except (PhiNotVanishingError, UncertifiedTailError, ValueError, KeyError,
            TypeError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.get("/spaces")
def spaces():
    return {"presets": ["tsirelson", "tsirelson-s1", "harmonic"],
            "tsirelson": space_to_json(suites.TSIRELSON),
            "tsirelson-s1": space_to_json(suites.TSIRELSON_S1),
            "harmonic": space_to_json(suites.HARMONIC)}


@app.post("/norm", response_model=NormResponse)
def norm(req: NormRequest):
    space = _space(req.space)
    ev = suites.shared_evaluator(space)
    if req.cache:
        ev.load_cache(req.cache)
    vec = _guard(FinVec.from_json, req.vec)
    value = _guard(ev.norm, vec)
    aux = []
    for spec in req.aux:
        if spec.kind == "p":
            v = _guard(ev.norm_p, vec, spec.p)
        elif spec.kind == "Np":
            v = _guard(ev.norm_Np, vec, spec.N, spec.p)
        else:
            v = _guard(ev.norm_SNp, vec, spec.N, spec.p)
        aux.append(AuxResult(kind=spec.kind, N=spec.N, p=spec.p, value=ratio_str(v)))
    witness = _guard(ev.witness, vec) if req.witness else None
    if req.cache:
        ev.save_cache(req.cache)
    return NormResponse(space=space.space_id(), norm=ratio_str(value),
                        aux=aux, witness=witness)


@app.post("/schreier/member", response_model=MemberResponse)
def member(req: MemberRequest):
    alpha = _guard(schreier.parse_ordinal, req.alpha)
    if req.sequence is not None:
        return MemberResponse(member=_guard(
            schreier.is_member_of_N, req.elements, alpha, req.sequence))
    return MemberResponse(member=_guard(schreier.is_member, req.elements, alpha))


@app.post("/schreier/admissible", response_model=MemberResponse)
def admissible(req: AdmissibleRequest):
    alpha = _guard(schreier.parse_ordinal, req.alpha)
    ivs = [tuple(iv) for iv in req.intervals]
    return MemberResponse(member=_guard(schreier.is_admissible, ivs, alpha))


@app.post("/schreier/construct", response_model=ConstructResponse)
def construct(req: ConstructRequest):
    return ConstructResponse(L=list(_guard(
        schreier.prop31_construct, req.sequence, req.length)))


@app.post("/schreier/verify")
def schreier_verify(req: SubseqVerifyRequest):
    L = req.L or _guard(schreier.prop31_construct, req.sequence, req.F_max + 1)
    fn = schreier.prop31_verify if req.variant == "prop31" else schreier.cor32_verify
    return _guard(fn, req.sequence, L, req.alpha_max, req.F_max).to_json()


@app.post("/regularize", response_model=RegularizeResponse)
def regularize(req: RegularizeRequest):
    if req.prefix is not None:
        raw = _guard(ThetaSeq.from_table, req.prefix)
    elif req.space is not None:
        raw = _space(req.space)
    else:
        raise HTTPException(status_code=400, detail="need prefix or space")
    reg = _guard(thetaseq.regularize, raw, req.K)
    return RegularizeResponse(prefix=[ratio_str(v) for v in reg.table],
                              regular=reg.is_regular_prefix(req.K))


@app.post("/bounds")
def bounds(req: BoundsRequest):
    space = _space(req.space)
    rows = []
    for j in range(1, req.j_max + 1):
        row = {"j": j}
        try:
            row["theta_j"] = ratio_str(space.theta(j))
            row["phi_j"] = ratio_str(space.phi(j))
            row["bound_v1"] = bound_delta_j_v1_report(space, j, req.P_max)["value"]
            v2 = bound_delta_j_v2_report(space, j, req.P_max)
            row["bound_v2"] = v2["value"]
            if not v2["attained"]:
                row["bound_v2_note"] = v2["note"]
        except (UncertifiedTailError, ValueError) as exc:
            row["note"] = str(exc)
        rows.append(row)
    out = {"space": space.space_id(), "rows": rows}
    if req.lam is not None:
        try:
            out["distortion_target_n"] = distortion_target_n(
                space, parse_ratio(req.lam), req.P_max)
        except (PhiNotVanishingError, ValueError) as exc:
            out["distortion_target_note"] = str(exc)
    return out


@app.post("/average")
def average(req: AverageRequest):
    space = _space(req.space)
    tree = _guard(construct_average, req.base, req.M, req.N,
                  parse_ratio(req.eps), refine=req.refine, space=space,
                  support_budget=req.support_budget)
    out = {"tree": tree.to_json()}
    if req.verify:
        out["report"] = verify_remark_properties(
            tree, suites.shared_evaluator(space), seed=req.seed)
    return out


@app.post("/average/verify")
def average_verify(req: TreeVerifyRequest):
    space = _space(req.space)
    tree = _guard(AvgTree.from_json, req.tree)
    return verify_remark_properties(tree, suites.shared_evaluator(space),
                                    seed=req.seed)


@app.post("/verify/{suite}")
def verify(suite: str, req: SuiteRequest):
    return _guard(suites.run_suite, suite, **req.params)


@app.post("/experiment/{name}")
def experiment(name: str, req: ExperimentRequest):
    if name not in suites.EXPERIMENTS:
        raise HTTPException(status_code=400,
                            detail=f"unknown experiment {name!r}; have {sorted(suites.EXPERIMENTS)}")
    space = _space(req.space)
    return _guard(suites.EXPERIMENTS[name], space, **req.params)
