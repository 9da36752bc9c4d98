"""Pydantic request/response models for the service API.

Rationals travel as strings ("3/2") so nothing is lost in JSON; vectors use
the {"entries": [[index, "p/q"], ...]} wire form (a bare pair list is also
accepted).  Spaces are preset names ("tsirelson", "tsirelson-s1",
"harmonic") or {rule, params, prefix, theta_exact} objects.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

SpaceSpec = Union[str, dict]
VectorSpec = Union[list, dict]


class AuxSpec(BaseModel):
    kind: Literal["p", "Np", "SNp"]
    N: int = 1
    p: int = 0


class NormRequest(BaseModel):
    space: SpaceSpec = "tsirelson"
    vec: VectorSpec
    aux: list[AuxSpec] = Field(default_factory=list)
    witness: bool = False
    cache: Optional[str] = None


class AuxResult(BaseModel):
    kind: str
    N: int
    p: int
    value: str


class NormResponse(BaseModel):
    space: str
    norm: str
    aux: list[AuxResult] = Field(default_factory=list)
    witness: Optional[dict] = None


class MemberRequest(BaseModel):
    elements: list[int]
    alpha: Union[int, str]
    sequence: Optional[Union[str, list, dict]] = None  # membership in S_alpha(N)


class MemberResponse(BaseModel):
    member: bool


class AdmissibleRequest(BaseModel):
    intervals: list[list[int]]
    alpha: Union[int, str]


class ConstructRequest(BaseModel):
    sequence: Union[str, list, dict]
    length: int


class ConstructResponse(BaseModel):
    L: list[int]


class SubseqVerifyRequest(BaseModel):
    sequence: Union[str, list, dict]
    variant: Literal["prop31", "cor32"] = "prop31"
    alpha_max: int = 2
    F_max: int = 8
    L: Optional[list[int]] = None  # default: the constructed subsequence


class RegularizeRequest(BaseModel):
    prefix: Optional[list[str]] = None
    space: Optional[SpaceSpec] = None
    K: int


class RegularizeResponse(BaseModel):
    prefix: list[str]
    regular: bool


class BoundsRequest(BaseModel):
    space: SpaceSpec
    j_max: int = 6
    P_max: int = 32
    lam: Optional[str] = None  # adds the distortion target level when given


class AverageRequest(BaseModel):
    space: SpaceSpec = "harmonic"
    base: str = "unit"
    M: int = 1
    N: int = 1
    eps: str = "1/2"
    refine: bool = False
    support_budget: int = 3000
    verify: bool = False
    seed: int = 0


class TreeVerifyRequest(BaseModel):
    space: SpaceSpec
    tree: dict
    seed: int = 0


class SuiteRequest(BaseModel):
    params: dict = Field(default_factory=dict)


class ExperimentRequest(BaseModel):
    space: SpaceSpec = "harmonic"
    params: dict = Field(default_factory=dict)
