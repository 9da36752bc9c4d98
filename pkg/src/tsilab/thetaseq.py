"""Weight sequences (theta_n) for mixed Tsirelson spaces.

A sequence is *regular* when 0 < theta_n < 1, theta_n is nonincreasing to 0,
and theta_{n+m} >= theta_n * theta_m.  Regularisation replaces theta_n by the
supremum of products theta_{k_1} ... theta_{k_l} over k_1 + ... + k_l >= n;
for nonincreasing input this collapses to sums equal to n and is computed by
an exact dynamic program.

For rules carrying an exact limit theta = lim theta_n^{1/n} (geometric,
harmonic) we also expose phi_n = theta_n / theta^n and the two closed-form
upper-bound functions for the level-j lower-l1 constants, together with
tail certificates.  Custom tables have no tail certificate, so the bound
functions refuse to run on them rather than silently approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .rationals import parse_ratio, ratio_str, root_lower_bound


class UncertifiedTailError(ValueError):
    """The rule cannot certify the behaviour of the tail sup."""


class PhiNotVanishingError(ValueError):
    """phi_n does not tend to 0 under the supplied rule."""


@dataclass(frozen=True)
class CertifiedSup:
    value: Fraction
    attained: bool
    note: str = ""


@dataclass(frozen=True)
class ThetaSeq:
    """A weight sequence given by rule ("geometric", "harmonic") or table."""

    rule: str
    params: tuple = ()
    table: tuple[Fraction, ...] = ()
    theta_exact: Optional[Fraction] = None

    def __post_init__(self):
        if self.rule == "geometric":
            t = self.params[0]
            if not 0 < t < 1:
                raise ValueError("geometric ratio must lie in (0,1)")
            object.__setattr__(self, "theta_exact", t)
        elif self.rule == "harmonic":
            object.__setattr__(self, "theta_exact", Fraction(1))
        elif self.rule == "table":
            if not self.table:
                raise ValueError("table rule needs a nonempty prefix")
            for v in self.table:
                if not 0 < v < 1:
                    raise ValueError("theta values must lie in (0,1)")
            if self.theta_exact is not None:
                for n, v in enumerate(self.table, start=1):
                    if v > self.theta_exact**n:
                        raise ValueError(
                            f"theta_{n} exceeds theta**{n}: phi must stay <= 1")
        else:
            raise ValueError(f"unknown theta rule {self.rule!r}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def geometric(theta) -> "ThetaSeq":
        return ThetaSeq("geometric", (parse_ratio(theta),))

    @staticmethod
    def harmonic() -> "ThetaSeq":
        return ThetaSeq("harmonic")

    @staticmethod
    def from_table(prefix, theta_exact=None) -> "ThetaSeq":
        table = tuple(parse_ratio(v) for v in prefix)
        te = parse_ratio(theta_exact) if theta_exact is not None else None
        return ThetaSeq("table", (), table, te)

    # -- basic access ------------------------------------------------------

    def theta(self, n: int) -> Fraction:
        """theta_n for n >= 1, with the convention theta_0 = 1."""
        if n == 0:
            return Fraction(1)
        if n < 0:
            raise ValueError("theta index must be >= 0")
        if self.rule == "geometric":
            return self.params[0] ** n
        if self.rule == "harmonic":
            return Fraction(1, n + 1)
        if n > len(self.table):
            raise ValueError(f"theta_{n} not defined: table has {len(self.table)} terms")
        return self.table[n - 1]

    @property
    def q_limit(self) -> Optional[int]:
        """Largest admissibility level the space defines (None = unbounded)."""
        return len(self.table) if self.rule == "table" else None

    def space_id(self) -> str:
        if self.rule == "geometric":
            return f"geometric:{ratio_str(self.params[0])}"
        if self.rule == "harmonic":
            return "harmonic"
        suffix = f";theta={ratio_str(self.theta_exact)}" if self.theta_exact else ""
        return "table:" + ",".join(ratio_str(v) for v in self.table) + suffix

    # -- regularity --------------------------------------------------------

    def is_regular_prefix(self, upto: Optional[int] = None) -> bool:
        """Check both regularity laws on the materialised prefix."""
        K = upto or (len(self.table) if self.rule == "table" else 12)
        vals = [self.theta(n) for n in range(1, K + 1)]
        if any(not 0 < v < 1 for v in vals):
            return False
        if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
            return False
        for n in range(1, K + 1):
            for m in range(1, K - n + 1):
                if vals[n + m - 1] < vals[n - 1] * vals[m - 1]:
                    return False
        return True

    def require_nonincreasing(self, K: Optional[int] = None) -> None:
        K = K or (len(self.table) if self.rule == "table" else 12)
        vals = [self.theta(n) for n in range(1, K + 1)]
        if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
            raise ValueError("theta sequence is not nonincreasing")

    # -- derived quantities -------------------------------------------------

    def phi(self, n: int) -> Fraction:
        """phi_n = theta_n / theta**n (phi_0 = 1); needs an exact theta."""
        if self.theta_exact is None:
            raise UncertifiedTailError("phi needs an exact limit theta (rule-provided)")
        if n == 0:
            return Fraction(1)
        return self.theta(n) / self.theta_exact**n

    def theta_lower_bound(self, N: int, precision_bits: int = 30) -> Fraction:
        """max_{n<=N} of a rational lower bound for theta_n^{1/n}.

        Each term is enclosed within 2**-precision_bits; the result is
        monotone nondecreasing in N.
        """
        if N < 1:
            raise ValueError("N must be >= 1")
        return max(root_lower_bound(self.theta(n), n, precision_bits) for n in range(1, N + 1))

    # -- certified tail suprema ---------------------------------------------

    def sup_phi_tail(self, j: int) -> CertifiedSup:
        """sup_{p >= j} phi_p, certified from the rule."""
        if self.rule == "geometric":
            return CertifiedSup(Fraction(1), True, "phi is identically 1")
        if self.rule == "harmonic":
            # phi_p = 1/(p+1) is strictly decreasing, so the tail sup is phi_j
            return CertifiedSup(self.phi(max(j, 1)) if j >= 1 else Fraction(1), True,
                                "phi decreasing; sup attained at p=j")
        raise UncertifiedTailError("no tail certificate for custom tables")

    def sup_phi_ratio_tail(self, j: int, P_max: int) -> CertifiedSup:
        """sup_{p >= j} phi_p / phi_{p-j} (phi_0 = 1), certified from the rule."""
        if j == 0:
            return CertifiedSup(Fraction(1), True, "j=0: ratio is identically 1")
        if self.rule == "geometric":
            return CertifiedSup(Fraction(1), True, "ratio is identically 1")
        if self.rule == "harmonic":
            # ratio (p-j+1)/(p+1) increases strictly to 1
            range_max = Fraction(P_max - j + 1, P_max + 1)
            return CertifiedSup(
                Fraction(1), False,
                f"ratio increases to the limit 1; max over p<={P_max} is {range_max}")
        raise UncertifiedTailError("no tail certificate for custom tables")


# ---------------------------------------------------------------------------
# regularisation


def regularize(raw: ThetaSeq, K: int) -> ThetaSeq:
    """Exact regularisation on the first K terms.

    theta'_n = max(theta_n, max_{0<k<n} theta'_k * theta'_{n-k}); with
    nonincreasing input this equals the supremum over all products with index
    sums >= n (lowering an index never lowers the product), so the DP is
    exact and finite.  Non-monotone input is rejected.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    raw.require_nonincreasing(K)
    vals = [raw.theta(n) for n in range(1, K + 1)]
    bar: list[Fraction] = []
    for n in range(1, K + 1):
        best = vals[n - 1]
        for k in range(1, n):
            cand = bar[k - 1] * bar[n - k - 1]
            if cand > best:
                best = cand
        bar.append(best)
    return ThetaSeq.from_table(bar, theta_exact=raw.theta_exact)


def regularize_bruteforce(raw: ThetaSeq, K: int) -> list[Fraction]:
    """Independent oracle: enumerate every composition of n (n <= K)."""
    vals = [raw.theta(n) for n in range(1, K + 1)]

    def compositions(n):
        if n == 0:
            yield ()
            return
        for first in range(1, n + 1):
            for rest in compositions(n - first):
                yield (first,) + rest

    out = []
    for n in range(1, K + 1):
        best = vals[n - 1]
        for comp in compositions(n):
            prod = Fraction(1)
            for k in comp:
                prod *= vals[k - 1]
            if prod > best:
                best = prod
        out.append(best)
    return out


# ---------------------------------------------------------------------------
# the two closed-form upper bounds and the distortion target


def bound_delta_j_v1(seq: ThetaSeq, j: int, P_max: int = 64) -> Fraction:
    """theta**j * sup_{p>=j} phi_p  v  theta_j / theta_1, exactly."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if seq.theta_exact is None:
        raise UncertifiedTailError("v1 bound needs an exact theta")
    sup = seq.sup_phi_tail(j)
    return max(seq.theta_exact**j * sup.value, seq.theta(j) / seq.theta(1))


def bound_delta_j_v1_report(seq: ThetaSeq, j: int, P_max: int = 64) -> dict:
    sup = seq.sup_phi_tail(j)
    value = bound_delta_j_v1(seq, j, P_max)
    return {"j": j, "value": ratio_str(value), "sup_phi": ratio_str(sup.value),
            "attained": sup.attained, "note": sup.note}


def bound_delta_j_v2(seq: ThetaSeq, j: int, P_max: int = 64) -> Fraction:
    """theta**j * sup_{p>=j} phi_p / phi_{p-j}, exactly (phi_0 = 1)."""
    if j < 0:
        raise ValueError("j must be >= 0")
    if j == 0:
        return Fraction(1)
    if seq.theta_exact is None:
        raise UncertifiedTailError("v2 bound needs an exact theta")
    sup = seq.sup_phi_ratio_tail(j, P_max)
    return seq.theta_exact**j * sup.value


def bound_delta_j_v2_report(seq: ThetaSeq, j: int, P_max: int = 64) -> dict:
    if j == 0:
        return {"j": 0, "value": "1", "attained": True, "note": "empty product"}
    sup = seq.sup_phi_ratio_tail(j, P_max)
    range_max = max(seq.phi(p) / seq.phi(p - j) for p in range(j, P_max + 1))
    return {"j": j, "value": ratio_str(bound_delta_j_v2(seq, j, P_max)),
            "range_max": ratio_str(seq.theta_exact**j * range_max),
            "attained": sup.attained, "note": sup.note}


def distortion_target_n(seq: ThetaSeq, lam, P_max: int = 64) -> int:
    """Least n <= P_max with certified sup_{p>=n} phi_p < theta_1 / (2 lambda)."""
    lam = parse_ratio(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if seq.rule == "geometric":
        raise PhiNotVanishingError("phi is identically 1; the hypothesis phi_n -> 0 fails")
    threshold = seq.theta(1) / (2 * lam)
    for n in range(1, P_max + 1):
        if seq.sup_phi_tail(n).value < threshold:
            return n
    raise ValueError(f"no n <= {P_max} with certified tail sup below theta_1/(2*lambda)")


# ---------------------------------------------------------------------------
# serialisation


def space_to_json(seq: ThetaSeq) -> dict:
    out = {"rule": seq.rule}
    if seq.rule == "geometric":
        out["params"] = [ratio_str(seq.params[0])]
    if seq.rule == "table":
        out["prefix"] = [ratio_str(v) for v in seq.table]
        if seq.theta_exact is not None:
            out["theta_exact"] = ratio_str(seq.theta_exact)
    return out


def space_from_json(spec) -> ThetaSeq:
    """Accept preset names or {rule, params, prefix, theta_exact} dicts."""
    if isinstance(spec, ThetaSeq):
        return spec
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s in ("tsirelson", "t"):
            return ThetaSeq.geometric(Fraction(1, 2))
        if s in ("tsirelson-s1", "t-s1"):
            return ThetaSeq.from_table([Fraction(1, 2)])
        if s == "harmonic":
            return ThetaSeq.harmonic()
        if s.startswith("geometric:"):
            return ThetaSeq.geometric(parse_ratio(s.split(":", 1)[1]))
        raise ValueError(f"unknown space preset {spec!r}")
    if isinstance(spec, dict):
        rule = spec["rule"]
        if rule == "geometric":
            return ThetaSeq.geometric(parse_ratio(spec["params"][0]))
        if rule == "harmonic":
            return ThetaSeq.harmonic()
        if rule == "table":
            return ThetaSeq.from_table(spec["prefix"], spec.get("theta_exact"))
    raise ValueError(f"cannot parse space spec {spec!r}")
