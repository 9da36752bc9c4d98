"""Schreier families S_alpha for alpha <= omega and related combinatorics.

The families are defined recursively: S_0 consists of the empty set and all
singletons; S_{k+1} collects the unions of at most n successive S_k sets whose
union starts at or after n; at the limit we fix the fundamental sequence
alpha_n = n, so F belongs to S_omega iff F belongs to S_{min F}.

Membership uses a greedy left-to-right maximal-block decomposition.  Greedy
maximality minimises the number of blocks because the families are hereditary
(a prefix of a block stays in the family), but the implementation does not
take that on faith: :func:`is_member_bruteforce` enumerates every
decomposition, and the test suite checks the two agree exhaustively.

Empty blocks inside successor-step decompositions are permitted; since the
count constraint is read against the first element of the union, this is
equivalent to the usual "at most min(F) nonempty blocks" convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

OMEGA = "omega"

OrdinalIndex = int | str  # a nonnegative int, or the string "omega"


class NotInSequenceError(ValueError):
    """An element was not found in the supplied (prefix of an) infinite sequence."""


def parse_ordinal(value) -> OrdinalIndex:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("omega", "w"):
            return OMEGA
        return _check_finite(int(v))
    if isinstance(value, int):
        return _check_finite(value)
    raise ValueError(f"not an ordinal index: {value!r}")


def _check_finite(n: int) -> int:
    if n < 0:
        raise ValueError("finite ordinal index must be >= 0")
    return n


def _as_index_set(F: Iterable[int]) -> tuple[int, ...]:
    t = tuple(F)
    if any(not isinstance(v, int) or v < 1 for v in t):
        raise ValueError("index sets contain positive integers only")
    if any(t[i] >= t[i + 1] for i in range(len(t) - 1)):
        raise ValueError("index sets must be strictly increasing")
    return t


# ---------------------------------------------------------------------------
# membership


def is_member(F: Iterable[int], alpha: OrdinalIndex) -> bool:
    """True iff F (a strictly increasing tuple) lies in S_alpha."""
    t = _as_index_set(F)
    if not t:
        return True
    if alpha == OMEGA:
        return _member_finite(t, t[0])
    return _member_finite(t, _check_finite(alpha))


@lru_cache(maxsize=None)
def _member_finite(F: tuple[int, ...], k: int) -> bool:
    if not F:
        return True
    if k == 0:
        return len(F) == 1
    blocks = 0
    i, n = 0, len(F)
    while i < n:
        # longest t with F[i:i+t] in S_{k-1}; valid lengths are downward
        # closed by heredity, so we can bisect
        lo, hi = 1, n - i
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _member_finite(F[i : i + mid], k - 1):
                lo = mid
            else:
                hi = mid - 1
        i += lo
        blocks += 1
    return blocks <= F[0]


def member_rank(F: Iterable[int], q_cap: int) -> int | None:
    """Least q in [1, q_cap] with F in S_q, or None.  (S_q is nested in q.)"""
    t = _as_index_set(F)
    for q in range(1, q_cap + 1):
        if _member_finite(t, q):
            return q
    return None


def is_member_bruteforce(F: Iterable[int], alpha: OrdinalIndex) -> bool:
    """Independent oracle: enumerate all successive-block decompositions."""
    t = _as_index_set(F)
    if not t:
        return True
    k = t[0] if alpha == OMEGA else _check_finite(alpha)
    return _member_bf(t, k)


def _member_bf(F: tuple[int, ...], k: int) -> bool:
    if not F:
        return True
    if k == 0:
        return len(F) == 1

    def can(start: int, blocks_left: int) -> bool:
        if start == len(F):
            return True
        if blocks_left == 0:
            return False
        for t in range(1, len(F) - start + 1):
            if _member_bf(F[start : start + t], k - 1) and can(start + t, blocks_left - 1):
                return True
        return False

    return can(0, F[0])


# ---------------------------------------------------------------------------
# admissibility of interval families


def check_intervals(intervals: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    ivs = tuple((int(a), int(b)) for a, b in intervals)
    for a, b in ivs:
        if not 1 <= a <= b:
            raise ValueError(f"bad interval [{a},{b}]")
    for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
        if b1 >= a2:
            raise ValueError("intervals must be successive (E_1 < E_2 < ...)")
    return ivs


def is_admissible(intervals: Sequence[tuple[int, int]], alpha: OrdinalIndex) -> bool:
    """True iff the left endpoints of the (successive) intervals form an S_alpha set."""
    ivs = check_intervals(intervals)
    return is_member(tuple(a for a, _ in ivs), alpha)


# ---------------------------------------------------------------------------
# infinite subsequences N and the families S_alpha(N)


@dataclass(frozen=True)
class SubseqRule:
    """An infinite increasing sequence N = (n_i), given by rule or explicit prefix.

    Rules: identity (n_i = i), shifted(k) (n_i = i + k), arithmetic(a, d)
    (n_i = a + (i-1) d), geometric-indices(b) (n_i = b**i).
    """

    kind: str
    params: tuple[int, ...] = ()
    prefix: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "explicit":
            object.__setattr__(self, "prefix", _as_index_set(self.prefix))
        elif self.kind not in ("identity", "shifted", "arithmetic", "geometric-indices"):
            raise ValueError(f"unknown sequence rule {self.kind!r}")

    def term(self, i: int) -> int:
        """n_i, 1-based."""
        if i < 1:
            raise ValueError("sequence indices are 1-based")
        if self.kind == "identity":
            return i
        if self.kind == "shifted":
            return i + self.params[0]
        if self.kind == "arithmetic":
            a, d = self.params
            return a + (i - 1) * d
        if self.kind == "geometric-indices":
            return self.params[0] ** i
        if i > len(self.prefix):
            raise NotInSequenceError(f"explicit prefix too short for index {i}")
        return self.prefix[i - 1]

    def position(self, value: int) -> int:
        """i with n_i == value; NotInSequenceError if value does not occur."""
        if self.kind == "identity":
            i = value
        elif self.kind == "shifted":
            i = value - self.params[0]
        elif self.kind == "arithmetic":
            a, d = self.params
            i = (value - a) // d + 1 if (value - a) % d == 0 else 0
        elif self.kind == "geometric-indices":
            b = self.params[0]
            i, v = 0, 1
            while v < value:
                v *= b
                i += 1
            i = i if v == value and i >= 1 else 0
        else:
            try:
                i = self.prefix.index(value) + 1
            except ValueError:
                raise NotInSequenceError(
                    f"{value} not in the supplied prefix of N"
                ) from None
        if i < 1 or self.term(i) != value:
            raise NotInSequenceError(f"{value} does not occur in N")
        return i


def parse_subseq(spec) -> SubseqRule:
    """Accept a rule name ("evens" etc.), a rule dict, or an explicit list."""
    if isinstance(spec, SubseqRule):
        return spec
    if isinstance(spec, (list, tuple)):
        return SubseqRule("explicit", prefix=tuple(spec))
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s in ("identity", "naturals", "n"):
            return SubseqRule("identity")
        if s == "evens":
            return SubseqRule("arithmetic", (2, 2))
        if s == "odds":
            return SubseqRule("arithmetic", (1, 2))
        if s.startswith("shifted(") and s.endswith(")"):
            return SubseqRule("shifted", (int(s[8:-1]),))
        if s.startswith("arithmetic(") and s.endswith(")"):
            a, d = (int(p) for p in s[11:-1].split(","))
            return SubseqRule("arithmetic", (a, d))
        if s.startswith("geometric-indices(") and s.endswith(")"):
            return SubseqRule("geometric-indices", (int(s[18:-1]),))
        raise ValueError(f"unknown sequence spec {spec!r}")
    if isinstance(spec, dict):
        return SubseqRule(spec["kind"], tuple(spec.get("params", ())), tuple(spec.get("prefix", ())))
    raise ValueError(f"cannot parse sequence spec {spec!r}")


def is_member_of_N(F: Iterable[int], alpha: OrdinalIndex, N) -> bool:
    """True iff F = (n_i)_{i in G} for some G in S_alpha, i.e. F in S_alpha(N)."""
    rule = parse_subseq(N)
    positions = tuple(rule.position(v) for v in _as_index_set(F))
    return is_member(positions, alpha)


# ---------------------------------------------------------------------------
# the constructive subsequence L = (l_i) and its exhaustive verification


def prop31_construct(N, prefix_len: int) -> tuple[int, ...]:
    """Build L = (n_{m_i}) with m_1 = n_1 and m_{k+1} = max(n_{m_k}, m_k + 1).

    The max-guard repairs the degenerate identity-prefix case (n_i = i on a
    prefix would stall the recursion m_{k+1} = n_{m_k}); it preserves the
    inequality n_{m_k} <= m_{k+1} that the verification relies on while
    keeping M a subsequence of the positive integers.
    """
    rule = parse_subseq(N)
    if prefix_len < 0:
        raise ValueError("prefix_len must be >= 0")
    out: list[int] = []
    m = rule.term(1)
    for _ in range(prefix_len):
        out.append(rule.term(m))
        m = max(rule.term(m), m + 1)
    return tuple(out)


@dataclass
class VerifyReport:
    """Outcome of an exhaustive implication check; empty counterexamples = pass."""

    checked: int = 0
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {"checked": self.checked, "counterexamples": self.counterexamples, "ok": self.ok}


def _subsets(universe: range):
    items = list(universe)
    for mask in range(1, 1 << len(items)):
        yield tuple(items[i] for i in range(len(items)) if mask >> i & 1)


def prop31_verify(N, L: Sequence[int], alpha_max: int, F_max: int) -> VerifyReport:
    """Check (l_i)_{i in F} in S_alpha  =>  (l_{i+1})_{i in F} in S_alpha(N)
    for every finite alpha <= alpha_max and every F within {1..F_max}."""
    rule = parse_subseq(N)
    L = tuple(L)
    if len(L) < F_max + 1:
        raise ValueError(f"need at least {F_max + 1} terms of L, got {len(L)}")
    report = VerifyReport()
    for alpha in range(alpha_max + 1):
        for F in _subsets(range(1, F_max + 1)):
            if not is_member(tuple(L[i - 1] for i in F), alpha):
                continue
            report.checked += 1
            shifted = tuple(L[i] for i in F)
            if not is_member_of_N(shifted, alpha, rule):
                report.counterexamples.append({"alpha": alpha, "F": list(F)})
    return report


def cor32_verify(N, L: Sequence[int], alpha_max: int, F_max: int) -> VerifyReport:
    """Drop-minimum variant: (l_i)_{i in F} in S_alpha  =>
    (l_i)_{i in F minus min F} in S_alpha(N)."""
    rule = parse_subseq(N)
    L = tuple(L)
    if len(L) < F_max:
        raise ValueError(f"need at least {F_max} terms of L, got {len(L)}")
    report = VerifyReport()
    for alpha in range(alpha_max + 1):
        for F in _subsets(range(1, F_max + 1)):
            if not is_member(tuple(L[i - 1] for i in F), alpha):
                continue
            report.checked += 1
            rest = tuple(L[i - 1] for i in F[1:])
            if not is_member_of_N(rest, alpha, rule):
                report.counterexamples.append({"alpha": alpha, "F": list(F)})
    return report
