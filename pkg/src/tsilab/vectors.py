"""Finitely supported vectors with exact rational coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .rationals import parse_ratio, ratio_str

Entry = tuple[int, Fraction]


@dataclass(frozen=True)
class FinVec:
    """An element of c00: a sorted tuple of (index, nonzero rational) pairs."""

    entries: tuple[Entry, ...] = ()

    def __post_init__(self):
        for i, c in self.entries:
            if i < 1:
                raise ValueError("indices must be >= 1")
            if c == 0:
                raise ValueError("stored coordinates must be nonzero")
        idxs = [i for i, _ in self.entries]
        if any(a >= b for a, b in zip(idxs, idxs[1:])):
            raise ValueError("entries must be sorted by strictly increasing index")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, object]]) -> "FinVec":
        acc: dict[int, Fraction] = {}
        for i, c in pairs:
            acc[int(i)] = acc.get(int(i), Fraction(0)) + parse_ratio(c)
        return FinVec(tuple(sorted((i, c) for i, c in acc.items() if c != 0)))

    @staticmethod
    def unit(i: int) -> "FinVec":
        return FinVec(((i, Fraction(1)),))

    @staticmethod
    def uniform(start: int, length: int, coeff) -> "FinVec":
        c = parse_ratio(coeff)
        return FinVec(tuple((start + t, c) for t in range(length)))

    @staticmethod
    def zero() -> "FinVec":
        return FinVec()

    # -- basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.entries

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def ran(self) -> Optional[tuple[int, int]]:
        """Smallest interval containing the support (None for the zero vector)."""
        if not self.entries:
            return None
        return (self.entries[0][0], self.entries[-1][0])

    def coeff(self, i: int) -> Fraction:
        for j, c in self.entries:
            if j == i:
                return c
        return Fraction(0)

    def linf(self) -> Fraction:
        return max((abs(c) for _, c in self.entries), default=Fraction(0))

    def l1(self) -> Fraction:
        return sum((abs(c) for _, c in self.entries), Fraction(0))

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "FinVec") -> "FinVec":
        return FinVec.from_pairs(list(self.entries) + list(other.entries))

    def scale(self, factor) -> "FinVec":
        f = parse_ratio(factor)
        if f == 0:
            return FinVec()
        return FinVec(tuple((i, c * f) for i, c in self.entries))

    def abs_(self) -> "FinVec":
        return FinVec(tuple((i, abs(c)) for i, c in self.entries))

    def flip_signs(self, signs: Iterable[int]) -> "FinVec":
        s = list(signs)
        return FinVec(tuple((i, c * s[t]) for t, (i, c) in enumerate(self.entries)))

    # -- restrictions ------------------------------------------------------------

    def restrict(self, a: int, b: int) -> "FinVec":
        """Ex for the interval E = [a, b]."""
        return FinVec(tuple((i, c) for i, c in self.entries if a <= i <= b))

    def restrict_set(self, S: Iterable[int]) -> "FinVec":
        keep = set(S)
        return FinVec(tuple((i, c) for i, c in self.entries if i in keep))

    # -- serialisation -------------------------------------------------------------

    def to_json(self) -> dict:
        return {"entries": [[i, ratio_str(c)] for i, c in self.entries]}

    @staticmethod
    def from_json(obj) -> "FinVec":
        if isinstance(obj, FinVec):
            return obj
        if isinstance(obj, dict):
            return FinVec.from_pairs(obj.get("entries", []))
        if isinstance(obj, (list, tuple)):
            return FinVec.from_pairs(obj)
        raise ValueError(f"cannot parse vector from {obj!r}")


def block_sum(blocks: Iterable[FinVec]) -> FinVec:
    out = FinVec()
    for b in blocks:
        out = out + b
    return out


def are_successive(blocks: Iterable[FinVec]) -> bool:
    """x_1 < x_2 < ... w.r.t. ranges (zero vectors not allowed)."""
    prev_hi = 0
    for b in blocks:
        r = b.ran
        if r is None:
            return False
        if r[0] <= prev_hi:
            return False
        prev_hi = r[1]
    return True


def interval_splits(interval: tuple[int, int], ran: tuple[int, int]) -> bool:
    """E splits x iff E meets ran(x) but does not contain it."""
    a, b = interval
    lo, hi = ran
    return not (b < lo or hi < a) and not (a <= lo and hi <= b)
