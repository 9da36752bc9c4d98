"""Small exact-arithmetic helpers used across the package.

Everything numerical in this package is a :class:`fractions.Fraction`;
floating point never enters the norm engine.  Irrational quantities (n-th
roots) are only ever reported as rational enclosures of configurable width.
"""

from __future__ import annotations

from fractions import Fraction


def parse_ratio(value) -> Fraction:
    """Parse a rational from "p/q" / "p" strings, ints, or Fractions."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    raise ValueError(f"cannot parse rational from {value!r}")


def ratio_str(value: Fraction) -> str:
    """Canonical string form ("3/2", "0", "7")."""
    return str(Fraction(value))


def nth_root_floor(a: int, n: int) -> int:
    """Largest integer r with r**n <= a (a >= 0, n >= 1)."""
    if a < 0 or n < 1:
        raise ValueError("nth_root_floor needs a >= 0, n >= 1")
    if a == 0:
        return 0
    if n == 1:
        return a
    # Newton iteration on integers, then a correction step.
    r = 1 << (-(-a.bit_length() // n))  # >= true root
    while True:
        nr = ((n - 1) * r + a // r ** (n - 1)) // n
        if nr >= r:
            break
        r = nr
    while r ** n > a:
        r -= 1
    return r


def root_lower_bound(x: Fraction, n: int, precision_bits: int = 30) -> Fraction:
    """Largest multiple of 2**-precision_bits that is <= x**(1/n).

    The returned value l satisfies l <= x**(1/n) < l + 2**-precision_bits,
    an exact enclosure of the irrational root.
    """
    if x < 0:
        raise ValueError("root_lower_bound needs x >= 0")
    if n == 1:
        return x
    scale = 1 << (n * precision_bits)
    k = nth_root_floor(x.numerator * scale // x.denominator, n)
    return Fraction(k, 1 << precision_bits)


def grid_floor_root(x: Fraction, n: int, precision_bits: int = 20) -> Fraction:
    """Largest grid rational a (denominator 2**precision_bits) with a**n <= x."""
    return root_lower_bound(x, n, precision_bits)
