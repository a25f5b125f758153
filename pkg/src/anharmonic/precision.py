"""Configurable-precision arithmetic contract and digit-agreement utilities.

All real arithmetic in this package runs on mpmath under a context that
carries a guard-digit cushion on top of the digits the caller asked for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp, mpf, mpmathify


@dataclass(frozen=True)
class PrecisionContext:
    """Immutable precision request: target digits plus working guard digits."""

    target_digits: int
    guard_digits: int

    @property
    def working_digits(self) -> int:
        return self.target_digits + self.guard_digits

    def workdps(self, extra: int = 0):
        """Context manager switching mpmath to working precision (+extra)."""
        return mp.workdps(self.working_digits + extra)

    def to_mpf(self, value) -> mpf:
        """Convert value (str/int/float/mpf) at working precision.

        Decimal strings are rounded at working precision, so "0.1" means the
        decimal 0.1 to working_digits digits, not the binary double.
        """
        with self.workdps():
            return mpmathify(value)


def make_context(target_digits: int) -> PrecisionContext:
    """Build a context with guard_digits = max(10, ceil(target/5))."""
    if target_digits < 1:
        raise ValueError("target_digits must be a positive integer")
    guard = max(10, math.ceil(target_digits / 5))
    return PrecisionContext(target_digits=int(target_digits), guard_digits=guard)


def digits_agree(a, b) -> int:
    """Count leading significant decimal digits on which a and b agree.

    Both values are aligned at the decimal exponent of the larger magnitude;
    sign mismatches (or one value being zero) count as 0 agreeing digits.
    Equal values agree on every digit visible at the current precision.
    """
    prec_digits = mp.dps
    with mp.workdps(prec_digits + 10):
        x = mpmathify(a)
        y = mpmathify(b)
        if x == y:
            return prec_digits
        if x == 0 or y == 0 or (x > 0) != (y > 0):
            return 0
        ax, ay = abs(x), abs(y)
        exp = int(mp.floor(mp.log10(ax if ax >= ay else ay)))
        # Integer mantissas at a common absolute scale, prec_digits long.
        scale = mpf(10) ** (prec_digits - 1 - exp)
        mx = int(mp.nint(ax * scale))
        my = int(mp.nint(ay * scale))
    sx, sy = str(mx), str(my)
    width = max(len(sx), len(sy))
    sx, sy = sx.zfill(width), sy.zfill(width)
    agree = 0
    for cx, cy in zip(sx, sy):
        if cx != cy:
            break
        agree += 1
    return agree


def format_fixed(x, decimals: int) -> str:
    """Render x with exactly `decimals` digits after the decimal point.

    Rounds half-to-even; never uses exponent notation.
    """
    with mp.workdps(mp.dps + decimals + 10):
        v = mpmathify(x)
        scaled = int(mp.nint(v * mpf(10) ** decimals))
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).zfill(decimals + 1)
    if decimals == 0:
        return sign + digits
    return f"{sign}{digits[:-decimals]}.{digits[-decimals:]}"


def format_scientific(x, decimals: int) -> str:
    """Render x as mantissa-exponent, e.g. 9.70795971e-1, half-even rounding."""
    with mp.workdps(mp.dps + decimals + 10):
        v = mpmathify(x)
        if v == 0:
            return format_fixed(0, decimals) + "e0"
        exp = int(mp.floor(mp.log10(abs(v))))
        mant = format_fixed(v / mpf(10) ** exp, decimals)
        # Rounding can push the mantissa to 10.000...; renormalize once.
        if mant.lstrip("-").startswith("10"):
            exp += 1
            mant = format_fixed(v / mpf(10) ** exp, decimals)
    return f"{mant}e{exp}"
