"""Extended-precision arithmetic contract shared by every module.

The user-facing unit of precision is decimal digits P.  Internally everything
runs on binary floats with at least ceil(P*log2(10)) + 16 bits, so the last
few printed digits of a P-digit result are never rounding artifacts.  Values
are mpmath mpf/mpc instances (immutable, safe to share); the working precision
is never ambient state smuggled through a global default but is entered
explicitly through `working_precision` or `with_precision` around each
computation.  The quadrature hot loop uses gmpy2.mpfr for speed; the exact
bridges between the two representations live here as well.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Any, Callable, Iterator

import gmpy2
import mpmath
from mpmath import mp, mpc, mpf

MIN_DIGITS = 10
GUARD_BITS = 16

__all__ = [
    "ConfigurationError",
    "MIN_DIGITS",
    "bits_for_digits",
    "working_precision",
    "with_precision",
    "pi",
    "parse_decimal",
    "to_decimal_string",
    "to_gmpy",
    "from_gmpy",
    "agrees_to_digits",
    "mpf",
    "mpc",
]


class ConfigurationError(ValueError):
    """Raised for invalid precision or other unusable configuration."""


def bits_for_digits(digits: int) -> int:
    """Binary precision carrying `digits` decimal digits plus guard bits."""
    if digits < MIN_DIGITS:
        raise ConfigurationError(
            f"working precision must be at least {MIN_DIGITS} digits, got {digits}"
        )
    return math.ceil(digits * math.log2(10)) + GUARD_BITS


@contextmanager
def working_precision(digits: int) -> Iterator[None]:
    """Context manager: all mpmath arithmetic inside runs at >= `digits` digits."""
    bits = bits_for_digits(digits)
    old = mp.prec
    mp.prec = bits
    try:
        yield
    finally:
        mp.prec = old


def with_precision(digits: int, computation: Callable[[], Any]) -> Any:
    """Run `computation` with every value created inside carrying >= `digits` digits."""
    with working_precision(digits):
        return computation()


def pi(digits: int) -> mpf:
    with working_precision(digits):
        return +mp.pi


def parse_decimal(text: str, digits: int) -> mpf:
    """Parse a decimal string at `digits` working digits.

    Published parameter values are ingested through this (never via float):
    values with 60+ significant digits or exponents like 1e-13 are far outside
    double precision.
    """
    with working_precision(digits):
        try:
            return mpf(text.strip())
        except ValueError as exc:
            raise ConfigurationError(f"not a decimal literal: {text!r}") from exc


def to_decimal_string(x: mpf, digits: int) -> str:
    """Round-trippable decimal form of x with `digits` significant digits."""
    with working_precision(digits + 5):
        return mpmath.nstr(mpf(x), digits, strip_zeros=False)


def to_gmpy(x: mpf) -> gmpy2.mpfr:
    """Exact mpmath.mpf -> gmpy2.mpfr conversion (no decimal round trip).

    mpf(x) on an existing mpf re-rounds to the ambient precision, which would
    silently truncate high-precision values whenever the caller happens to be
    outside a working_precision block, so mpf inputs are read out directly.
    """
    sign, man, exp, bc = x._mpf_ if isinstance(x, mpf) else mpf(x)._mpf_
    if man == 0:
        return gmpy2.mpfr(0)
    m = gmpy2.mpfr(gmpy2.mpz(man if sign == 0 else -man))
    return gmpy2.mul_2exp(m, exp) if exp >= 0 else gmpy2.div_2exp(m, -exp)


def from_gmpy(x: gmpy2.mpfr) -> mpf:
    """Exact gmpy2.mpfr -> mpmath.mpf conversion at the current mp precision."""
    if gmpy2.is_zero(x):
        return mpf(0)
    man, exp = x.as_mantissa_exp()
    return mpmath.ldexp(mpf(int(man)), int(exp))


def agrees_to_digits(a: mpf, b: mpf, digits: int) -> bool:
    """True when a and b agree to `digits` significant digits (relative)."""
    if not isinstance(a, mpf):
        a = mpf(a)
    if not isinstance(b, mpf):
        b = mpf(b)
    with working_precision(digits + 10):
        scale = max(abs(a), abs(b))
        if scale == 0:
            return True
        return abs(a - b) <= scale * mpf(10) ** (-digits)
