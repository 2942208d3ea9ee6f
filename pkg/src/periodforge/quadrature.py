"""Doubly exponential quadrature and period integrals on axis segments.

The engine applies the tanh-sinh substitution x = mid + halfspan*tanh((pi/2)
sinh t) on a finite segment, which drives node spacing to zero doubly
exponentially at both endpoints and integrates endpoint singularities of the
kind w contributes (|x - r|^(+-1/2)) to full working accuracy.

Two design points matter for accuracy and are part of the integrand protocol:

* Integrands receive the node x together with the exactly computed endpoint
  offsets dlo = x - lo and dhi = hi - x.  Node positions near an endpoint are
  represented by their offset, never by the cancellation-prone difference of
  two nearby numbers, so |x - r| for a branch location r at or beyond an
  endpoint is (offset + gap) with gap = lo - r or r - hi formed once outside
  the hot loop.
* The hot loop runs on gmpy2.mpfr scalars with cached node tables per
  (precision, level); mpmath appears only at the boundary.

Levels refine h = 2^-L for L = 2..13, reusing all previous evaluations; the
rule converges when two successive estimates agree to 10^(5 - digits)
(relative once the value exceeds 1).  Non-convergence raises QuadratureError
carrying the last two estimates.
"""

from __future__ import annotations

import enum
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator

import gmpy2
from mpmath import mpc, mpf

from .curve import BranchDivisor, Role
from .numerics import bits_for_digits, from_gmpy, to_gmpy, working_precision

_BASE_LEVEL = 2
_MAX_LEVEL = 13

# Node tables keyed by (bits, level).  Entries are (near, far, weight) with
# near = 2/(1 + e^(2s)) and far = 2 - near, so that the node at +t sits at
# distance halfspan*near from hi, and the mirrored node at -t sits at
# distance halfspan*near from lo.
_NODE_CACHE: dict[tuple[int, int], tuple[tuple, ...]] = {}


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the last two estimates."""

    def __init__(self, message: str, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class FormKind(enum.Enum):
    PHI1 = "PHI1"
    PHI2 = "PHI2"
    PHI3 = "PHI3"
    GDH = "GDH"
    INVGDH = "INVGDH"


@dataclass(frozen=True)
class Segment:
    """An oriented axis interval lo < hi, both finite.

    lo_singular / hi_singular declare whether the endpoint sits on a branch
    location of the divisor the segment will be integrated against.  None
    means undeclared; when set, period_integral cross-checks them against
    the divisor and rejects mismatches.
    """

    lo: mpf
    hi: mpf
    lo_singular: bool | None = None
    hi_singular: bool | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.lo, mpf):
            object.__setattr__(self, "lo", mpf(self.lo))
        if not isinstance(self.hi, mpf):
            object.__setattr__(self, "hi", mpf(self.hi))
        if not (self.lo < self.hi):
            raise ValueError(f"segment needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (mpf("-inf") < self.lo and self.hi < mpf("inf")):
            raise ValueError("segment endpoints must be finite")

    @property
    def halfspan(self) -> mpf:
        return (self.hi - self.lo) / 2


@contextmanager
def _gmpy_precision(bits: int) -> Iterator[None]:
    ctx = gmpy2.get_context()
    old = ctx.precision
    ctx.precision = bits
    try:
        yield
    finally:
        ctx.precision = old


def _abscissa_limit(digits: int):
    """t beyond which nodes cannot affect the first `digits` digits."""
    s_max = gmpy2.log(gmpy2.mpfr(10)) * (digits + 20)
    return gmpy2.asinh(2 * s_max / gmpy2.const_pi())


def _level_nodes(bits: int, level: int, digits: int) -> tuple[tuple, ...]:
    key = (bits, level)
    got = _NODE_CACHE.get(key)
    if got is not None:
        return got
    half_pi = gmpy2.const_pi() / 2
    h = gmpy2.mpfr(1) / (1 << level)
    count = int(gmpy2.floor(_abscissa_limit(digits) / h))
    step = 1 if level == _BASE_LEVEL else 2
    rows = []
    for j in range(1, count + 1, step):
        t = j * h
        s = half_pi * gmpy2.sinh(t)
        near = 2 / (1 + gmpy2.exp(2 * s))
        far = 2 - near
        wgt = half_pi * gmpy2.cosh(t) / gmpy2.cosh(s) ** 2
        rows.append((near, far, wgt))
    got = tuple(rows)
    _NODE_CACHE[key] = got
    return got


def integrate_de(f: Callable, seg: Segment, digits: int):
    """Integrate f over seg to `digits` significant decimal digits.

    f(x, dlo, dhi) is called with gmpy2.mpfr arguments (dlo = x - lo and
    dhi = hi - x computed without cancellation) and must return a value
    gmpy2 arithmetic accepts: mpfr, mpc, int, or float.  Integrable endpoint
    singularities are fine; f is never called at the endpoints themselves.
    Returns mpmath mpf (or mpc when f produces complex values).
    """
    bits = bits_for_digits(digits)
    with _gmpy_precision(bits):
        lo = to_gmpy(seg.lo)
        hi = to_gmpy(seg.hi)
        halfspan = (hi - lo) / 2
        tol = gmpy2.mpfr(10) ** (5 - digits)
        half_pi = gmpy2.const_pi() / 2
        acc = half_pi * f(lo + halfspan, halfspan, halfspan)
        prev_est = None
        est = None
        for level in range(_BASE_LEVEL, _MAX_LEVEL + 1):
            tail = gmpy2.mpfr(0)
            for near, far, wgt in _level_nodes(bits, level, digits):
                d_near = halfspan * near
                d_far = halfspan * far
                tail += wgt * (
                    f(hi - d_near, d_far, d_near) + f(lo + d_near, d_near, d_far)
                )
            acc = acc + tail
            prev_est, est = est, acc * halfspan / (1 << level)
            if prev_est is not None:
                if abs(est - prev_est) <= tol * max(1, abs(est)):
                    with working_precision(digits):
                        return _to_mp(est)
        with working_precision(digits):
            raise QuadratureError(
                f"tanh-sinh did not converge in {_MAX_LEVEL - _BASE_LEVEL + 1} "
                f"levels at {digits} digits on [{seg.lo}, {seg.hi}]",
                last=_to_mp(est),
                previous=_to_mp(prev_est),
            )


def _to_mp(v):
    if isinstance(v, gmpy2.mpc):
        return mpc(from_gmpy(v.real), from_gmpy(v.imag))
    return from_gmpy(gmpy2.mpfr(v))


def segment_parity(divisor: BranchDivisor, seg: Segment) -> int:
    """Sign of w^2 on a segment free of interior branch locations."""
    idx = divisor.interval_segment_index(seg.lo, seg.hi)
    phase = divisor.segment_phases[idx]
    return 1 if phase.imag == 0 else -1


def _scalar_integral(
    divisor: BranchDivisor, kind: str, seg: Segment, digits: int
) -> mpf:
    """Integrate one of the real scalar densities over seg.

    kind: 'p' -> (1/m - m)/(2x), 'q' -> (1/m + m)/(2x), 'l' -> 1/x,
          'm' -> m/x, 'r' -> 1/(m x), where m(x) = |w(x)|.
    """
    bits = bits_for_digits(digits)
    with _gmpy_precision(bits):
        lo = to_gmpy(seg.lo)
        hi = to_gmpy(seg.hi)
        groups: dict[tuple[bool, Role], list] = {
            (True, Role.NUM): [],
            (True, Role.DEN): [],
            (False, Role.NUM): [],
            (False, Role.DEN): [],
        }
        for r, role in divisor.factors:
            rg = to_gmpy(r)
            if rg <= lo:
                groups[(True, role)].append(lo - rg)
            elif rg >= hi:
                groups[(False, role)].append(rg - hi)
            else:
                raise ValueError(
                    f"branch location {r} inside integration segment "
                    f"[{seg.lo}, {seg.hi}]"
                )
        lo_num = sorted(groups[(True, Role.NUM)])
        lo_den = sorted(groups[(True, Role.DEN)])
        hi_num = sorted(groups[(False, Role.NUM)])
        hi_den = sorted(groups[(False, Role.DEN)])
        one = gmpy2.mpfr(1)

        def m_of(dlo, dhi):
            num = one
            den = one
            for c in lo_num:
                num *= dlo + c
            for c in hi_num:
                num *= dhi + c
            for c in lo_den:
                den *= dlo + c
            for c in hi_den:
                den *= dhi + c
            return gmpy2.sqrt(num / den)

        if kind == "p":

            def f(x, dlo, dhi):
                m = m_of(dlo, dhi)
                return (1 / m - m) / (2 * x)

        elif kind == "q":

            def f(x, dlo, dhi):
                m = m_of(dlo, dhi)
                return (1 / m + m) / (2 * x)

        elif kind == "l":

            def f(x, dlo, dhi):
                return 1 / x

        elif kind == "m":

            def f(x, dlo, dhi):
                return m_of(dlo, dhi) / x

        elif kind == "r":

            def f(x, dlo, dhi):
                return 1 / (m_of(dlo, dhi) * x)

        else:
            raise ValueError(f"unknown scalar kind {kind!r}")

        return integrate_de(f, seg, digits)


def period_integral(
    divisor: BranchDivisor,
    form: FormKind,
    seg: Segment,
    digits: int,
    branch: str = "positive",
) -> mpc:
    """Integral of the chosen differential along an axis segment.

    On a segment where w^2 keeps one sign, each differential reduces to a
    real scalar density times a fixed unit constant; the scalar goes through
    the tanh-sinh engine and the constant is applied afterwards, so the dead
    real or imaginary component of the result is exactly zero.

    branch='positive' evaluates w as the principal square root of w^2
    pointwise (positive real, or +i times positive real): the convention the
    period equations and their published targets use.  branch='continued'
    uses the axis-continued phase from the divisor (the upper-half-plane
    boundary branch), which the mesh and flat-structure integrals need so
    that consecutive segments fit together analytically.

    Segments with 0 or +-1 strictly inside are rejected: 0 is the dh pole
    and +-1 are marked points every caller must split at.  Either may be an
    endpoint.
    """
    if seg.lo < 0 < seg.hi:
        raise ValueError("segment crosses the dh pole at z = 0; split it there")
    for unit in (mpf(-1), mpf(1)):
        if seg.lo < unit < seg.hi:
            raise ValueError(f"segment crosses the marked point z = {unit}; split it")
    locations = set(divisor.locations)
    for name, value, declared in (
        ("lo", seg.lo, seg.lo_singular),
        ("hi", seg.hi, seg.hi_singular),
    ):
        if declared is not None and declared != (value in locations):
            raise ValueError(
                f"segment {name}={value} declared "
                f"{'singular' if declared else 'regular'} but the divisor disagrees"
            )
    idx = divisor.interval_segment_index(seg.lo, seg.hi)
    phase = divisor.segment_phases[idx]
    positive = phase.imag == 0
    if branch == "positive":
        phi = mpc(1, 0) if positive else mpc(0, 1)
    elif branch == "continued":
        phi = phase
    else:
        raise ValueError(f"branch must be 'positive' or 'continued', got {branch!r}")

    i_unit = mpc(0, 1)
    if form is FormKind.PHI1:
        kind, const = (("p", phi) if positive else ("q", -phi))
    elif form is FormKind.PHI2:
        kind, const = (("q", i_unit * phi) if positive else ("p", -i_unit * phi))
    elif form is FormKind.PHI3:
        kind, const = ("l", mpc(1, 0))
    elif form is FormKind.GDH:
        kind, const = ("m", phi)
    elif form is FormKind.INVGDH:
        kind, const = ("r", mpc(phi.conjugate()))
    else:
        raise ValueError(f"unknown form {form!r}")

    val = _scalar_integral(divisor, kind, seg, digits)
    with working_precision(digits):
        return mpc(const) * val
