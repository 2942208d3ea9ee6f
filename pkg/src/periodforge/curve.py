"""Hyperelliptic curve data: w^2 as a product of real linear factors.

A surface in this package lives on the curve w^2 = prod (z - r_k) / prod
(z - s_j) where every r_k, s_j is real and the factor multiset is balanced, so
w^2 has finite nonzero limits at 0 and infinity.  The Gauss map is G = w and
the height differential is dh = dz/z throughout; everything geometric is
therefore determined by the branch divisor alone, which this module
represents.

Points come in (x, 1/x) pairs (the tau3 symmetry z -> 1/z), stored once with
the inverse partner's role recorded, plus optional unit points at z = +-1
(their own inverses).  Branch values of w on the real axis are fixed by one
global convention: w > 0 on the unbounded segment right of the largest branch
location, continued across each simple branch point by a quarter turn.  The
turn direction (NUM crossing -> *(+i), DEN crossing -> *(-i), walking left)
matches the boundary values of the analytic square root on the upper
half-plane, the fundamental domain the mesh builder integrates over; it makes
G(0) = +i on orthogonal-end divisors and G(0) = +1 on parallel-end ones.
"""

from __future__ import annotations

import enum
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property

from mpmath import mp, mpc, mpf, sqrt

from .numerics import working_precision


def reciprocal(x: mpf) -> mpf:
    """1/x carried well past x's own mantissa, independent of ambient mp.dps.

    Divisor caches are built once and reused at whatever working precision
    later evaluations pick, so the reciprocal must not be truncated to the
    precision that happens to be active at construction time.  256 extra bits
    keep the cache exact relative to any realistic precision escalation.
    """
    with mp.workprec(x._mpf_[3] + 256):
        return 1 / x


class Role(enum.Enum):
    NUM = "NUM"
    DEN = "DEN"

    def other(self) -> "Role":
        return Role.DEN if self is Role.NUM else Role.NUM


class EndAngleClass(enum.Enum):
    ORTHOGONAL = "ORTHOGONAL"
    PARALLEL = "PARALLEL"
    NEITHER = "NEITHER"


class BranchPointError(ValueError):
    """Evaluation requested exactly at a branch location."""


class PoleError(ZeroDivisionError):
    """w^2 evaluated at a denominator root."""


# Quarter-turn phase picked up walking leftward across a branch location,
# for the branch of w that is +1 on the far right segment and analytic on
# the upper half-plane.
_TURN = {Role.NUM: mpc(0, 1), Role.DEN: mpc(0, -1)}


@dataclass(frozen=True)
class PairedPoint:
    """A branch location x with its implied inverse partner at 1/x.

    `role` is the role of the factor (z - x); `inverse_role` that of
    (z - 1/x).  Families with the plain tau3 symmetry use same-role pairs,
    the parallel-end families of genus 4n and 4n+2 use opposite roles.
    """

    location: mpf
    role: Role
    inverse_role: Role

    def __post_init__(self) -> None:
        x = self.location
        if x == 0 or abs(x) >= 1:
            raise ValueError(f"paired location must lie in (-1,0) or (0,1), got {x}")


@dataclass(frozen=True)
class BranchDivisor:
    """Ordered branch data defining w^2.

    positive_points: strictly increasing locations in (0,1).
    negative_points: strictly increasing locations in (-1,0).
    unit_plus / unit_minus: optional roles for the factors (z-1), (z+1).
    """

    positive_points: tuple[PairedPoint, ...]
    negative_points: tuple[PairedPoint, ...]
    unit_plus: Role | None = None
    unit_minus: Role | None = None

    def __post_init__(self) -> None:
        for pts, lo, hi, label in (
            (self.positive_points, mpf(0), mpf(1), "positive"),
            (self.negative_points, mpf(-1), mpf(0), "negative"),
        ):
            prev = None
            for p in pts:
                if not (lo < p.location < hi):
                    raise ValueError(
                        f"{label} point {p.location} outside ({lo}, {hi})"
                    )
                if prev is not None and not (prev < p.location):
                    raise ValueError(
                        f"{label} points not strictly increasing at {p.location}"
                    )
                prev = p.location
        locs = [loc for loc, _ in self.factors]
        if len(set(locs)) != len(locs):
            raise ValueError("branch locations collide after inverse expansion")
        n_num = sum(1 for _, r in self.factors if r is Role.NUM)
        if 2 * n_num != len(self.factors):
            raise ValueError(
                f"unbalanced divisor: {n_num} numerator factors of {len(self.factors)}"
            )

    @cached_property
    def factors(self) -> tuple[tuple[mpf, Role], ...]:
        """Every linear factor (location, role), inverses and units expanded."""
        out: list[tuple[mpf, Role]] = []
        for p in self.positive_points + self.negative_points:
            out.append((p.location, p.role))
            out.append((reciprocal(p.location), p.inverse_role))
        if self.unit_plus is not None:
            out.append((mpf(1), self.unit_plus))
        if self.unit_minus is not None:
            out.append((mpf(-1), self.unit_minus))
        return tuple(out)

    @cached_property
    def sorted_factors(self) -> tuple[tuple[mpf, Role], ...]:
        return tuple(sorted(self.factors, key=lambda fr: fr[0]))

    @cached_property
    def locations(self) -> tuple[mpf, ...]:
        return tuple(loc for loc, _ in self.sorted_factors)

    @cached_property
    def segment_phases(self) -> tuple[mpc, ...]:
        """Phase of w on each open axis segment.

        Entry k is the phase on (locations[k-1], locations[k]); entry 0 is the
        segment left of everything, the last entry (always 1) the reference
        segment right of everything.
        """
        n = len(self.locations)
        phases = [mpc(1, 0)] * (n + 1)
        for k in range(n - 1, -1, -1):
            phases[k] = phases[k + 1] * _TURN[self.sorted_factors[k][1]]
        return tuple(phases)

    @property
    def genus(self) -> int:
        return len(self.factors) // 2 - 1

    def segment_index(self, x: mpf) -> int:
        """Index into segment_phases for the open segment containing x."""
        i = bisect_left(self.locations, x)
        if i < len(self.locations) and self.locations[i] == x:
            raise BranchPointError(f"x = {x} is a branch location")
        return i

    def interval_segment_index(self, lo: mpf, hi: mpf) -> int:
        """Segment index for an interval known to contain no branch location."""
        i = bisect_left(self.locations, lo)
        if i < len(self.locations) and self.locations[i] == lo:
            i += 1
        j = bisect_left(self.locations, hi)
        if i != j:
            raise ValueError(f"interval ({lo}, {hi}) crosses a branch location")
        return i


def w_squared(divisor: BranchDivisor, z, digits: int):
    """The rational product defining w^2 at z (z may be mpf, mpc, or inf)."""
    with working_precision(digits):
        if z == mpf("inf") or (isinstance(z, mpc) and abs(z) == mpf("inf")):
            return mpf(1)  # balanced factor counts
        num = mpc(1, 0) if isinstance(z, mpc) else mpf(1)
        den = num
        for loc, role in divisor.factors:
            d = z - loc
            if role is Role.NUM:
                num *= d
            else:
                if d == 0:
                    raise PoleError(f"z = {z} is a pole of w^2")
                den *= d
        return num / den


def w_on_axis(divisor: BranchDivisor, x: mpf, digits: int) -> mpc:
    """w(x) on the sheet continuous along the real axis.

    Normalized so w > 0 right of the largest branch location; across each
    branch location the value turns by a quarter turn per the module-level
    convention.  The result squares back to w_squared(x) and agrees with the
    boundary value of the upper-half-plane analytic branch.
    """
    with working_precision(digits):
        x = mpf(x)
        idx = divisor.segment_index(x)
        mag2 = mpf(1)
        for loc, role in divisor.factors:
            d = abs(x - loc)
            mag2 = mag2 * d if role is Role.NUM else mag2 / d
        return divisor.segment_phases[idx] * sqrt(mag2)


def end_gauss_values(
    divisor: BranchDivisor, digits: int
) -> tuple[mpc, mpc, EndAngleClass]:
    """G at the ends: (sqrt of w^2(0), sqrt of w^2(inf)), each up to sign,
    plus the ORTHOGONAL / PARALLEL / NEITHER classification.

    w^2(inf) = 1 exactly (balanced monic factors).  The classification
    tolerance is 10^(-digits/2): template divisors give w^2(0) = +-1
    analytically, anything else is a genuine NEITHER.
    """
    with working_precision(digits):
        w2_zero = w_squared(divisor, mpf(0), digits)
        g_inf = mpf(1)
        tol = mpf(10) ** (-(digits // 2))
        if abs(w2_zero - 1) <= tol:
            cls = EndAngleClass.PARALLEL
        elif abs(w2_zero + 1) <= tol:
            cls = EndAngleClass.ORTHOGONAL
        else:
            cls = EndAngleClass.NEITHER
        return sqrt(mpc(w2_zero)), g_inf, cls


@dataclass(frozen=True)
class SymmetryGroup:
    """Which of the curve automorphisms a divisor supports.

    tau1 (z,w)->(z,-w) and tau2 (z,w)->(conj z, conj w) always hold for real
    divisors; tau3 (z,w)->(1/z, w or iw) needs the divisor closed under
    x -> 1/x, which the paired storage guarantees, so construction only
    sanity-checks the flags.
    """

    tau1: bool = True
    tau2: bool = True
    tau3: bool = True

    def __post_init__(self) -> None:
        if self.tau3 and not (self.tau1 and self.tau2):
            raise ValueError("tau3 requires tau1 and tau2")


@dataclass(frozen=True)
class WeierstrassData:
    """A divisor together with its derived geometric invariants.

    The height differential is always dh = dz/z and the Gauss map is G = w,
    so the divisor determines everything; this bundle just pins down the
    genus and end classification once so downstream code can trust them.
    """

    divisor: BranchDivisor
    end_angle_class: EndAngleClass
    genus: int
    symmetry: SymmetryGroup = SymmetryGroup()

    def validate(self, digits: int = 30) -> None:
        if self.genus != self.divisor.genus:
            raise ValueError(
                f"genus {self.genus} != divisor genus {self.divisor.genus}"
            )
        _, _, cls = end_gauss_values(self.divisor, digits)
        if cls is not self.end_angle_class:
            raise ValueError(
                f"end class {self.end_angle_class.name} but divisor gives {cls.name}"
            )
