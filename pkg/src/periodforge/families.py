"""Branch-divisor templates for the surface families.

Each family kind lays out branch points on the real axis as a function of a
parameter vector and declares which axis segments carry period conditions.
instantiate() turns (spec, parameters) into Weierstrass data plus the period
system whose residuals the solver drives to zero.

The differential form attached to each equation segment is derived from the
sign of w^2 there (phi1 has the live real part where w^2 > 0, phi2 where
w^2 < 0) and cross-checked against the template's expectation, so a typo in
either place raises StructuralError instead of silently solving the wrong
equation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

from mpmath import mpf

from .curve import (
    BranchDivisor,
    EndAngleClass,
    PairedPoint,
    Role,
    WeierstrassData,
    reciprocal,
)
from .numerics import (
    ConfigurationError,
    parse_decimal,
    pi,
    to_decimal_string,
    working_precision,
)
from .quadrature import (
    FormKind,
    QuadratureError,
    Segment,
    period_integral,
    segment_parity,
)
from .tables import SOLVED_TABLES, usable_table


class OrderingError(ValueError):
    """A parameter vector violates the family's strict ordering."""


class StructuralError(RuntimeError):
    """A family template produced internally inconsistent data."""


class FamilyKind(enum.Enum):
    SCHERK0 = "scherk0"
    KMR_A = "kmr_a"
    KMR_B = "kmr_b"
    WW_EVEN = "ww_even"
    WW_ODD = "ww_odd"
    TYPE_1_2N = "type12n"
    TYPE_2_2N = "type22n"
    TYPE_2_2N1 = "type22n1"
    TYPE_3_4 = "type34"
    TYPE_M_N = "typemn"
    RTW = "rtw"
    PAR_4N = "par4n"
    PAR_4N1 = "par4n1"
    PAR_4N2 = "par4n2"
    PAR_4N3 = "par4n3"


_NEEDS_N = {
    FamilyKind.WW_EVEN,
    FamilyKind.WW_ODD,
    FamilyKind.TYPE_1_2N,
    FamilyKind.TYPE_2_2N,
    FamilyKind.TYPE_2_2N1,
    FamilyKind.PAR_4N,
    FamilyKind.PAR_4N1,
    FamilyKind.PAR_4N2,
    FamilyKind.PAR_4N3,
}

_PARALLEL_KINDS = {
    FamilyKind.KMR_A,
    FamilyKind.KMR_B,
    FamilyKind.RTW,
    FamilyKind.PAR_4N,
    FamilyKind.PAR_4N1,
    FamilyKind.PAR_4N2,
    FamilyKind.PAR_4N3,
}

# Kinds whose paired points keep the same role at the inverse location.
_SAME_ROLE_PAR = {FamilyKind.PAR_4N1, FamilyKind.PAR_4N3}


@dataclass(frozen=True)
class FamilySpec:
    """A family kind plus its discrete shape parameters."""

    kind: FamilyKind
    n: int | None = None
    m: int | None = None

    def __post_init__(self) -> None:
        k = self.kind
        if k is FamilyKind.TYPE_M_N:
            ok = (
                isinstance(self.m, int)
                and isinstance(self.n, int)
                and self.m >= 0
                and self.n >= 0
                and self.m + self.n >= 1
            )
            if not ok:
                raise ConfigurationError("typemn needs m >= 0, n >= 0, m + n >= 1")
        elif k in _NEEDS_N:
            lo = 0 if k is FamilyKind.WW_ODD else 1
            if not isinstance(self.n, int) or self.n < lo or self.m is not None:
                raise ConfigurationError(f"{k.value} needs integer n >= {lo} and no m")
        else:
            if self.n is not None or self.m is not None:
                raise ConfigurationError(f"{k.value} takes no n or m")

    @property
    def label(self) -> str:
        if self.kind is FamilyKind.TYPE_M_N:
            return f"typemn(m={self.m},n={self.n})"
        if self.n is not None:
            return f"{self.kind.value}(n={self.n})"
        return self.kind.value

    @property
    def mn(self) -> tuple[int, int] | None:
        """(negative-point count, positive-point count) for orthogonal kinds."""
        k, n = self.kind, self.n
        if k is FamilyKind.SCHERK0:
            return (0, 0)
        if k is FamilyKind.WW_EVEN:
            return (0, 2 * n)
        if k is FamilyKind.WW_ODD:
            return (0, 2 * n + 1)
        if k is FamilyKind.TYPE_1_2N:
            return (1, 2 * n)
        if k is FamilyKind.TYPE_2_2N:
            return (2, 2 * n)
        if k is FamilyKind.TYPE_2_2N1:
            return (2, 2 * n + 1)
        if k is FamilyKind.TYPE_3_4:
            return (3, 4)
        if k is FamilyKind.TYPE_M_N:
            return (self.m, self.n)
        return None

    @property
    def end_angle_class(self) -> EndAngleClass:
        if self.kind in _PARALLEL_KINDS:
            return EndAngleClass.PARALLEL
        return EndAngleClass.ORTHOGONAL

    @property
    def a_count(self) -> int:
        """Number of a-parameters (positive branch locations given directly)."""
        k = self.kind
        if k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
            return 1
        if k is FamilyKind.RTW:
            return 2
        if k is FamilyKind.PAR_4N:
            return 4 * self.n
        if k is FamilyKind.PAR_4N1:
            return 4 * self.n + 1
        if k is FamilyKind.PAR_4N2:
            return 4 * self.n + 2
        if k is FamilyKind.PAR_4N3:
            return 4 * self.n + 3
        return self.mn[1]

    @property
    def genus(self) -> int:
        k = self.kind
        if k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
            return 1
        if k is FamilyKind.RTW:
            return 2
        if k is FamilyKind.PAR_4N:
            return 4 * self.n
        if k is FamilyKind.PAR_4N1:
            return 4 * self.n + 1
        if k is FamilyKind.PAR_4N2:
            return 4 * self.n + 2
        if k is FamilyKind.PAR_4N3:
            return 4 * self.n + 3
        m, n = self.mn
        return m + n

    @property
    def param_names(self) -> tuple[str, ...]:
        k = self.kind
        if k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
            return ("a",)
        if k in _PARALLEL_KINDS:
            names = tuple(f"a{i}" for i in range(1, self.a_count + 1))
            if k in _SAME_ROLE_PAR:
                names = names + ("b",)
            return names
        m, n = self.mn
        return tuple(f"a{i}" for i in range(1, n + 1)) + tuple(
            f"b{j}" for j in range(1, m + 1)
        )


@dataclass(frozen=True)
class PeriodEquation:
    """One period condition: Re(sum of piece integrals) + target_pi * pi = 0.

    piece_forms overrides the single form per piece; cycles that cross the
    dh pole at 0 switch between phi1 and phi2 as the sign of w^2 flips, so
    every piece keeps the same live scalar density.
    """

    form: FormKind
    pieces: tuple[Segment, ...]
    target_pi: int
    label: str
    piece_forms: tuple[FormKind, ...] | None = None

    @property
    def forms(self) -> tuple[FormKind, ...]:
        if self.piece_forms is not None:
            return self.piece_forms
        return (self.form,) * len(self.pieces)


@dataclass(frozen=True)
class PeriodSystem:
    equations: tuple[PeriodEquation, ...]
    variable_names: tuple[str, ...]
    pinned: tuple[str, ...] = ()

    @property
    def free_names(self) -> tuple[str, ...]:
        return tuple(v for v in self.variable_names if v not in self.pinned)

    @property
    def is_square(self) -> bool:
        return len(self.equations) == len(self.free_names)

    def with_pin(self, name: str) -> "PeriodSystem":
        if name not in self.variable_names:
            raise ConfigurationError(
                f"cannot pin {name!r}; variables are {self.variable_names}"
            )
        return replace(self, pinned=(name,))


def _require_order(cond: bool, inequality: str, **values) -> None:
    if not cond:
        shown = ", ".join(f"{k}={v}" for k, v in values.items())
        raise OrderingError(f"{inequality} violated: {shown}")


def _check_ordering(spec: FamilySpec, vals: dict[str, mpf]) -> None:
    a_names = [v for v in spec.param_names if v.startswith("a")]
    if a_names:
        first, last = a_names[0], a_names[-1]
        _require_order(0 < vals[first], f"0 < {first}", **{first: vals[first]})
        _require_order(vals[last] < 1, f"{last} < 1", **{last: vals[last]})
        for lo, hi in zip(a_names, a_names[1:]):
            _require_order(
                vals[lo] < vals[hi], f"{lo} < {hi}", **{lo: vals[lo], hi: vals[hi]}
            )
    b_names = [v for v in spec.param_names if v.startswith("b")]
    if b_names:
        # b1 sits nearest 0, later ones walk toward -1.
        first, last = b_names[0], b_names[-1]
        _require_order(vals[first] < 0, f"{first} < 0", **{first: vals[first]})
        _require_order(-1 < vals[last], f"-1 < {last}", **{last: vals[last]})
        for hi, lo in zip(b_names, b_names[1:]):
            _require_order(
                vals[lo] < vals[hi], f"{lo} < {hi}", **{lo: vals[lo], hi: vals[hi]}
            )


def _parse_params(
    spec: FamilySpec, params: Sequence, digits: int
) -> dict[str, mpf]:
    names = spec.param_names
    if len(params) != len(names):
        raise ConfigurationError(
            f"{spec.label} takes {len(names)} parameters {names}, "
            f"got {len(params)}"
        )
    vals: dict[str, mpf] = {}
    with working_precision(digits):
        for name, raw in zip(names, params):
            vals[name] = (
                parse_decimal(raw, digits) if isinstance(raw, str) else mpf(raw)
            )
    _check_ordering(spec, vals)
    return vals


def close_end_constraint(spec: FamilySpec, a_values: Sequence, digits: int = 30):
    """Dependent negative location b that closes w^2(0) = 1, or None if b is free.

    Only parallel-end kinds have the notion; orthogonal kinds raise.
    """
    k = spec.kind
    if k not in _PARALLEL_KINDS or k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
        raise ConfigurationError(f"{spec.label} has no end-closing location")
    if k in _SAME_ROLE_PAR:
        return None
    with working_precision(digits):
        vals = [mpf(x) for x in a_values]
        if k is FamilyKind.RTW:
            return -vals[0] * vals[1]
        prod = mpf(1)
        for j in range(spec.n):
            blk = vals[4 * j : 4 * j + 4]
            prod *= blk[0] * blk[1] / (blk[2] * blk[3])
        if k is FamilyKind.PAR_4N2:
            prod *= vals[4 * spec.n] * vals[4 * spec.n + 1]
        return -prod


def _build_divisor(spec: FamilySpec, vals: dict[str, mpf]) -> BranchDivisor:
    k = spec.kind
    if k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
        a = vals["a"]
        inv = Role.DEN if k is FamilyKind.KMR_A else Role.NUM
        return BranchDivisor(
            positive_points=(PairedPoint(a, Role.NUM, inv),),
            negative_points=(PairedPoint(-a, Role.DEN, inv.other()),),
        )
    if k in _PARALLEL_KINDS:
        a = [vals[f"a{i}"] for i in range(1, spec.a_count + 1)]
        same = k in _SAME_ROLE_PAR
        pts = []
        if k is FamilyKind.RTW:
            pts = [PairedPoint(x, Role.NUM, Role.DEN) for x in a]
        else:
            blocks = spec.n
            for idx, x in enumerate(a[: 4 * blocks]):
                role = Role.NUM if idx % 4 < 2 else Role.DEN
                pts.append(PairedPoint(x, role, role if same else role.other()))
            tail = a[4 * blocks :]
            if k is FamilyKind.PAR_4N1:
                pts.append(PairedPoint(tail[0], Role.NUM, Role.NUM))
            elif k is FamilyKind.PAR_4N2:
                pts.extend(PairedPoint(x, Role.NUM, Role.DEN) for x in tail)
            elif k is FamilyKind.PAR_4N3:
                for x, role in zip(tail, (Role.NUM, Role.NUM, Role.DEN)):
                    pts.append(PairedPoint(x, role, role))
        if same:
            b = vals["b"]
            b_point = PairedPoint(b, Role.DEN, Role.DEN)
        else:
            b = close_end_constraint(spec, a)
            b_point = PairedPoint(b, Role.DEN, Role.NUM)
        return BranchDivisor(
            positive_points=tuple(pts), negative_points=(b_point,)
        )
    # Unified orthogonal template.
    m, n = spec.mn
    pos = tuple(
        PairedPoint(
            vals[f"a{i}"],
            Role.NUM if i % 2 == 1 else Role.DEN,
            Role.NUM if i % 2 == 1 else Role.DEN,
        )
        for i in range(1, n + 1)
    )
    neg = tuple(
        PairedPoint(
            vals[f"b{j}"],
            Role.DEN if j % 2 == 1 else Role.NUM,
            Role.DEN if j % 2 == 1 else Role.NUM,
        )
        # negative_points must ascend, so walk from b_m (nearest -1) up to b1
        for j in range(m, 0, -1)
    )
    return BranchDivisor(
        positive_points=pos,
        negative_points=neg,
        unit_plus=Role.NUM if n % 2 == 0 else Role.DEN,
        unit_minus=Role.NUM if m % 2 == 1 else Role.DEN,
    )


def _parity_form(divisor: BranchDivisor, seg: Segment) -> FormKind:
    return FormKind.PHI1 if segment_parity(divisor, seg) > 0 else FormKind.PHI2


def _equation(
    divisor: BranchDivisor,
    seg_points: tuple,
    target_pi: int,
    label: str,
    expected: FormKind | None = None,
    pieces: tuple[Segment, ...] | None = None,
) -> PeriodEquation:
    if pieces is None:
        lo, hi = seg_points
        pieces = (Segment(lo, hi, lo_singular=True, hi_singular=True),)
    form = _parity_form(divisor, pieces[0])
    for piece in pieces[1:]:
        if _parity_form(divisor, piece) is not form:
            raise StructuralError(f"{label}: pieces disagree on w^2 sign")
    if expected is not None and form is not expected:
        raise StructuralError(
            f"{label}: template expects {expected.name}, parity gives {form.name}"
        )
    return PeriodEquation(form, pieces, target_pi, label)


# Sign of the pi target on the free-b equation of the genus 4n+1 and 4n+3
# kinds, in residual form Re(integral) + target * pi.  Fixed by evaluating
# the published genus-13 and genus-15 parameter tables: the integral over
# (1/b, -1) + (-1, b) comes out at +pi there, so the target is -1.
_B_TARGET_PI = -1


def _build_equations(
    spec: FamilySpec, divisor: BranchDivisor, vals: dict[str, mpf]
) -> tuple[PeriodEquation, ...]:
    k = spec.kind
    if k in (FamilyKind.SCHERK0, FamilyKind.KMR_A, FamilyKind.KMR_B):
        return ()
    if k is FamilyKind.RTW:
        return (
            _equation(
                divisor,
                (vals["a1"], vals["a2"]),
                target_pi=-1,
                label="(a1,a2)",
                expected=FormKind.PHI2,
            ),
        )
    if k in _PARALLEL_KINDS:
        n = spec.n
        a = [vals[f"a{i}"] for i in range(1, spec.a_count + 1)]
        phi2_count = {
            FamilyKind.PAR_4N: 2 * n,
            FamilyKind.PAR_4N1: 2 * n,
            FamilyKind.PAR_4N2: 2 * n + 1,
            FamilyKind.PAR_4N3: 2 * n + 1,
        }[k]
        phi1_count = {
            FamilyKind.PAR_4N: 2 * n - 1,
            FamilyKind.PAR_4N1: 2 * n,
            FamilyKind.PAR_4N2: 2 * n,
            FamilyKind.PAR_4N3: 2 * n + 1,
        }[k]
        eqs = []
        for j in range(1, phi2_count + 1):
            eqs.append(
                _equation(
                    divisor,
                    (a[2 * j - 2], a[2 * j - 1]),
                    target_pi=(-1) ** j,
                    label=f"(a{2 * j - 1},a{2 * j})",
                    expected=FormKind.PHI2,
                )
            )
        for j in range(1, phi1_count + 1):
            eqs.append(
                _equation(
                    divisor,
                    (a[2 * j - 1], a[2 * j]),
                    target_pi=0,
                    label=f"(a{2 * j},a{2 * j + 1})",
                    expected=FormKind.PHI1,
                )
            )
        if k in _SAME_ROLE_PAR:
            b = vals["b"]
            pieces = (
                Segment(reciprocal(b), mpf(-1), lo_singular=True, hi_singular=False),
                Segment(mpf(-1), b, lo_singular=False, hi_singular=True),
            )
            eqs.append(
                _equation(
                    divisor,
                    None,
                    target_pi=_B_TARGET_PI,
                    label="(1/b,b)",
                    expected=FormKind.PHI2,
                    pieces=pieces,
                )
            )
        return tuple(eqs)
    # Unified orthogonal template: consecutive segments on each side, all
    # periods vanish, forms alternate with the w^2 sign.
    m, n = spec.mn
    eqs = []
    pos_pts = [(vals[f"a{i}"], f"a{i}") for i in range(1, n + 1)] + [(mpf(1), "1")]
    for (lo, lo_name), (hi, hi_name) in zip(pos_pts, pos_pts[1:]):
        eqs.append(
            _equation(divisor, (lo, hi), 0, f"({lo_name},{hi_name})")
        )
    if m == 1:
        # With a single negative branch point the closing cycle runs from -1
        # through b1 and the dh pole at 0 to a1.  Every piece carries the same
        # live density (1/m - m)/(2x) (the form flips between phi1 and phi2
        # with the sign of w^2), and rounding the pole adds its half-residue
        # pi, so the condition is sum of pieces = pi.  The plain (-1,b1)
        # period does not vanish on these surfaces and is not an equation.
        b1 = vals["b1"]
        pieces = (
            Segment(mpf(-1), b1, lo_singular=True, hi_singular=True),
            Segment(b1, mpf(0), lo_singular=True, hi_singular=False),
            Segment(mpf(0), vals["a1"], lo_singular=False, hi_singular=True),
        )
        forms = tuple(_parity_form(divisor, piece) for piece in pieces)
        eqs.append(
            PeriodEquation(forms[0], pieces, -1, "(-1,a1)", piece_forms=forms)
        )
    else:
        neg_pts = [(mpf(-1), "-1")] + [
            (vals[f"b{j}"], f"b{j}") for j in range(m, 0, -1)
        ]
        for (lo, lo_name), (hi, hi_name) in zip(neg_pts, neg_pts[1:]):
            eqs.append(
                _equation(divisor, (lo, hi), 0, f"({lo_name},{hi_name})")
            )
    for side in (eqs[:n], eqs[n:]):
        for left, right in zip(side, side[1:]):
            if left.form is right.form:
                raise StructuralError(
                    f"forms fail to alternate between {left.label} and {right.label}"
                )
    return tuple(eqs)


def instantiate(
    spec: FamilySpec, params: Sequence, digits: int = 30
) -> tuple[WeierstrassData, PeriodSystem]:
    """Build curve data and the period system at a parameter vector.

    params follow spec.param_names; decimal strings are parsed at `digits`
    working digits, which bounds the precision later evaluations may use.
    Dependent locations (the b of the genus 4n and 4n+2 kinds and of the
    helicoidal genus-2 family) are derived here, not passed.
    """
    vals = _parse_params(spec, params, digits)
    with working_precision(digits):
        divisor = _build_divisor(spec, vals)
        wd = WeierstrassData(divisor, spec.end_angle_class, spec.genus)
        wd.validate(digits)
        system = PeriodSystem(_build_equations(spec, divisor, vals), spec.param_names)
    return wd, system


def residual_vector(
    wd: WeierstrassData, system: PeriodSystem, digits: int
) -> list[mpf]:
    """Evaluate every period equation; zero vector means the periods close."""
    pi_val = pi(digits)
    out = []
    for eq in system.equations:
        parts = []
        for piece, form in zip(eq.pieces, eq.forms):
            try:
                parts.append(period_integral(wd.divisor, form, piece, digits))
            except QuadratureError as exc:
                raise QuadratureError(
                    f"equation {eq.label}: {exc.args[0]}", exc.last, exc.previous
                ) from exc
        with working_precision(digits):
            total = sum(parts)
            if total.imag != 0:
                raise StructuralError(
                    f"dead component nonzero on {eq.label}: {total.imag}"
                )
            out.append(total.real + eq.target_pi * pi_val)
    return out


_TABLE_FOR_SPEC = {
    (FamilyKind.TYPE_1_2N, 3, None): "type12n_n3",
    (FamilyKind.TYPE_2_2N, 2, None): "type22n_n2",
    (FamilyKind.TYPE_2_2N1, 2, None): "type22n1_n2",
    (FamilyKind.TYPE_3_4, None, None): "type34",
    (FamilyKind.PAR_4N, 3, None): "par4n_n3",
    (FamilyKind.PAR_4N1, 3, None): "par4n1_n3",
    (FamilyKind.PAR_4N2, 3, None): "par4n2_n3",
    (FamilyKind.PAR_4N3, 3, None): "par4n3_n3",
}

# Seeds calibrated by hand for shapes without a reference table entry:
# each converges in under a dozen damped iterations at P=30.
_EXTRA_SEEDS: dict[tuple, tuple[str, ...]] = {
    (FamilyKind.WW_ODD, 0, None): ("0.282569",),
    (FamilyKind.WW_EVEN, 1, None): ("0.125399", "0.250687"),
    (FamilyKind.TYPE_M_N, 1, 1): ("0.281152", "-0.864914"),
    (FamilyKind.PAR_4N, 1, None): ("0.001", "0.00727949", "0.0304464", "0.447255"),
    (FamilyKind.PAR_4N1, 1, None): (
        "0.001", "0.00255344", "0.0192189", "0.0601234", "0.57705",
        "-0.000418981",
    ),
    (FamilyKind.PAR_4N2, 1, None): (
        "0.0001", "0.000355842", "0.00215081", "0.0105273", "0.0795094",
        "0.368423",
    ),
    (FamilyKind.PAR_4N3, 1, None): (
        "0.0001", "0.000114846", "0.00172107", "0.00202323", "0.0408198",
        "0.0477676", "0.924163", "-0.0000307006",
    ),
}


def _rounded(text: str, sig: int = 6) -> str:
    return to_decimal_string(parse_decimal(text, 40), sig)


def table_seed(spec: FamilySpec) -> tuple[str, ...]:
    """The reference table's values verbatim (corrections applied), in
    spec.param_names order."""
    key = (spec.kind, spec.n, spec.m)
    table_name = _TABLE_FOR_SPEC.get(key)
    if table_name is None:
        raise ConfigurationError(f"no reference table covers {spec.label}")
    table = usable_table(table_name)
    out = []
    for name in spec.param_names:
        table_key = "b" if name == "b1" and "b1" not in table else name
        out.append(table[table_key])
    return tuple(out)


def default_seed(spec: FamilySpec) -> tuple[str, ...]:
    """A starting parameter vector from which the solver converges."""
    k = spec.kind
    if k is FamilyKind.SCHERK0:
        return ()
    if k in (FamilyKind.KMR_A, FamilyKind.KMR_B):
        return ("0.5",)
    if k is FamilyKind.RTW:
        return ("0.1", "0.47")
    key = (k, spec.n, spec.m)
    table_name = _TABLE_FOR_SPEC.get(key)
    if table_name is not None:
        table = SOLVED_TABLES.get(table_name) or usable_table(table_name)
        out = []
        for name in spec.param_names:
            table_key = name
            if name == "b1" and "b1" not in table:
                table_key = "b"
            out.append(_rounded(table[table_key]))
        return tuple(out)
    if key in _EXTRA_SEEDS:
        return _EXTRA_SEEDS[key]
    raise ConfigurationError(
        f"no calibrated default seed for {spec.label}; pass one explicitly"
    )
