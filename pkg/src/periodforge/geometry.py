"""Immersion, lattice periods, mesh assembly, and flat developments.

Everything here consumes a WeierstrassData and the axis machinery from
curve/quadrature.  The immersion is f(z) = Re of the path integral of
(phi1, phi2, phi3) from the base point; off the real axis w is continued
as a single-valued analytic branch of sqrt(w^2) on the upper half plane,
anchored to the positive real value right of the largest branch location
(the same normalization the axis phases use).

Axis geometry used throughout: on a maximal axis interval where w^2 > 0
(parity +1) the image curve keeps x2 constant, on a parity -1 interval it
keeps x1 constant.  Crossing a parity +1 interval continues the surface
into its x2-mirror image, crossing a parity -1 interval into its x1-mirror
image, so the translational fundamental domain is assembled from four
copies of the half-plane patch welded along one chosen mirror plane of
each kind.  Different runs of the same parity sit in parallel planes that
differ by lattice translations; those boundaries stay open on purpose.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

from mpmath import arg, cos, exp, log, mp, mpc, mpf, sin, sqrt

from .curve import BranchDivisor, EndAngleClass, WeierstrassData
from .numerics import ConfigurationError, pi, to_decimal_string, working_precision
from .quadrature import FormKind, QuadratureError, Segment, period_integral


class ClearanceError(ValueError):
    """A path or grid element runs too close to a singular point."""


class MeshError(RuntimeError):
    """Mesh construction failed after the allowed refinement attempts."""


@dataclass(frozen=True)
class ImmersionPoint:
    z: mpc
    xyz: tuple[mpf, mpf, mpf]


@dataclass(frozen=True)
class LatticePeriods:
    """Horizontal translation lattice generators.

    t1 always comes from the end loop at z = 0.  For orthogonal ends t2 is
    the independent loop at infinity; for parallel ends the two end loops
    are parallel, so t2 comes from the cycle through the puncture at 0
    (segment from the innermost negative branch point to the innermost
    positive one, doubled over the two sheets).  Both end loops are kept
    for inspection.
    """

    t1: tuple[mpf, mpf, mpf]
    t2: tuple[mpf, mpf, mpf]
    end_loop_zero: tuple[mpf, mpf, mpf]
    end_loop_inf: tuple[mpf, mpf, mpf]


@dataclass(frozen=True)
class SeamRun:
    """Axis vertices of one copy lying in one symmetry plane.

    plane_axis is "x1" for parity -1 runs and "x2" for parity +1 runs;
    plane_value is the mean of that coordinate over the run's vertices.
    """

    copy_index: int
    plane_axis: str
    plane_value: mpf
    vertex_indices: tuple[int, ...]
    welded: bool


@dataclass
class Mesh:
    vertices: list
    triangles: list
    seams: list
    vertices_per_copy: int
    copies: int
    mirror_x1: mpf | None = None
    mirror_x2: mpf | None = None

    def watertightness(self) -> mpf:
        """Largest mirror gap over welded seam runs, after scaling the
        bounding diameter to 1 (the weld metric used by export)."""
        scale = 1 / mesh_diameter(self)
        worst = mpf(0)
        axis_col = {"x1": 0, "x2": 1}
        for run in self.seams:
            if not run.welded:
                continue
            col = axis_col[run.plane_axis]
            for idx in run.vertex_indices:
                gap = 2 * abs(self.vertices[idx][col] - run.plane_value) * scale
                if gap > worst:
                    worst = gap
        return worst


@dataclass(frozen=True)
class MeshGrid:
    radial_samples: int = 32
    angular_samples: int = 32
    truncation_radius: float = 1000.0

    def __post_init__(self) -> None:
        if self.radial_samples < 2 or self.angular_samples < 3:
            raise ConfigurationError("grid needs >= 2 radial and >= 3 angular samples")
        if not self.truncation_radius > 1:
            raise ConfigurationError("truncation radius must exceed 1")


@dataclass(frozen=True)
class FlatPolygon:
    """Developed boundary of the flat structure of G dh or (1/G) dh.

    The real axis develops as two chains (the punctures at 0 and infinity
    cut it): the positive chain runs from the 0+ truncation mark out to the
    infinity+ mark, the negative chain from infinity- in to 0-.  Labels
    parallel the vertices.
    """

    form: FormKind
    chains: tuple[tuple[mpc, ...], ...]
    labels: tuple[tuple[str, ...], ...]

    @property
    def vertices(self) -> tuple[mpc, ...]:
        return tuple(v for chain in self.chains for v in chain)


# ---------------------------------------------------------------------------
# analytic branch of w on the upper half plane


def _w_squared_c(divisor: BranchDivisor, z: mpc) -> mpc:
    num = mpc(1, 0)
    den = mpc(1, 0)
    for loc, role in divisor.factors:
        d = z - loc
        if role.name == "NUM":
            num *= d
        else:
            den *= d
    if den == 0:
        raise ClearanceError(f"z = {z} is a pole of w^2")
    return num / den


def reference_branch_point(divisor: BranchDivisor, digits: int) -> tuple[mpf, mpf]:
    """(x, w(x)) with x real right of every branch location, w > 0."""
    with working_precision(digits):
        radius = max([abs(loc) for loc in divisor.locations] or [mpf(1)])
        x = 2 * max(radius, mpf(1))
        w2 = _w_squared_c(divisor, mpc(x, 0))
        return x, sqrt(w2.real)


def continue_w(divisor: BranchDivisor, za: mpc, wa: mpc, zb: mpc, digits: int) -> mpc:
    """w at zb, continued from the known value wa at za along the straight
    segment.  The step count doubles until consecutive values are clearly
    on the same branch (the sqrt never jumps by more than 80% of itself)."""
    with working_precision(digits + 10):
        steps = 8
        while True:
            prev = wa
            ok = True
            span = zb - za
            for k in range(1, steps + 1):
                z = za + span * mpf(k) / steps
                s = sqrt(_w_squared_c(divisor, z))
                if abs(s - prev) > abs(s + prev):
                    s = -s
                if abs(s - prev) > mpf("0.8") * abs(prev) and steps < 4096:
                    ok = False
                    break
                prev = s
            if ok:
                return prev
            steps *= 2


def _forms_at(z: mpc, w: mpc) -> tuple[mpc, mpc, mpc]:
    """(phi1, phi2, phi3) integrand values per dz at (z, w)."""
    inv = 1 / w
    dh = 1 / z
    return (
        (inv - w) / 2 * dh,
        mpc(0, 1) * (inv + w) / 2 * dh,
        dh,
    )


def _quad_forms(divisor, zfun, dzfun, wa, wb, digits):
    """Integrals of the three forms along z(t), t in [0, 1].

    The branch along the way is the principal sqrt snapped to the straight
    interpolation between the endpoint values, so the endpoints must be
    close enough that w does not wind between them (grid edges are).  One
    cache of w per node is shared by the three quadratures.
    """
    cache: dict = {}

    def w_at(t):
        got = cache.get(t)
        if got is not None:
            return got
        z = zfun(t)
        s = sqrt(_w_squared_c(divisor, z))
        guide = wa + (wb - wa) * t
        if abs(s - guide) > abs(s + guide):
            s = -s
        cache[t] = (z, s)
        return z, s

    def component(i):
        def f(t):
            z, w = w_at(t)
            return _forms_at(z, w)[i] * dzfun(t)

        return f

    with working_precision(digits + 5):
        out = []
        for i in range(3):
            val, err = mp.quad(component(i), [0, 1], error=True, maxdegree=10)
            scale = max(mpf(1), abs(val))
            if err > scale * mpf(10) ** (-(digits - 2)):
                raise QuadratureError(
                    f"edge integral error {err} above tolerance", last=val
                )
            out.append(val)
        return tuple(out)


def _segment_min_distance(za: mpc, zb: mpc, p: mpc) -> mpf:
    """Distance from point p to the segment [za, zb]."""
    span = zb - za
    denom = abs(span) ** 2
    if denom == 0:
        return abs(p - za)
    t = ((p - za) * span.conjugate()).real / denom
    t = max(mpf(0), min(mpf(1), t))
    return abs(za + span * t - p)


def _singular_points(divisor: BranchDivisor) -> tuple[mpc, ...]:
    pts = [mpc(loc, 0) for loc in divisor.locations]
    pts.append(mpc(0, 0))
    for u in (1, -1):
        if mpf(u) not in divisor.locations:
            pts.append(mpc(u, 0))
    return tuple(pts)


def base_point(wd: WeierstrassData, digits: int = 30) -> mpc:
    """The immersion base point z0 = i (regular for every template family,
    since all singular points are real)."""
    return mpc(0, 1)


def immerse(
    wd: WeierstrassData,
    z: mpc,
    path: tuple | list | None = None,
    digits: int = 30,
    clearance: mpf | None = None,
) -> ImmersionPoint:
    """Immersion point f(z) = Re of the path integral from the base point.

    path lists intermediate waypoints between z0 and z (straight segments);
    omitted it is the straight segment itself.  Every segment must keep the
    clearance distance from branch points, 0 and +-1.
    """
    divisor = wd.divisor
    with working_precision(digits + 10):
        z0 = base_point(wd, digits)
        z = mpc(z)
        if clearance is None:
            clearance = mpf("1e-9")
        waypoints = [z0] + [mpc(p) for p in (path or ())] + [z]
        if z == z0 and not path:
            zero = mpf(0)
            return ImmersionPoint(z=z, xyz=(zero, zero, zero))
        singular = _singular_points(divisor)
        for a, b in zip(waypoints, waypoints[1:]):
            for p in singular:
                d = _segment_min_distance(a, b, p)
                if d < clearance:
                    raise ClearanceError(
                        f"path segment [{a}, {b}] passes within {d} of {p}"
                    )
        x_ref, w_ref = reference_branch_point(divisor, digits)
        w_here = continue_w(divisor, mpc(x_ref, 0), mpc(w_ref, 0), z0, digits)
        total = [mpc(0), mpc(0), mpc(0)]
        prev_z, prev_w = z0, w_here
        for b in waypoints[1:]:
            wb = continue_w(divisor, prev_z, prev_w, b, digits)
            za, span = prev_z, b - prev_z
            vals = _quad_forms(
                divisor,
                lambda t, za=za, span=span: za + span * t,
                lambda t, span=span: span,
                prev_w,
                wb,
                digits,
            )
            total = [a + v for a, v in zip(total, vals)]
            prev_z, prev_w = b, wb
        return ImmersionPoint(z=z, xyz=tuple(v.real for v in total))


# ---------------------------------------------------------------------------
# lattice periods


def _branch_on_imag_axis(divisor: BranchDivisor, y: mpf, digits: int) -> mpc:
    """w at iy (y > 0), continued from the reference point via the diagonal
    to i*x_ref and then down or up the imaginary axis, both routes keeping
    a safe distance from every real singular point."""
    x_ref, w_ref = reference_branch_point(divisor, digits)
    w = continue_w(divisor, mpc(x_ref, 0), mpc(w_ref, 0), mpc(0, x_ref), digits)
    return continue_w(divisor, mpc(0, x_ref), w, mpc(0, y), digits)


def _circle_loop(divisor: BranchDivisor, r: mpf, digits: int):
    """Counterclockwise loop integrals of the forms over |z| = r.

    w is single-valued on the circle whenever r separates the branch
    locations (none on the circle, and the enclosed ones pair up), which
    holds for the end circles used here.  The walk starts at ir, where the
    branch arrives cleanly along the imaginary axis.
    """
    with working_precision(digits + 10):
        two_pi = 2 * pi(digits + 10)
        quarter = two_pi / 4
        start = _branch_on_imag_axis(divisor, r, digits)
        nodes = 64
        while True:
            ws = []
            prev = start
            ok = True
            for k in range(1, nodes + 1):
                theta = quarter + two_pi * k / nodes
                z = r * mpc(cos(theta), sin(theta))
                s = sqrt(_w_squared_c(divisor, z))
                if abs(s - prev) > abs(s + prev):
                    s = -s
                if abs(s - prev) > mpf("0.8") * abs(prev) and nodes < 4096:
                    ok = False
                    break
                ws.append((theta, s))
                prev = s
            if ok:
                if abs(prev - start) > mpf("0.8") * abs(start):
                    raise QuadratureError(
                        f"w not single-valued around |z| = {r}; circle crosses a cut"
                    )
                break
            nodes *= 2
        total = [mpc(0), mpc(0), mpc(0)]
        prev_theta, prev_w = quarter, start
        for theta, w in ws:
            ta, tb = prev_theta, theta

            def zfun(t, ta=ta, tb=tb):
                ang = ta + (tb - ta) * t
                return r * mpc(cos(ang), sin(ang))

            def dzfun(t, ta=ta, tb=tb):
                ang = ta + (tb - ta) * t
                return r * mpc(-sin(ang), cos(ang)) * (tb - ta)

            vals = _quad_forms(divisor, zfun, dzfun, prev_w, w, digits)
            total = [a + v for a, v in zip(total, vals)]
            prev_theta, prev_w = theta, w
        return tuple(total)


def _through_zero_cycle(divisor: BranchDivisor, digits: int):
    """Horizontal period of the cycle through the puncture at 0 for
    parallel ends: the segment from the innermost negative branch point to
    the innermost positive one, doubled over the two sheets.  phi1 is
    regular at 0 there (G(0) = +-1 kills the residue) and phi3 cancels
    between the sheets; the phi2 component is lattice-trivial (the two
    half-residue detours at 0 add up to one full end period)."""
    if not divisor.negative_points or not divisor.positive_points:
        raise ConfigurationError("through-zero cycle needs branch points both sides")
    lo = divisor.negative_points[-1].location
    hi = divisor.positive_points[0].location
    with working_precision(digits + 10):
        left = period_integral(
            divisor,
            FormKind.PHI1,
            Segment(lo, mpf(0), lo_singular=True, hi_singular=False),
            digits,
            branch="continued",
        )
        right = period_integral(
            divisor,
            FormKind.PHI1,
            Segment(mpf(0), hi, lo_singular=False, hi_singular=True),
            digits,
            branch="continued",
        )
        x1 = 2 * (left + right).real
        zero = mpf(0)
        return (x1, zero, zero)


def lattice_periods(wd: WeierstrassData, digits: int = 30) -> LatticePeriods:
    """Both lattice generators from end residues via small-circle quadrature."""
    divisor = wd.divisor
    with working_precision(digits + 10):
        radii = [abs(loc) for loc in divisor.locations] or [mpf(1)]
        r_in = min(radii + [mpf(1)]) / 2
        r_out = 2 * max(radii + [mpf(1)])
        loop_zero = _circle_loop(divisor, r_in, digits)
        loop_inf = _circle_loop(divisor, r_out, digits)
        t_zero = tuple(v.real for v in loop_zero)
        # outer circle counterclockwise = clockwise around infinity
        t_inf = tuple(-v.real for v in loop_inf)
        if wd.end_angle_class is EndAngleClass.ORTHOGONAL:
            t1, t2 = t_zero, t_inf
        elif wd.end_angle_class is EndAngleClass.PARALLEL:
            t1 = t_zero
            t2 = _through_zero_cycle(divisor, digits)
        else:
            raise ConfigurationError(
                "lattice periods need ORTHOGONAL or PARALLEL ends"
            )
        return LatticePeriods(
            t1=t1, t2=t2, end_loop_zero=t_zero, end_loop_inf=t_inf
        )


def stadium_loop(
    divisor: BranchDivisor, lo: mpf, hi: mpf, digits: int, delta: mpf | None = None
):
    """Loop integrals of the forms around the axis interval [lo, hi].

    The contour is a stadium at distance delta: two horizontal lines at
    height +-delta and two half circles around the interval ends, traversed
    counterclockwise.  With exactly the branch points inside that the
    interval contains, this is the honest geometric handle cycle the period
    equations encode (loop = twice the segment integral on hyperelliptic
    cycles), so its real part must be lattice-trivial at a solution.
    """
    with working_precision(digits + 10):
        lo, hi = mpf(lo), mpf(hi)
        if delta is None:
            # locations within a relative sliver of an endpoint are that
            # endpoint reparsed at another precision, not a nearby point
            span = hi - lo
            gaps = [
                g
                for loc in divisor.locations
                for g in (abs(loc - lo), abs(loc - hi))
                if g > span * mpf("1e-6")
            ]
            inner = span / 4
            delta = min([inner] + [g / 3 for g in gaps])
        x_ref, w_ref = reference_branch_point(divisor, digits)
        pieces = []
        half = pi(digits + 10)

        def line(za, zb):
            pieces.append((lambda t, za=za, zb=zb: za + (zb - za) * t,
                           lambda t, za=za, zb=zb: zb - za))

        def arc(center, start_angle, end_angle):
            span = end_angle - start_angle

            def zf(t, c=center, a=start_angle, s=span):
                ang = a + s * t
                return c + delta * mpc(cos(ang), sin(ang))

            def dzf(t, c=center, a=start_angle, s=span):
                ang = a + s * t
                return delta * mpc(-sin(ang), cos(ang)) * s

            pieces.append((zf, dzf))

        line(mpc(lo, -delta), mpc(hi, -delta))
        arc(mpc(hi, 0), -half / 2, half / 2)
        line(mpc(hi, delta), mpc(lo, delta))
        arc(mpc(lo, 0), half / 2, 3 * half / 2)

        start_z = mpc(lo, -delta)
        w = continue_w(divisor, mpc(x_ref, 0), mpc(w_ref, 0), mpc(x_ref, -delta), digits)
        w = continue_w(divisor, mpc(x_ref, -delta), w, start_z, digits)
        total = [mpc(0), mpc(0), mpc(0)]
        prev_w = w
        for zf, dzf in pieces:
            # integrate piecewise between sampled nodes so the linear branch
            # guide inside each subsegment stays trustworthy
            samples = 16
            node_w = prev_w
            node_t = mpf(0)
            node_z = zf(node_t)
            for k in range(1, samples + 1):
                t = mpf(k) / samples
                zt = zf(t)
                wt = continue_w(divisor, node_z, node_w, zt, digits)
                vals = _quad_forms(
                    divisor,
                    lambda s, t0=node_t, t1=t: zf(t0 + (t1 - t0) * s),
                    lambda s, t0=node_t, t1=t: dzf(t0 + (t1 - t0) * s) * (t1 - t0),
                    node_w,
                    wt,
                    digits,
                )
                total = [a + v for a, v in zip(total, vals)]
                node_t, node_z, node_w = t, zt, wt
            prev_w = node_w
        return tuple(total)


# ---------------------------------------------------------------------------
# mesh


def _nudged_radii(divisor: BranchDivisor, grid: MeshGrid, digits: int) -> list[mpf]:
    with working_precision(digits):
        R = mpf(grid.truncation_radius)
        J = grid.radial_samples
        lnR = log(R)
        radii = []
        special = sorted(set(abs(loc) for loc in divisor.locations) | {mpf(1)})
        for j in range(J):
            r = exp(lnR * (2 * mpf(j) / (J - 1) - 1))
            attempts = 0
            while any(abs(r - s) < s * mpf("1e-6") for s in special):
                r *= 1 + mpf("1e-5")
                attempts += 1
                if attempts > 5:
                    raise MeshError(f"cannot place radius near {r} off the branch locations")
            radii.append(r)
        return radii


def _axis_parity(divisor: BranchDivisor, x: mpf) -> int:
    """+1 where w^2 > 0 on the axis, -1 where w^2 < 0."""
    phase = divisor.segment_phases[divisor.segment_index(x)]
    return 1 if phase.imag == 0 else -1


def build_mesh(
    wd: WeierstrassData,
    grid: MeshGrid | None = None,
    digits: int = 20,
) -> Mesh:
    """Polar mesh of the translational fundamental domain.

    One log-spaced polar grid covers the upper half plane between the
    truncation circles; integration runs along grid edges (radial spine on
    the imaginary axis, then angular arcs), one quadrature per edge.  The
    three reflected copies and the seam bookkeeping follow the axis-parity
    rules in the module docstring.
    """
    grid = grid or MeshGrid()
    divisor = wd.divisor
    J, K = grid.radial_samples, grid.angular_samples
    with working_precision(digits + 10):
        radii = _nudged_radii(divisor, grid, digits + 10)
        half = pi(digits + 10)
        k_mid = (K - 1) // 2
        thetas = [half * mpf(k) / (K - 1) for k in range(K)]

        def grid_z(j, k):
            if k == 0:
                return mpc(radii[j], 0)
            if k == K - 1:
                return mpc(-radii[j], 0)
            return radii[j] * mpc(cos(thetas[k]), sin(thetas[k]))

        # branch values at the vertices, continued from the reference point
        x_ref, w_ref = reference_branch_point(divisor, digits)
        j_anchor = min(range(J), key=lambda j: abs(radii[j] - 1))
        anchor = grid_z(j_anchor, k_mid)
        w_grid: dict[tuple[int, int], mpc] = {}
        w_grid[(j_anchor, k_mid)] = continue_w(
            divisor, mpc(x_ref, 0), mpc(w_ref, 0), anchor, digits
        )
        for j in range(j_anchor + 1, J):
            w_grid[(j, k_mid)] = continue_w(
                divisor, grid_z(j - 1, k_mid), w_grid[(j - 1, k_mid)],
                grid_z(j, k_mid), digits,
            )
        for j in range(j_anchor - 1, -1, -1):
            w_grid[(j, k_mid)] = continue_w(
                divisor, grid_z(j + 1, k_mid), w_grid[(j + 1, k_mid)],
                grid_z(j, k_mid), digits,
            )
        for j in range(J):
            for k in range(k_mid + 1, K):
                w_grid[(j, k)] = continue_w(
                    divisor, grid_z(j, k - 1), w_grid[(j, k - 1)],
                    grid_z(j, k), digits,
                )
            for k in range(k_mid - 1, -1, -1):
                w_grid[(j, k)] = continue_w(
                    divisor, grid_z(j, k + 1), w_grid[(j, k + 1)],
                    grid_z(j, k), digits,
                )

        # cumulative integrals along the spanning tree (spine + arcs)
        def edge_vals(j0, k0, j1, k1):
            za, zb = grid_z(j0, k0), grid_z(j1, k1)
            wa, wb = w_grid[(j0, k0)], w_grid[(j1, k1)]
            if j0 != j1:
                zfun = lambda t, za=za, zb=zb: za + (zb - za) * t
                dzfun = lambda t, za=za, zb=zb: zb - za
            else:
                r = radii[j0]
                ta, tb = thetas[k0], thetas[k1]
                zfun = lambda t, r=r, ta=ta, tb=tb: r * mpc(
                    cos(ta + (tb - ta) * t), sin(ta + (tb - ta) * t)
                )
                dzfun = lambda t, r=r, ta=ta, tb=tb: r * mpc(
                    -sin(ta + (tb - ta) * t), cos(ta + (tb - ta) * t)
                ) * (tb - ta)
            attempts = 0
            spans = [(mpf(0), mpf(1), wa, wb)]
            total = [mpc(0)] * 3
            while spans:
                t0, t1, w0, w1 = spans.pop()
                try:
                    vals = _quad_forms(
                        divisor,
                        lambda t, t0=t0, t1=t1: zfun(t0 + (t1 - t0) * t),
                        lambda t, t0=t0, t1=t1: dzfun(t0 + (t1 - t0) * t) * (t1 - t0),
                        w0,
                        w1,
                        digits,
                    )
                    total = [a + v for a, v in zip(total, vals)]
                except QuadratureError:
                    attempts += 1
                    if attempts > 5:
                        raise MeshError(
                            f"edge ({j0},{k0})->({j1},{k1}) failed after 5 refinements"
                        )
                    tm = (t0 + t1) / 2
                    zm = zfun(tm)
                    wm = continue_w(divisor, zfun(t0), w0, zm, digits)
                    spans.append((tm, t1, wm, w1))
                    spans.append((t0, tm, w0, wm))
            return tuple(total)

        F: dict[tuple[int, int], tuple] = {(j_anchor, k_mid): (mpc(0),) * 3}
        order = []
        for j in range(j_anchor + 1, J):
            order.append((j - 1, k_mid, j, k_mid))
        for j in range(j_anchor - 1, -1, -1):
            order.append((j + 1, k_mid, j, k_mid))
        for j in range(J):
            for k in range(k_mid + 1, K):
                order.append((j, k - 1, j, k))
            for k in range(k_mid - 1, -1, -1):
                order.append((j, k + 1, j, k))
        for j0, k0, j1, k1 in order:
            vals = edge_vals(j0, k0, j1, k1)
            F[(j1, k1)] = tuple(a + v for a, v in zip(F[(j0, k0)], vals))

        base_xyz = [
            tuple(c.real for c in F[(j, k)]) for j in range(J) for k in range(K)
        ]

        def vid(j, k):
            return j * K + k

        # seam runs on the base copy: axis rows split by parity
        runs: list[tuple[str, list[int], list[mpf]]] = []

        def collect(k_axis, sign):
            current = None
            for j in range(J):
                x = sign * radii[j]
                parity = _axis_parity(divisor, x)
                axis_name = "x2" if parity > 0 else "x1"
                col = 1 if parity > 0 else 0
                idx = vid(j, k_axis)
                val = base_xyz[idx][col]
                if current is not None and current[0] == axis_name:
                    current[1].append(idx)
                    current[2].append(val)
                else:
                    if current is not None:
                        runs.append(tuple(current))
                    current = [axis_name, [idx], [val]]
            if current is not None:
                runs.append(tuple(current))

        collect(0, 1)
        collect(K - 1, -1)

        def run_mean(r):
            return sum(r[2]) / len(r[2])

        x1_runs = [r for r in runs if r[0] == "x1"]
        x2_runs = [r for r in runs if r[0] == "x2"]
        if not x1_runs or not x2_runs:
            raise MeshError("axis has only one parity; cannot pick both mirrors")

        def pick(candidates):
            # largest run, ties broken by the largest x the run touches
            def key(r):
                return (len(r[1]), max(abs(base_xyz[i][0]) for i in r[1]))

            return max(candidates, key=key)

        chosen_x1 = pick(x1_runs)
        chosen_x2 = pick(x2_runs)
        c1 = run_mean(chosen_x1)
        c2 = run_mean(chosen_x2)

        reflections = (
            (False, False),
            (False, True),   # x2 mirror
            (True, False),   # x1 mirror
            (True, True),    # rotation
        )
        vertices = []
        triangles = []
        for copy_idx, (rx1, rx2) in enumerate(reflections):
            off = copy_idx * J * K
            for x1, x2, x3 in base_xyz:
                if rx1:
                    x1 = 2 * c1 - x1
                if rx2:
                    x2 = 2 * c2 - x2
                vertices.append((x1, x2, x3))
            flip = rx1 != rx2
            for j in range(J - 1):
                for k in range(K - 1):
                    a = off + vid(j, k)
                    b = off + vid(j + 1, k)
                    c = off + vid(j + 1, k + 1)
                    d = off + vid(j, k + 1)
                    if flip:
                        triangles.append((a, c, b))
                        triangles.append((a, d, c))
                    else:
                        triangles.append((a, b, c))
                        triangles.append((a, c, d))

        seams = []
        for copy_idx, (rx1, rx2) in enumerate(reflections):
            off = copy_idx * J * K
            for r in runs:
                axis_name = r[0]
                mean = run_mean(r)
                if axis_name == "x1" and rx1:
                    mean = 2 * c1 - mean
                if axis_name == "x2" and rx2:
                    mean = 2 * c2 - mean
                welded = (axis_name == "x1" and r is chosen_x1) or (
                    axis_name == "x2" and r is chosen_x2
                )
                seams.append(
                    SeamRun(
                        copy_index=copy_idx,
                        plane_axis=axis_name,
                        plane_value=mean,
                        vertex_indices=tuple(off + i for i in r[1]),
                        welded=welded,
                    )
                )

        return Mesh(
            vertices=vertices,
            triangles=triangles,
            seams=seams,
            vertices_per_copy=J * K,
            copies=len(reflections),
            mirror_x1=c1,
            mirror_x2=c2,
        )


def mesh_diameter(mesh: Mesh) -> mpf:
    """Diameter from extreme points along a fixed direction set; exact for
    boxes and within a few percent in general, and deterministic, which is
    what the weld normalization needs."""
    dirs = [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1),
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
    ]
    candidates = set()
    for d in dirs:
        lo_i = hi_i = 0
        lo_v = hi_v = None
        for i, v in enumerate(mesh.vertices):
            s = d[0] * v[0] + d[1] * v[1] + d[2] * v[2]
            if lo_v is None or s < lo_v:
                lo_v, lo_i = s, i
            if hi_v is None or s > hi_v:
                hi_v, hi_i = s, i
        candidates.add(lo_i)
        candidates.add(hi_i)
    cand = [mesh.vertices[i] for i in candidates]
    best = mpf(0)
    for i in range(len(cand)):
        for j in range(i + 1, len(cand)):
            d2 = sum((a - b) ** 2 for a, b in zip(cand[i], cand[j]))
            if d2 > best:
                best = d2
    if best == 0:
        raise MeshError("degenerate mesh: zero diameter")
    return sqrt(best)


def end_normal_bound(wd: WeierstrassData, radius, digits: int = 20, samples: int = 16) -> mpf:
    """Largest vertical normal component |n3| over the truncation circles
    |z| = radius and 1/radius; n3 = (|G|^2 - 1)/(|G|^2 + 1) needs only
    |w^2|, no branch choice."""
    divisor = wd.divisor
    with working_precision(digits + 5):
        R = mpf(radius)
        two_pi = 2 * pi(digits + 5)
        worst = mpf(0)
        for r in (R, 1 / R):
            for k in range(samples):
                theta = two_pi * (k + mpf("0.5")) / samples
                z = r * mpc(cos(theta), sin(theta))
                g2 = abs(_w_squared_c(divisor, z))
                n3 = abs(g2 - 1) / (g2 + 1)
                if n3 > worst:
                    worst = n3
        return worst


# ---------------------------------------------------------------------------
# flat development


def develop_flat(
    wd: WeierstrassData,
    form: FormKind,
    digits: int = 30,
    inner: mpf | None = None,
    outer: mpf | None = None,
) -> FlatPolygon:
    """Develop the chosen form along the real axis between marked points.

    Marked points are the branch locations, +-1, and truncation stand-ins
    for the punctures (inner near 0, outer near infinity).  The development
    is cumulative with the axis-continued branch, one chain per side of the
    puncture at 0.
    """
    if form not in (FormKind.GDH, FormKind.INVGDH):
        raise ConfigurationError("develop_flat expects GDH or INVGDH")
    divisor = wd.divisor
    with working_precision(digits + 10):
        radii = [abs(loc) for loc in divisor.locations] or [mpf(1)]
        if inner is None:
            inner = min(radii + [mpf(1)]) / 8
        if outer is None:
            outer = 8 * max(radii + [mpf(1)])
        inner, outer = mpf(inner), mpf(outer)

        def labeled_marks(sign):
            marks = [(sign * inner, "zero" + ("+" if sign > 0 else "-"))]
            for loc in divisor.locations:
                if (loc > 0) == (sign > 0):
                    marks.append((loc, f"branch({to_decimal_string(loc, 6)})"))
            unit = mpf(sign)
            if unit not in divisor.locations:
                marks.append((unit, f"unit({sign:+d})"))
            marks.append((sign * outer, "inf" + ("+" if sign > 0 else "-")))
            marks.sort(key=lambda m: m[0])
            return marks

        chains = []
        labels = []
        locations = set(divisor.locations)
        for sign in (1, -1):
            # ascending walk: 0+ out to inf+ on the positive side, inf- in
            # to 0- on the negative side
            marks = labeled_marks(sign)
            pts = [mpc(0)]
            names = [marks[0][1]]
            current = mpc(0)
            for (lo, _), (hi, hi_name) in zip(marks, marks[1:]):
                seg = Segment(
                    lo,
                    hi,
                    lo_singular=(lo in locations),
                    hi_singular=(hi in locations),
                )
                val = period_integral(divisor, form, seg, digits, branch="continued")
                current = current + val
                pts.append(current)
                names.append(hi_name)
            chains.append(tuple(pts))
            labels.append(tuple(names))
        return FlatPolygon(form=form, chains=tuple(chains), labels=tuple(labels))


def cone_angle_defects(polygon: FlatPolygon, digits: int = 30) -> list[mpf]:
    """For each interior vertex of each chain, the distance from the edge
    turn angle to the nearest integer multiple of pi/2 (flat cone points of
    these structures turn by quarter multiples)."""
    with working_precision(digits):
        quarter = pi(digits) / 2
        out = []
        for chain in polygon.chains:
            for i in range(1, len(chain) - 1):
                e_prev = chain[i] - chain[i - 1]
                e_next = chain[i + 1] - chain[i]
                if abs(e_prev) == 0 or abs(e_next) == 0:
                    continue
                turn = arg(e_next / e_prev)
                k = mp.nint(turn / quarter)
                out.append(abs(turn - k * quarter))
        return out


# ---------------------------------------------------------------------------
# exports


def _weld(vertices, triangles, tol: mpf):
    """Merge vertices closer than tol (first index wins), drop collapsed
    triangles.  Greedy spatial-hash pass, deterministic in input order."""
    cell = {}
    remap = []
    kept = []
    inv_tol = 1 / tol
    for i, v in enumerate(vertices):
        key = tuple(int(mp.floor(c * inv_tol)) for c in v)
        found = None
        for dx in (0, -1, 1):
            for dy in (0, -1, 1):
                for dz in (0, -1, 1):
                    nk = (key[0] + dx, key[1] + dy, key[2] + dz)
                    for j in cell.get(nk, ()):
                        if all(abs(a - b) <= tol for a, b in zip(v, kept[j])):
                            found = j
                            break
                    if found is not None:
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            j = len(kept)
            kept.append(v)
            cell.setdefault(key, []).append(j)
            remap.append(j)
        else:
            remap.append(found)
    welded_tris = []
    for a, b, c in triangles:
        a, b, c = remap[a], remap[b], remap[c]
        if a != b and b != c and a != c:
            welded_tris.append((a, b, c))
    return kept, welded_tris


def export_obj(mesh: Mesh, path: str, weld_tolerance: float = 1e-8) -> None:
    """ASCII OBJ of the welded mesh, scaled to bounding diameter 1.

    Vertices carry 17 significant digits; faces are 1-based triples.
    """
    scale = 1 / mesh_diameter(mesh)
    scaled = [tuple(c * scale for c in v) for v in mesh.vertices]
    kept, tris = _weld(scaled, mesh.triangles, mpf(weld_tolerance))
    tmp_fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    try:
        with os.fdopen(tmp_fd, "w") as fh:
            fh.write(f"# {len(kept)} vertices, {len(tris)} faces\n")
            for v in kept:
                coords = " ".join(mp.nstr(c, 17, strip_zeros=False) for c in v)
                fh.write(f"v {coords}\n")
            for a, b, c in tris:
                fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def export_flat_svg(polygon: FlatPolygon, path: str, size: int = 640) -> None:
    """SVG with one polyline per chain in developed-plane coordinates."""
    pts = [(float(v.real), float(v.imag)) for chain in polygon.chains for v in chain]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    pad = 0.05 * span
    x0, y0, extent = x0 - pad, y0 - pad, span + 2 * pad
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{x0:.6g} {-(y0 + extent):.6g} {extent:.6g} {extent:.6g}">'
    ]
    for chain in polygon.chains:
        coords = " ".join(
            f"{float(v.real):.9g},{-float(v.imag):.9g}" for v in chain
        )
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="black" '
            f'stroke-width="{extent / 400:.6g}"/>'
        )
    for chain in polygon.chains:
        for v in chain:
            lines.append(
                f'<circle cx="{float(v.real):.9g}" cy="{-float(v.imag):.9g}" '
                f'r="{extent / 200:.6g}" fill="black"/>'
            )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_flat_text(polygon: FlatPolygon, path: str, digits: int = 30) -> None:
    """Plain structured vertex list: chain, index, label, re, im."""
    with open(path, "w") as fh:
        fh.write(f"form {polygon.form.value}\n")
        for ci, (chain, names) in enumerate(zip(polygon.chains, polygon.labels)):
            fh.write(f"chain {ci}\n")
            for i, (v, name) in enumerate(zip(chain, names)):
                re_s = to_decimal_string(v.real, digits)
                im_s = to_decimal_string(v.imag, digits)
                fh.write(f"  {i} {name} {re_s} {im_s}\n")
