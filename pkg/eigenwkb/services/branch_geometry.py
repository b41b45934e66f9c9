"""Branches of rho_M^(-1/M) outside the convex hull of the zeros of rho_M,
the primitives Phi0 and Phi1 normalized at infinity, the asymptotic
predictor and the companion-matrix structure of the first correction.

The cut starts at the leftmost hull vertex p, drops vertically to the real
axis when p is not real and then runs along the axis to -infinity.
Both primitives are split as ``c * log(z - p)`` plus a remainder that is
analytic on the whole complement of the hull, so only the logarithm carries
the jump across the cut and boundary values on the cut come from above.
"""
from dataclasses import dataclass, field
from math import comb
from typing import Any, List, Optional, Sequence, Tuple
import logging

import numpy as np
from mpmath import MPContext
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

from eigenwkb.config import settings
from eigenwkb.services.combinatorics import bell_partial
from eigenwkb.services.operator_core import (
    ExactlySolvableOperator, ensure_valid, to_float_operator,
)
from eigenwkb.services.poly_core import (
    Poly, compose_shift, derivative, evaluate, get_context, reverse, roots, to_mp,
)
from eigenwkb.services.quadrature import QuadResult, default_tolerance, integrate, integrate_segment
from eigenwkb.utils.errors import (
    BranchAmbiguity, InsideHull, OrderTooSmall, PathError, PoleOfCoefficient,
)

logger = logging.getLogger(__name__)


# --- planar geometry (double precision) --------------------------------------

def _cross(u: complex, v: complex) -> float:
    return u.real * v.imag - u.imag * v.real


def _point_segment_distance(z: complex, a: complex, b: complex) -> float:
    ab = b - a
    length2 = abs(ab) ** 2
    if length2 == 0:
        return abs(z - a)
    s = ((z - a) * ab.conjugate()).real / length2
    s = min(1.0, max(0.0, s))
    return abs(z - (a + s * ab))


def _segments_intersect(a: complex, b: complex, c: complex, d: complex) -> bool:
    d1 = _cross(b - a, c - a)
    d2 = _cross(b - a, d - a)
    d3 = _cross(d - c, a - c)
    d4 = _cross(d - c, b - c)
    return d1 * d2 < 0 and d3 * d4 < 0


def _segment_distance(a: complex, b: complex, c: complex, d: complex) -> float:
    if _segments_intersect(a, b, c, d):
        return 0.0
    return min(_point_segment_distance(a, c, d), _point_segment_distance(b, c, d),
               _point_segment_distance(c, a, b), _point_segment_distance(d, a, b))


@dataclass(frozen=True)
class Hull:
    """Convex hull of the zeros of rho_M: a point, a segment, or a polygon
    with vertices in counterclockwise order."""
    vertices: Tuple[complex, ...]
    margin: float = settings.HULL_MARGIN

    @property
    def edges(self) -> List[Tuple[complex, complex]]:
        v = self.vertices
        if len(v) == 1:
            return [(v[0], v[0])]
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    @property
    def scale(self) -> float:
        return 1.0 + max(abs(v) for v in self.vertices)

    def _inside_polygon(self, z: complex) -> bool:
        return len(self.vertices) >= 3 and all(_cross(b - a, z - a) >= 0 for a, b in self.edges)

    def distance(self, z: complex) -> float:
        """Euclidean distance from z to the hull; zero inside."""
        if self._inside_polygon(z):
            return 0.0
        return min(_point_segment_distance(z, a, b) for a, b in self.edges)

    def project(self, z: complex) -> complex:
        """Nearest point of the hull to z."""
        if self._inside_polygon(z):
            return z
        best, best_distance = None, None
        for a, b in self.edges:
            ab = b - a
            length2 = abs(ab) ** 2
            s = 0.0 if length2 == 0 else min(1.0, max(0.0, ((z - a) * ab.conjugate()).real / length2))
            q = a + s * ab
            if best_distance is None or abs(z - q) < best_distance:
                best, best_distance = q, abs(z - q)
        return best

    def boundary_samples(self, per_edge: int = 64) -> List[complex]:
        points = []
        for a, b in self.edges:
            points.extend(a + (b - a) * (i / per_edge) for i in range(per_edge))
        return points

    def contains(self, z: complex) -> bool:
        return self.distance(z) <= self.margin * self.scale

    def segment_distance(self, a: complex, b: complex) -> float:
        if self.contains(a) or self.contains(b):
            return 0.0
        return min(_segment_distance(a, b, c, d) for c, d in self.edges)

    @property
    def leftmost(self) -> complex:
        return min(self.vertices, key=lambda v: (v.real, v.imag))


def _merge_close(points: Sequence[complex], tol: float) -> List[complex]:
    merged: List[complex] = []
    for z in points:
        if all(abs(z - m) > tol for m in merged):
            merged.append(z)
    return merged


def convex_hull(points: Sequence[complex], margin: float = None) -> Hull:
    """Hull of a finite point set, with the collinear and single-point cases
    reduced to a segment or a point."""
    margin = settings.HULL_MARGIN if margin is None else margin
    scale = 1.0 + max(abs(z) for z in points)
    distinct = _merge_close(points, margin * scale)
    if len(distinct) == 1:
        return Hull((distinct[0],), margin)
    xy = np.array([[z.real, z.imag] for z in distinct])
    center = xy.mean(axis=0)
    _, singular, vt = np.linalg.svd(xy - center)
    if len(distinct) == 2 or singular[-1] <= margin * scale:
        projection = (xy - center) @ vt[0]
        lo, hi = int(np.argmin(projection)), int(np.argmax(projection))
        ends = sorted([distinct[lo], distinct[hi]], key=lambda z: (z.real, z.imag))
        return Hull(tuple(ends), margin)
    try:
        qhull = ConvexHull(xy)
    except QhullError:
        projection = (xy - center) @ vt[0]
        lo, hi = int(np.argmin(projection)), int(np.argmax(projection))
        ends = sorted([distinct[lo], distinct[hi]], key=lambda z: (z.real, z.imag))
        return Hull(tuple(ends), margin)
    return Hull(tuple(distinct[i] for i in qhull.vertices), margin)


# --- context -----------------------------------------------------------------

@dataclass(frozen=True)
class BranchContext:
    op: ExactlySolvableOperator
    fop: ExactlySolvableOperator
    bits: int
    rhoM_roots: Tuple[Any, ...]
    hull: Hull
    cut_base: Any
    anchor_radius: Any
    kappa: Any
    rhoM_prime: Poly
    # rho_M and rho_{M-1} around p, reversed: s^M rho_M(p + 1/s) and friends
    tail_S: Poly = field(repr=False)
    tail_S_prime: Poly = field(repr=False)
    tail_N1: Poly = field(repr=False)

    @property
    def M(self) -> int:
        return self.op.M

    @property
    def mp(self) -> MPContext:
        return get_context(self.bits)

    @property
    def tol(self):
        return default_tolerance(self.mp)


def make_context(op: ExactlySolvableOperator, bits: int = None) -> BranchContext:
    """Roots of rho_M, their hull, the cut and the anchor radius."""
    ensure_valid(op)
    bits = bits or max(op.bits, settings.DEFAULT_BITS)
    mp = get_context(bits)
    fop = to_float_operator(op, bits)
    M = op.M
    rhoM = fop.rho[M]
    found = tuple(roots(rhoM))
    hull = convex_hull([complex(r) for r in found])

    # cut base: the root sitting at the leftmost hull vertex, snapped to the
    # vertex's horizontal line when its imaginary part is rounding noise
    target = hull.leftmost
    p = min(found, key=lambda r: abs(complex(r) - target))
    if abs(p.imag) <= hull.margin * hull.scale:
        p = mp.mpc(p.real, 0)
    radius = mp.mpf(settings.ANCHOR_RADIUS_FACTOR) * (1 + max(abs(r) for r in found))

    S = reverse(compose_shift(rhoM, p), M)
    S1 = reverse(compose_shift(fop.rho[M - 1], p), M - 1)
    N = S1 - S * S1.coeff(0)
    N1 = Poly(N.coeffs[1:], N.mode, N.bits) if N.coeffs else N

    ctx = BranchContext(
        op=op, fop=fop, bits=bits, rhoM_roots=found, hull=hull, cut_base=p,
        anchor_radius=radius, kappa=to_mp(op.kappa, mp), rhoM_prime=derivative(rhoM),
        tail_S=S, tail_S_prime=derivative(S), tail_N1=N1,
    )
    logger.debug("branch context: M=%d, %d hull vertices, cut base %s",
                 M, len(hull.vertices), mp.nstr(p, 10))
    return ctx


def check_outside(z: Any, ctx: BranchContext):
    """z as an mpc of the context, or InsideHull."""
    z = to_mp(z, ctx.mp)
    if ctx.hull.contains(complex(z)):
        raise InsideHull(complex(z))
    return z


def _upper_log(d, tol, mp: MPContext):
    """Principal log, taking the value from above on the negative axis."""
    if d.real < 0 and abs(d.imag) <= tol * (1 + abs(d)):
        return mp.mpc(mp.log(-d.real), mp.pi)
    return mp.log(d)


def _log_from_cut(z, ctx: BranchContext):
    """log(z - p) analytic off the cut, with log(z - p) - log z -> 0 at infinity.

    The cut runs from p vertically to q = Re p and then along ]-inf, q]. On
    it the value is the limit from the upper side of the horizontal part and,
    on the vertical part, the one where arg((z - p)/(z - q)) tends to +pi.
    """
    mp = ctx.mp
    p = ctx.cut_base
    tol = ctx.hull.margin
    if p.imag == 0:
        return _upper_log(z - p, tol, mp)
    q = mp.mpc(p.real, 0)
    if abs(z - q) <= tol * abs(p.imag):
        corner = mp.log(q - p)
        return corner + mp.mpc(0, 2 * mp.pi) if p.imag > 0 else corner
    return _upper_log(z - q, tol, mp) + _upper_log((z - p) / (z - q), tol, mp)


# --- paths -------------------------------------------------------------------

@dataclass(frozen=True)
class PathPlan:
    waypoints: Tuple[Any, ...]

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]

    @property
    def segments(self) -> List[Tuple[Any, Any]]:
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))


def anchor(z: Any, ctx: BranchContext):
    """Point at distance R from p on the ray from p through z (z itself when
    already that far out).

    Between the horizontal line through a non-real p and the real axis that
    ray would cross the cut, so there the anchor sits R to the left of z.
    """
    p = ctx.cut_base
    d = z - p
    if abs(d) >= ctx.anchor_radius:
        return z
    radial = p + ctx.anchor_radius * d / abs(d)
    if _crosses_cut(complex(radial), complex(z), complex(p)):
        return z - ctx.anchor_radius
    return radial


def _crosses_cut(a: complex, b: complex, p: complex) -> bool:
    """Whether the segment a-b passes through the cut: ]-inf, Re p] on the
    real axis, plus the vertical piece from p to the axis when p is not real.
    Touching it at an endpoint does not count."""
    q = p.real
    if a.imag * b.imag < 0:
        x = a.real + (b.real - a.real) * a.imag / (a.imag - b.imag)
        if x < q:
            return True
    if p.imag != 0:
        xa, xb = a.real - q, b.real - q
        if xa * xb < 0:
            y = a.imag + (b.imag - a.imag) * xa / (xa - xb)
            if min(0.0, p.imag) < y < max(0.0, p.imag):
                return True
    return False


def plan_path(z: Any, ctx: BranchContext, via: Sequence[Any] = ()) -> PathPlan:
    """Polyline from the anchor of z through ``via`` to z.

    Segments must keep away from the hull and may not cross the cut from one
    side to the other; running along the cut or ending on it is allowed.
    """
    mp = ctx.mp
    z = check_outside(z, ctx)
    points = [anchor(z, ctx)] + [to_mp(v, mp) for v in via] + [z]
    waypoints = [points[0]]
    for q in points[1:]:
        if q != waypoints[-1]:
            waypoints.append(q)
    p = complex(ctx.cut_base)
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        ca, cb = complex(a), complex(b)
        if ctx.hull.segment_distance(ca, cb) <= ctx.hull.margin * ctx.hull.scale:
            raise PathError(f"segment {ca} -> {cb} meets the hull")
        if _crosses_cut(ca, cb, p):
            raise PathError(f"segment {ca} -> {cb} crosses the cut")
    return PathPlan(tuple(waypoints))


# --- branches of rho_M^(-1/M) ------------------------------------------------

def w1_direct(z: Any, ctx: BranchContext):
    """w_1(z) = (z - p)^(-1) * prod ((z - r_i)/(z - p))^(-1/M), principal powers.

    No factor ever meets its branch cut outside the hull, so this is the
    branch with w_1 ~ 1/z at infinity on the whole complement.
    """
    mp = ctx.mp
    z = check_outside(z, ctx)
    d = z - ctx.cut_base
    total = mp.mpc(0)
    for r in ctx.rhoM_roots:
        total += mp.log((z - r) / d)
    return mp.exp(-total / ctx.M) / d


def _nearest_root(target, rhoM_value, M: int, mp: MPContext) -> Tuple[Any, Any, Any]:
    """The M-th root of 1/rho_M closest to target, with its distance and the
    distance of the runner-up."""
    base = mp.root(1 / rhoM_value, M)
    candidates = sorted(((abs(base * mp.expj(2 * mp.pi * k / M) - target), k) for k in range(M)),
                        key=lambda item: item[0])
    best_distance, k = candidates[0]
    runner_up = candidates[1][0] if M > 1 else mp.inf
    return base * mp.expj(2 * mp.pi * k / M), best_distance, runner_up


def _continue_along(a, b, value, ctx: BranchContext):
    mp = ctx.mp
    rhoM = ctx.fop.rho[ctx.M]
    initial = 1.0 / settings.BRANCH_INITIAL_STEPS
    smallest = 2.0 ** -settings.BRANCH_MIN_STEP_EXPONENT
    factor = settings.BRANCH_AMBIGUITY_FACTOR
    s, h = 0.0, initial
    while s < 1.0:
        step = min(h, 1.0 - s)
        t = a + mp.mpf(s + step) * (b - a)
        candidate, best, runner_up = _nearest_root(value, evaluate(rhoM, t), ctx.M, mp)
        if runner_up < factor * best:
            h /= 2
            if h < smallest:
                raise BranchAmbiguity(complex(t))
            continue
        value = candidate
        s += step
        h = min(2 * h, initial)
    return value


def w(j: int, z: Any, ctx: BranchContext, plan: Optional[PathPlan] = None):
    """w_j(z) = exp(2 pi i (j-1)/M) w_1(z), with w_1 continued along ``plan``."""
    if not 1 <= j <= ctx.M:
        raise ValueError(f"branch index must lie in 1..{ctx.M}")
    mp = ctx.mp
    plan = plan or plan_path(z, ctx)
    rhoM = ctx.fop.rho[ctx.M]
    start = plan.start
    value, _, _ = _nearest_root(1 / start, evaluate(rhoM, start), ctx.M, mp)
    for a, b in plan.segments:
        value = _continue_along(a, b, value, ctx)
    return mp.expj(2 * mp.pi * (j - 1) / ctx.M) * value


def w1_derivative(z: Any, ctx: BranchContext):
    """w_1' = -(1/M) (rho_M'/rho_M) w_1."""
    z = check_outside(z, ctx)
    rhoM = ctx.fop.rho[ctx.M]
    return -evaluate(ctx.rhoM_prime, z) / (ctx.M * evaluate(rhoM, z)) * w1_direct(z, ctx)


# --- primitives --------------------------------------------------------------

def _phi0_tail(start, ctx: BranchContext) -> QuadResult:
    """Integral of w_1(t) - 1/(t - p) from infinity to ``start`` along the
    ray from p, written in u with t = p + d/u."""
    mp = ctx.mp
    d = start - ctx.cut_base
    shifts = [(r - ctx.cut_base) / d for r in ctx.rhoM_roots]
    M = ctx.M

    def integrand(u):
        exponent = mp.mpc(0)
        for c in shifts:
            exponent += mp.log1p(-c * u)
        return -mp.expm1(-exponent / M) / u

    return integrate(integrand, mp, ctx.tol)


def _phi1_tail(start, ctx: BranchContext) -> QuadResult:
    mp = ctx.mp
    d = start - ctx.cut_base
    M = ctx.M
    weight = mp.mpf(M - 1) / (2 * M)

    def integrand(u):
        s = u / d
        top = weight * evaluate(ctx.tail_S_prime, s) + evaluate(ctx.tail_N1, s) / M
        return top / (d * evaluate(ctx.tail_S, s))

    return integrate(integrand, mp, ctx.tol)


def _b1_value(t, ctx: BranchContext):
    fop = ctx.fop
    M = ctx.M
    rhoM = evaluate(fop.rho[M], t)
    return ((M - 1) * evaluate(ctx.rhoM_prime, t) / (2 * M) - evaluate(fop.rho[M - 1], t) / M) / rhoM


def _along(plan: PathPlan, f, ctx: BranchContext) -> QuadResult:
    mp = ctx.mp
    value, error = mp.mpc(0), mp.mpf(0)
    for a, b in plan.segments:
        piece = integrate_segment(f, a, b, mp, ctx.tol)
        value += piece.value
        error += piece.error
    return QuadResult(value, error)


def phi0(z: Any, ctx: BranchContext, plan: Optional[PathPlan] = None) -> QuadResult:
    """Primitive of w_1 with Phi0(z) - log z -> 0 at infinity."""
    z = check_outside(z, ctx)
    plan = plan or plan_path(z, ctx)
    p = ctx.cut_base
    tail = _phi0_tail(plan.start, ctx)
    near = _along(plan, lambda t: w1_direct(t, ctx) - 1 / (t - p), ctx)
    return QuadResult(_log_from_cut(z, ctx) + tail.value + near.value, tail.error + near.error)


def phi1(z: Any, ctx: BranchContext, plan: Optional[PathPlan] = None) -> QuadResult:
    """Primitive of b1 with Phi1(z) - kappa log z -> 0 at infinity."""
    z = check_outside(z, ctx)
    plan = plan or plan_path(z, ctx)
    p = ctx.cut_base
    kappa = ctx.kappa
    tail = _phi1_tail(plan.start, ctx)
    near = _along(plan, lambda t: _b1_value(t, ctx) - kappa / (t - p), ctx)
    return QuadResult(kappa * _log_from_cut(z, ctx) + tail.value + near.value,
                      tail.error + near.error)


def predictor(n: int, z: Any, ctx: BranchContext, primitives: Tuple[Any, Any] = None):
    """exp((n - kappa) Phi0(z) + Phi1(z)).

    ``primitives`` takes precomputed (Phi0, Phi1) values at z so degree
    sweeps integrate only once.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if primitives is None:
        primitives = (phi0(z, ctx).value, phi1(z, ctx).value)
    p0, p1 = primitives
    return ctx.mp.exp((n - ctx.kappa) * p0 + p1)


# --- first correction --------------------------------------------------------

def companion_A0(j: int, z: Any, ctx: BranchContext, allow_scalar: bool = False):
    """Companion matrix with ones on the superdiagonal and last row
    (-C(M,1) w_j^(M-1), ..., -C(M,M-1) w_j)."""
    M = ctx.M
    if M < 3 and not allow_scalar:
        raise OrderTooSmall(M)
    mp = ctx.mp
    wj = w(j, z, ctx)
    size = M - 1
    A = mp.matrix(size, size)
    for i in range(size - 1):
        A[i, i + 1] = 1
    for i in range(size):
        A[size - 1, i] = -comb(M, i + 1) * wj ** (M - 1 - i)
    return A


def companion_spectrum(j: int, z: Any, ctx: BranchContext) -> List[Any]:
    """(omega_k - 1) w_j(z) for k = 1..M-1, omega_k = exp(2 pi i k/M)."""
    mp = ctx.mp
    wj = w(j, z, ctx)
    return [(mp.expj(2 * mp.pi * k / ctx.M) - 1) * wj for k in range(1, ctx.M)]


def b1(z: Any, ctx: BranchContext):
    """(M-1)/(2M) rho_M'/rho_M - rho_{M-1}/(M rho_M)."""
    mp = ctx.mp
    z = to_mp(z, mp)
    rhoM = ctx.fop.rho[ctx.M]
    value = evaluate(rhoM, z)
    scale = sum(abs(c) * abs(z) ** i for i, c in enumerate(rhoM.coeffs))
    if abs(value) <= mp.eps * scale:
        raise PoleOfCoefficient(complex(z))
    return _b1_value(z, ctx)


def b1_identity_residual(z: Any, ctx: BranchContext):
    """Relative size of
    (rho_{M-1}/rho_M) B_{M-1,M-1}(w) + B_{M,M-1}(w, w') + M w^(M-1) b1
    at z, which vanishes identically."""
    z = check_outside(z, ctx)
    M = ctx.M
    w1 = w1_direct(z, ctx)
    w1p = w1_derivative(z, ctx)
    ratio = evaluate(ctx.fop.rho[M - 1], z) / evaluate(ctx.fop.rho[M], z)
    terms = [
        ratio * bell_partial(M - 1, M - 1, [w1]),
        bell_partial(M, M - 1, [w1, w1p]),
        M * w1 ** (M - 1) * b1(z, ctx),
    ]
    scale = sum(abs(t) for t in terms)
    if not scale:
        return ctx.mp.mpf(0)
    return abs(sum(terms)) / scale
