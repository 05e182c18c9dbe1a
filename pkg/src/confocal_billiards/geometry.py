"""Analytic geometry of a confocal family of conics.

The family is

    x^2/(a - l) + y^2/(b - l) = 1,      l <= a,  a > b > 0,

with foci (+-c, 0), c = sqrt(a - b).  For l < b the member is an ellipse,
for b < l < a a hyperbola, l = b is the degenerate union of the inter-focal
segment (degenerate ellipse) and the two focal rays (degenerate hyperbola),
and l = a is the vertical axis, treated as a hyperbola by convention.

Every point of the plane carries two coordinates (lambda_e, lambda_h):
the parameters of the ellipse and of the hyperbola through it, with
lambda_e <= b <= lambda_h <= a.  Billiard trajectories conserve the caustic
parameter: the unit-speed line through (x, v) is tangent to the member

    lambda = b*vx^2 + a*vy^2 - (vx*y - x*vy)^2

and lambda = a*b*Lambda where Lambda is the classical quadratic integral
Lambda = vx^2/a + vy^2/b - (vx*y - x*vy)^2/(ab).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

# Absolute tolerance for incidence / tangency / corner tests on O(1) domains.
EPS_GEO = 1e-9


@dataclass(frozen=True)
class ConfocalFamily:
    """The pair a > b > 0 defining the confocal family."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > self.b > 0.0):
            raise InvalidInputError(f"confocal family needs a > b > 0, got a={self.a}, b={self.b}")

    @property
    def c(self) -> float:
        """Focal distance: foci sit at (+-c, 0)."""
        return math.sqrt(self.a - self.b)

    @property
    def foci(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c = self.c
        return ((-c, 0.0), (c, 0.0))


# Quadric kinds and branch tags.
KIND_ELLIPSE = "ellipse"
KIND_DEGENERATE = "degenerate"  # l == b
KIND_HYPERBOLA = "hyperbola"
KIND_VERTICAL_LINE = "vertical_line"  # l == a

BRANCH_FULL = "full"
BRANCH_LEFT = "left"
BRANCH_RIGHT = "right"
BRANCH_BETWEEN_FOCI = "between_foci"
BRANCH_OUTSIDE_LEFT = "outside_left_ray"
BRANCH_OUTSIDE_RIGHT = "outside_right_ray"


def quadric_kind(family: ConfocalFamily, lam: float) -> str:
    if lam > family.a + EPS_GEO:
        raise InvalidInputError(f"lambda={lam} exceeds a={family.a}")
    if abs(lam - family.b) <= 0.0:
        return KIND_DEGENERATE
    if abs(lam - family.a) <= 0.0:
        return KIND_VERTICAL_LINE
    return KIND_ELLIPSE if lam < family.b else KIND_HYPERBOLA


@dataclass(frozen=True)
class QuadricRef:
    """A member of the family, with a branch tag for hyperbolas and the
    degenerate level."""

    lam: float
    kind: str
    branch: str = BRANCH_FULL

    def __post_init__(self):
        if self.kind in (KIND_ELLIPSE,) and self.branch != BRANCH_FULL:
            raise InvalidInputError("ellipse quadrics have no branches")


def quadric_ref(family: ConfocalFamily, lam: float, branch: str = BRANCH_FULL) -> QuadricRef:
    return QuadricRef(lam, quadric_kind(family, lam), branch)


@dataclass(frozen=True)
class EllipticCoords:
    """Parameters of the ellipse / hyperbola through a point."""

    lambda_e: float
    lambda_h: float


@dataclass(frozen=True)
class CausticValue:
    """Caustic parameter of a line.  `lam` is the family parameter of the
    tangent member; `raw` the un-normalized quadratic integral."""

    lam: float
    raw: float


def elliptic_coords(family: ConfocalFamily, p) -> EllipticCoords:
    """Both confocal coordinates of a finite planar point.

    Degenerate values are pinned exactly: lambda_e = b on the inter-focal
    segment, lambda_h = b on the focal rays, lambda_h = a on the vertical
    axis, both equal to b at a focus.
    """
    x, y = float(p[0]), float(p[1])
    a, b = family.a, family.b
    if y == 0.0:
        t = a - x * x
        if t <= b:  # on or beyond a focus
            return EllipticCoords(t, b)
        return EllipticCoords(b, t)
    if x == 0.0:
        return EllipticCoords(b - y * y, a)
    # roots of  l^2 - s*l + p0 = 0
    s = a + b - x * x - y * y
    p0 = a * b - b * x * x - a * y * y
    disc = s * s - 4.0 * p0
    if disc < 0.0:
        disc = 0.0
    root = math.sqrt(disc)
    hi = 0.5 * (s + root)
    lo = (p0 / hi) if hi != 0.0 else 0.5 * (s - root)
    if lo > hi:
        lo, hi = hi, lo
    # off-axis points satisfy lo < b < hi < a strictly; clamp tiny overshoot
    lo = min(lo, b)
    hi = min(max(hi, b), a)
    return EllipticCoords(lo, hi)


def planar_point(family: ConfocalFamily, lambda_e: float, lambda_h: float,
                 sx: int, sy: int) -> tuple[float, float]:
    """Inverse of elliptic_coords on the closed quadrant (sx, sy)."""
    a, b = family.a, family.b
    x2 = (a - lambda_e) * (a - lambda_h) / (a - b)
    y2 = (b - lambda_e) * (lambda_h - b) / (a - b)
    x = sx * math.sqrt(max(x2, 0.0))
    y = sy * math.sqrt(max(y2, 0.0))
    return (x, y)


def caustic_parameter(family: ConfocalFamily, x, v) -> CausticValue:
    """Caustic parameter of the line through point x with direction v.

    v is normalized internally; the zero vector is rejected.  The returned
    `lam` equals the family parameter of the quadric tangent to the line
    (lam = b for lines through a focus), and lam = a*b*raw.
    """
    vx, vy = float(v[0]), float(v[1])
    n = math.hypot(vx, vy)
    if n == 0.0:
        raise InvalidInputError("caustic parameter of a zero velocity")
    vx, vy = vx / n, vy / n
    px, py = float(x[0]), float(x[1])
    cross = vx * py - px * vy
    lam = family.b * vx * vx + family.a * vy * vy - cross * cross
    return CausticValue(lam, lam / (family.a * family.b))


def velocity_signs(family: ConfocalFamily, p, v) -> tuple[int, int]:
    """Signs of d(lambda_e)/dt and d(lambda_h)/dt along the velocity v.

    These two signs separate the four caustic-tangent velocity branches at
    any point off the axes; they are the sheet labels used throughout the
    fiber assembly.
    """
    x, y = float(p[0]), float(p[1])
    ec = elliptic_coords(family, p)
    s1 = _coord_rate_sign(family, x, y, ec.lambda_e, v)
    s2 = _coord_rate_sign(family, x, y, ec.lambda_h, v)
    return (s1, s2)


def _coord_rate_sign(family: ConfocalFamily, x, y, lam, v) -> int:
    # implicit differentiation of x^2/(a-l) + y^2/(b-l) = 1
    da, db = family.a - lam, family.b - lam
    gx = 2.0 * x / da if da != 0.0 else 0.0
    gy = 2.0 * y / db if db != 0.0 else 0.0
    denom = (x / da) ** 2 if da != 0.0 else 0.0
    denom += (y / db) ** 2 if db != 0.0 else 0.0
    # d lam = -(gx dx + gy dy)/denom ; only the sign is needed
    val = -(gx * v[0] + gy * v[1])
    if val > 0:
        return 1
    if val < 0:
        return -1
    return 0


def ray_quadric_intersection(family: ConfocalFamily, origin, direction,
                             q: QuadricRef, t_min: float = EPS_GEO) -> list[tuple[float, tuple[float, float]]]:
    """All intersections of the open ray origin + t*direction (t > t_min)
    with the given quadric branch, sorted by t."""
    dx, dy = float(direction[0]), float(direction[1])
    n = math.hypot(dx, dy)
    if n == 0.0:
        raise InvalidInputError("ray with zero direction")
    dx, dy = dx / n, dy / n
    ox, oy = float(origin[0]), float(origin[1])
    lam = q.lam
    ca, cb = family.b - lam, family.a - lam  # coefficients of x^2, y^2
    A = ca * dx * dx + cb * dy * dy
    B = 2.0 * (ca * ox * dx + cb * oy * dy)
    C = ca * ox * ox + cb * oy * oy - ca * cb
    roots: list[float] = []
    if abs(A) < 1e-300:
        if abs(B) > 1e-300:
            roots = [-C / B]
    else:
        disc = B * B - 4.0 * A * C
        if disc >= 0.0:
            r = math.sqrt(disc)
            # numerically stable pair
            qq = -0.5 * (B + math.copysign(r, B)) if B != 0.0 else 0.5 * r
            if qq != 0.0:
                roots = sorted({qq / A, C / qq})
            else:
                roots = [0.0] if disc == 0.0 else sorted([(-B - r) / (2 * A), (-B + r) / (2 * A)])
    hits = []
    for t in roots:
        if t <= t_min:
            continue
        pt = (ox + t * dx, oy + t * dy)
        if _on_branch(family, q, pt):
            hits.append((t, pt))
    hits.sort(key=lambda h: h[0])
    return hits


def _on_branch(family: ConfocalFamily, q: QuadricRef, pt) -> bool:
    x, y = pt
    c = family.c
    if q.kind == KIND_DEGENERATE:
        if abs(y) > EPS_GEO:
            return False
        if q.branch == BRANCH_BETWEEN_FOCI:
            return abs(x) <= c + EPS_GEO
        if q.branch == BRANCH_OUTSIDE_LEFT:
            return x <= -c + EPS_GEO
        if q.branch == BRANCH_OUTSIDE_RIGHT:
            return x >= c - EPS_GEO
        return True
    if q.kind == KIND_HYPERBOLA or q.kind == KIND_VERTICAL_LINE:
        if q.branch == BRANCH_LEFT:
            return x <= EPS_GEO
        if q.branch == BRANCH_RIGHT:
            return x >= -EPS_GEO
    return True


def tangency_defect(family: ConfocalFamily, x, v, lam: float | None = None) -> float:
    """Distance-like residual between the line through (x, v) and the
    quadric `lam` (default: the line's own caustic parameter).

    Uses the support function of the conic, not the caustic integral, so it
    is an independent certificate of tangency.  For lam = b the residual is
    the distance from the line to the nearest focus.
    """
    vx, vy = float(v[0]), float(v[1])
    n = math.hypot(vx, vy)
    if n == 0.0:
        raise InvalidInputError("tangency defect of a zero velocity")
    vx, vy = vx / n, vy / n
    if lam is None:
        lam = caustic_parameter(family, x, v).lam
    nx, ny = -vy, vx  # unit normal of the line
    d = nx * float(x[0]) + ny * float(x[1])
    if abs(lam - family.b) <= EPS_GEO:
        # focal line: distance to the nearest focus
        c = family.c
        return min(abs(nx * c - d), abs(-nx * c - d))
    h2 = (family.a - lam) * nx * nx + (family.b - lam) * ny * ny
    if h2 < 0.0:
        # direction inside the asymptotic cone of the hyperbola: no tangent
        # line with this normal exists; report the full gap
        return abs(d) + math.sqrt(-h2)
    return abs(abs(d) - math.sqrt(h2))


def classify_motion_region(family: ConfocalFamily, lam: float):
    """Predicate for the Jacobi-Chasles region of possible motion at caustic
    value lam: outside the ellipse for lam < b, everything at lam = b, and
    between the hyperbola branches for lam > b.  Caustic boundary included.
    """
    if lam > family.a + EPS_GEO:
        raise InvalidInputError(f"caustic parameter {lam} exceeds a={family.a}")
    b = family.b

    if lam == b:
        return lambda p: True
    if lam < b:
        def pred(p, _f=family, _l=lam):
            return elliptic_coords(_f, p).lambda_e <= _l + EPS_GEO
        return pred

    def pred(p, _f=family, _l=lam):
        return elliptic_coords(_f, p).lambda_h >= _l - EPS_GEO
    return pred


def in_motion_region(family: ConfocalFamily, lam: float, p) -> bool:
    return classify_motion_region(family, lam)(p)
