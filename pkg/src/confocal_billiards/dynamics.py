"""The billiard flow on the unit-speed energy level.

Free flight is a straight line; at a boundary arc the velocity reflects
across the tangent (tangential component kept, normal negated).  A hit
within the corner capture radius of a pi/2 corner reverses the velocity;
a hit at a 3*pi/2 vertex terminates the trajectory, since no continuous
reflection exists there.  The caustic parameter is conserved exactly by
the ideal map; `trajectory` audits the numerical drift and the tangency
of every flight segment with the caustic quadric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import QUARTER, THREE_QUARTER, BilliardDomain, _NormArc
from .errors import IntegrityError, InvalidInputError
from .geometry import CausticValue, caustic_parameter, tangency_defect

EPS_CORNER = 1e-9
_T_MIN = 1e-9


@dataclass(frozen=True)
class PhasePoint:
    x: tuple[float, float]
    v: tuple[float, float]
    caustic: CausticValue
    on_boundary: int | None = None

    @classmethod
    def make(cls, domain: BilliardDomain, x, v, on_boundary=None) -> "PhasePoint":
        vx, vy = float(v[0]), float(v[1])
        n = math.hypot(vx, vy)
        if n == 0.0:
            raise InvalidInputError("zero velocity")
        v = (vx / n, vy / n)
        return cls((float(x[0]), float(x[1])), v,
                   caustic_parameter(domain.family, x, v), on_boundary)


@dataclass(frozen=True)
class TrajectoryStep:
    start: tuple[float, float]
    end: tuple[float, float]
    length: float
    event: str                   # 'reflection' | 'quarter_corner' |
    #                              'terminated_at_singular_vertex' | 'interior_stop'
    arc_index: int | None = None
    corner_index: int | None = None


@dataclass
class ConservationReport:
    caustic: float
    max_drift: float = 0.0
    max_tangency_defect: float = 0.0
    steps: int = 0
    termination: str = "max_steps"

    def __str__(self):
        return (f"caustic lambda = {self.caustic:.12g}\n"
                f"steps = {self.steps}\n"
                f"max relative caustic drift = {self.max_drift:.3e}\n"
                f"max tangency defect = {self.max_tangency_defect:.3e}\n"
                f"termination = {self.termination}")


def reflect(v, tangent):
    """Reflect v across the line spanned by `tangent`; both need not be unit."""
    tx, ty = float(tangent[0]), float(tangent[1])
    n = math.hypot(tx, ty)
    tx, ty = tx / n, ty / n
    d = v[0] * tx + v[1] * ty
    return (2.0 * d * tx - v[0], 2.0 * d * ty - v[1])


def _arc_tangent(domain: BilliardDomain, na: _NormArc, p):
    a, b = domain.family.a, domain.family.b
    if na.on_x_axis:
        return (1.0, 0.0)
    if na.on_y_axis:
        return (0.0, 1.0)
    lam = na.level
    if na.axis == "e":
        return (-p[1] / (b - lam), p[0] / (a - lam))
    return (-p[1] / (b - lam), p[0] / (a - lam))


def _arc_hits(domain: BilliardDomain, na: _NormArc, ox, oy, dx, dy):
    """Positive ray parameters where the ray crosses the arc, as a list."""
    a, b = domain.family.a, domain.family.b
    out = []
    if na.on_x_axis:
        if dy != 0.0:
            t = -oy / dy
            if t > _T_MIN:
                x = ox + t * dx
                h = math.copysign(1.0, x) if x != 0 else 0
                xs = abs(x)
                if na.axis == "e":
                    lo, hi = math.sqrt(a - na.dual[1]), math.sqrt(a - na.dual[0])
                else:
                    lo, hi = math.sqrt(a - na.dual[1]), math.sqrt(a - na.dual[0])
                if lo - 1e-12 <= xs <= hi + 1e-12 and (h == na.sx or xs < 1e-12):
                    out.append(t)
        return out
    if na.on_y_axis:
        if dx != 0.0:
            t = -ox / dx
            if t > _T_MIN:
                y = oy + t * dy
                le = b - y * y
                if na.dual[0] - 1e-12 <= le <= na.dual[1] + 1e-12 and \
                        (math.copysign(1.0, y) == na.sy or abs(y) < 1e-12):
                    out.append(t)
        return out
    lam = na.level
    ca, cb = b - lam, a - lam
    A = ca * dx * dx + cb * dy * dy
    B = 2.0 * (ca * ox * dx + cb * oy * dy)
    C = ca * ox * ox + cb * oy * oy - ca * cb
    if abs(A) < 1e-300:
        roots = [-C / B] if abs(B) > 1e-300 else []
    else:
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return out
        r = math.sqrt(disc)
        if B != 0.0:
            q = -0.5 * (B + math.copysign(r, B))
            roots = [q / A]
            if q != 0.0:
                roots.append(C / q)
        else:
            roots = [r / (2 * A), -r / (2 * A)]
    for t in roots:
        if t <= _T_MIN:
            continue
        x, y = ox + t * dx, oy + t * dy
        if na.axis == "e":
            dual = a - x * x * (a - b) / (a - lam)  # lambda_h on this ellipse
        else:
            dual = b - y * y * (a - b) / (lam - b)  # lambda_e on this hyperbola
        if not (na.dual[0] - 1e-10 <= dual <= na.dual[1] + 1e-10):
            continue
        if abs(x) > 1e-10 and math.copysign(1, x) != na.sx:
            continue
        if abs(y) > 1e-10 and math.copysign(1, y) != na.sy:
            continue
        out.append(t)
    return out


def step(p: PhasePoint, domain: BilliardDomain):
    """Advance to the nearest boundary event.  Returns (TrajectoryStep,
    next PhasePoint or None)."""
    ox, oy = p.x
    dx, dy = p.v
    best_t, best_arc = math.inf, None
    for k, na in enumerate(domain.norm):
        for t in _arc_hits(domain, na, ox, oy, dx, dy):
            if t < best_t:
                best_t, best_arc = t, k
    if not math.isfinite(best_t):
        raise IntegrityError(
            f"no forward boundary intersection from x={p.x}, v={p.v}")
    hit = (ox + best_t * dx, oy + best_t * dy)
    # corner capture
    for ci, c in enumerate(domain.corners()):
        if math.hypot(hit[0] - c.point[0], hit[1] - c.point[1]) <= EPS_CORNER:
            if c.angle_class == THREE_QUARTER:
                s = TrajectoryStep(p.x, c.point, best_t,
                                   "terminated_at_singular_vertex", corner_index=ci)
                return s, None
            s = TrajectoryStep(p.x, c.point, best_t, "quarter_corner", corner_index=ci)
            nxt = PhasePoint.make(domain, c.point, (-dx, -dy), on_boundary=None)
            return s, nxt
    na = domain.norm[best_arc]
    tang = _arc_tangent(domain, na, hit)
    nv = reflect((dx, dy), tang)
    s = TrajectoryStep(p.x, hit, best_t, "reflection", arc_index=na.src)
    return s, PhasePoint.make(domain, hit, nv, on_boundary=na.src)


def trajectory(p0: PhasePoint, domain: BilliardDomain, max_steps: int):
    """Iterate `step` and audit conservation.  Returns (steps, report)."""
    if max_steps < 1:
        raise InvalidInputError("max_steps must be >= 1")
    lam0 = p0.caustic.lam
    rep = ConservationReport(caustic=lam0)
    scale = max(1.0, abs(lam0))
    steps: list[TrajectoryStep] = []
    p = p0
    for _ in range(max_steps):
        rep.max_tangency_defect = max(
            rep.max_tangency_defect,
            tangency_defect(domain.family, p.x, p.v, lam0))
        s, nxt = step(p, domain)
        steps.append(s)
        rep.steps += 1
        if nxt is None:
            rep.termination = "singular_vertex"
            return steps, rep
        rep.max_drift = max(rep.max_drift, abs(nxt.caustic.lam - lam0) / scale)
        p = nxt
    return steps, rep


# -- vectorized batch flow (used by the Monte-Carlo audits) -------------------


def _batch_arc_hits(domain, na, X, V):
    """Nearest valid positive parameter per ray for one arc (inf if none)."""
    a, b = domain.family.a, domain.family.b
    ox, oy = X[:, 0], X[:, 1]
    dx, dy = V[:, 0], V[:, 1]
    inf = np.inf
    if na.on_x_axis or na.on_y_axis:
        if na.on_x_axis:
            num, den, coord = -oy, dy, ox
        else:
            num, den, coord = -ox, dx, oy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(den) > 1e-300, num / den, inf)
        pos = coord + t * (dx if na.on_x_axis else dy)
        if na.on_x_axis:
            lo = math.sqrt(a - na.dual[1])
            hi = math.sqrt(a - na.dual[0])
            ok = (np.abs(pos) >= lo - 1e-12) & (np.abs(pos) <= hi + 1e-12)
            ok &= (np.sign(pos) == na.sx) | (np.abs(pos) < 1e-12)
        else:
            le = b - pos * pos
            ok = (le >= na.dual[0] - 1e-12) & (le <= na.dual[1] + 1e-12)
            ok &= (np.sign(pos) == na.sy) | (np.abs(pos) < 1e-12)
        return np.where(ok & (t > _T_MIN), t, inf)
    lam = na.level
    ca, cb = b - lam, a - lam
    A = ca * dx * dx + cb * dy * dy
    B = 2.0 * (ca * ox * dx + cb * oy * dy)
    C = ca * ox * ox + cb * oy * oy - ca * cb
    disc = B * B - 4.0 * A * C
    best = np.full(len(X), inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(np.maximum(disc, 0.0))
        q = -0.5 * (B + np.where(B >= 0, r, -r))
        t1 = np.where(np.abs(A) > 1e-300, q / A, inf)
        t2 = np.where(np.abs(q) > 1e-300, C / q, inf)
    for t in (t1, t2):
        t = np.where((disc >= 0.0) & (t > _T_MIN), t, inf)
        x = ox + t * dx
        y = oy + t * dy
        if na.axis == "e":
            dual = a - x * x * (a - b) / (a - lam)
        else:
            dual = b - y * y * (a - b) / (lam - b)
        ok = (dual >= na.dual[0] - 1e-10) & (dual <= na.dual[1] + 1e-10)
        ok &= (np.sign(x) == na.sx) | (np.abs(x) < 1e-10)
        ok &= (np.sign(y) == na.sy) | (np.abs(y) < 1e-10)
        t = np.where(ok, t, inf)
        best = np.minimum(best, t)
    return best


def flow_batch(domain: BilliardDomain, X0, V0, n_steps: int,
               record: bool = False):
    """Vectorized billiard flow for a batch of unit-speed phase points.

    Returns a dict with per-trajectory max caustic drift, max tangency
    defect, a terminated mask, and (with record=True) the phase history
    arrays of shape (n_steps + 1, M, 2).
    """
    fam = domain.family
    a, b = fam.a, fam.b
    X = np.array(X0, dtype=float)
    V = np.array(V0, dtype=float)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    M = len(X)
    lam0 = (b * V[:, 0] ** 2 + a * V[:, 1] ** 2
            - (V[:, 0] * X[:, 1] - X[:, 0] * V[:, 1]) ** 2)
    scale = np.maximum(1.0, np.abs(lam0))
    drift = np.zeros(M)
    defect = np.zeros(M)
    alive = np.ones(M, dtype=bool)
    corners = np.array([c.point for c in domain.corners()]) if domain.corners() else np.zeros((0, 2))
    ckind = np.array([c.angle_class == THREE_QUARTER for c in domain.corners()], dtype=bool)
    hist_x = hist_v = None
    if record:
        hist_x = np.empty((n_steps + 1, M, 2))
        hist_v = np.empty((n_steps + 1, M, 2))
        hist_x[0], hist_v[0] = X, V
    for k in range(n_steps):
        t_best = np.full(M, np.inf)
        arc_best = np.full(M, -1)
        for ai, na in enumerate(domain.norm):
            t = _batch_arc_hits(domain, na, X, V)
            better = alive & (t < t_best)
            t_best[better] = t[better]
            arc_best[better] = ai
        if np.any(alive & ~np.isfinite(t_best)):
            bad = np.flatnonzero(alive & ~np.isfinite(t_best))[0]
            raise IntegrityError(
                f"trajectory escaped the domain at x={X[bad]}, v={V[bad]}")
        # per-segment tangency audit against the initial caustic
        seg_def = _tangency_defect_batch(fam, X, V, lam0)
        defect[alive] = np.maximum(defect[alive], seg_def[alive])
        hit = X + t_best[:, None] * V
        hit[~alive] = X[~alive]
        # corner capture
        newV = _reflect_batch(domain, arc_best, hit, V)
        if len(corners):
            d2 = ((hit[:, None, :] - corners[None, :, :]) ** 2).sum(axis=2)
            ci = np.argmin(d2, axis=1)
            at_corner = d2[np.arange(M), ci] <= EPS_CORNER ** 2
            sing = at_corner & ckind[ci]
            quarter = at_corner & ~ckind[ci]
            newV[quarter] = -V[quarter]
            hit[at_corner] = corners[ci[at_corner]]
            alive = alive & ~sing
        X = np.where(alive[:, None], hit, X)
        V = np.where(alive[:, None], newV, V)
        lam = (b * V[:, 0] ** 2 + a * V[:, 1] ** 2
               - (V[:, 0] * X[:, 1] - X[:, 0] * V[:, 1]) ** 2)
        drift[alive] = np.maximum(drift[alive], np.abs(lam - lam0)[alive] / scale[alive])
        if record:
            hist_x[k + 1], hist_v[k + 1] = X, V
    return {
        "max_drift": drift,
        "max_tangency_defect": defect,
        "alive": alive,
        "X": X, "V": V,
        "history_x": hist_x, "history_v": hist_v,
        "caustic": lam0,
    }


def _reflect_batch(domain, arc_best, hit, V):
    a, b = domain.family.a, domain.family.b
    out = V.copy()
    for ai, na in enumerate(domain.norm):
        m = arc_best == ai
        if not np.any(m):
            continue
        if na.on_x_axis:
            tx = np.ones(m.sum())
            ty = np.zeros(m.sum())
        elif na.on_y_axis:
            tx = np.zeros(m.sum())
            ty = np.ones(m.sum())
        else:
            tx = -hit[m, 1] / (b - na.level)
            ty = hit[m, 0] / (a - na.level)
        nrm = np.hypot(tx, ty)
        tx, ty = tx / nrm, ty / nrm
        d = V[m, 0] * tx + V[m, 1] * ty
        out[m, 0] = 2 * d * tx - V[m, 0]
        out[m, 1] = 2 * d * ty - V[m, 1]
    return out


def _tangency_defect_batch(fam, X, V, lam):
    nx, ny = -V[:, 1], V[:, 0]
    d = nx * X[:, 0] + ny * X[:, 1]
    res = np.empty(len(X))
    focal = np.abs(lam - fam.b) <= 1e-9
    h2 = (fam.a - lam) * nx * nx + (fam.b - lam) * ny * ny
    with np.errstate(invalid="ignore"):
        res = np.abs(np.abs(d) - np.sqrt(np.maximum(h2, 0.0)))
    res = np.where(h2 < 0, np.abs(d) + np.sqrt(np.maximum(-h2, 0.0)), res)
    if np.any(focal):
        c = fam.c
        res[focal] = np.minimum(np.abs(nx[focal] * c - d[focal]),
                                np.abs(-nx[focal] * c - d[focal]))
    return res


def sample_phase_points(domain: BilliardDomain, lam: float, count: int,
                        rng: np.random.Generator):
    """Random unit-speed phase points on the level `lam`: positions are
    rejection-sampled from the motion region, velocities drawn uniformly
    from the four caustic-tangent branches."""
    fam = domain.family
    a, b = fam.a, fam.b
    x0, y0, x1, y1 = domain.bbox()
    pts = []
    guard = 0
    while len(pts) < count:
        guard += 1
        if guard > 200000:
            raise IntegrityError("rejection sampling failed to fill the fiber sample")
        p = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        margin = 1e-6
        probe = [(p[0] + sx * margin, p[1] + sy * margin)
                 for sx in (-1, 1) for sy in (-1, 1)]
        if not all(domain.contains(probe)):
            continue
        # velocity directions with the prescribed caustic parameter:
        # b vx^2 + a vy^2 - (vx y - x vy)^2 = lam, |v| = 1
        sols = _tangent_directions(fam, p, lam)
        if not sols:
            continue
        v = sols[rng.integers(0, len(sols))]
        pts.append((p, v))
    return pts


def _tangent_directions(fam, p, lam):
    """All unit velocities at p with caustic parameter lam."""
    x, y = p
    a, b = fam.a, fam.b
    # lam(t) = (b - y^2) cos^2 t + (a - x^2) sin^2 t + 2 x y cos t sin t
    #        = base + P cos 2t + Q sin 2t
    base = 0.5 * ((b - y * y) + (a - x * x))
    P = 0.5 * ((b - y * y) - (a - x * x))
    Q = x * y
    R = lam - base
    amp = math.hypot(P, Q)
    if amp < 1e-15 or abs(R) > amp:
        return []
    phi = math.atan2(Q, P)
    delta = math.acos(max(-1.0, min(1.0, R / amp)))
    ts = []
    for two_t in (phi + delta, phi - delta):
        t = 0.5 * two_t
        ts.extend([t, t + math.pi])
    out = []
    for t in ts:
        v = (math.cos(t), math.sin(t))
        if all(abs(v[0] - w[0]) > 1e-9 or abs(v[1] - w[1]) > 1e-9 for w in out):
            out.append(v)
    return out
