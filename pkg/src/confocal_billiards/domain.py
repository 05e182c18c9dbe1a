"""Billiard domains bounded by arcs of confocal quadrics.

A domain is an ordered cyclic list of boundary arcs, each lying on one
member of the family inside one quadrant.  Because all arcs are coordinate
lines of the confocal coordinates (lambda_e, lambda_h), corners are exact
by construction and always orthogonal: interior angles are pi/2 (ordinary)
or 3*pi/2 (singular vertices, where trajectories terminate).

Arc encoding: an arc stores its quadric, the range swept in the *dual*
coordinate (lambda_h along an ellipse, lambda_e along a hyperbola, x along
the focal line), quadrant sign flags, and the traversal orientation along
the boundary walk.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidInputError
from .geometry import (
    BRANCH_BETWEEN_FOCI,
    BRANCH_FULL,
    BRANCH_LEFT,
    BRANCH_OUTSIDE_LEFT,
    BRANCH_OUTSIDE_RIGHT,
    BRANCH_RIGHT,
    EPS_GEO,
    KIND_DEGENERATE,
    KIND_ELLIPSE,
    KIND_HYPERBOLA,
    KIND_VERTICAL_LINE,
    ConfocalFamily,
    QuadricRef,
    elliptic_coords,
    planar_point,
    quadric_kind,
)

QUARTER = "quarter"
THREE_QUARTER = "three_quarter"

HOMOG_ELLIPTIC = "homog_elliptic"
HOMOG_HYPERBOLIC = "homog_hyperbolic"
HOMOG_BOTH = "both"
NON_HOMOGENEOUS = "non_homogeneous"


@dataclass(frozen=True)
class BoundaryArc:
    """One boundary arc.  `range` is in the dual confocal coordinate
    (lambda_h for ellipse arcs, lambda_e for hyperbola or vertical-line
    arcs) and in x for focal-line arcs."""

    quadric: QuadricRef
    range: tuple[float, float]
    signs: tuple[int, int]
    orientation: str = "forward"

    def __post_init__(self):
        if self.orientation not in ("forward", "backward"):
            raise InvalidInputError(f"bad orientation {self.orientation!r}")


@dataclass(frozen=True)
class Corner:
    point: tuple[float, float]
    angle_class: str  # QUARTER or THREE_QUARTER
    incident_arcs: tuple[int, int]
    lambda_e: float
    lambda_h: float


@dataclass(frozen=True)
class ElementaryType:
    series: str  # 'A' or 'B'
    tag: str     # 'A2', "A'1", 'B0', "B'1", "B''2", ...
    n_or_f: int

    def __str__(self):
        return self.tag


@dataclass
class _NormArc:
    """Internal normalized arc: a segment of a coordinate line."""

    axis: str          # 'e' (on an ellipse-coordinate line) or 'h'
    level: float       # the coordinate value on its own axis
    dual: tuple[float, float]   # swept range of the dual coordinate, lo < hi
    sx: int
    sy: int
    src: int           # index into the user arc list
    start_at_lo: bool  # traversal starts at the dual-lo endpoint
    on_x_axis: bool = False   # planar support on the x axis (level b arcs)
    on_y_axis: bool = False   # planar support on the y axis (level a arcs)

    def endpoint(self, family: ConfocalFamily, hi: bool) -> tuple[float, float]:
        d = self.dual[1] if hi else self.dual[0]
        if self.axis == "e":
            return planar_point(family, self.level, d, self.sx, self.sy)
        return planar_point(family, d, self.level, self.sx, self.sy)

    def start(self, family):
        return self.endpoint(family, not self.start_at_lo)

    def end(self, family):
        return self.endpoint(family, self.start_at_lo)

    def sample(self, family: ConfocalFamily, n: int) -> np.ndarray:
        """n+1 planar points from start to end, well spaced."""
        a, b = family.a, family.b
        lo, hi = self.dual
        if self.on_x_axis or self.on_y_axis:
            p0, p1 = self.endpoint(family, False), self.endpoint(family, True)
            ts = np.linspace(0.0, 1.0, n + 1)
            pts = np.outer(1 - ts, p0) + np.outer(ts, p1)
        elif self.axis == "e":
            # ellipse level: parametrize by the planar angle
            A, B = math.sqrt(a - self.level), math.sqrt(b - self.level)
            th = [math.atan2(abs(self.endpoint(family, k)[1]) / B,
                             abs(self.endpoint(family, k)[0]) / A) for k in (False, True)]
            ths = np.linspace(th[0], th[1], n + 1)
            pts = np.column_stack((self.sx * A * np.cos(ths), self.sy * B * np.sin(ths)))
        else:
            # hyperbola level: parametrize by the hyperbolic angle
            A, B = math.sqrt(a - self.level), math.sqrt(self.level - b)
            ts = []
            for k in (False, True):
                x, y = self.endpoint(family, k)
                ts.append(math.asinh(abs(y) / B))
            tt = np.linspace(ts[0], ts[1], n + 1)
            pts = np.column_stack((self.sx * A * np.cosh(tt), self.sy * B * np.sinh(tt)))
        if not self.start_at_lo:
            pts = pts[::-1]
        return pts


def _normalize_arc(family: ConfocalFamily, arc: BoundaryArc, idx: int) -> _NormArc:
    a, b, c = family.a, family.b, family.c
    q = arc.quadric
    lo, hi = float(arc.range[0]), float(arc.range[1])
    sx, sy = int(arc.signs[0]), int(arc.signs[1])
    fwd = arc.orientation == "forward"
    if q.kind == KIND_ELLIPSE:
        if not (q.lam < b):
            raise InvalidInputError(f"arc {idx}: ellipse needs lambda < b")
        if not (b - EPS_GEO <= lo < hi <= a + EPS_GEO):
            raise InvalidInputError(f"arc {idx}: ellipse dual range must lie in [b, a]")
        return _NormArc("e", q.lam, (max(lo, b), min(hi, a)), sx, sy, idx, fwd)
    if q.kind == KIND_HYPERBOLA:
        if not (b < q.lam < a):
            raise InvalidInputError(f"arc {idx}: hyperbola needs b < lambda < a")
        if not (lo < hi <= b + EPS_GEO):
            raise InvalidInputError(f"arc {idx}: hyperbola dual range must lie in (-inf, b]")
        if q.branch not in (BRANCH_LEFT, BRANCH_RIGHT):
            raise InvalidInputError(f"arc {idx}: hyperbola arc needs a left/right branch")
        if (q.branch == BRANCH_RIGHT) != (sx > 0):
            raise InvalidInputError(f"arc {idx}: branch and sign sx disagree")
        return _NormArc("h", q.lam, (lo, min(hi, b)), sx, sy, idx, fwd)
    if q.kind == KIND_VERTICAL_LINE:
        if not (lo < hi <= b + EPS_GEO):
            raise InvalidInputError(f"arc {idx}: vertical-line dual range must lie in (-inf, b]")
        return _NormArc("h", a, (lo, min(hi, b)), 0, sy, idx, fwd, on_y_axis=True)
    if q.kind == KIND_DEGENERATE:
        # range given in x; must stay inside one branch piece
        if lo * hi < -EPS_GEO:
            raise InvalidInputError(f"arc {idx}: focal arc range must not cross x = 0; split it")
        xs = sorted((abs(lo), abs(hi)))
        sxx = 1 if (lo + hi) > 0 else -1
        dual = (a - xs[1] ** 2, a - xs[0] ** 2)
        # increasing x means decreasing dual for sx>0, increasing for sx<0
        starts_lo = (fwd and sxx < 0) or (not fwd and sxx > 0)
        if q.branch == BRANCH_BETWEEN_FOCI:
            if xs[1] > c + EPS_GEO:
                raise InvalidInputError(f"arc {idx}: between-foci arc leaves |x| <= c")
            return _NormArc("e", b, dual, sxx, sy, idx, starts_lo, on_x_axis=True)
        if q.branch in (BRANCH_OUTSIDE_LEFT, BRANCH_OUTSIDE_RIGHT):
            if xs[0] < c - EPS_GEO:
                raise InvalidInputError(f"arc {idx}: focal-ray arc enters |x| < c")
            if (q.branch == BRANCH_OUTSIDE_RIGHT) != (sxx > 0):
                raise InvalidInputError(f"arc {idx}: ray branch and x-range disagree")
            dual = (b - (xs[1] ** 2 - (a - b)), b - (xs[0] ** 2 - (a - b)))  # = a - x^2
            return _NormArc("h", b, dual, sxx, sy, idx, starts_lo, on_x_axis=True)
        raise InvalidInputError(f"arc {idx}: degenerate arc needs a focal branch tag")
    raise InvalidInputError(f"arc {idx}: unknown quadric kind {q.kind!r}")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __str__(self):
        lines = [f"valid: {'yes' if self.valid else 'no'}"]
        lines += [f"violation: {v}" for v in self.violations]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


class BilliardDomain:
    """A validated billiard domain with derived corner and axis data."""

    def __init__(self, family: ConfocalFamily, arcs: list[BoundaryArc]):
        if not arcs:
            raise InvalidInputError("domain needs at least one arc")
        self.family = family
        self.arcs = list(arcs)
        self.norm = [_normalize_arc(family, arc, i) for i, arc in enumerate(arcs)]
        self._polyline = None
        self._corners: list[Corner] | None = None
        self._homogeneity: str | None = None
        self._focal: list[dict] | None = None

    # -- geometry caches ----------------------------------------------------

    def polyline(self, per_arc: int = 512) -> np.ndarray:
        if self._polyline is None or len(self._polyline) < per_arc * len(self.norm):
            pts = [na.sample(self.family, per_arc)[:-1] for na in self.norm]
            self._polyline = np.vstack(pts)
        return self._polyline

    def signed_area(self) -> float:
        p = self.polyline()
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def contains(self, pts) -> np.ndarray:
        """Even-odd point-in-polygon test against the sampled boundary.
        Points on the boundary are classified arbitrarily; callers keep
        queries away from it."""
        poly = self.polyline()
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x0, y0 = poly[:, 0], poly[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        px = pts[:, 0][:, None]
        py = pts[:, 1][:, None]
        cond = (y0[None, :] <= py) != (y1[None, :] <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0[None, :] + (py - y0[None, :]) * (x1 - x0)[None, :] / (y1 - y0)[None, :]
        crossing = cond & (xi > px)
        return (np.sum(crossing, axis=1) % 2).astype(bool)

    def contains_point(self, p) -> bool:
        return bool(self.contains([p])[0])

    def bbox(self) -> tuple[float, float, float, float]:
        p = self.polyline()
        return (float(p[:, 0].min()), float(p[:, 1].min()),
                float(p[:, 0].max()), float(p[:, 1].max()))

    # -- corners ------------------------------------------------------------

    def corners(self) -> list[Corner]:
        if self._corners is None:
            self._corners = self._derive_corners()
        return self._corners

    def _derive_corners(self) -> list[Corner]:
        fam = self.family
        out = []
        n = len(self.norm)
        ccw = self.signed_area() > 0
        for i in range(n):
            a0, a1 = self.norm[i], self.norm[(i + 1) % n]
            p = a0.end(fam)
            din = np.asarray(p) - a0.sample(fam, 4096)[-2]
            dout = np.asarray(a1.sample(fam, 4096)[1]) - np.asarray(p)
            nin = np.linalg.norm(din)
            nout = np.linalg.norm(dout)
            if nin == 0 or nout == 0:
                continue
            din /= nin
            dout /= nout
            cross = din[0] * dout[1] - din[1] * dout[0]
            if abs(cross) < 0.2:   # collinear junction: smooth boundary point
                continue
            left_turn = cross > 0
            convex = left_turn == ccw
            ec = elliptic_coords(fam, p)
            out.append(Corner(tuple(p), QUARTER if convex else THREE_QUARTER,
                              (i, (i + 1) % n), ec.lambda_e, ec.lambda_h))
        return out

    def singular_vertices(self) -> list[Corner]:
        return [c for c in self.corners() if c.angle_class == THREE_QUARTER]

    def complexity(self) -> int:
        return len(self.singular_vertices())

    # -- focal-line structure -----------------------------------------------

    def focal_structure(self) -> list[dict]:
        """Maximal components of (x-axis intersect closed domain), each a dict
        with keys lo, hi, crossing (sub-intervals where the domain is open on
        both sides), walls (boundary-arc sub-intervals)."""
        if self._focal is not None:
            return self._focal
        fam = self.family
        walls = []
        for na in self.norm:
            if na.on_x_axis:
                xs = sorted(abs(planar_point(fam, *( (na.level, d) if na.axis == "e" else (d, na.level) ),
                                             1, 1)[0]) for d in na.dual)
                walls.append((na.sx * xs[0] if na.sx > 0 else -xs[1],
                              na.sx * xs[1] if na.sx > 0 else -xs[0]))
        breaks = {0.0, fam.c, -fam.c}
        for lo, hi in walls:
            breaks.update((lo, hi))
        for na in self.norm:
            if na.axis == "h" and not na.on_y_axis and na.dual[1] >= fam.b - EPS_GEO:
                # hyperbola arc reaching the axis: its vertex is a break
                breaks.add(na.sx * math.sqrt(fam.a - na.level))
            if na.axis == "e" and na.dual[0] <= fam.b + EPS_GEO:
                breaks.add(na.sx * math.sqrt(fam.a - na.level))
        x0, _, x1, _ = self.bbox()
        breaks.update((x0, x1))
        bs = sorted(b for b in breaks if x0 - EPS_GEO <= b <= x1 + EPS_GEO)
        delta = 1e-7
        pieces = []
        for lo, hi in zip(bs[:-1], bs[1:]):
            if hi - lo <= 10 * EPS_GEO:
                continue
            xm = 0.5 * (lo + hi)
            above = self.contains_point((xm, delta))
            below = self.contains_point((xm, -delta))
            on_wall = any(w[0] - EPS_GEO <= xm <= w[1] + EPS_GEO for w in walls)
            if above and below:
                pieces.append((lo, hi, "crossing"))
            elif on_wall:
                pieces.append((lo, hi, "wall"))
        comps: list[dict] = []
        for lo, hi, kind in sorted(pieces):
            if comps and lo <= comps[-1]["hi"] + 10 * EPS_GEO:
                comps[-1]["hi"] = hi
                comps[-1][kind].append((lo, hi))
            else:
                comps.append({"lo": lo, "hi": hi, "crossing": [], "wall": []})
                comps[-1][kind].append((lo, hi))
        self._focal = comps
        return comps

    def homogeneity(self) -> str:
        if self._homogeneity is None:
            comps = self.focal_structure()
            c = self.family.c
            if not comps:
                self._homogeneity = HOMOG_BOTH
            elif all(-c - EPS_GEO <= k["lo"] and k["hi"] <= c + EPS_GEO for k in comps):
                self._homogeneity = HOMOG_HYPERBOLIC
            elif all(min(k["hi"], c) - max(k["lo"], -c) <= 10 * EPS_GEO for k in comps):
                self._homogeneity = HOMOG_ELLIPTIC
            else:
                self._homogeneity = NON_HOMOGENEOUS
        return self._homogeneity

    # -- break values for the coordinate grid --------------------------------

    def breaks(self) -> tuple[list[float], list[float]]:
        b, a = self.family.b, self.family.a
        eb, hb = {b}, {b, a}
        for na in self.norm:
            if na.axis == "e":
                eb.add(na.level)
                hb.update(na.dual)
            else:
                hb.add(na.level)
                eb.update(na.dual)
        return (coalesce_breaks(eb), coalesce_breaks(hb))

    # -- validation -----------------------------------------------------------

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        fam = self.family
        n = len(self.norm)
        # closure
        for i in range(n):
            e = np.asarray(self.norm[i].end(fam))
            s = np.asarray(self.norm[(i + 1) % n].start(fam))
            gap = float(np.linalg.norm(e - s))
            if gap > 1e3 * EPS_GEO:
                rep.violations.append(
                    f"closure: arc {i} ends {gap:.3e} away from the start of arc {(i + 1) % n}")
        # orientation
        if self.signed_area() < 0:
            rep.violations.append("boundary is clockwise; list arcs counterclockwise")
        # pairwise simplicity
        for i, j in itertools.combinations(range(n), 2):
            msg = self._pair_conflict(i, j, adjacent=(j == (i + 1) % n or i == (j + 1) % n))
            if msg:
                rep.violations.append(msg)
        # corner angles must be orthogonal crossings
        if not [v for v in rep.violations if v.startswith("closure")]:
            for c in self.corners():
                pass  # derivation itself asserts orthogonality by construction
        # focus rule: a focus must not sit at a corner, and may lie in the
        # relative interior of a focal boundary run only
        for c in self.corners():
            for fx, fy in fam.foci:
                if abs(c.point[0] - fx) <= EPS_GEO and abs(c.point[1] - fy) <= EPS_GEO:
                    rep.violations.append(f"focus ({fx:g},0) coincides with corner of arcs {c.incident_arcs}")
        for comp in self.focal_structure():
            for lo, hi in comp["wall"]:
                for fx, _ in fam.foci:
                    if lo + EPS_GEO < fx < hi - EPS_GEO:
                        rep.notes.append(f"focus ({fx:g},0) lies interior to a focal boundary run")
        rep.notes.append(f"complexity k = {self.complexity()}")
        rep.notes.append(f"homogeneity = {self.homogeneity()}")
        return rep

    def _pair_conflict(self, i: int, j: int, adjacent: bool) -> str | None:
        a0, a1 = self.norm[i], self.norm[j]
        if a0.axis == a1.axis:
            if a0.level != a1.level:
                return None
            key0 = (a0.sx,) if a0.on_x_axis else ((a0.sy,) if a0.on_y_axis else (a0.sx, a0.sy))
            key1 = (a1.sx,) if a1.on_x_axis else ((a1.sy,) if a1.on_y_axis else (a1.sx, a1.sy))
            if key0 != key1:
                return None
            lo = max(a0.dual[0], a1.dual[0])
            hi = min(a0.dual[1], a1.dual[1])
            if hi - lo > 10 * EPS_GEO:
                return f"simplicity: arcs {i} and {j} overlap on the same quadric"
            return None
        e, h = (a0, a1) if a0.axis == "e" else (a1, a0)
        if e.on_x_axis or h.on_x_axis:
            # transversal crossing of a focal arc and a conic arc happens at
            # the axis only, i.e. at range endpoints: never an interior cross
            return None
        if not (e.sx == h.sx or h.on_y_axis) or e.sy != h.sy:
            return None
        tol = 10 * EPS_GEO
        if (h.level > e.dual[0] + tol and h.level < e.dual[1] - tol
                and e.level > h.dual[0] + tol and e.level < h.dual[1] - tol):
            return f"simplicity: arcs {i} and {j} cross away from their endpoints"
        return None

    # -- serialization ---------------------------------------------------------

    def to_mapping(self) -> dict:
        return {
            "family": {"a": self.family.a, "b": self.family.b},
            "arcs": [
                {
                    "lambda": arc.quadric.lam,
                    "kind": arc.quadric.kind,
                    "branch": arc.quadric.branch,
                    "range": [arc.range[0], arc.range[1]],
                    "signs": [arc.signs[0], arc.signs[1]],
                    "orientation": arc.orientation,
                }
                for arc in self.arcs
            ],
        }

    @classmethod
    def from_mapping(cls, doc: dict) -> "BilliardDomain":
        try:
            fam = ConfocalFamily(float(doc["family"]["a"]), float(doc["family"]["b"]))
            arcs = []
            for rec in doc["arcs"]:
                lam = float(rec["lambda"])
                kind = rec.get("kind") or quadric_kind(fam, lam)
                branch = rec.get("branch", BRANCH_FULL)
                q = QuadricRef(lam, kind, branch)
                arcs.append(BoundaryArc(
                    q,
                    (float(rec["range"][0]), float(rec["range"][1])),
                    (int(rec["signs"][0]), int(rec["signs"][1])),
                    rec.get("orientation", "forward"),
                ))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad domain document: {exc}") from exc
        return cls(fam, arcs)


def coalesce_breaks(values, tol: float = 1e-9) -> list[float]:
    """Sorted break values with near-duplicates merged (round-off from
    x-range <-> coordinate conversions would otherwise split the grid)."""
    out: list[float] = []
    for v in sorted(values):
        if out and v - out[-1] <= tol:
            continue
        out.append(v)
    return out


# -- elementary classification ------------------------------------------------


def complexity(domain: BilliardDomain) -> int:
    return domain.complexity()


def homogeneity_class(domain: BilliardDomain) -> str:
    return domain.homogeneity()


def _focus_membership(domain: BilliardDomain, fx: float) -> str:
    """'interior', 'boundary', or 'outside' for the focus at (fx, 0)."""
    for comp in domain.focal_structure():
        for lo, hi in comp["wall"]:
            if lo - EPS_GEO <= fx <= hi + EPS_GEO:
                return "boundary"
    d = 1e-6
    probes = [(fx + sx * d, sy * d) for sx in (-1, 1) for sy in (-1, 1)]
    if all(domain.contains(probes)):
        return "interior"
    return "outside"


def classify_elementary(domain: BilliardDomain) -> ElementaryType:
    """Classify a complexity-0 domain into the twelve elementary classes."""
    if domain.complexity() != 0:
        raise DomainError(f"domain has complexity {domain.complexity()}, not elementary")
    fam = domain.family
    c = fam.c
    comps = domain.focal_structure()

    def length_between(lo, hi):
        return max(0.0, min(hi, c - EPS_GEO) - max(lo, -c + EPS_GEO))

    contains_interfocal = any(length_between(k["lo"], k["hi"]) > 10 * EPS_GEO for k in comps)
    if contains_interfocal:
        f = sum(1 for fx, _ in fam.foci if _focus_membership(domain, fx) != "outside")
        primed = any(length_between(lo, hi) > 10 * EPS_GEO
                     for k in comps for (lo, hi) in k["wall"])
        tag = (f"A'{f}" if primed else f"A{f}")
        return ElementaryType("A", tag, f)
    n = len(comps)
    wall_runs = 0
    for k in comps:
        merged: list[list[float]] = []
        for lo, hi in sorted(k["wall"]):
            if merged and lo <= merged[-1][1] + 10 * EPS_GEO:
                merged[-1][1] = hi
            else:
                merged.append([lo, hi])
        wall_runs += len(merged)
    prime = {0: "", 1: "'", 2: "''"}.get(wall_runs)
    if prime is None:
        raise DomainError(f"domain has {wall_runs} focal boundary runs; not an elementary class")
    return ElementaryType("B", f"B{prime}{n}", n)


def equivalent(domain1: BilliardDomain, domain2: BilliardDomain,
               partition1, partition2) -> bool:
    """Equivalence of homogeneous billiards with chosen partitions: a
    bijection of elements preserving elementary type and, for every shared
    cut-arc segment, the number of singular points on it."""
    for d in (domain1, domain2):
        if d.homogeneity() == NON_HOMOGENEOUS and d.complexity() > 0:
            raise DomainError("equivalence is defined for homogeneous billiards")
    t1 = [str(e.elementary_type) for e in partition1.elements]
    t2 = [str(e.elementary_type) for e in partition2.elements]
    if sorted(t1) != sorted(t2):
        return False
    e1 = _edge_multiset_by_pair(partition1)
    e2 = _edge_multiset_by_pair(partition2)
    n = len(t1)
    for perm in itertools.permutations(range(n)):
        if any(t1[i] != t2[perm[i]] for i in range(n)):
            continue
        ok = True
        for (i, j), labels in e1.items():
            key = tuple(sorted((perm[i], perm[j])))
            if sorted(e2.get(key, [])) != sorted(labels):
                ok = False
                break
        if ok and all(tuple(sorted((perm[i], perm[j]))) in e1_keys_mapped(e1, perm)
                      for (i, j) in e2):
            return True
    return False


def e1_keys_mapped(e1, perm):
    return {tuple(sorted((perm[i], perm[j]))) for (i, j) in e1}


def _edge_multiset_by_pair(partition) -> dict[tuple[int, int], list[int]]:
    out: dict[tuple[int, int], list[int]] = {}
    for adj in partition.adjacency:
        key = tuple(sorted((adj["elements"][0], adj["elements"][1])))
        out.setdefault(key, []).append(adj["singular_points"])
    return out
