"""Partition of a homogeneous billiard into elementary pieces.

Cutting runs along every quadric of one family type through the singular
vertices: hyperbolas for homogeneous-hyperbolic domains (and, by default,
for domains not meeting the focal line), ellipses for homogeneous-elliptic
ones.  The pieces are traced back into full billiard domains so they can
be validated as elementary and classified.  Cut arcs carry their boundary
("+") and internal ("-") segment marks, the singular points sitting on
them, and the component counts nu (inside the cut quadric) and xi
(outside), which control the cylinder families across the bifurcation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import (
    HOMOG_BOTH,
    HOMOG_ELLIPTIC,
    HOMOG_HYPERBOLIC,
    NON_HOMOGENEOUS,
    BilliardDomain,
    BoundaryArc,
    ElementaryType,
    classify_elementary,
    coalesce_breaks,
)
from .errors import DomainError, IntegrityError
from .geometry import (
    BRANCH_BETWEEN_FOCI,
    BRANCH_LEFT,
    BRANCH_OUTSIDE_LEFT,
    BRANCH_OUTSIDE_RIGHT,
    BRANCH_RIGHT,
    KIND_DEGENERATE,
    KIND_ELLIPSE,
    KIND_HYPERBOLA,
    KIND_VERTICAL_LINE,
    QuadricRef,
    planar_point,
)
from .fiber import _cc, _find_break


QUADRANTS = [(1, 1), (-1, 1), (-1, -1), (1, -1)]


@dataclass
class PositionGrid:
    """The quadrant-chart rectangle decomposition of a domain (no sheets)."""

    domain: BilliardDomain
    ebr: np.ndarray
    hbr: np.ndarray
    in_domain: np.ndarray  # bool [4, NE, NH]

    @classmethod
    def build(cls, domain: BilliardDomain, extra_e=(), extra_h=()):
        eb, hb = domain.breaks()
        eb = coalesce_breaks(set(eb) | set(extra_e))
        hb = coalesce_breaks(set(hb) | set(extra_h))
        ebr = np.asarray(eb)
        hbr = np.asarray(hb)
        ne, nh = len(ebr) - 1, len(hbr) - 1
        ind = np.zeros((4, ne, nh), dtype=bool)
        ec = 0.5 * (ebr[:-1] + ebr[1:])
        hc = 0.5 * (hbr[:-1] + hbr[1:])
        for q, (sx, sy) in enumerate(QUADRANTS):
            pts = np.array([planar_point(domain.family, e, h, sx, sy)
                            for e in ec for h in hc])
            ind[q] = domain.contains(pts).reshape(ne, nh)
        return cls(domain, ebr, hbr, ind)

    @property
    def NE(self):
        return len(self.ebr) - 1

    @property
    def NH(self):
        return len(self.hbr) - 1

    def components(self, blocked_e=(), blocked_h=(), mask=None) -> np.ndarray:
        """Labels [4, NE, NH] of the connected components of the in-domain
        cells (restricted to mask), with adjacency blocked across the given
        coordinate values.  Cells outside get label -1."""
        ok = self.in_domain if mask is None else (self.in_domain & mask)
        rid = np.cumsum(ok.ravel()).reshape(ok.shape) - 1
        rid = np.where(ok, rid, -1)
        blocked_ei = {_find_break(self.ebr, v) for v in blocked_e}
        blocked_hi = {_find_break(self.hbr, v) for v in blocked_h}
        pairs = []
        for i in range(1, self.NE):
            if i in blocked_ei:
                continue
            L, R = rid[:, i - 1, :], rid[:, i, :]
            m = (L >= 0) & (R >= 0)
            pairs.append(np.column_stack((L[m], R[m])))
        for j in range(1, self.NH):
            if j in blocked_hi:
                continue
            L, R = rid[:, :, j - 1], rid[:, :, j]
            m = (L >= 0) & (R >= 0)
            pairs.append(np.column_stack((L[m], R[m])))
        if self.NE not in blocked_ei:
            for q, qp in ((0, 3), (1, 2)):
                L, P = rid[q, self.NE - 1, :], rid[qp, self.NE - 1, :]
                m = (L >= 0) & (P >= 0)
                pairs.append(np.column_stack((L[m], P[m])))
        if 0 not in blocked_hi:
            for q, qp in ((0, 3), (1, 2)):
                L, P = rid[q, :, 0], rid[qp, :, 0]
                m = (L >= 0) & (P >= 0)
                pairs.append(np.column_stack((L[m], P[m])))
        if self.NH not in blocked_hi:
            for q, qp in ((0, 1), (3, 2)):
                L, P = rid[q, :, self.NH - 1], rid[qp, :, self.NH - 1]
                m = (L >= 0) & (P >= 0)
                pairs.append(np.column_stack((L[m], P[m])))
        n = int(ok.sum())
        allp = np.vstack(pairs) if pairs else np.zeros((0, 2), dtype=int)
        lab = _cc(n, allp)
        out = np.full(ok.shape, -1, dtype=int)
        out[ok] = lab
        return out

    def trace_boundary(self, cells: np.ndarray) -> list[BoundaryArc]:
        """Boundary arcs of a union of cells (bool [4, NE, NH]), returned as
        a counterclockwise cyclic arc list."""
        fam = self.domain.family
        runs: dict[tuple, list[tuple[int, int]]] = {}

        def cell(q, i, j):
            if 0 <= i < self.NE and 0 <= j < self.NH:
                return bool(cells[q, i, j])
            return False

        for q in range(4):
            sx, sy = QUADRANTS[q]
            for i in range(self.NE + 1):
                for j in range(self.NH):
                    left = cell(q, i - 1, j)
                    if i < self.NE:
                        right = cell(q, i, j)
                    elif self.ebr[i] == self.domain.family.b:
                        qp = {0: 3, 3: 0, 1: 2, 2: 1}[q]
                        right = cell(qp, self.NE - 1, j)
                        if q in (2, 3):
                            continue  # counted from the upper side
                    else:
                        right = False
                    if left != right:
                        key = ("e", i, sx if self.ebr[i] == fam.b else (sx, sy))
                        runs.setdefault(key, []).append((j, j + 1))
            for j in range(self.NH + 1):
                for i in range(self.NE):
                    low = cell(q, i, j - 1)
                    if j < self.NH:
                        high = cell(q, i, j)
                    else:
                        high = False
                    if j == 0:
                        qp = {0: 3, 3: 0, 1: 2, 2: 1}[q]
                        other = cell(qp, i, 0)
                        if q in (2, 3):
                            continue
                        low, high = other, cell(q, i, 0)
                    if j == self.NH:
                        qp = {0: 1, 1: 0, 2: 3, 3: 2}[q]
                        other = cell(qp, i, self.NH - 1)
                        if q in (1, 2):
                            continue
                        low, high = cell(q, i, self.NH - 1), other
                    if low != high:
                        if j == 0:
                            key = ("h", j, sx)
                        elif j == self.NH:
                            key = ("h", j, sy)
                        else:
                            key = ("h", j, (sx, sy))
                        runs.setdefault(key, []).append((i, i + 1))
        arcs = []
        for key, ivals in runs.items():
            axis, idx, quad = key
            for lo, hi in _merge(ivals):
                arcs.append(self._make_arc(axis, idx, quad, lo, hi))
        return _order_cycle(self.domain.family, arcs)

    def _make_arc(self, axis, idx, quad, lo, hi):
        fam = self.domain.family
        a, b = fam.a, fam.b
        if axis == "e":
            value = float(self.ebr[idx])
            d0, d1 = float(self.hbr[lo]), float(self.hbr[hi])
            if abs(value - b) <= 1e-9:
                sx = quad if isinstance(quad, int) else quad[0]
                x0, x1 = math.sqrt(a - d1), math.sqrt(a - d0)
                rng = (sx * x0, sx * x1) if sx > 0 else (sx * x1, sx * x0)
                return BoundaryArc(QuadricRef(b, KIND_DEGENERATE, BRANCH_BETWEEN_FOCI),
                                   rng, (sx, 1))
            sx, sy = quad
            return BoundaryArc(QuadricRef(value, KIND_ELLIPSE), (d0, d1), (sx, sy))
        value = float(self.hbr[idx])
        d0, d1 = float(self.ebr[lo]), float(self.ebr[hi])
        if abs(value - b) <= 1e-9:
            sx = quad if isinstance(quad, int) else quad[0]
            x0, x1 = math.sqrt(a - d1), math.sqrt(a - d0)
            rng = (sx * x0, sx * x1) if sx > 0 else (sx * x1, sx * x0)
            branch = BRANCH_OUTSIDE_RIGHT if sx > 0 else BRANCH_OUTSIDE_LEFT
            return BoundaryArc(QuadricRef(b, KIND_DEGENERATE, branch), rng, (sx, 1))
        if abs(value - a) <= 1e-9:
            sy = quad if isinstance(quad, int) else quad[1]
            return BoundaryArc(QuadricRef(a, KIND_VERTICAL_LINE), (d0, d1), (0, sy))
        sx, sy = quad
        branch = BRANCH_RIGHT if sx > 0 else BRANCH_LEFT
        return BoundaryArc(QuadricRef(value, KIND_HYPERBOLA, branch), (d0, d1), (sx, sy))


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def _arc_endpoints(family, arc: BoundaryArc):
    from .domain import _normalize_arc
    na = _normalize_arc(family, arc, 0)
    return na.endpoint(family, False), na.endpoint(family, True)


def _order_cycle(family, arcs: list[BoundaryArc]) -> list[BoundaryArc]:
    """Order arcs into a closed counterclockwise walk by endpoint matching."""
    if not arcs:
        return []
    ends = [_arc_endpoints(family, a) for a in arcs]
    used = [False] * len(arcs)
    order = [(0, True)]  # (index, start_at_lo)
    used[0] = True
    cur = ends[0][1]
    for _ in range(len(arcs) - 1):
        found = False
        for k in range(len(arcs)):
            if used[k]:
                continue
            for lo_first in (True, False):
                start = ends[k][0] if lo_first else ends[k][1]
                if math.hypot(start[0] - cur[0], start[1] - cur[1]) <= 1e-7:
                    order.append((k, lo_first))
                    cur = ends[k][1] if lo_first else ends[k][0]
                    used[k] = True
                    found = True
                    break
            if found:
                break
        if not found:
            raise IntegrityError("traced boundary does not close into one cycle")
    out = []
    for k, lo_first in order:
        a = arcs[k]
        fwd = lo_first
        if a.quadric.kind == KIND_DEGENERATE and a.signs[0] < 0:
            # x-range ordering runs against the dual ordering on the left side
            fwd = not lo_first
        out.append(BoundaryArc(a.quadric, a.range, a.signs,
                               "forward" if fwd else "backward"))
    dom = BilliardDomain(family, out)
    if dom.signed_area() < 0:
        rev = []
        for a in reversed(out):
            o = "backward" if a.orientation == "forward" else "forward"
            rev.append(BoundaryArc(a.quadric, a.range, a.signs, o))
        out = rev
    return out


# -- partitions ----------------------------------------------------------------


@dataclass
class CutArc:
    lambda_i: float
    axis: str                      # 'h' (hyperbolic cutting) or 'e'
    segments: list[dict] = field(default_factory=list)
    singular_points: list[tuple] = field(default_factory=list)
    nu: int = 0
    xi: int = 0


@dataclass
class Partition:
    domain: BilliardDomain
    rule: str                       # 'hyperbolic' or 'elliptic'
    elements: list[BilliardDomain] = field(default_factory=list)
    cut_arcs: list[CutArc] = field(default_factory=list)
    adjacency: list[dict] = field(default_factory=list)
    element_labels: np.ndarray | None = None
    grid: PositionGrid | None = None

    @property
    def N(self) -> int:
        return len(self.elements)

    @property
    def n(self) -> int:
        return len(self.cut_arcs)

    @property
    def cut_values(self) -> list[float]:
        return [c.lambda_i for c in self.cut_arcs]


def critical_gap(domain: BilliardDomain, values=None) -> float:
    """Smallest spacing of the critical values (used for the epsilon policy
    epsilon = gap / 4)."""
    from .topology import bifurcation_diagram
    vals = sorted({v for v, _, _ in bifurcation_diagram(domain).critical_values}) \
        if values is None else sorted(set(values))
    gaps = [b - a for a, b in zip(vals[:-1], vals[1:])]
    return min(gaps) if gaps else math.inf


def partition(domain: BilliardDomain, rule: str | None = None) -> Partition:
    """Cut the domain along every quadric of the chosen family carrying a
    singular vertex and classify the resulting elementary pieces."""
    homog = domain.homogeneity()
    k = domain.complexity()
    if homog == NON_HOMOGENEOUS and k > 0:
        raise DomainError("partitions are defined for homogeneous billiards")
    if rule is None:
        rule = "elliptic" if homog == HOMOG_ELLIPTIC else "hyperbolic"
    if rule not in ("hyperbolic", "elliptic"):
        raise DomainError(f"unknown cutting rule {rule!r}")
    axis = "h" if rule == "hyperbolic" else "e"
    cut_vals = []
    for c in domain.singular_vertices():
        cut_vals.append(c.lambda_h if axis == "h" else c.lambda_e)
    cut_vals = coalesce_breaks(cut_vals)
    grid = PositionGrid.build(domain)
    blocked_e = tuple(cut_vals) if axis == "e" else ()
    blocked_h = tuple(cut_vals) if axis == "h" else ()
    labels = grid.components(blocked_e=blocked_e, blocked_h=blocked_h)
    nlab = int(labels.max()) + 1
    part = Partition(domain, rule, grid=grid, element_labels=labels)
    for el in range(nlab):
        arcs = grid.trace_boundary(labels == el)
        piece = BilliardDomain(domain.family, arcs)
        if piece.complexity() != 0:
            raise IntegrityError(
                f"partition produced a non-elementary piece (k={piece.complexity()})")
        piece.elementary_type = classify_elementary(piece)
        part.elements.append(piece)
    if k > 0 and not (part.N <= 2 * k):
        raise IntegrityError(f"partition has N={part.N} > 2k={2 * k} elements")
    for lam in cut_vals:
        part.cut_arcs.append(_cut_arc(domain, grid, labels, axis, lam, part))
    if part.n and not (part.N > part.n):
        raise IntegrityError("partition must have N > n")
    return part


def _cut_arc(domain, grid: PositionGrid, labels, axis, lam, part) -> CutArc:
    fam = domain.family
    arc = CutArc(lam, axis)
    for c in domain.singular_vertices():
        v = c.lambda_h if axis == "h" else c.lambda_e
        if abs(v - lam) <= 1e-9:
            arc.singular_points.append(c.point)
    if axis == "h":
        idx = _find_break(grid.hbr, lam)
        n_pos, duals = grid.NE, grid.ebr
    else:
        idx = _find_break(grid.ebr, lam)
        n_pos, duals = grid.NH, grid.hbr
    shared: dict[tuple, list] = {}
    for q in range(4):
        for p in range(n_pos):
            if axis == "h":
                below = grid.in_domain[q, p, idx - 1] if idx > 0 else False
                above = grid.in_domain[q, p, idx] if idx < grid.NH else False
            else:
                below = grid.in_domain[q, idx - 1, p] if idx > 0 else False
                above = grid.in_domain[q, idx, p] if idx < grid.NE else False
            if not (below or above):
                continue
            mark = "-" if (below and above) else "+"
            seg = {
                "quadrant": q, "interval": (float(duals[p]), float(duals[p + 1])),
                "mark": mark,
            }
            if mark == "-":
                if axis == "h":
                    e1 = int(labels[q, p, idx - 1])
                    e2 = int(labels[q, p, idx])
                else:
                    e1 = int(labels[q, idx - 1, p])
                    e2 = int(labels[q, idx, p])
                seg["elements"] = (e1, e2)
                shared.setdefault((q, e1, e2), []).append((p, p + 1))
            arc.segments.append(seg)
    arc.segments.sort(key=lambda s: (s["quadrant"], s["interval"]))
    # merge shared runs by element pair for the equivalence bookkeeping
    for (q, e1, e2), ivals in shared.items():
        for lo, hi in _merge(ivals):
            d0, d1 = float(duals[lo]), float(duals[hi])
            t = 0
            for c in domain.singular_vertices():
                v = c.lambda_h if axis == "h" else c.lambda_e
                dual_v = c.lambda_e if axis == "h" else c.lambda_h
                if abs(v - lam) <= 1e-9 and d0 - 1e-9 <= dual_v <= d1 + 1e-9 \
                        and _vertex_in_quadrant(c, q):
                    t += 1
            part.adjacency.append({
                "cut": lam, "elements": tuple(sorted((e1, e2))),
                "interval": (d0, d1), "singular_points": t, "quadrant": q,
            })
    # strip component counts
    gap = critical_gap(domain)
    eps = gap / 4.0
    arc.nu, arc.xi = strip_components(domain, axis, lam, eps)
    return arc


def _vertex_in_quadrant(c, q) -> bool:
    sx, sy = QUADRANTS[q]
    vx = 1 if c.point[0] > 1e-9 else (-1 if c.point[0] < -1e-9 else 0)
    vy = 1 if c.point[1] > 1e-9 else (-1 if c.point[1] < -1e-9 else 0)
    return (vx in (0, sx)) and (vy in (0, sy))


def strip_components(domain: BilliardDomain, axis: str, lam: float,
                     eps_coord: float) -> tuple[int, int]:
    """Components of the strip around the cut quadric, inside (nu) and
    outside (xi) of it."""
    fam = domain.family
    if axis == "h":
        lo, hi = lam - eps_coord, lam + eps_coord
        grid = PositionGrid.build(domain, extra_h=(lo, lam, hi))
        hc = 0.5 * (grid.hbr[:-1] + grid.hbr[1:])
        inside = np.zeros_like(grid.in_domain)
        inside[:, :, :] = (hc >= lam) & (hc <= hi)
        outside = np.zeros_like(grid.in_domain)
        outside[:, :, :] = (hc >= lo) & (hc <= lam)
        blocked = dict(blocked_h=(lam,))
    else:
        lo, hi = lam - eps_coord, lam + eps_coord
        grid = PositionGrid.build(domain, extra_e=(lo, lam, hi))
        ec = 0.5 * (grid.ebr[:-1] + grid.ebr[1:])
        inside = np.zeros_like(grid.in_domain)
        inside[:, :, :] = ((ec >= lam) & (ec <= hi))[:, None]
        outside = np.zeros_like(grid.in_domain)
        outside[:, :, :] = ((ec >= lo) & (ec <= lam))[:, None]
        blocked = dict(blocked_e=(lam,))
    li = grid.components(mask=inside, **blocked)
    lo_ = grid.components(mask=outside, **blocked)
    nu = int(li.max()) + 1
    xi = int(lo_.max()) + 1
    return nu, xi


@dataclass
class MotionRegion:
    lam: float
    components: list[dict] = field(default_factory=list)

    @property
    def k_counts(self) -> list[int]:
        return [c["k"] for c in self.components]


def motion_region(domain: BilliardDomain, lam: float,
                  part: Partition | None = None) -> MotionRegion:
    """Connected components of the Jacobi-Chasles region inside the domain,
    with interior singular-vertex counts and the induced pieces of the
    partition."""
    from .fiber import LevelSpec, SheetComplex
    if lam > domain.family.a + 1e-12:
        raise DomainError(f"lambda={lam} exceeds a")
    spec = LevelSpec.at(domain, lam)
    sc = SheetComplex(domain, spec)
    out = MotionRegion(lam)
    for comp in range(sc.n_region_comp):
        rec = {"k": int(sc.region_k[comp]), "pieces": []}
        out.components.append(rec)
    if part is not None and out.components:
        blocked_e = tuple(part.cut_values) if part.rule == "elliptic" else ()
        blocked_h = tuple(part.cut_values) if part.rule == "hyperbolic" else ()
        grid = PositionGrid.build(domain,
                                  extra_e=(lam,) if spec.kind == "elliptic" else (),
                                  extra_h=(lam,) if spec.kind == "hyperbolic" else ())
        hc = 0.5 * (grid.hbr[:-1] + grid.hbr[1:])
        ec = 0.5 * (grid.ebr[:-1] + grid.ebr[1:])
        if spec.kind == "elliptic":
            mask = np.zeros_like(grid.in_domain)
            mask[:, :, :] = (ec <= lam)[:, None]
        elif spec.kind == "hyperbolic":
            mask = np.zeros_like(grid.in_domain)
            mask[:, :, :] = (hc >= lam)
        else:
            mask = np.ones_like(grid.in_domain)
        pieces = grid.components(blocked_e=blocked_e, blocked_h=blocked_h, mask=mask)
        whole = grid.components(mask=mask)
        npieces = int(pieces.max()) + 1
        for pc in range(npieces):
            cells = pieces == pc
            region_comp = int(whole[cells][0])
            rec = {"region_component": region_comp}
            try:
                arcs = grid.trace_boundary(cells)
                piece = BilliardDomain(domain.family, arcs)
                rec["elementary_type"] = str(classify_elementary(piece)) \
                    if piece.complexity() == 0 else None
            except Exception:
                rec["elementary_type"] = None
            out.components[region_comp]["pieces"].append(rec)
    return out


def arc_neighborhood(domain: BilliardDomain, part: Partition, i: int,
                     epsilon: float):
    """The strip around cut arc i, split into its nu interior and xi
    exterior pieces.  epsilon must stay below a quarter of the critical
    gap so no other critical quadric enters the strip."""
    cut = part.cut_arcs[i]
    gap = critical_gap(domain)
    if epsilon > gap / 2:
        raise DomainError(
            f"epsilon={epsilon} reaches another critical quadric (gap {gap})")
    nu, xi = strip_components(domain, cut.axis, cut.lambda_i, epsilon)
    if (nu, xi) != (cut.nu, cut.xi):
        raise IntegrityError("strip components disagree with the cut-arc record")
    return {"lambda": cut.lambda_i, "nu": nu, "xi": xi, "epsilon": epsilon}
