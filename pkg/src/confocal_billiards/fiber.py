"""Assembly of the integral level sets as CW complexes.

Every boundary arc, cut quadric, caustic, and axis is a coordinate line of
the confocal coordinates, so the domain decomposes exactly into coordinate
rectangles (four quadrant charts glued along the axes).  Over each
in-region rectangle the level set carries four sheets, labeled by the
signs sigma = (sign of d lambda_e/dt, sign of d lambda_h/dt) of the two
oscillation coordinates.  All identifications are local sign rules:

  * one-sided edge on an ellipse-type line (wall or caustic fold): flip
    the first sign; on a hyperbola-type line: flip the second;
  * interior seam inside a quadrant: identity;
  * inter-focal seam (lambda_e = b):   (s1, s2) ~ (-s1, s2) across;
  * focal-ray seam (lambda_h = b):     (s1, s2) ~ (s1, -s2) across;
  * vertical-axis seam (lambda_h = a): (s1, s2) ~ (s1, -s2) across;
  * at the saddle level the two focal seams collapse four sheet edges
    into one (the transversal self-crossing of the singular fiber).

Component counts, Euler characteristics, orientability, genus, puncture
marks at 3*pi/2 vertices, free boundary circles, and the saddle-level
crossing circles all come from three union-finds (faces, edge copies,
vertex copies).  The `resolution` knob subdivides rectangles without
changing the answers; it drives the refinement-stability checks.

One caveat is tracked explicitly: at the saddle level the fiber over a
focus interior to the domain is a full circle of directions, which the
quotient complex pinches to a point.  `chi_focus_correction` carries the
resulting -1 per interior focus so saddle-level Euler characteristics can
be reported for the true fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .domain import BilliardDomain
from .errors import DomainError, IntegrityError
from .geometry import EPS_GEO, elliptic_coords, planar_point, velocity_signs

_FLIP1 = 1   # XOR mask: flip sign of d lambda_e / dt
_FLIP2 = 2   # XOR mask: flip sign of d lambda_h / dt

E_LO, E_HI, H_LO, H_HI = 0, 1, 2, 3

ELLIPTIC = "elliptic"
SADDLE = "saddle"
HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class LevelSpec:
    alpha: float
    kind: str

    @classmethod
    def at(cls, domain: BilliardDomain, alpha: float) -> "LevelSpec":
        b = domain.family.b
        if alpha < b:
            return cls(alpha, ELLIPTIC)
        if alpha == b:
            return cls(alpha, SADDLE)
        return cls(alpha, HYPERBOLIC)


@dataclass
class FiberComponent:
    faces: int = 0
    edges: int = 0
    vertices: int = 0
    free_edges: int = 0
    free_circles: int = 0
    collapse_edges: int = 0
    orientable: bool | None = None
    punctures: int = 0
    region_component: int = -1

    @property
    def chi(self) -> int:
        return self.vertices - self.edges + self.faces

    @property
    def closed(self) -> bool:
        return self.free_edges == 0 and self.collapse_edges == 0

    @property
    def genus(self) -> int | None:
        if not self.closed or self.orientable is False:
            return None
        return (2 - self.chi) // 2


@dataclass
class FiberSurface:
    """Public summary of one level set."""

    level: float
    components: list[dict] = field(default_factory=list)

    def genus_list(self) -> list[int]:
        return sorted(c["genus"] for c in self.components)

    def total_genus(self) -> int:
        return sum(c["genus"] for c in self.components)

    def __str__(self):
        if not self.components:
            return f"level {self.level:g}: empty fiber"
        parts = [f"(genus {c['genus']}, punctures {c['punctures']})"
                 for c in sorted(self.components,
                                 key=lambda c: (str(c["genus"]), c["punctures"]))]
        return f"level {self.level:g}: {len(self.components)} component(s) " + " ".join(parts)


class SheetComplex:
    """The assembled level set of one value of the caustic integral."""

    def __init__(self, domain: BilliardDomain, spec: LevelSpec, *,
                 resolution: int = 1,
                 extra_e: tuple[float, ...] = (),
                 extra_h: tuple[float, ...] = (),
                 free_e: tuple[float, ...] = (),
                 free_h: tuple[float, ...] = (),
                 split: str | None = None,
                 keep_sites: bool | None = None):
        self.domain = domain
        self.spec = spec
        self.split = split
        self.free_e = tuple(free_e)
        self.free_h = tuple(free_h)
        self.keep_sites = (resolution == 1) if keep_sites is None else keep_sites
        self.sites: list[dict] = []
        self._build_grid(resolution, extra_e, extra_h)
        self._classify_rects()
        self._epairs: list[np.ndarray] = []
        self._vpairs: list[np.ndarray] = []
        self._fpairs: list[np.ndarray] = []
        self._emit_edges()
        self._union_all()
        self._region_components()
        self._summarize()

    # -- grid ------------------------------------------------------------------

    def _build_grid(self, resolution, extra_e, extra_h):
        from .domain import coalesce_breaks
        eb, hb = self.domain.breaks()
        eb = set(eb) | set(extra_e) | set(self.free_e)
        hb = set(hb) | set(extra_h) | set(self.free_h)
        if self.spec.kind == ELLIPTIC:
            eb |= {self.spec.alpha}
        elif self.spec.kind == HYPERBOLIC:
            hb |= {self.spec.alpha}
        eb, hb = coalesce_breaks(eb), coalesce_breaks(hb)
        self.base_eb, self.base_hb = list(eb), list(hb)
        self.ebr = _refine(eb, resolution)
        self.hbr = _refine(hb, resolution)
        self.NE, self.NH = len(self.ebr) - 1, len(self.hbr) - 1
        self.base_ei = np.searchsorted(np.asarray(eb), self.ebr[:-1] + 1e-15, side="right") - 1
        self.base_hi = np.searchsorted(np.asarray(hb), self.hbr[:-1] + 1e-15, side="right") - 1
        self.quadrants = [(1, 1), (-1, 1), (-1, -1), (1, -1)]

    def _classify_rects(self):
        fam = self.domain.family
        neb, nhb = len(self.base_eb) - 1, len(self.base_hb) - 1
        base_in = np.zeros((4, neb, nhb), dtype=bool)
        ec = 0.5 * (np.asarray(self.base_eb[:-1]) + np.asarray(self.base_eb[1:]))
        hc = 0.5 * (np.asarray(self.base_hb[:-1]) + np.asarray(self.base_hb[1:]))
        for q, (sx, sy) in enumerate(self.quadrants):
            pts = np.array([planar_point(fam, e, h, sx, sy) for e in ec for h in hc])
            base_in[q] = self.domain.contains(pts).reshape(neb, nhb)
        self.base_in = base_in
        in_dom = base_in[:, self.base_ei, :][:, :, self.base_hi]
        if self.split == "top":
            in_dom = in_dom.copy()
            in_dom[[2, 3]] = False
        elif self.split == "bottom":
            in_dom = in_dom.copy()
            in_dom[[0, 1]] = False
        self.in_domain = in_dom
        self.caustic_e_index = self.caustic_h_index = None
        if self.spec.kind == ELLIPTIC:
            ie = _find_break(self.ebr, self.spec.alpha)
            reg = np.zeros_like(in_dom)
            reg[:, :ie, :] = True
            self.caustic_e_index = ie
        elif self.spec.kind == HYPERBOLIC:
            jh = _find_break(self.hbr, self.spec.alpha)
            reg = np.zeros_like(in_dom)
            reg[:, :, jh:] = True
            self.caustic_h_index = jh
        else:
            reg = np.ones_like(in_dom)
        self.rect_ok = in_dom & reg
        rid = np.cumsum(self.rect_ok.ravel()).reshape(self.rect_ok.shape) - 1
        self.rect_id = np.where(self.rect_ok, rid, -1)
        self.n_rect = int(self.rect_ok.sum())
        self.n_faces = self.n_rect * 4
        self._wall_cover()

    def _wall_cover(self):
        ebr, hbr = self.ebr, self.hbr
        cov_e = np.zeros((4, self.NE + 1, self.NH), dtype=bool)
        cov_h = np.zeros((4, self.NE, self.NH + 1), dtype=bool)
        src_e = np.full((4, self.NE + 1, self.NH), -1, dtype=int)
        src_h = np.full((4, self.NE, self.NH + 1), -1, dtype=int)
        for na in self.domain.norm:
            if na.axis == "e":
                idx = _find_break(ebr, na.level)
                j0, j1 = _find_break(hbr, na.dual[0]), _find_break(hbr, na.dual[1])
                for q, (sx, sy) in enumerate(self.quadrants):
                    ok = (sx == na.sx) if na.on_x_axis else (sx == na.sx and sy == na.sy)
                    if ok:
                        cov_e[q, idx, j0:j1] = True
                        src_e[q, idx, j0:j1] = na.src
            else:
                idx = _find_break(hbr, na.level)
                i0, i1 = _find_break(ebr, na.dual[0]), _find_break(ebr, na.dual[1])
                for q, (sx, sy) in enumerate(self.quadrants):
                    if na.on_x_axis:
                        ok = sx == na.sx
                    elif na.on_y_axis:
                        ok = sy == na.sy
                    else:
                        ok = sx == na.sx and sy == na.sy
                    if ok:
                        cov_h[q, i0:i1, idx] = True
                        src_h[q, i0:i1, idx] = na.src
        self.cover_e, self.cover_h = cov_e, cov_h
        self.src_e, self.src_h = src_e, src_h

    # -- edge emission ------------------------------------------------------------

    def _emit_edges(self):
        free_ei = {_find_break(self.ebr, v) for v in self.free_e}
        free_hi = {_find_break(self.hbr, v) for v in self.free_h}
        R = self.rect_id
        empty_h = np.full((4, self.NH), -1)
        empty_e = np.full((4, self.NE), -1)
        # e-edges within the quadrants, i = 0..NE-1 (i = NE is the axis seam)
        for i in range(0, self.NE):
            L = R[:, i - 1, :] if i > 0 else empty_h
            P = R[:, i, :]
            self._edge_case("e", i, L, P, self.cover_e[:, i, :],
                            i in free_ei, i == self.caustic_e_index, cross=None)
        i = self.NE
        for q, qp in ((0, 3), (1, 2)):   # upper quadrant and its sy-flip
            qq = qp if self.split == "bottom" else q
            L = R[qq, i - 1, :][None, :]
            P = (R[qp, i - 1, :] if self.split is None else np.full(self.NH, -1))[None, :]
            self._edge_case("e", i, L, P, self.cover_e[qq, i, :][None, :],
                            i in free_ei, False, cross=("interfocal", qq, qp))
        # h-edges within the quadrants, j = 1..NH-1
        for j in range(1, self.NH):
            L = R[:, :, j - 1]
            P = R[:, :, j]
            self._edge_case("h", j, L, P, self.cover_h[:, :, j],
                            j in free_hi, j == self.caustic_h_index, cross=None)
        j = 0
        for q, qp in ((0, 3), (1, 2)):
            qq = qp if self.split == "bottom" else q
            L = R[qq, :, 0][None, :]
            P = (R[qp, :, 0] if self.split is None else np.full(self.NE, -1))[None, :]
            self._edge_case("h", j, L, P, self.cover_h[qq, :, 0][None, :],
                            j in free_hi, j == self.caustic_h_index, cross=("ray", qq, qp))
        j = self.NH
        for q, qp in ((0, 1), (3, 2)):   # sx = +1 quadrant and its sx-flip
            L = R[q, :, self.NH - 1][None, :]
            P = R[qp, :, self.NH - 1][None, :]
            self._edge_case("h", j, L, P, self.cover_h[q, :, self.NH][None, :],
                            j in free_hi, False, cross=("vertical", q, qp))

    def _edge_case(self, fam_axis, index, L, P, cover, is_free, at_caustic, cross):
        """Emit identifications for one sheet of parallel edge sites.

        L and P hold the rect ids on the two sides (-1 when absent); for
        cross seams P is the partner across the axis and both faces meet
        the edge with the same side code.
        """
        flip = _FLIP1 if fam_axis == "e" else _FLIP2
        if cross is None:
            sideL, sideP = (E_HI, E_LO) if fam_axis == "e" else (H_HI, H_LO)
        else:
            sideL = sideP = E_HI if fam_axis == "e" else (H_LO if cross[0] == "ray" else H_HI)
        okL, okP = L >= 0, P >= 0
        both = okL & okP
        if np.any(both & cover):
            raise IntegrityError("a boundary arc separates two interior cells")
        one = okL ^ okP
        if not is_free and not at_caustic:
            stray = one & ~cover
            if cross is not None and self.split is not None:
                stray[:] = False
            if np.any(stray):
                # one-sided edges away from walls are only legal at the
                # caustic (fold) or on a freed quadric
                raise IntegrityError(
                    f"one-sided {fam_axis}-edge at break {index} lacks a wall arc")
        if is_free:
            self._record_sites(fam_axis, index, L, P, both | one, "free", cross, at_caustic)
            return
        for rects, side in ((np.where(okL & ~okP, L, -1), sideL),
                            (np.where(okP & ~okL, P, -1), sideP)):
            r = rects[rects >= 0]
            if len(r) == 0:
                continue
            for s in range(4):
                if s < (s ^ flip):
                    self._push((r * 4 + s) * 4 + side, (r * 4 + (s ^ flip)) * 4 + side,
                               side, side)
        r1 = np.where(both, L, -1)
        r2 = np.where(both, P, -1)
        m = r1 >= 0
        r1, r2 = r1[m], r2[m]
        if len(r1):
            if cross is None:
                for s in range(4):
                    self._push((r1 * 4 + s) * 4 + sideL, (r2 * 4 + s) * 4 + sideP,
                               sideL, sideP)
            else:
                kind = cross[0]
                if self.spec.kind == SADDLE and kind in ("interfocal", "ray"):
                    infold = _FLIP1 if kind == "interfocal" else _FLIP2
                    for s in range(4):
                        if s < (s ^ infold):
                            self._push((r1 * 4 + s) * 4 + sideL,
                                       (r1 * 4 + (s ^ infold)) * 4 + sideL,
                                       sideL, sideL, collapse=True)
                            self._push((r2 * 4 + s) * 4 + sideP,
                                       (r2 * 4 + (s ^ infold)) * 4 + sideP,
                                       sideP, sideP, collapse=True)
                        self._push((r1 * 4 + s) * 4 + sideL, (r2 * 4 + s) * 4 + sideP,
                                   sideL, sideP, collapse=True)
                else:
                    fl = _FLIP1 if kind == "interfocal" else _FLIP2
                    for s in range(4):
                        self._push((r1 * 4 + s) * 4 + sideL,
                                   (r2 * 4 + (s ^ fl)) * 4 + sideP, sideL, sideP)
        self._record_sites(fam_axis, index, L, P, both | one, "glued", cross, at_caustic)

    def _push(self, a, b, side_a, side_b, collapse=False):
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        self._epairs.append(np.column_stack((a, b)))
        for endpoint in (0, 1):
            va = (a // 4) * 4 + _corner_of_side(side_a, endpoint)
            vb = (b // 4) * 4 + _corner_of_side(side_b, endpoint)
            self._vpairs.append(np.column_stack((va, vb)))
        flag = np.full(len(a), 2 if collapse else (1 if side_a == side_b else 0))
        self._fpairs.append(np.column_stack((a // 4, b // 4, flag)))

    def _record_sites(self, fam_axis, index, L, P, present, kind, cross, at_caustic):
        if not self.keep_sites:
            return
        for where in np.argwhere(present):
            row, pos = int(where[0]), int(where[1])
            q = row if cross is None else cross[1]
            lrect = int(L[row, pos])
            prect = int(P[row, pos])
            if fam_axis == "e":
                value = float(self.ebr[index])
                interval = (float(self.hbr[pos]), float(self.hbr[pos + 1]))
                covered = bool(self.cover_e[q, index, pos])
                src = int(self.src_e[q, index, pos])
            else:
                value = float(self.hbr[index])
                interval = (float(self.ebr[pos]), float(self.ebr[pos + 1]))
                covered = bool(self.cover_h[q, pos, index])
                src = int(self.src_h[q, pos, index])
            self.sites.append({
                "axis": fam_axis, "value": value, "q": q, "pos": pos,
                "interval": interval, "rects": (lrect, prect),
                "kind": kind, "cross": None if cross is None else cross[0],
                "wall": covered, "arc_src": src if covered else None,
                "at_caustic": bool(at_caustic),
            })

    # -- unions and summaries --------------------------------------------------

    def _union_all(self):
        n_slot = self.n_faces * 4
        ep = np.vstack(self._epairs) if self._epairs else np.zeros((0, 2), dtype=int)
        vp = np.vstack(self._vpairs) if self._vpairs else np.zeros((0, 2), dtype=int)
        fp = np.vstack(self._fpairs) if self._fpairs else np.zeros((0, 3), dtype=int)
        self.edge_class = _cc(n_slot, ep)
        self.vert_class = _cc(n_slot, vp)
        self.face_comp = _cc(self.n_faces, fp[:, :2])
        self.n_comp = int(self.face_comp.max()) + 1 if self.n_faces else 0
        plain = fp[fp[:, 2] != 2]
        self._collapse_faces = np.unique(fp[fp[:, 2] == 2][:, :2]).astype(int)
        dbl = np.empty((2 * len(plain), 2), dtype=np.int64)
        same = plain[:, 2] == 1
        fa, fb = plain[:, 0], plain[:, 1]
        dbl[0::2, 0] = 2 * fa
        dbl[0::2, 1] = np.where(same, 2 * fb + 1, 2 * fb)
        dbl[1::2, 0] = 2 * fa + 1
        dbl[1::2, 1] = np.where(same, 2 * fb, 2 * fb + 1)
        lab = _cc(2 * self.n_faces, dbl)
        self._parity_same = lab[0::2] == lab[1::2] if self.n_faces else np.zeros(0, bool)

    def _region_components(self):
        pairs = []
        R = self.rect_id
        for i in range(1, self.NE):
            L, Rt = R[:, i - 1, :], R[:, i, :]
            m = (L >= 0) & (Rt >= 0)
            pairs.append(np.column_stack((L[m], Rt[m])))
        for j in range(1, self.NH):
            L, Rt = R[:, :, j - 1], R[:, :, j]
            m = (L >= 0) & (Rt >= 0)
            pairs.append(np.column_stack((L[m], Rt[m])))
        for q, qp in ((0, 3), (1, 2)):
            for L, P in ((R[q, self.NE - 1, :], R[qp, self.NE - 1, :]),
                         (R[q, :, 0], R[qp, :, 0])):
                m = (L >= 0) & (P >= 0)
                pairs.append(np.column_stack((L[m], P[m])))
        for q, qp in ((0, 1), (3, 2)):
            L, P = R[q, :, self.NH - 1], R[qp, :, self.NH - 1]
            m = (L >= 0) & (P >= 0)
            pairs.append(np.column_stack((L[m], P[m])))
        allp = np.vstack(pairs) if pairs else np.zeros((0, 2), dtype=int)
        self.region_comp = _cc(self.n_rect, allp)
        self.n_region_comp = int(self.region_comp.max()) + 1 if self.n_rect else 0
        self.region_k = np.zeros(max(self.n_region_comp, 1), dtype=int)
        self.punctured_vertex_classes: set[int] = set()
        self.in_region_vertices: list[tuple] = []
        for c in self.domain.singular_vertices():
            if not self._vertex_in_region(c):
                continue
            rid, slot = self._vertex_slot(c)
            if rid is None:
                continue
            self.region_k[self.region_comp[rid]] += 1
            self.punctured_vertex_classes.add(int(self.vert_class[slot]))
            self.in_region_vertices.append(c.point)
        # interior foci (saddle chi correction: a circle pinched to a point)
        self.foci_inside = 0
        if self.spec.kind == SADDLE:
            for fx, fy in self.domain.family.foci:
                d = 1e-6
                probes = [(fx + sx * d, sy * d) for sx in (-1, 1) for sy in (-1, 1)]
                if all(self.domain.contains(probes)):
                    self.foci_inside += 1
        self.chi_focus_correction = -self.foci_inside

    def _vertex_in_region(self, c) -> bool:
        if self.spec.kind == ELLIPTIC:
            return c.lambda_e < self.spec.alpha - 1e-12
        if self.spec.kind == HYPERBOLIC:
            return c.lambda_h > self.spec.alpha + 1e-12
        return True

    def _vertex_slot(self, c):
        i = _find_break(self.ebr, c.lambda_e)
        j = _find_break(self.hbr, c.lambda_h)
        sx = 1 if c.point[0] > EPS_GEO else (-1 if c.point[0] < -EPS_GEO else 0)
        sy = 1 if c.point[1] > EPS_GEO else (-1 if c.point[1] < -EPS_GEO else 0)
        for q, (qx, qy) in enumerate(self.quadrants):
            if (sx and qx != sx) or (sy and qy != sy):
                continue
            for di, ci in ((i - 1, 1), (i, 0)):
                for dj, cj in ((j - 1, 1), (j, 0)):
                    if 0 <= di < self.NE and 0 <= dj < self.NH and self.rect_ok[q, di, dj]:
                        rid = int(self.rect_id[q, di, dj])
                        return rid, (rid * 4 + 0) * 4 + (2 * ci + cj)
        return None, None

    def _summarize(self):
        nE = int(self.edge_class.max()) + 1 if self.n_faces else 0
        nV = int(self.vert_class.max()) + 1 if self.n_faces else 0
        slot_face = np.arange(self.n_faces * 4) // 4
        first_e = np.full(nE, self.n_faces, dtype=int)
        first_v = np.full(nV, self.n_faces, dtype=int)
        if nE:
            np.minimum.at(first_e, self.edge_class, slot_face)
            np.minimum.at(first_v, self.vert_class, slot_face)
        comp_of_eclass = self.face_comp[first_e] if nE else np.zeros(0, int)
        comp_of_vclass = self.face_comp[first_v] if nV else np.zeros(0, int)
        esize = np.bincount(self.edge_class, minlength=nE) if nE else np.zeros(0, int)
        self.comp = [FiberComponent() for _ in range(self.n_comp)]
        for k, n in enumerate(np.bincount(self.face_comp, minlength=self.n_comp)):
            self.comp[k].faces = int(n)
        ecount = np.bincount(comp_of_eclass, minlength=self.n_comp) if nE else np.zeros(self.n_comp, int)
        vcount = np.bincount(comp_of_vclass, minlength=self.n_comp) if nV else np.zeros(self.n_comp, int)
        for k in range(self.n_comp):
            self.comp[k].edges = int(ecount[k])
            self.comp[k].vertices = int(vcount[k])
        free_cls = np.flatnonzero(esize == 1)
        col_cls = np.flatnonzero(esize > 2)
        for cls in free_cls:
            self.comp[comp_of_eclass[cls]].free_edges += 1
        for cls in col_cls:
            self.comp[comp_of_eclass[cls]].collapse_edges += 1
        for vc in self.punctured_vertex_classes:
            self.comp[comp_of_vclass[vc]].punctures += 1
        has_bad = np.zeros(self.n_comp, dtype=bool)
        col_comp = np.zeros(self.n_comp, dtype=bool)
        for f in self._collapse_faces:
            col_comp[self.face_comp[f]] = True
        for f in np.flatnonzero(self._parity_same):
            has_bad[self.face_comp[f]] = True
        for k, c in enumerate(self.comp):
            c.orientable = None if col_comp[k] else bool(not has_bad[k])
        face_rect = np.arange(self.n_faces) // 4
        for f in range(self.n_faces):
            k = self.face_comp[f]
            if self.comp[k].region_component < 0:
                self.comp[k].region_component = int(self.region_comp[face_rect[f]])
        self._comp_of_eclass = comp_of_eclass
        self._esize = esize
        self._count_free_circles(free_cls)
        self.n_collapse_circles = self._count_circles(col_cls)

    def _boundary_chains(self, classes):
        """Connected components of a family of edge classes, linked through
        shared vertex classes.  Returns labels aligned with `classes`."""
        if len(classes) == 0:
            return np.zeros(0, int)
        slots = np.arange(self.n_faces * 4)
        members: dict[int, list[int]] = {int(c): [] for c in classes}
        for slot in slots:
            cls = int(self.edge_class[slot])
            if cls in members:
                members[cls].append(slot)
        touch: dict[int, list[int]] = {}
        for cls, sl in members.items():
            for slot in sl:
                face, side = slot // 4, slot % 4
                for endpoint in (0, 1):
                    v = int(self.vert_class[face * 4 + _corner_of_side(side, endpoint)])
                    touch.setdefault(v, []).append(cls)
        remap = {int(c): i for i, c in enumerate(classes)}
        pairs = []
        for v, lst in touch.items():
            uniq = sorted(set(lst))
            for x, y in zip(uniq[:-1], uniq[1:]):
                pairs.append((remap[x], remap[y]))
        return _cc(len(classes), np.asarray(pairs, dtype=int).reshape(-1, 2))

    def _count_free_circles(self, free_cls):
        lab = self._boundary_chains(free_cls)
        seen = {}
        for i, cls in enumerate(free_cls):
            seen.setdefault(int(lab[i]), self._comp_of_eclass[cls])
        for comp in seen.values():
            self.comp[comp].free_circles += 1

    def _count_circles(self, classes) -> int:
        lab = self._boundary_chains(classes)
        return int(lab.max()) + 1 if len(lab) else 0

    # -- queries -----------------------------------------------------------------

    def locate_face(self, x, v) -> int:
        ec = elliptic_coords(self.domain.family, x)
        i = int(np.searchsorted(self.ebr, ec.lambda_e) - 1)
        j = int(np.searchsorted(self.hbr, ec.lambda_h) - 1)
        i = min(max(i, 0), self.NE - 1)
        j = min(max(j, 0), self.NH - 1)
        sx = 1 if x[0] >= 0 else -1
        sy = 1 if x[1] >= 0 else -1
        q = self.quadrants.index((sx, sy))
        s1, s2 = velocity_signs(self.domain.family, x, v)
        sigma = (0 if s1 >= 0 else 1) | (0 if s2 >= 0 else 2)
        rid = self.rect_id[q, i, j]
        if rid < 0:
            raise DomainError(f"phase point at {x} lies outside the region")
        return int(rid) * 4 + sigma

    def component_of(self, x, v) -> int:
        return int(self.face_comp[self.locate_face(x, v)])

    def surface(self) -> FiberSurface:
        out = FiberSurface(self.spec.alpha)
        for c in self.comp:
            out.components.append({
                "chi": c.chi, "genus": c.genus, "punctures": c.punctures,
                "orientable": c.orientable, "free_circles": c.free_circles,
                "region_component": c.region_component,
                "faces": c.faces, "edges": c.edges, "vertices": c.vertices,
                "free_edges": c.free_edges, "collapse_edges": c.collapse_edges,
            })
        return out

    def chi(self) -> int:
        return int(sum(c.chi for c in self.comp))


def _corner_of_side(side: int, endpoint: int) -> int:
    if side in (E_LO, E_HI):
        return 2 * (0 if side == E_LO else 1) + endpoint
    return 2 * endpoint + (0 if side == H_LO else 1)


def _refine(breaks, resolution: int) -> np.ndarray:
    breaks = np.asarray(breaks, dtype=float)
    n = len(breaks) - 1
    if resolution <= n:
        return breaks
    m = int(math.ceil(resolution / n))
    out = [breaks[:1]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        out.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(out)


def _find_break(arr, value) -> int:
    arr = np.asarray(arr)
    i = int(np.argmin(np.abs(arr - value)))
    if abs(arr[i] - value) > 1e-9:
        raise IntegrityError(f"value {value} is not a grid break")
    return i


def _cc(n: int, pairs) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=int)
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if len(pairs) == 0:
        return np.arange(n)
    data = np.ones(len(pairs), dtype=np.int8)
    g = csr_matrix((data, (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, lab = connected_components(g, directed=False)
    return lab
