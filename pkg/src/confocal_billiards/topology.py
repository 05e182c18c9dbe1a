"""Topology of the Liouville foliation: bifurcation diagrams, regular
fibers with their independent assembly, labeled graphs over cut arcs,
cylinder gluing tables, and the cell complexes of critical neighborhoods.

The graph over a cut arc is the one-dimensional preimage of the arc at a
fixed integral value: black vertices over corner points (one fiber point;
3*pi/2 vertices carry puncture marks), white vertex pairs over transversal
crossings with the region boundary (and with the focal line at the saddle
level), two edges over every boundary ("+") segment and four over every
internal ("-") one.  Edge letters are fixed by the sheet signs: the sign
along the arc gives the up/down letters on "+" segments, and the side sign
splits the four "-" letters between the right (1, 2) and left (3, 4)
cylinder circles.  This letter table is a reconstruction (the source rules
are pictorial); it is validated by the Euler-characteristic and component
cross-checks in the atom reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decomposition import (
    Partition,
    PositionGrid,
    QUADRANTS,
    critical_gap,
)
from .domain import THREE_QUARTER, BilliardDomain
from .errors import DomainError, IntegrityError
from .fiber import (
    ELLIPTIC,
    HYPERBOLIC,
    SADDLE,
    E_HI,
    E_LO,
    H_HI,
    H_LO,
    FiberSurface,
    LevelSpec,
    SheetComplex,
    _corner_of_side,
    _find_break,
)


# -- bifurcation diagram -------------------------------------------------------


@dataclass
class BifurcationDiagram:
    critical_values: list[tuple[float, str, tuple[str, ...]]] = field(default_factory=list)

    def values(self) -> list[float]:
        return [v for v, _, _ in self.critical_values]

    def regular_samples(self, per_gap: int = 3) -> list[float]:
        vals = self.values()
        out = []
        for lo, hi in zip(vals[:-1], vals[1:]):
            for k in range(1, per_gap + 1):
                out.append(lo + (hi - lo) * k / (per_gap + 1))
        return out

    def min_gap(self) -> float:
        vals = self.values()
        return min(b - a for a, b in zip(vals[:-1], vals[1:]))

    def __str__(self):
        return "; ".join(f"{v:g} {kind}" for v, kind, _ in self.critical_values)


def bifurcation_diagram(domain: BilliardDomain, part: Partition | None = None) -> BifurcationDiagram:
    """Critical values of the caustic integral: parameters of elliptic
    boundary arcs without singular points (local minima), hyperbolic ones
    (local maxima), the saddle value b, the value a when the domain meets
    the vertical axis, and both quadric parameters through every 3*pi/2
    vertex."""
    fam = domain.family
    entries: list[list] = []   # [value, kind, sources]
    rank = {"saddle_b": 3, "singular_vertex_level": 2, "local_min": 1, "local_max": 1}

    def add(value, kind, source):
        for e in entries:
            if abs(e[0] - value) <= 1e-9:
                if rank[kind] > rank[e[1]]:
                    e[1] = kind
                e[2].add(source)
                return
        entries.append([value, kind, {source}])

    vert = domain.singular_vertices()
    add(fam.b, "saddle_b", "saddle")
    for na in domain.norm:
        if abs(na.level - fam.b) <= 1e-9:
            continue
        carries = any(
            abs((c.lambda_e if na.axis == "e" else c.lambda_h) - na.level) <= 1e-9
            and na.dual[0] - 1e-9 <= (c.lambda_h if na.axis == "e" else c.lambda_e) <= na.dual[1] + 1e-9
            for c in vert)
        if carries:
            add(na.level, "singular_vertex_level", f"arc {na.src}")
        elif na.axis == "e":
            add(na.level, "local_min", f"arc {na.src}")
        elif abs(na.level - fam.a) > 1e-9:
            add(na.level, "local_max", f"arc {na.src}")
    for c in vert:
        if abs(c.lambda_e - fam.b) > 1e-9:
            add(c.lambda_e, "singular_vertex_level", "vertex")
        if abs(c.lambda_h - fam.b) > 1e-9 and abs(c.lambda_h - fam.a) > 1e-9:
            add(c.lambda_h, "singular_vertex_level", "vertex")
    grid = PositionGrid.build(domain)
    if bool(grid.in_domain[:, :, -1].any()):
        add(fam.a, "local_max", "meets y-axis")
    return BifurcationDiagram(sorted(
        (v, kind, tuple(sorted(src))) for v, kind, src in entries))


def euler_characteristic(obj) -> int:
    """Alternating cell-count sum of a SheetComplex, CellComplex, FiberGraph,
    or one fiber-surface component record."""
    if isinstance(obj, SheetComplex):
        return obj.chi()
    if isinstance(obj, CellComplex):
        return obj.chi()
    if isinstance(obj, FiberGraph):
        return obj.chi()
    if isinstance(obj, dict) and "chi" in obj:
        return int(obj["chi"])
    raise DomainError(f"cannot compute an Euler characteristic of {type(obj).__name__}")


def genus_of(component: dict) -> int:
    if component.get("orientable") is False:
        raise IntegrityError("non-orientable gluing detected")
    if component.get("genus") is None:
        raise DomainError("component is not a closed orientable surface")
    return int(component["genus"])


# -- regular fibers --------------------------------------------------------------


def assert_regular(domain: BilliardDomain, lam: float, diag=None):
    diag = diag or bifurcation_diagram(domain)
    if any(abs(lam - v) <= 1e-9 for v in diag.values()):
        raise DomainError(f"lambda={lam:g} is a critical value")
    return diag


def regular_fiber(domain: BilliardDomain, part: Partition | None, lam: float,
                  oracle_resolution: int = 256, check: bool = True) -> FiberSurface:
    """The level set at a regular value, assembled on a subdivided grid,
    with the per-region-component prediction genus = k' + 1 (k' singular
    vertices inside the region component, as many puncture marks)."""
    assert_regular(domain, lam)
    sc = SheetComplex(domain, LevelSpec.at(domain, lam),
                      resolution=oracle_resolution, keep_sites=False)
    surf = sc.surface()
    surf.prediction = [{"region_component": rc, "genus": int(k) + 1, "punctures": int(k)}
                       for rc, k in enumerate(sc.region_k[:sc.n_region_comp])]
    surf.oracle_resolution = oracle_resolution
    agree = bool(surf.components) or sc.n_region_comp == 0
    for c in surf.components:
        p = surf.prediction[c["region_component"]]
        if c["genus"] != p["genus"] or c["punctures"] != p["punctures"]:
            agree = False
    surf.oracle_agrees = agree
    if check and not agree:
        raise IntegrityError(
            f"fiber assembly at lambda={lam} disagrees with the genus prediction")
    return surf


# -- graphs over cut arcs ----------------------------------------------------------


@dataclass
class FiberGraph:
    cut_value: float
    level: float
    axis: str
    black: list[dict] = field(default_factory=list)
    white: list[dict] = field(default_factory=list)
    segments: list[dict] = field(default_factory=list)
    edges: list[dict] = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.black) + 2 * len(self.white)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def multiplicity_identity(self) -> bool:
        plus = sum(1 for s in self.segments if s["mark"] == "+")
        minus = sum(1 for s in self.segments if s["mark"] == "-")
        return self.n_edges == 2 * plus + 4 * minus

    def punctured(self) -> int:
        return sum(1 for b in self.black if b["punctured"])

    def chi(self) -> int:
        return self.n_vertices - self.n_edges

    def signature(self) -> tuple:
        segs = tuple(sorted((s["mark"], s["quadrant"],
                             round(s["interval"][0], 9), round(s["interval"][1], 9))
                            for s in self.segments))
        return (segs, sum(b["punctured"] for b in self.black),
                len(self.black), len(self.white), self.n_edges)

    def empty(self) -> bool:
        return not self.segments


def _arc_site_order(sc: SheetComplex, axis: str, value: float, kinds=("glued", "free")):
    sites = [s for s in sc.sites
             if s["axis"] == axis and abs(s["value"] - value) <= 1e-9
             and s["kind"] in kinds]
    b = sc.domain.family.b
    if axis == "h":
        def key(s):
            sx, sy = QUADRANTS[s["q"]]
            mid = 0.5 * (s["interval"][0] + s["interval"][1])
            return (sx, mid if sy > 0 else 2 * b - mid)
    else:
        def key(s):
            q = s["q"]
            mid = 0.5 * (s["interval"][0] + s["interval"][1])
            return (q, mid if q in (0, 2) else -mid)
    return sorted(sites, key=key)


def _site_slots(sc: SheetComplex, s: dict):
    axis = s["axis"]
    if axis == "h":
        sides = (H_LO, H_LO) if s["cross"] == "ray" else (H_HI, H_LO)
    else:
        sides = (E_HI, E_HI) if s["cross"] == "interfocal" else (E_HI, E_LO)
    out = []
    for rect, side in zip(s["rects"], sides):
        if rect < 0:
            continue
        for sig in range(4):
            out.append(((rect * 4 + sig) * 4 + side, sig))
    return out


def _vertex_classes_at(sc: SheetComplex, s: dict, end: int):
    out = set()
    for slot, _sig in _site_slots(sc, s):
        face, side = slot // 4, slot % 4
        out.add(int(sc.vert_class[face * 4 + _corner_of_side(side, end)]))
    return out


def _sites_touch(sc, s1, s2) -> bool:
    v1 = _vertex_classes_at(sc, s1, 0) | _vertex_classes_at(sc, s1, 1)
    v2 = _vertex_classes_at(sc, s2, 0) | _vertex_classes_at(sc, s2, 1)
    return bool(v1 & v2)


def _edge_classes_over(sc: SheetComplex, sites):
    out = set()
    for s in sites:
        for slot, _ in _site_slots(sc, s):
            out.add(int(sc.edge_class[slot]))
    return out


def _chained_fiber_arcs(sc: SheetComplex, sites):
    """Connected fiber arcs over a run of collinear sites: the per-cell edge
    classes, merged through the vertex classes at the interior junctions of
    the run.  Returns a list of class groups (one per fiber arc)."""
    groups: dict[int, set] = {}
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    incidence: dict[tuple, set] = {}
    for k, s in enumerate(sites):
        for slot, _sig in _site_slots(sc, s):
            cls = int(sc.edge_class[slot])
            parent.setdefault(cls, cls)
            face, side = slot // 4, slot % 4
            for end in (0, 1):
                v = int(sc.vert_class[face * 4 + _corner_of_side(side, end)])
                incidence.setdefault((k, end), set()).add((v, cls))
    for k in range(len(sites) - 1):
        left = incidence.get((k, 1), set())
        right = incidence.get((k + 1, 0), set())
        by_v: dict[int, list] = {}
        for v, cls in left | right:
            by_v.setdefault(v, []).append(cls)
        for v, lst in by_v.items():
            for a, bcls in zip(lst[:-1], lst[1:]):
                union(a, bcls)
    out: dict[int, set] = {}
    for cls in parent:
        out.setdefault(find(cls), set()).add(cls)
    return list(out.values())


def _class_sigma(sc: SheetComplex, cls: int, sites):
    sigs = set()
    for s in sites:
        for slot, sig in _site_slots(sc, s):
            if int(sc.edge_class[slot]) == cls:
                sigs.add(sig)
    return sigs


def _edge_label(axis: str, mark: str, sigs) -> str:
    along_bit, across_bit = (1, 2) if axis == "h" else (2, 1)
    rep = min(sigs)
    up = (rep & along_bit) == 0
    if mark == "+":
        return "up" if up else "down"
    return ("1" if up else "2") if (rep & across_bit) == 0 else ("3" if up else "4")


def arc_side_level(domain: BilliardDomain, cut_axis: str, cut_value: float,
                   side: str) -> float:
    """Level at which the graph over a cut arc is built.  'below' is the
    regular side on which the arc belongs to the region, one quarter gap
    away; 'at' evaluates the marking with the closed motion region of the
    critical level, whose restriction to the arc equals the membership at
    any level of the closed regular-side interval, so it is computed a
    small step inside that interval."""
    gap = critical_gap(domain)
    off = gap / 4 if side == "below" else gap / 64
    if side not in ("below", "at"):
        raise DomainError(f"unknown side {side!r}")
    return cut_value - off if cut_axis == "h" else cut_value + off


def build_Gr(domain: BilliardDomain, part: Partition, i: int,
             side: str = "below") -> FiberGraph:
    """The labeled graph over cut arc i (the one-dimensional arc preimage
    on the regular side of the cut; at the critical level itself the same
    marked structure describes the closed-region preimage, of which the
    critical fiber restriction is the documented fold quotient)."""
    cut = part.cut_arcs[i]
    level = arc_side_level(domain, cut.axis, cut.lambda_i, side)
    sc = SheetComplex(domain, LevelSpec.at(domain, level), keep_sites=True)
    g = graph_over_quadric(sc, cut.axis, cut.lambda_i, domain)
    if side == "at":
        g.level = cut.lambda_i
    return g


def graph_over_quadric(sc: SheetComplex, axis: str, value: float,
                       domain: BilliardDomain, verify: bool | None = None) -> FiberGraph:
    """Marking pass of the graph algorithm over one quadric: segments and
    marked points depend only on region membership and the point types in
    the domain.  On a regular-side level (verify=True) the actual fiber
    classes are checked against the declared multiplicities: two edges per
    "+" segment, four per "-", one fiber point per black point, two per
    white.  At the critical level itself the preimage degenerates to a
    quotient of the graph, so only the marking is built there."""
    g = FiberGraph(value, sc.spec.alpha, axis)
    sites = _arc_site_order(sc, axis, value, kinds=("glued",))
    if not sites:
        return g
    if verify is None:
        at_caustic = any(s["at_caustic"] for s in sites)
        verify = not at_caustic and sc.spec.kind != SADDLE
    corners = domain.corners()

    def corner_index(s1):
        return corner_index_at(domain, _point_key(s1, 1))

    runs: list[list[dict]] = [[sites[0]]]
    junction_marks: list = []
    for s_prev, s_next in zip(sites[:-1], sites[1:]):
        contiguous = _sites_touch(sc, s_prev, s_next)
        ci = corner_index(s_prev) if contiguous else None
        quad_change = contiguous and s_prev["q"] != s_next["q"]
        marked = (not contiguous) or ci is not None \
            or (quad_change and sc.spec.kind == SADDLE) \
            or s_prev["wall"] != s_next["wall"]
        if not marked:
            runs[-1].append(s_next)
        else:
            junction_marks.append("gap" if not contiguous else
                                  (("corner", ci) if ci is not None else "white"))
            runs.append([s_next])
    for t, run in enumerate(runs):
        mark = "+" if run[0]["wall"] else "-"
        g.segments.append({"t": t, "mark": mark, "quadrant": run[0]["q"],
                           "interval": (run[0]["interval"][0], run[-1]["interval"][1])})
        expected_labels = ("up", "down") if mark == "+" else ("1", "2", "3", "4")
        if verify:
            arcs = _chained_fiber_arcs(sc, run)
            if len(arcs) != len(expected_labels):
                raise IntegrityError(
                    f"segment {t} over {value:g} has {len(arcs)} fiber edges, "
                    f"expected {len(expected_labels)}")
            for group in sorted(arcs, key=min):
                sigs = set()
                for cls in group:
                    sigs |= _class_sigma(sc, cls, run)
                lab = _edge_label(axis, mark, sigs)
                g.edges.append({"segment": t, "label": lab, "class": min(group)})
            if sorted(e["label"] for e in g.edges if e["segment"] == t) != \
                    sorted(expected_labels):
                raise IntegrityError(f"label table mismatch on segment {t}")
        else:
            for lab in expected_labels:
                g.edges.append({"segment": t, "label": lab, "class": None})
    # marked points: every run end, classified by position.  A domain
    # corner gives a black vertex (punctured at 3*pi/2 vertices); a wall
    # run ending on the caustic also collapses to one fiber point (black);
    # everything else is a transversal boundary crossing (white pair).
    seen = set()
    for run in runs:
        mark_wall = run[0]["wall"]
        for s, end in ((run[0], 0), (run[-1], 1)):
            key = _point_key(s, end)
            if key in seen:
                continue
            seen.add(key)
            ci = corner_index_at(domain, key)
            if ci is not None:
                c = corners[ci]
                g.black.append({"point": c.point,
                                "punctured": c.angle_class == THREE_QUARTER})
                expected = 1
            else:
                d = s["interval"][end]
                caustic_end = (
                    (sc.spec.kind == ELLIPTIC and axis == "h"
                     and abs(d - sc.spec.alpha) <= 1e-9)
                    or (sc.spec.kind == HYPERBOLIC and axis == "e"
                        and abs(d - sc.spec.alpha) <= 1e-9))
                if caustic_end and mark_wall:
                    g.black.append({"point": (key[1], key[2]), "punctured": False})
                    expected = 1
                else:
                    g.white.append({"point": (key[1], key[2])})
                    expected = 2
            if verify:
                vcls = _vertex_classes_at(sc, s, end)
                if len(vcls) != expected:
                    raise IntegrityError(
                        f"{len(vcls)} fiber points over a marked arc point, "
                        f"expected {expected}")
    return g


def corner_index_at(domain, pk):
    """Index of the domain corner at a point key (quadrant-aware: a corner
    off an axis only matches in its own quadrant)."""
    for ci, c in enumerate(domain.corners()):
        if abs(c.lambda_e - pk[1]) > 1e-9 or abs(c.lambda_h - pk[2]) > 1e-9:
            continue
        vx = 1 if c.point[0] > 1e-9 else (-1 if c.point[0] < -1e-9 else 0)
        vy = 1 if c.point[1] > 1e-9 else (-1 if c.point[1] < -1e-9 else 0)
        if vx in (0, pk[3]) and vy in (0, pk[4]):
            return ci
    return None


# -- cylinders ---------------------------------------------------------------------


def glue_cylinders(domain: BilliardDomain, part: Partition, level: float,
                   slab: tuple[float, float] | None = None) -> dict:
    """Cylinder decomposition at one non-saddle level: free the cut
    quadrics, collect the annular components, and read off which labeled
    arc edges each cylinder boundary subdivides into.  The unfreed complex
    at the same level is the assembled surface; the label bookkeeping and
    the graph Euler characteristic are checked against it."""
    if abs(level - domain.family.b) <= 1e-12:
        raise DomainError("cylinder gluing applies to non-saddle levels")
    axis = "h" if part.rule == "hyperbolic" else "e"
    cuts = tuple(part.cut_values)
    if slab is None:
        kw = {"free_h": cuts} if axis == "h" else {"free_e": cuts}
        cut_sc = SheetComplex(domain, LevelSpec.at(domain, level), keep_sites=True, **kw)
    else:
        cut_sc = SlabComplex(domain, level, cuts, axis, slab)
    cylinders = [{
        "id": k, "chi": c.chi, "free_circles": c.free_circles,
        "region_component": c.region_component,
    } for k, c in enumerate(cut_sc.comp)]
    table = []
    for s in cut_sc.sites:
        if s["kind"] != "free" or not any(abs(s["value"] - cv) <= 1e-9 for cv in cuts):
            continue
        for slot, sig in _site_slots(cut_sc, s):
            comp = int(cut_sc.face_comp[slot // 4])
            mark = "+" if s["wall"] else "-"
            table.append({
                "cylinder": comp,
                "side": "R" if (sig & (2 if axis == "h" else 1)) == 0 else "L",
                "cut": s["value"], "quadrant": s["q"], "interval": s["interval"],
                "label": _edge_label(axis, mark, {sig}), "mark": mark,
            })
    table.sort(key=lambda r: (r["cut"], r["quadrant"], r["interval"],
                              r["label"], r["cylinder"], r["side"]))
    use: dict[tuple, int] = {}
    for r in table:
        key = (r["cut"], r["quadrant"], r["interval"], r["label"])
        use[key] = use.get(key, 0) + 1
    for key, cnt in use.items():
        if cnt != 2:
            raise IntegrityError(f"gluing label {key} used {cnt} times, expected 2")
    return {"level": level, "cylinders": cylinders, "n_cylinders": len(cylinders),
            "table": table}


class SlabComplex(SheetComplex):
    """Sheet complex restricted to a coordinate slab around a cut quadric,
    with the slab boundary and the cut quadrics left free."""

    def __init__(self, domain, level, cuts, axis, slab):
        self._slab_axis = axis
        self._slab = slab
        kw = {"free_h": tuple(cuts) + tuple(slab)} if axis == "h" else \
             {"free_e": tuple(cuts) + tuple(slab)}
        super().__init__(domain, LevelSpec.at(domain, level), keep_sites=True, **kw)

    def _classify_rects(self):
        super()._classify_rects()
        lo, hi = self._slab
        if self._slab_axis == "h":
            hc = 0.5 * (self.hbr[:-1] + self.hbr[1:])
            mask = (hc >= lo - 1e-12) & (hc <= hi + 1e-12)
            self.rect_ok = self.rect_ok & mask[None, None, :]
        else:
            ec = 0.5 * (self.ebr[:-1] + self.ebr[1:])
            mask = (ec >= lo - 1e-12) & (ec <= hi + 1e-12)
            self.rect_ok = self.rect_ok & mask[None, :, None]
        rid = np.cumsum(self.rect_ok.ravel()).reshape(self.rect_ok.shape) - 1
        self.rect_id = np.where(self.rect_ok, rid, -1)
        self.n_rect = int(self.rect_ok.sum())
        self.n_faces = self.n_rect * 4


# -- cut billiards -----------------------------------------------------------------


class InsideComplex(SheetComplex):
    """Complex over the part of the domain inside the hyperbola theta, the
    billiard law removed on theta."""

    def __init__(self, domain, spec, theta, resolution=1):
        self._theta = theta
        super().__init__(domain, spec, keep_sites=True, free_h=(theta,),
                         resolution=resolution)

    def _classify_rects(self):
        super()._classify_rects()
        jt = _find_break(self.hbr, self._theta)
        self.rect_ok = self.rect_ok.copy()
        self.rect_ok[:, :, :jt] = False
        rid = np.cumsum(self.rect_ok.ravel()).reshape(self.rect_ok.shape) - 1
        self.rect_id = np.where(self.rect_ok, rid, -1)
        self.n_rect = int(self.rect_ok.sum())
        self.n_faces = self.n_rect * 4


def cut_fiber_prediction(domain: BilliardDomain, theta: float, lam: float,
                         resolution: int = 1) -> dict:
    """Fiber of the billiard cut open along the hyperbola theta and
    restricted inside it.  Against the fiber of the same region with the
    billiard law kept on theta (total genus G, per-component genus k'+1),
    removing the law cuts nu handles: 2*nu free boundary circles appear,
    chi is unchanged, and capping the circles raises chi by 2 per cut
    handle, so the total capped genus is G - nu.  For a one-surface fiber
    crossed once this is the classical torus-to-annulus picture."""
    fam = domain.family
    if not (fam.b < theta <= fam.a):
        raise DomainError("theta must be a hyperbola parameter")
    for c in domain.corners():
        if abs(c.lambda_h - theta) <= 1e-9:
            raise DomainError("theta passes through a corner")
    assert_regular(domain, lam)
    spec = LevelSpec.at(domain, lam)
    cut_sc = InsideComplex(domain, spec, theta, resolution=resolution)
    walled = WalledInsideComplex(domain, spec, theta, resolution=resolution)
    surf = cut_sc.surface()
    g = sum(1 for c in domain.singular_vertices()
            if c.lambda_h > theta + 1e-12 and cut_sc._vertex_in_region(c))
    nu_runs = _count_runs(cut_sc, "h", theta, kinds=("free",))
    total_free = sum(c["free_circles"] for c in surf.components)
    nu = total_free // 2
    uncut = walled.surface()
    uncut_genus = sum(c["genus"] for c in uncut.components)
    capped_genus = sum((2 - (c["chi"] + c["free_circles"])) // 2 for c in surf.components)
    punctures = sum(c["punctures"] for c in surf.components)
    chi_equal = cut_sc.chi() == walled.chi()
    # capping all 2*nu free circles raises chi by 2 per cut circle, so
    # genus(capped) = genus(uncut) - nu + (new components created by cuts)
    identity = capped_genus == uncut_genus - nu + (len(surf.components) - len(uncut.components))
    ok = (total_free == 2 * nu_runs) and identity and (punctures == g) and chi_equal
    return {"lambda": lam, "theta": theta, "g": g, "nu": nu,
            "arc_runs": nu_runs, "free_circles": total_free,
            "uncut_genus": uncut_genus, "capped_genus": capped_genus,
            "uncut_components": len(uncut.components),
            "punctures": punctures, "components": len(surf.components),
            "chi_preserved": chi_equal, "handle_identity": identity,
            "prediction_holds": ok, "surface": surf}


class WalledInsideComplex(SheetComplex):
    """Complex over the inside of theta with the billiard law introduced on
    theta (one-sided edges there get the ordinary wall identification)."""

    def __init__(self, domain, spec, theta, resolution=1):
        self._theta = theta
        super().__init__(domain, spec, keep_sites=True, extra_h=(theta,),
                         resolution=resolution)

    def _classify_rects(self):
        super()._classify_rects()
        jt = _find_break(self.hbr, self._theta)
        self.rect_ok = self.rect_ok.copy()
        self.rect_ok[:, :, :jt] = False
        rid = np.cumsum(self.rect_ok.ravel()).reshape(self.rect_ok.shape) - 1
        self.rect_id = np.where(self.rect_ok, rid, -1)
        self.n_rect = int(self.rect_ok.sum())
        self.n_faces = self.n_rect * 4

    def _edge_case(self, fam_axis, index, L, P, cover, is_free, at_caustic, cross):
        if fam_axis == "h" and index == _find_break(self.hbr, self._theta):
            at_caustic = True  # allow the one-sided wall without an arc
        super()._edge_case(fam_axis, index, L, P, cover, is_free, at_caustic, cross)


def _count_runs(sc: SheetComplex, axis: str, value: float,
                kinds=("free", "glued")) -> int:
    ordered = _arc_site_order(sc, axis, value, kinds=kinds)
    runs, prev = 0, None
    for s in ordered:
        if prev is None or not _sites_touch(sc, prev, s):
            runs += 1
        prev = s
    return runs


# -- cell complexes of critical neighborhoods ---------------------------------------


@dataclass
class CellComplex:
    critical_value: float
    epsilon: float
    cells: list[dict] = field(default_factory=list)

    def count(self, dim: int, kind: int | None = None) -> int:
        return sum(1 for c in self.cells
                   if c["dim"] == dim and (kind is None or c["cell_kind"] == kind))

    def counts(self) -> dict:
        return {
            0: self.count(0),
            1: (self.count(1, 1), self.count(1, 2)),
            2: (self.count(2, 1), self.count(2, 2)),
            3: self.count(3),
        }

    def chi(self) -> int:
        return sum((-1) ** c["dim"] for c in self.cells)

    def boundary_valid(self) -> bool:
        ids = {c["id"]: c["dim"] for c in self.cells}
        for c in self.cells:
            for b in c["boundary"]:
                if b not in ids or ids[b] >= c["dim"]:
                    return False
        return True


def build_cell_complex(domain: BilliardDomain, part: Partition, c: float,
                       epsilon: float | None = None) -> CellComplex:
    """The cell complex of the critical neighborhood [c - eps, c + eps]:
    0-cells over the marked points at the three distinguished levels,
    vertical 1-cells sweeping them through the open intervals, 1- and
    2-cells of the first and second kinds over the level structure, and
    four 3-cells per open region-element piece and side."""
    diag = bifurcation_diagram(domain, part)
    if not any(abs(c - v) <= 1e-9 for v in diag.values()):
        raise DomainError(f"{c:g} is not a critical value")
    gap = diag.min_gap()
    eps = gap / 4 if epsilon is None else epsilon
    if eps > gap / 2:
        raise DomainError("epsilon reaches the next critical value")
    levels = {"below_c": c - eps, "at_c": c, "above_c": c + eps}
    sweeps = {"below_c": c - eps / 2, "above_c": c + eps / 2}
    extra_e, extra_h = set(), set()
    for lv in list(levels.values()) + list(sweeps.values()):
        if lv < domain.family.b:
            extra_e.add(lv)
        elif lv > domain.family.b:
            extra_h.add(lv)
    kw = dict(keep_sites=True, extra_e=tuple(extra_e), extra_h=tuple(extra_h))
    fixed = {tag: _LevelStructure(domain, part,
                                  SheetComplex(domain, LevelSpec.at(domain, lv), **kw))
             for tag, lv in levels.items()}
    mids = {tag: _LevelStructure(domain, part,
                                 SheetComplex(domain, LevelSpec.at(domain, lv), **kw))
            for tag, lv in sweeps.items()}
    # union of P keys and Q keys over the three distinguished levels,
    # segments re-split at every P point
    pkeys = set()
    for st in fixed.values():
        pkeys |= set(st.points)
    qkeys = set()
    for st in fixed.values():
        qkeys |= set(st.split_segments(pkeys))
    cc = CellComplex(c, eps)

    def add(dim, kind, tag, key, boundary, count):
        for copy in range(count):
            cc.cells.append({"id": (dim, kind, tag, key, copy), "dim": dim,
                             "cell_kind": kind, "tag": tag, "boundary": boundary})

    for tag, st in fixed.items():
        for key in sorted(pkeys):
            add(0, 0, tag, key, [], st.point_mult(key))
    order = {"below_c": ("below_c", "at_c"), "above_c": ("at_c", "above_c")}
    for tag, st in mids.items():
        for key in sorted(pkeys):
            m = st.point_mult(key)
            if not m:
                continue
            bnd = []
            for et in order[tag]:
                bnd += [(0, 0, et, key, k) for k in range(fixed[et].point_mult(key))]
            add(1, 1, tag, key, bnd, m)
    for tag, st in fixed.items():
        for key in sorted(qkeys):
            m, endpoints = st.segment_mult(key)
            if not m:
                continue
            bnd = []
            for pk in endpoints:
                bnd += [(0, 0, tag, pk, k) for k in range(st.point_mult(pk))]
            add(1, 2, tag, key, bnd, m)
    for tag, st in mids.items():
        for key in sorted(qkeys):
            m, endpoints = st.segment_mult(key)
            if not m:
                continue
            bnd = []
            for et in order[tag]:
                me, _ = fixed[et].segment_mult(key)
                bnd += [(1, 2, et, key, k) for k in range(me)]
            for pk in endpoints:
                bnd += [(1, 1, tag, pk, k) for k in range(st.point_mult(pk))]
            add(2, 1, tag, key, bnd, m)
    for tag, st in fixed.items():
        for key, rec in st.pieces(qkeys).items():
            bnd = []
            for sk in rec["boundary_segments"]:
                ms, _ = st.segment_mult(sk)
                bnd += [(1, 2, tag, sk, k) for k in range(ms)]
            add(2, 2, tag, key, bnd, 4)
    for tag, st in mids.items():
        for key, rec in st.pieces(qkeys).items():
            bnd = []
            for et in order[tag]:
                if key in fixed[et].pieces(qkeys):
                    bnd += [(2, 2, et, key, k) for k in range(4)]
            for sk in rec["boundary_segments"]:
                ms, _ = st.segment_mult(sk)
                bnd += [(2, 1, tag, sk, k) for k in range(ms)]
            add(3, 0, tag, key, bnd, 4)
    return cc


class _LevelStructure:
    """Marked points, smooth quadric runs, and open region-element pieces of
    one level complex."""

    def __init__(self, domain, part, sc: SheetComplex):
        self.domain = domain
        self.part = part
        self.sc = sc
        self.axis_cuts = set(np.round(part.cut_values, 10))
        self._collect()

    def _interesting(self, s):
        if s["kind"] == "free":
            return False
        if s["wall"] or s["at_caustic"]:
            return True
        if round(s["value"], 10) in self.axis_cuts and \
                s["axis"] == ("h" if self.part.rule == "hyperbolic" else "e"):
            return True
        if self.sc.spec.kind == SADDLE and s["cross"] in ("interfocal", "ray"):
            return True
        return False

    def _collect(self):
        sc = self.sc
        corner_keys = {(round(c.lambda_e, 10), round(c.lambda_h, 10))
                       for c in self.domain.corners()}
        lines: dict[tuple, list] = {}
        for s in sc.sites:
            if self._interesting(s):
                lines.setdefault((s["axis"], round(s["value"], 10)), []).append(s)
        self.points: dict[tuple, int] = {}
        self.runs: list[dict] = []
        for (axis, value), _members in sorted(lines.items()):
            ordered = [s for s in _arc_site_order(sc, axis, value)
                       if self._interesting(s)]
            runs = [[ordered[0]]]
            for s_prev, s_next in zip(ordered[:-1], ordered[1:]):
                d = round(s_prev["interval"][1], 10)
                key = (d, round(value, 10)) if axis == "h" else (round(value, 10), d)
                smooth = _sites_touch(sc, s_prev, s_next) and key not in corner_keys \
                    and s_prev["wall"] == s_next["wall"] \
                    and s_prev["at_caustic"] == s_next["at_caustic"] \
                    and not (sc.spec.kind == SADDLE and s_prev["q"] != s_next["q"])
                if smooth:
                    runs[-1].append(s_next)
                else:
                    runs.append([s_next])
            for run in runs:
                endpoints = []
                for s, end in ((run[0], 0), (run[-1], 1)):
                    pk = _point_key(s, end)
                    self.points[pk] = len(_vertex_classes_at(sc, s, end))
                    endpoints.append(pk)
                self.runs.append({
                    "axis": axis, "value": round(value, 10), "q": run[0]["q"],
                    "interval": (round(run[0]["interval"][0], 10),
                                 round(run[-1]["interval"][1], 10)),
                    "sites": run, "endpoints": endpoints,
                })
        self._piece_cache: dict = {}

    def split_segments(self, pkeys) -> list[tuple]:
        out = []
        for r in self.runs:
            splits = {r["interval"][0], r["interval"][1]}
            for pk in pkeys:
                le, lh, sx, sy = pk[1], pk[2], pk[3], pk[4]
                on_line = (abs(lh - r["value"]) <= 1e-9 and r["axis"] == "h") or \
                          (abs(le - r["value"]) <= 1e-9 and r["axis"] == "e")
                if not on_line:
                    continue
                d = le if r["axis"] == "h" else lh
                if r["interval"][0] + 1e-9 < d < r["interval"][1] - 1e-9 \
                        and _quadrant_ok(pk, r["q"]):
                    splits.add(round(d, 10))
            cuts = sorted(splits)
            for d0, d1 in zip(cuts[:-1], cuts[1:]):
                out.append(("seg", r["axis"], r["value"], r["q"], d0, d1))
        return out

    def point_mult(self, pk) -> int:
        if pk in self.points:
            return self.points[pk]
        sc = self.sc
        _, le, lh, sx, sy = pk
        try:
            i = _find_break(sc.ebr, le)
            j = _find_break(sc.hbr, lh)
        except IntegrityError:
            return 0
        classes = set()
        for q, (qx, qy) in enumerate(QUADRANTS):
            if (sx and qx != sx) or (sy and qy != sy):
                continue
            for di, ci in ((i - 1, 1), (i, 0)):
                for dj, cj in ((j - 1, 1), (j, 0)):
                    if 0 <= di < sc.NE and 0 <= dj < sc.NH and sc.rect_ok[q, di, dj]:
                        rid = int(sc.rect_id[q, di, dj])
                        classes.add(int(sc.vert_class[(rid * 4) * 4 + (2 * ci + cj)]))
        self.points[pk] = len(classes)
        return len(classes)

    def segment_mult(self, qkey) -> tuple[int, list]:
        _, axis, value, q, d0, d1 = qkey
        sc = self.sc
        sel = [s for s in sc.sites
               if s["axis"] == axis and abs(s["value"] - value) <= 1e-9
               and s["q"] == q and s["kind"] != "free"
               and s["interval"][0] >= d0 - 1e-9 and s["interval"][1] <= d1 + 1e-9]
        if not sel:
            return 0, []
        ordered = sorted(sel, key=lambda s: s["interval"])
        classes = _chained_fiber_arcs(sc, ordered)
        le0, lh0 = (d0, value) if axis == "h" else (value, d0)
        le1, lh1 = (d1, value) if axis == "h" else (value, d1)
        sx, sy = QUADRANTS[q]
        eps = [("pt", round(le0, 10), round(lh0, 10), sx, sy),
               ("pt", round(le1, 10), round(lh1, 10), sx, sy)]
        return len(classes), eps

    def pieces(self, qkeys) -> dict:
        key = id(qkeys)
        if key in self._piece_cache:
            return self._piece_cache[key]
        sc = self.sc
        grid_lab = _piece_labels(self.domain, self.part, sc)
        out: dict = {}
        npieces = int(grid_lab.max()) + 1 if grid_lab.size else 0
        seg_by_cell: dict[tuple, list] = {}
        for qk in qkeys:
            _, axis, value, q, d0, d1 = qk
            try:
                idx = _find_break(sc.ebr if axis == "e" else sc.hbr, value)
            except IntegrityError:
                continue
            duals = sc.hbr if axis == "e" else sc.ebr
            p0 = int(np.searchsorted(duals, d0 + 1e-12)) - 1 + 1
            p1 = int(np.searchsorted(duals, d1 - 1e-12))
            for p in range(max(p0 - 1, 0), p1):
                if axis == "e":
                    for di in (idx - 1, idx):
                        seg_by_cell.setdefault((q, di, p), []).append(qk)
                else:
                    for dj in (idx - 1, idx):
                        seg_by_cell.setdefault((q, p, dj), []).append(qk)
        for pc in range(npieces):
            cells = np.argwhere(grid_lab == pc)
            segs = set()
            for qq, ii, jj in cells:
                for qk in seg_by_cell.get((int(qq), int(ii), int(jj)), []):
                    segs.add(qk)
            out[("piece", pc)] = {"boundary_segments": sorted(segs),
                                  "anchor": tuple(int(v) for v in cells[0])}
        self._piece_cache[key] = out
        return out


def _point_key(s, end):
    d = s["interval"][end]
    le, lh = (d, s["value"]) if s["axis"] == "h" else (s["value"], d)
    sx, sy = QUADRANTS[s["q"]]
    return ("pt", round(le, 10), round(lh, 10), sx, sy)


def _quadrant_ok(pk, q) -> bool:
    sx, sy = QUADRANTS[q]
    return pk[3] == sx and pk[4] == sy


def _piece_labels(domain, part, sc: SheetComplex):
    grid = PositionGrid.build(domain, extra_e=tuple(sc.ebr), extra_h=tuple(sc.hbr))
    if sc.spec.kind == ELLIPTIC:
        ec = 0.5 * (grid.ebr[:-1] + grid.ebr[1:])
        mask = np.broadcast_to((ec <= sc.spec.alpha)[None, :, None],
                               grid.in_domain.shape).copy()
    elif sc.spec.kind == HYPERBOLIC:
        hc = 0.5 * (grid.hbr[:-1] + grid.hbr[1:])
        mask = np.broadcast_to((hc >= sc.spec.alpha)[None, None, :],
                               grid.in_domain.shape).copy()
    else:
        mask = np.ones_like(grid.in_domain)
    blocked_e = tuple(part.cut_values) if part.rule == "elliptic" else ()
    blocked_h = tuple(part.cut_values) if part.rule == "hyperbolic" else ()
    return grid.components(blocked_e=blocked_e, blocked_h=blocked_h, mask=mask)
