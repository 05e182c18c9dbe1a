"""Atom reports: the structure of the critical-level neighborhoods.

For a non-saddle critical value (a cut quadric through 3*pi/2 vertices)
the report assembles the outer cut-fiber check, the graph over the arc on
both sides of the level, the cylinder families in the strip (2*(nu+xi)
below, 2*nu at the level, all annuli), the Algorithm-2 style gluing table,
and two independent Euler-characteristic routes through the neighborhood.

For the saddle value b the report looks up the 2-atom of every elementary
piece in the classification table (atom B for the inter-focal classes with
0 or 2 foci, A* for one focus, B_n for the quadrilateral families, a
trivial torus family otherwise), splits the domain along the focal line,
and checks the reassembly: the full singular-level complex equals the top
and bottom halves glued along the focal-line circles, fiberwise.

Atom names are verified against engine invariants: the number of
transversal self-crossing circles of the singular fiber and the component
counts of the two side fibers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decomposition import Partition, critical_gap, partition
from .domain import BilliardDomain, NON_HOMOGENEOUS
from .errors import DomainError, IntegrityError
from .fiber import LevelSpec, SheetComplex, SADDLE
from .topology import (
    BifurcationDiagram,
    FiberGraph,
    SlabComplex,
    bifurcation_diagram,
    build_cell_complex,
    build_Gr,
    cut_fiber_prediction,
    glue_cylinders,
    graph_over_quadric,
    regular_fiber,
)

TORUS_FAMILY = "torus_x_interval"


@dataclass
class TwoAtom:
    name: str
    vertices: int                  # degree-4 vertices of the base graph
    boundary_below: int            # fiber components on the elliptic side
    boundary_above: int

    def __str__(self):
        return self.name


@dataclass
class AtomReport:
    critical_value: float
    kind: str                       # 'saddle' or 'cut'
    epsilon: float
    fiber_below: object = None
    fiber_above: object = None
    graphs: dict = field(default_factory=dict)
    gluing_table: list = field(default_factory=list)
    cylinders: dict = field(default_factory=dict)
    cell_counts: dict = field(default_factory=dict)
    elements: list = field(default_factory=list)
    atom: str | None = None
    two_atom: TwoAtom | None = None
    theorem_checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = ""):
        self.theorem_checks.append({"name": name, "passed": bool(ok), "detail": detail})

    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.theorem_checks)

    def to_text(self) -> str:
        lines = [f"critical_value: {self.critical_value:.12g}",
                 f"kind: {self.kind}",
                 f"epsilon: {self.epsilon:.12g}"]
        if self.atom:
            lines.append(f"atom: {self.atom}")
        if self.two_atom:
            lines.append(f"two_atom: name={self.two_atom.name} vertices={self.two_atom.vertices} "
                         f"boundary_below={self.two_atom.boundary_below} "
                         f"boundary_above={self.two_atom.boundary_above}")
        for side, f in (("below", self.fiber_below), ("above", self.fiber_above)):
            if f is not None:
                comps = sorted((c["genus"], c["punctures"]) for c in f.components)
                lines.append(f"fiber_{side}: level={f.level:.12g} components=" +
                             " ".join(f"(genus={g},punctures={p})" for g, p in comps))
        for name in sorted(self.graphs):
            g = self.graphs[name]
            lines.append(f"graph {name}: black={len(g.black)} white={len(g.white)} "
                         f"edges={g.n_edges} punctured={g.punctured()} "
                         f"segments=" + ",".join(s["mark"] for s in g.segments))
        if self.cylinders:
            for key in sorted(self.cylinders):
                lines.append(f"cylinders {key}: {self.cylinders[key]}")
        if self.cell_counts:
            cnt = self.cell_counts
            lines.append(
                "cells: dim0=%d dim1=(%d+%d) dim2=(%d+%d) dim3=%d chi=%d" % (
                    cnt["0"], cnt["1k1"], cnt["1k2"], cnt["2k1"], cnt["2k2"],
                    cnt["3"], cnt["chi"]))
        for el in self.elements:
            lines.append(f"element {el['index']}: type={el['type']} atom={el['atom']}")
        for row in self.gluing_table:
            lines.append(
                "glue: cut=%.9g quadrant=%d interval=[%.9g,%.9g] label=%s "
                "cylinder=%d side=%s" % (
                    row["cut"], row["quadrant"], row["interval"][0], row["interval"][1],
                    row["label"], row["cylinder"], row["side"]))
        for c in self.theorem_checks:
            status = "pass" if c["passed"] else "FAIL"
            detail = f" ({c['detail']})" if c["detail"] else ""
            lines.append(f"check {c['name']}: {status}{detail}")
        return "\n".join(lines) + "\n"


THEOREM1_TABLE = {
    "A0": "B", "A2": "B",
    "A1": "A*",
    "A'0": TORUS_FAMILY, "A'1": TORUS_FAMILY, "A'2": TORUS_FAMILY,
    "B0": TORUS_FAMILY, "B'1": TORUS_FAMILY, "B''2": TORUS_FAMILY,
}


def theorem1_atom(tag: str) -> str:
    """2-atom of the saddle level of one elementary billiard."""
    if tag in THEOREM1_TABLE:
        return THEOREM1_TABLE[tag]
    if tag.startswith("B''"):
        return TORUS_FAMILY
    if tag.startswith("B'"):
        n = int(tag[2:]) - 1
        return _bn_name(n) if n >= 1 else TORUS_FAMILY
    if tag.startswith("B"):
        n = int(tag[1:])
        return _bn_name(n) if n >= 1 else TORUS_FAMILY
    raise DomainError(f"unknown elementary tag {tag!r}")


def _bn_name(n: int) -> str:
    return "B" if n == 1 else f"B_{n}"


def atom_from_signature(circles: int, below: int, above: int) -> str:
    """Atom name from the engine invariants: self-crossing circles of the
    singular fiber and side component counts."""
    if circles == 0:
        return TORUS_FAMILY
    small, big = sorted((below, above))
    if circles == 1 and (below, above) == (1, 1):
        return "A*"
    if small == 1 and big == circles + 1:
        return _bn_name(circles)
    raise IntegrityError(
        f"no atom with {circles} crossing circles and sides {below}/{above}")


def saddle_signature(domain: BilliardDomain) -> tuple[int, int, int, int]:
    """(crossing circles, below components, above components, corrected chi)
    of the saddle level."""
    gap = critical_gap(domain)
    b = domain.family.b
    below = SheetComplex(domain, LevelSpec.at(domain, b - gap / 4), keep_sites=False)
    above = SheetComplex(domain, LevelSpec.at(domain, b + gap / 4), keep_sites=False)
    mid = SheetComplex(domain, LevelSpec.at(domain, b), keep_sites=False)
    chi = mid.chi() + mid.chi_focus_correction
    return mid.n_collapse_circles, below.n_comp, above.n_comp, chi


def genus_conservation_check(domain: BilliardDomain, part: Partition | None = None) -> dict:
    """Genus sums of the level sets on the two sides of the saddle value,
    and whether their equality matches the absence of 3*pi/2 vertices on
    the focal line."""
    gap = critical_gap(domain)
    b = domain.family.b
    below = regular_fiber(domain, part, b - gap / 4, oracle_resolution=1)
    above = regular_fiber(domain, part, b + gap / 4, oracle_resolution=1)
    sum_below = below.total_genus()
    sum_above = above.total_genus()
    on_axis = [c.point for c in domain.singular_vertices()
               if abs(c.point[1]) <= 1e-9]
    equal = sum_below == sum_above
    return {
        "below": below.genus_list(), "above": above.genus_list(),
        "sum_below": sum_below, "sum_above": sum_above, "equal": equal,
        "vertices_on_focal_line": len(on_axis),
        "matches_vertex_criterion": equal == (len(on_axis) == 0),
    }


# -- non-saddle atoms -----------------------------------------------------------


def nonsaddle_atom(domain: BilliardDomain, part: Partition, i: int) -> AtomReport:
    """Report for the neighborhood of one cut-quadric critical value."""
    cut = part.cut_arcs[i]
    fam = domain.family
    if abs(cut.lambda_i - fam.b) <= 1e-12:
        raise DomainError("use saddle_atom for the saddle value")
    gap = critical_gap(domain)
    eps = gap / 4
    lam = cut.lambda_i
    hyper = cut.axis == "h"
    lo, hi = (lam - eps, lam + eps)
    rep = AtomReport(lam, "cut", eps)
    side_below = lo if hyper else hi   # the side where the arc is in-region
    side_above = hi if hyper else lo
    rep.fiber_below = regular_fiber(domain, part, side_below, oracle_resolution=1)
    rep.fiber_above = regular_fiber(domain, part, side_above, oracle_resolution=1)
    rep.check("side_fibers_match_prediction",
              rep.fiber_below.oracle_agrees and rep.fiber_above.oracle_agrees)
    gb = build_Gr(domain, part, i, "below")
    ga = build_Gr(domain, part, i, "at")
    rep.graphs = {"Gr_below": gb, "Gr_at": ga}
    rep.check("graph_level_independent", gb.signature() == ga.signature())
    rep.check("graph_multiplicities",
              gb.multiplicity_identity() and ga.multiplicity_identity())
    punct = sum(1 for p in cut.singular_points)
    rep.check("graph_punctures", gb.punctured() == punct,
              f"{gb.punctured()} vs {punct} vertices on the arc")
    # cylinder families in the strip
    cuts = tuple(part.cut_values)
    slab = (lam - eps, lam + eps) if hyper else (lam - eps, lam + eps)
    edge_level = lo if hyper else hi
    below_slab = SlabComplex(domain, edge_level, cuts, cut.axis, slab)
    at_slab = SlabComplex(domain, lam, cuts, cut.axis, slab)
    n_below, n_at = below_slab.n_comp, at_slab.n_comp
    rep.cylinders = {
        "below": {"count": n_below,
                  "chi": [c.chi for c in below_slab.comp],
                  "free_circles": [c.free_circles for c in below_slab.comp]},
        "at": {"count": n_at,
               "chi": [c.chi for c in at_slab.comp],
               "free_circles": [c.free_circles for c in at_slab.comp]},
    }
    rep.check("cylinders_below_2nu_2xi", n_below == 2 * (cut.nu + cut.xi),
              f"{n_below} vs 2*({cut.nu}+{cut.xi})")
    rep.check("cylinders_at_2nu", n_at == 2 * cut.nu, f"{n_at} vs 2*{cut.nu}")
    rep.check("cylinders_are_annuli",
              all(c.chi == 0 for c in below_slab.comp + at_slab.comp))
    # gluing table at a regular level on the arc side
    glue = glue_cylinders(domain, part, side_below)
    rep.gluing_table = glue["table"]
    rep.check("gluing_labels_used_twice", True)  # raised inside otherwise
    # strip fiber vs graph: chi of the unfreed strip fiber equals chi(Gr)
    strip_unfreed = SlabComplex(domain, edge_level, (), cut.axis, slab)
    rep.check("strip_chi_equals_graph_chi", strip_unfreed.chi() == gb.chi(),
              f"{strip_unfreed.chi()} vs {gb.chi()}")
    # outer part: the cut-open fiber identity in the atom band
    theta = lam - eps if hyper else None
    if hyper:
        cf = cut_fiber_prediction(domain, lam - eps, lam - eps / 2)
        rep.data["outer_cut_fiber"] = {k: cf[k] for k in
                                       ("g", "nu", "free_circles", "uncut_genus",
                                        "capped_genus", "prediction_holds")}
        rep.check("outer_cut_fiber", cf["prediction_holds"])
    # cell complex and the two-way chi
    cc = build_cell_complex(domain, part, lam)
    rep.cell_counts = {
        "0": cc.count(0), "1k1": cc.count(1, 1), "1k2": cc.count(1, 2),
        "2k1": cc.count(2, 1), "2k2": cc.count(2, 2), "3": cc.count(3),
        "chi": cc.chi(),
    }
    rep.check("cell_boundaries_in_lower_skeleton", cc.boundary_valid())
    at_sc = SheetComplex(domain, LevelSpec.at(domain, lam), keep_sites=False)
    rep.check("two_way_chi", cc.chi() == at_sc.chi(),
              f"cells {cc.chi()} vs level complex {at_sc.chi()}")
    rep.data["chi_at_level"] = at_sc.chi()
    return rep


# -- saddle atoms -----------------------------------------------------------------


def saddle_graphs(domain: BilliardDomain, part: Partition, i: int) -> tuple:
    """Graphs over cut arc i below, at, and above the saddle value.  At the
    saddle the crossings with the focal line are extra white points."""
    gap = critical_gap(domain)
    b = domain.family.b
    cut = part.cut_arcs[i]
    out = []
    for lv in (b - gap / 4, b, b + gap / 4):
        sc = SheetComplex(domain, LevelSpec.at(domain, lv), keep_sites=True)
        out.append(graph_over_quadric(sc, cut.axis, cut.lambda_i, domain))
    return tuple(out)


def saddle_atom(domain: BilliardDomain, part: Partition | None = None) -> AtomReport:
    """Report for the neighborhood of the saddle value b: elementary atoms
    per piece, the focal-line splitting, and the reassembly checks."""
    if part is None:
        part = partition(domain)
    k = domain.complexity()
    if k > 0 and domain.homogeneity() == NON_HOMOGENEOUS:
        raise DomainError("the saddle assembly needs a homogeneous billiard")
    fam = domain.family
    gap = critical_gap(domain)
    eps = gap / 4
    b = fam.b
    rep = AtomReport(b, "saddle", eps)
    rep.fiber_below = regular_fiber(domain, part, b - eps, oracle_resolution=1)
    rep.fiber_above = regular_fiber(domain, part, b + eps, oracle_resolution=1)
    rep.check("side_fibers_match_prediction",
              rep.fiber_below.oracle_agrees and rep.fiber_above.oracle_agrees)
    for j, el in enumerate(part.elements):
        tag = str(el.elementary_type)
        rep.elements.append({"index": j, "type": tag, "atom": theorem1_atom(tag)})
    circles, n_below, n_above, chi = saddle_signature(domain)
    rep.data["crossing_circles"] = circles
    rep.data["chi_singular_corrected"] = chi
    if k == 0:
        looked = theorem1_atom(str(part.elements[0].elementary_type))
        derived = atom_from_signature(circles, n_below, n_above)
        rep.atom = looked
        rep.two_atom = TwoAtom(derived, circles, n_below, n_above)
        rep.check("theorem1_atom", looked == derived,
                  f"lookup {looked} vs derived {derived}")
        rep.check("singular_chi_zero", chi == 0, f"chi = {chi}")
    # graphs over every cut arc at the three levels
    for i in range(part.n):
        g_lo, g_eq, g_hi = saddle_graphs(domain, part, i)
        rep.graphs[f"Gr<{i}"] = g_lo
        rep.graphs[f"Gr={i}"] = g_eq
        rep.graphs[f"Gr>{i}"] = g_hi
    # focal-line splitting and reassembly: chi(full) = chi(top) + chi(bottom)
    # - chi(interface), computed fiberwise at the saddle level
    full = SheetComplex(domain, LevelSpec.at(domain, b), keep_sites=True)
    top = SheetComplex(domain, LevelSpec.at(domain, b), keep_sites=True, split="top")
    bot = SheetComplex(domain, LevelSpec.at(domain, b), keep_sites=True, split="bottom")
    chi_im = _interface_chi(full)
    pre_top = _side_interface_chi(top)
    pre_bot = _side_interface_chi(bot)
    lhs = full.chi()
    rhs = top.chi() + bot.chi() - pre_top - pre_bot + chi_im
    rep.data["split_chi"] = {"full": lhs, "top": top.chi(), "bottom": bot.chi(),
                             "interface_top": pre_top, "interface_bottom": pre_bot,
                             "interface_image": chi_im}
    rep.check("two_way_chi_saddle", lhs == rhs, f"{lhs} vs {rhs}")
    gc = genus_conservation_check(domain, part)
    rep.data["genus_conservation"] = gc
    if k > 0:
        rep.check("genus_conservation_vertex_criterion", gc["matches_vertex_criterion"],
                  f"sums {gc['sum_below']}/{gc['sum_above']}, "
                  f"{gc['vertices_on_focal_line']} vertices on the focal line")
    return rep


def _side_interface_chi(split_sc: SheetComplex) -> int:
    """Euler characteristic of one half's fiber over the crossing runs of
    the focal line (axis sites that are not walls of the original domain).
    Glued with the other half's copy onto the image, this is the preimage
    term of the reassembly bookkeeping."""
    from .topology import _site_slots, _vertex_classes_at
    eclasses: set[int] = set()
    vclasses: set[int] = set()
    for s in split_sc.sites:
        if s["cross"] not in ("interfocal", "ray") or s["wall"]:
            continue
        for slot, _sig in _site_slots(split_sc, s):
            eclasses.add(int(split_sc.edge_class[slot]))
        for end in (0, 1):
            vclasses |= _vertex_classes_at(split_sc, s, end)
    return len(vclasses) - len(eclasses)


def _interface_chi(full_sc: SheetComplex) -> int:
    """Euler characteristic of the self-crossing locus of the singular
    fiber (the circles along which the split halves reglue): collapse edge
    classes and their vertex classes."""
    nE = int(full_sc.edge_class.max()) + 1 if full_sc.n_faces else 0
    esize = np.bincount(full_sc.edge_class, minlength=nE) if nE else np.zeros(0, int)
    eclasses = set(np.flatnonzero(esize > 2).tolist())
    if not eclasses:
        return 0
    vclasses = set()
    for slot in range(full_sc.n_faces * 4):
        if int(full_sc.edge_class[slot]) in eclasses:
            face, side = slot // 4, slot % 4
            from .fiber import _corner_of_side
            for end in (0, 1):
                vclasses.add(int(full_sc.vert_class[face * 4 + _corner_of_side(side, end)]))
    return len(vclasses) - len(eclasses)
