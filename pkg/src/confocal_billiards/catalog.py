"""Canonical billiard domains used by tests, docs, and the CLI.

All domains live in the family a=2, b=1 (foci at (+-1, 0)).  The twelve
elementary representatives realize the classification of simply connected
complexity-0 domains: series A (containing an inter-focal segment, tagged
by the focus count, primed when the segment lies on the boundary) and
series B (quadrilaterals, tagged by the number of focal-line components
and by how many boundary runs lie on the focal line).

The nc* domains are non-convex: nc1 has one 3*pi/2 vertex, nc2 two on a
common hyperbola, nc3 two vertices on the focal line itself (the genus
balance across the saddle level breaks there).  comb23 realizes a cut arc
whose strip has two inside and three outside components.
"""

from __future__ import annotations

import math

from .domain import BilliardDomain, BoundaryArc
from .geometry import (
    BRANCH_BETWEEN_FOCI,
    BRANCH_LEFT,
    BRANCH_OUTSIDE_LEFT,
    BRANCH_OUTSIDE_RIGHT,
    BRANCH_RIGHT,
    ConfocalFamily,
    QuadricRef,
    KIND_DEGENERATE,
    KIND_ELLIPSE,
    KIND_HYPERBOLA,
)

FAMILY = ConfocalFamily(2.0, 1.0)


def earc(lam, h0, h1, sx, sy, fwd=True):
    return BoundaryArc(QuadricRef(lam, KIND_ELLIPSE), (h0, h1), (sx, sy),
                       "forward" if fwd else "backward")


def harc(lam, e0, e1, sx, sy, fwd=True):
    branch = BRANCH_RIGHT if sx > 0 else BRANCH_LEFT
    return BoundaryArc(QuadricRef(lam, KIND_HYPERBOLA, branch), (e0, e1), (sx, sy),
                       "forward" if fwd else "backward")


def xarc(x0, x1, family=FAMILY, fwd=True):
    """Focal-line arc from x0 to x1 (monotone in x; must not cross 0 or a
    focus).  `fwd` means increasing x along the boundary walk."""
    c = family.c
    lo, hi = min(x0, x1), max(x0, x1)
    if hi <= c + 1e-12 and lo >= -c - 1e-12:
        branch = BRANCH_BETWEEN_FOCI
    elif lo >= c - 1e-12:
        branch = BRANCH_OUTSIDE_RIGHT
    elif hi <= -c + 1e-12:
        branch = BRANCH_OUTSIDE_LEFT
    else:
        raise ValueError("focal arc crosses a focus; split it there")
    sy = 1
    sx = 1 if (lo + hi) > 0 else -1
    increasing = (x1 > x0)
    return BoundaryArc(QuadricRef(family.b, KIND_DEGENERATE, branch),
                       (lo, hi), (sx, sy),
                       "forward" if (increasing == fwd) else "backward")


def _dom(arcs, family=FAMILY):
    return BilliardDomain(family, arcs)


def make_A2():
    """Full ellipse lambda=0: both foci interior."""
    return _dom([
        earc(0.0, 1.0, 2.0, 1, 1, True),
        earc(0.0, 1.0, 2.0, -1, 1, False),
        earc(0.0, 1.0, 2.0, -1, -1, True),
        earc(0.0, 1.0, 2.0, 1, -1, False),
    ])


def make_A1():
    """Lens between the ellipse 0 and the right branch of hyperbola 1.2;
    contains the right focus only."""
    return _dom([
        earc(0.0, 1.0, 1.2, 1, 1, True),
        harc(1.2, 0.0, 1.0, 1, 1, True),
        harc(1.2, 0.0, 1.0, 1, -1, False),
        earc(0.0, 1.0, 1.2, 1, -1, False),
    ])


def make_A0():
    """Wedge between hyperbolas 1.5 and 1.8 capped by ellipse 0, crossing
    the inter-focal segment, no focus inside."""
    return _dom([
        harc(1.5, 0.0, 1.0, 1, -1, True),
        harc(1.5, 0.0, 1.0, 1, 1, False),
        earc(0.0, 1.5, 1.8, 1, 1, True),
        harc(1.8, 0.0, 1.0, 1, 1, True),
        harc(1.8, 0.0, 1.0, 1, -1, False),
        earc(0.0, 1.5, 1.8, 1, -1, False),
    ])


def make_A0_prime():
    """Upper half of make_A0: the inter-focal segment lies on the boundary."""
    r15, r18 = math.sqrt(0.5), math.sqrt(0.2)
    return _dom([
        xarc(r18, r15),
        harc(1.5, 0.0, 1.0, 1, 1, False),
        earc(0.0, 1.5, 1.8, 1, 1, True),
        harc(1.8, 0.0, 1.0, 1, 1, True),
    ])


def make_A1_prime():
    """Domain above the focal line whose bottom side covers the right focus."""
    return _dom([
        xarc(0.6, 1.0),
        xarc(1.0, 1.2),
        earc(0.56, 1.0, 1.64, 1, 1, True),
        harc(1.64, 0.56, 1.0, 1, 1, True),
    ])


def make_A2_prime():
    """Upper half of the full ellipse; bottom side covers both foci."""
    r = math.sqrt(2.0)
    return _dom([
        earc(0.0, 1.0, 2.0, 1, 1, True),
        earc(0.0, 1.0, 2.0, -1, 1, False),
        xarc(-r, -1.0),
        xarc(-1.0, 0.0),
        xarc(0.0, 1.0),
        xarc(1.0, r),
    ])


def make_B0():
    """Quadrilateral strictly inside one quadrant."""
    return _dom([
        earc(0.0, 1.2, 1.8, 1, 1, True),
        harc(1.8, 0.0, 0.5, 1, 1, True),
        earc(0.5, 1.2, 1.8, 1, 1, False),
        harc(1.2, 0.0, 0.5, 1, 1, False),
    ])


def make_B1():
    """Quadrilateral crossing the focal line beyond the right focus."""
    return _dom([
        earc(0.0, 1.0, 1.5, 1, 1, True),
        harc(1.5, 0.0, 0.5, 1, 1, True),
        earc(0.5, 1.0, 1.5, 1, 1, False),
        earc(0.5, 1.0, 1.5, 1, -1, True),
        harc(1.5, 0.0, 0.5, 1, -1, False),
        earc(0.0, 1.0, 1.5, 1, -1, False),
    ])


def make_B2():
    """Annulus between ellipses 0 and 0.5 minus the wedge between
    hyperbolas 1.5 and 1.8 in the first quadrant; crosses the focal line
    beyond both foci."""
    return _dom([
        harc(1.5, 0.0, 0.5, 1, 1, True),
        earc(0.5, 1.0, 1.5, 1, 1, False),
        earc(0.5, 1.0, 2.0, 1, -1, True),
        earc(0.5, 1.0, 2.0, -1, -1, False),
        earc(0.5, 1.0, 2.0, -1, 1, True),
        earc(0.5, 1.8, 2.0, 1, 1, False),
        harc(1.8, 0.0, 0.5, 1, 1, False),
        earc(0.0, 1.8, 2.0, 1, 1, True),
        earc(0.0, 1.0, 2.0, -1, 1, False),
        earc(0.0, 1.0, 2.0, -1, -1, True),
        earc(0.0, 1.0, 2.0, 1, -1, False),
        earc(0.0, 1.0, 1.5, 1, 1, True),
    ])


def make_B1_prime():
    """Quadrilateral resting on the focal ray beyond the right focus."""
    return _dom([
        xarc(1.2, math.sqrt(2.0)),
        earc(0.0, 1.0, 1.64, 1, 1, True),
        harc(1.64, 0.0, 0.56, 1, 1, True),
        earc(0.56, 1.0, 1.64, 1, 1, False),
    ])


def make_B2_prime():
    """Annulus between ellipses 0 and 0.5 minus the piece below the right
    focal ray and outside hyperbola 1.5: one boundary run on the focal
    line plus one interior crossing."""
    return _dom([
        xarc(math.sqrt(1.5), math.sqrt(2.0)),
        earc(0.0, 1.0, 2.0, 1, 1, True),
        earc(0.0, 1.0, 2.0, -1, 1, False),
        earc(0.0, 1.0, 2.0, -1, -1, True),
        earc(0.0, 1.5, 2.0, 1, -1, False),
        harc(1.5, 0.0, 0.5, 1, -1, True),
        earc(0.5, 1.5, 2.0, 1, -1, True),
        earc(0.5, 1.0, 2.0, -1, -1, False),
        earc(0.5, 1.0, 2.0, -1, 1, True),
        earc(0.5, 1.0, 2.0, 1, 1, False),
    ])


def make_B2_doubleprime():
    """Upper half annulus between ellipses 0 and 0.5: two boundary runs on
    the focal rays."""
    r2, r15 = math.sqrt(2.0), math.sqrt(1.5)
    return _dom([
        earc(0.0, 1.0, 2.0, 1, 1, True),
        earc(0.0, 1.0, 2.0, -1, 1, False),
        xarc(-r2, -r15),
        earc(0.5, 1.0, 2.0, -1, 1, True),
        earc(0.5, 1.0, 2.0, 1, 1, False),
        xarc(r15, r2),
    ])


def make_NC1():
    """L-shaped domain, one 3*pi/2 vertex at the crossing of ellipse 0.3
    and hyperbola 1.5."""
    return _dom([
        earc(0.0, 1.2, 1.8, 1, 1, True),
        harc(1.8, 0.0, 0.6, 1, 1, True),
        earc(0.6, 1.5, 1.8, 1, 1, False),
        harc(1.5, 0.3, 0.6, 1, 1, False),
        earc(0.3, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.0, 0.3, 1, 1, False),
    ])


def make_NC2():
    """Bridge-shaped domain, two 3*pi/2 vertices on hyperbola 1.5."""
    return _dom([
        earc(0.0, 1.2, 1.8, 1, 1, True),
        harc(1.8, 0.0, 0.8, 1, 1, True),
        earc(0.8, 1.2, 1.8, 1, 1, False),
        harc(1.2, 0.5, 0.8, 1, 1, False),
        earc(0.5, 1.2, 1.5, 1, 1, True),
        harc(1.5, 0.3, 0.5, 1, 1, False),
        earc(0.3, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.0, 0.3, 1, 1, False),
    ])


def make_NC3():
    """Two 3*pi/2 vertices on the inter-focal segment: an upper strip over
    x in [0.2, 0.8] with a lower strip attached across (0.4, 0.6).  The
    genus sums across the saddle level differ (2 below, 3 above)."""
    return _dom([
        xarc(0.2, 0.4),
        harc(1.84, 0.45, 1.0, 1, -1, False),
        earc(0.45, 1.64, 1.84, 1, -1, False),
        harc(1.64, 0.45, 1.0, 1, -1, True),
        xarc(0.6, 0.8),
        harc(1.36, 0.3, 1.0, 1, 1, False),
        earc(0.3, 1.36, 1.96, 1, 1, True),
        harc(1.96, 0.3, 1.0, 1, 1, True),
    ])


def make_comb23():
    """Zigzag domain whose cut arc on hyperbola 1.5 has a strip with two
    components inside the hyperbola and three outside (nu=2, xi=3)."""
    A = [
        earc(0.0, 1.2, 1.5, 1, 1, True),
        harc(1.5, 0.0, 0.1, 1, 1, True),
        earc(0.1, 1.5, 1.8, 1, 1, True),
        harc(1.8, 0.1, 0.5, 1, 1, True),
        earc(0.5, 1.5, 1.8, 1, 1, False),
        harc(1.5, 0.5, 0.55, 1, 1, True),
        earc(0.55, 1.5, 1.8, 1, 1, True),
        harc(1.8, 0.55, 0.8, 1, 1, True),
        earc(0.8, 1.5, 1.8, 1, 1, False),
        harc(1.5, 0.8, 0.9, 1, 1, True),
        earc(0.9, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.65, 0.9, 1, 1, False),
        earc(0.65, 1.2, 1.5, 1, 1, True),
        harc(1.5, 0.6, 0.65, 1, 1, False),
        earc(0.6, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.35, 0.6, 1, 1, False),
        earc(0.35, 1.2, 1.5, 1, 1, True),
        harc(1.5, 0.3, 0.35, 1, 1, False),
        earc(0.3, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.0, 0.3, 1, 1, False),
    ]
    return _dom(A)


def make_fig7_pair():
    """Two domains with identical elementary piece types but different
    singular-point counts on the shared cut-arc segments, hence not
    equivalent."""
    d1 = _dom([
        earc(0.0, 1.2, 1.5, 1, 1, True),
        harc(1.5, 0.0, 0.2, 1, 1, True),
        earc(0.2, 1.5, 1.8, 1, 1, True),
        harc(1.8, 0.2, 0.4, 1, 1, True),
        earc(0.4, 1.5, 1.8, 1, 1, False),
        harc(1.5, 0.4, 0.6, 1, 1, True),
        earc(0.6, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.0, 0.6, 1, 1, False),
    ])
    d2 = _dom([
        earc(0.0, 1.2, 1.8, 1, 1, True),
        harc(1.8, 0.0, 0.3, 1, 1, True),
        earc(0.3, 1.5, 1.8, 1, 1, False),
        harc(1.5, 0.3, 0.6, 1, 1, True),
        earc(0.6, 1.2, 1.5, 1, 1, False),
        harc(1.2, 0.0, 0.6, 1, 1, False),
    ])
    return d1, d2


def mirror_x(domain: BilliardDomain) -> BilliardDomain:
    """Mirror image across the focal axis, re-oriented counterclockwise."""
    flipped = []
    for arc in reversed(domain.arcs):
        o = "backward" if arc.orientation == "forward" else "forward"
        flipped.append(BoundaryArc(arc.quadric, arc.range,
                                   (arc.signs[0], -arc.signs[1]), o))
    return BilliardDomain(domain.family, flipped)


def deform_quadric(domain: BilliardDomain, old: float, new: float) -> BilliardDomain:
    """Continuous deformation of one quadric of the boundary within its
    class: every arc on it moves, and every transversal arc ending on it
    follows.  `new` must stay in the same class interval and keep the
    ordering relative to the other levels."""
    b = domain.family.b
    if (old < b) != (new < b) or (old == b) != (new == b):
        raise ValueError("deformation must stay within the quadric class")
    arcs = []
    for arc in domain.arcs:
        lam = new if arc.quadric.lam == old else arc.quadric.lam
        rng = tuple(new if r == old else r for r in arc.range)
        q = QuadricRef(lam, arc.quadric.kind, arc.quadric.branch)
        arcs.append(BoundaryArc(q, rng, arc.signs, arc.orientation))
    return BilliardDomain(domain.family, arcs)


def split_arc(domain: BilliardDomain, index: int, at: float) -> BilliardDomain:
    """Subdivide one arc at an interior parameter value (a no-op move for
    every classification)."""
    arc = domain.arcs[index]
    lo, hi = arc.range
    if not (lo < at < hi):
        raise ValueError("split point must be interior to the arc range")
    first = BoundaryArc(arc.quadric, (lo, at), arc.signs, arc.orientation)
    second = BoundaryArc(arc.quadric, (at, hi), arc.signs, arc.orientation)
    pair = [first, second] if arc.orientation == "forward" else [second, first]
    if arc.quadric.kind == KIND_DEGENERATE and arc.signs[0] < 0:
        # x-ranges on the negative side run opposite to the walk direction
        pair = pair if arc.orientation == "forward" else pair
    arcs = domain.arcs[:index] + pair + domain.arcs[index + 1:]
    return BilliardDomain(domain.family, arcs)


ELEMENTARY = {
    "A0": make_A0,
    "A1": make_A1,
    "A2": make_A2,
    "A'0": make_A0_prime,
    "A'1": make_A1_prime,
    "A'2": make_A2_prime,
    "B0": make_B0,
    "B1": make_B1,
    "B2": make_B2,
    "B'1": make_B1_prime,
    "B'2": make_B2_prime,
    "B''2": make_B2_doubleprime,
}

NONCONVEX = {
    "NC1": make_NC1,
    "NC2": make_NC2,
    "NC3": make_NC3,
    "COMB23": make_comb23,
}


def by_name(name: str) -> BilliardDomain:
    key = name.upper().replace("PRIME", "'")
    table = {**{k.upper(): v for k, v in ELEMENTARY.items()},
             **NONCONVEX}
    if key not in table:
        raise KeyError(f"unknown catalog domain {name!r}")
    return table[key]()
