"""The product polytope P(n,m) = (n-gon) x (m-gon) and its 3D prism analog.

Vertices of P(n,m) carry labels (i, j) with i in 1..n and j in 1..m; index
arithmetic wraps modulo the polygon size.  Every query (facet membership,
face containment, orientation) is decided by exact halfspace evaluation,
never by floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from polyprod.geometry import (
    affine_span_dim,
    orientation,
    polygon_area,
    signed_volume,
)


def regular_rational_polygon(r: int, offset: int = 1):
    """r rational points on the unit circle, counterclockwise and strictly convex.

    The k-th vertex sits at parameter t = 2k - r - offset under the tangent
    half-angle map t -> ((1-t^2)/(1+t^2), 2t/(1+t^2)); the angle is monotone
    in t, so the vertices are automatically in convex position.
    """
    pts = []
    for k in range(1, r + 1):
        t = Fraction(2 * k - r - offset)
        d = 1 + t * t
        pts.append(((1 - t * t) / d, 2 * t / d))
    return pts


COORDINATIZATIONS = {
    "circle-int": lambda r: regular_rational_polygon(r, offset=1),
    "circle-int-alt": lambda r: regular_rational_polygon(r, offset=0),
}


def wrap_index(i: int, n: int) -> int:
    """Map an integer into 1..n (indices are cyclic)."""
    return (i - 1) % n + 1


@dataclass(frozen=True)
class Facet:
    """A facet with its exact supporting halfspace normal . x <= rhs."""

    kind: str            # "polygon1-edge" | "polygon2-edge" | "bottom" | "top"
    edge_index: int
    vertex_labels: frozenset
    normal: tuple
    rhs: Fraction

    def contains_point(self, point) -> bool:
        return sum(a * x for a, x in zip(self.normal, point)) == self.rhs


@dataclass(frozen=True)
class Face:
    """A face of the polytope: dimension, defining facets, and its vertices."""

    dimension: int
    facets: tuple
    vertex_labels: tuple


class _BasePolytope:
    """Shared query machinery for labeled polytopes with exact coordinates."""

    dim: int

    def __init__(self):
        self._orient_cache = {}
        self._volume_cache = {}
        self._facet_of_cache = {}

    # -- subclass surface -------------------------------------------------
    def vertex(self, label):
        raise NotImplementedError

    def facets(self):
        raise NotImplementedError

    def volume(self) -> Fraction:
        raise NotImplementedError

    # -- derived queries ---------------------------------------------------
    def points(self, labels):
        return [self.vertex(l) for l in labels]

    def orient(self, labels) -> int:
        """Memoized orientation of dim+1 vertex labels (in the given order)."""
        key = tuple(labels)
        skey = tuple(sorted(key))
        sign = self._orient_cache.get(skey)
        if sign is None:
            sign = orientation(self.points(sorted(key)))
            self._orient_cache[skey] = sign
        if sign == 0:
            return 0
        return sign * _perm_sign_from_sorted(key)

    def simplex_volume(self, labels) -> Fraction:
        key = tuple(sorted(labels))
        vol = self._volume_cache.get(key)
        if vol is None:
            vol = signed_volume(self.points(key))
            self._volume_cache[key] = vol
        return vol * _perm_sign_from_sorted(tuple(labels))

    def facet_containing(self, labels):
        """The facet whose hyperplane contains all given vertices, or None."""
        key = frozenset(labels)
        if key in self._facet_of_cache:
            return self._facet_of_cache[key]
        found = None
        for f in self.facets():
            if key <= f.vertex_labels:
                found = f
                break
        self._facet_of_cache[key] = found
        return found

    def facets_containing(self, labels):
        key = frozenset(labels)
        return [f for f in self.facets() if key <= f.vertex_labels]

    def contains(self, point) -> bool:
        return all(
            sum(a * x for a, x in zip(f.normal, point)) <= f.rhs for f in self.facets()
        )

    def enumerate_simplices(self):
        """All nondegenerate dim-simplices on the vertex set, canonically ordered.

        Each simplex is a (dim+1)-tuple of labels, sorted except that the last
        two entries are swapped when needed so the signed volume is positive.
        """
        out = []
        for combo in combinations(sorted(self.labels), self.dim + 1):
            s = self.orient(combo)
            if s == 0:
                continue
            if s > 0:
                out.append(combo)
            else:
                out.append(combo[:-2] + (combo[-1], combo[-2]))
        return out

    def minimal_face(self, point) -> Face:
        """The unique face whose relative interior contains the point."""
        values = []
        for f in self.facets():
            v = sum(a * x for a, x in zip(f.normal, point))
            if v > f.rhs:
                raise ValueError("point lies outside the polytope")
            values.append((f, v == f.rhs))
        tight = tuple(f for f, on in values if on)
        tight_set = [f.vertex_labels for f in tight]
        verts = tuple(
            l for l in sorted(self.labels) if all(l in s for s in tight_set)
        )
        if not tight:
            return Face(self.dim, (), tuple(sorted(self.labels)))
        dim = affine_span_dim([self.vertex(l) for l in verts]) if verts else 0
        return Face(dim, tight, verts)


def _perm_sign_from_sorted(labels) -> int:
    """Parity of the permutation taking the tuple to sorted order (+1/-1/0)."""
    n = len(labels)
    labels = list(labels)
    if len(set(labels)) != n:
        return 0
    sign = 1
    order = sorted(range(n), key=lambda i: labels[i])
    seen = [False] * n
    for i in range(n):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


class ProductPolytope(_BasePolytope):
    """P(n,m): the 4-dimensional product of a convex n-gon and m-gon."""

    dim = 4

    def __init__(self, n: int, m: int, coordinatization: str = "circle-int"):
        super().__init__()
        if n < 3 or m < 3:
            raise ValueError("both polygon sizes must be at least 3")
        if coordinatization not in COORDINATIZATIONS:
            raise ValueError(f"unknown coordinatization {coordinatization!r}")
        self.n = n
        self.m = m
        self.coordinatization_id = coordinatization
        gen = COORDINATIZATIONS[coordinatization]
        self.polygon1 = gen(n)
        self.polygon2 = gen(m)
        polygon_area(self.polygon1)  # validates strict convexity / ccw order
        polygon_area(self.polygon2)
        self.labels = [(i, j) for i in range(1, n + 1) for j in range(1, m + 1)]
        self._vertices = {
            (i, j): self.polygon1[i - 1] + self.polygon2[j - 1]
            for i, j in self.labels
        }
        self._facets = None

    def __repr__(self):
        return f"ProductPolytope({self.n}, {self.m}, {self.coordinatization_id!r})"

    def label(self, i: int, j: int):
        return (wrap_index(i, self.n), wrap_index(j, self.m))

    def vertex(self, label):
        return self._vertices[label]

    def volume(self) -> Fraction:
        return polygon_area(self.polygon1) * polygon_area(self.polygon2)

    def facets(self):
        if self._facets is None:
            fs = []
            for i in range(1, self.n + 1):
                a, b = _edge_halfspace(self.polygon1, i)
                labels = frozenset(
                    {(i, j) for j in range(1, self.m + 1)}
                    | {(wrap_index(i + 1, self.n), j) for j in range(1, self.m + 1)}
                )
                fs.append(Facet("polygon1-edge", i, labels, (a[0], a[1], Fraction(0), Fraction(0)), b))
            for j in range(1, self.m + 1):
                a, b = _edge_halfspace(self.polygon2, j)
                labels = frozenset(
                    {(i, j) for i in range(1, self.n + 1)}
                    | {(i, wrap_index(j + 1, self.m)) for i in range(1, self.n + 1)}
                )
                fs.append(Facet("polygon2-edge", j, labels, (Fraction(0), Fraction(0), a[0], a[1]), b))
            self._facets = fs
        return self._facets

    def minimal_face(self, point) -> Face:
        # product structure: the face of (p, q) is face(p) x face(q)
        if len(point) != 4:
            raise ValueError("expected a 4-dimensional point")
        if not self.contains(point):
            raise ValueError("point lies outside the polytope")
        return super().minimal_face(point)

    def triangle_interior_to_facet(self, triangle, facet: Facet) -> bool:
        """True iff the triangle lies in the facet's hyperplane with its
        relative interior meeting the facet's relative interior."""
        pts = [self.vertex(l) for l in triangle]
        if not all(facet.contains_point(p) for p in pts):
            return False
        if affine_span_dim(pts) != 2:
            return False
        # interior iff no *other* facet hyperplane contains the whole triangle
        for g in self.facets():
            if g is facet:
                continue
            if all(g.contains_point(p) for p in pts):
                return False
        return True


class PrismPolytope(_BasePolytope):
    """The 3-dimensional prism (m-gon) x [0,1]; labels (i,1) bottom, (i,2) top."""

    dim = 3

    def __init__(self, m: int, coordinatization: str = "circle-int"):
        super().__init__()
        if m < 3:
            raise ValueError("polygon size must be at least 3")
        if coordinatization not in COORDINATIZATIONS:
            raise ValueError(f"unknown coordinatization {coordinatization!r}")
        self.m = m
        self.coordinatization_id = coordinatization
        self.polygon = COORDINATIZATIONS[coordinatization](m)
        polygon_area(self.polygon)
        self.labels = [(i, z) for i in range(1, m + 1) for z in (1, 2)]
        self._vertices = {
            (i, z): self.polygon[i - 1] + (Fraction(z - 1),) for i, z in self.labels
        }
        self._facets = None

    def __repr__(self):
        return f"PrismPolytope({self.m}, {self.coordinatization_id!r})"

    def label(self, i: int, z: int):
        return (wrap_index(i, self.m), z)

    def vertex(self, label):
        return self._vertices[label]

    def volume(self) -> Fraction:
        return polygon_area(self.polygon)

    def facets(self):
        if self._facets is None:
            fs = []
            zero = Fraction(0)
            fs.append(
                Facet(
                    "bottom",
                    0,
                    frozenset((i, 1) for i in range(1, self.m + 1)),
                    (zero, zero, Fraction(-1)),
                    zero,
                )
            )
            fs.append(
                Facet(
                    "top",
                    0,
                    frozenset((i, 2) for i in range(1, self.m + 1)),
                    (zero, zero, Fraction(1)),
                    Fraction(1),
                )
            )
            for i in range(1, self.m + 1):
                a, b = _edge_halfspace(self.polygon, i)
                nxt = wrap_index(i + 1, self.m)
                labels = frozenset({(i, 1), (i, 2), (nxt, 1), (nxt, 2)})
                fs.append(Facet("polygon-edge", i, labels, (a[0], a[1], zero), b))
            self._facets = fs
        return self._facets


def _edge_halfspace(polygon, i):
    """Outward halfspace a.x <= b of the polygon edge from vertex i to i+1."""
    m = len(polygon)
    p = polygon[i - 1]
    q = polygon[i % m]
    # outward normal of ccw edge (p, q) is (qy - py, px - qx)
    a = (q[1] - p[1], p[0] - q[0])
    b = a[0] * p[0] + a[1] * p[1]
    return a, b


def build_product(n: int, m: int, coordinatization: str = "circle-int") -> ProductPolytope:
    """Construct P(n,m) with the requested coordinatization."""
    return ProductPolytope(n, m, coordinatization)


def polytope_descriptor(P) -> dict:
    if isinstance(P, ProductPolytope):
        return {"type": "product", "n": P.n, "m": P.m, "coordinatization": P.coordinatization_id}
    if isinstance(P, PrismPolytope):
        return {"type": "prism", "m": P.m, "coordinatization": P.coordinatization_id}
    raise TypeError(f"unknown polytope {P!r}")


def polytope_from_descriptor(desc: dict):
    kind = desc.get("type", "product")
    if kind == "product":
        return ProductPolytope(desc["n"], desc["m"], desc.get("coordinatization", "circle-int"))
    if kind == "prism":
        return PrismPolytope(desc["m"], desc.get("coordinatization", "circle-int"))
    raise ValueError(f"unknown polytope descriptor {desc!r}")
