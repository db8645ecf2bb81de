"""Alternating affine chain algebra over polytope vertex labels.

A k-simplex is an ordered (k+1)-tuple of vertex labels; chains store each
simplex by its sorted label tuple, absorbing the sorting permutation's parity
into the coefficient.  Tuples with a repeated label are zero (the alternating
quotient), which is exactly what makes the degenerate simplices of the binary
covers vanish.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from polyprod.geometry import format_rational, parse_rational, affine_span_dim
from polyprod.product_polytope import (
    Facet,
    ProductPolytope,
    PrismPolytope,
    polytope_descriptor,
    polytope_from_descriptor,
    wrap_index,
    _perm_sign_from_sorted,
)


def canonical_simplex(labels):
    """(sorted tuple, sign) for an ordered label tuple; sign 0 if repeated."""
    sign = _perm_sign_from_sorted(tuple(labels))
    return tuple(sorted(labels)), sign


class AffineChain:
    """A formal rational combination of affine simplices on a polytope."""

    def __init__(self, polytope, dimension: int, terms=None):
        self.polytope = polytope
        self.dimension = dimension
        self.terms = {}
        if terms:
            for labels, coeff in terms.items() if isinstance(terms, dict) else terms:
                self.add(labels, coeff)

    def add(self, labels, coeff):
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        key, sign = canonical_simplex(labels)
        if sign == 0:
            return
        new = self.terms.get(key, Fraction(0)) + sign * coeff
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    @classmethod
    def from_simplices(cls, polytope, simplices, orient_positive: bool = True):
        """Unit-coefficient chain of a simplex set; with orient_positive each
        simplex is signed so its geometric volume contributes positively."""
        c = cls(polytope, polytope.dim)
        for s in simplices:
            key, sign = canonical_simplex(s)
            if sign == 0:
                raise ValueError(f"repeated vertex in simplex {s!r}")
            if orient_positive:
                o = polytope.orient(key)
                if o == 0:
                    raise ValueError(f"degenerate simplex {s!r}")
                c.add(key, o)
            else:
                c.add(s, 1)
        return c

    def copy(self):
        out = AffineChain(self.polytope, self.dimension)
        out.terms = dict(self.terms)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, AffineChain)
            and self.dimension == other.dimension
            and self.terms == other.terms
        )

    def __neg__(self):
        out = AffineChain(self.polytope, self.dimension)
        out.terms = {k: -v for k, v in self.terms.items()}
        return out

    def __len__(self):
        return len(self.terms)

    def boundary(self) -> "AffineChain":
        """Alternating-sum boundary, fully canonicalized."""
        if self.dimension < 1:
            raise ValueError("boundary needs dimension at least 1")
        out = AffineChain(self.polytope, self.dimension - 1)
        for labels, coeff in self.terms.items():
            for i in range(len(labels)):
                face = labels[:i] + labels[i + 1:]
                out.add(face, coeff if i % 2 == 0 else -coeff)
        return out

    def norm(self) -> Fraction:
        """l1 norm: the sum of absolute coefficient values."""
        return sum((abs(c) for c in self.terms.values()), Fraction(0))

    def total_signed_volume(self) -> Fraction:
        return sum(
            (c * self.polytope.simplex_volume(k) for k, c in self.terms.items()),
            Fraction(0),
        )

    # -- serialization ------------------------------------------------------
    def to_json_dict(self, **extra) -> dict:
        d = {
            "polytope": polytope_descriptor(self.polytope),
            "dimension": self.dimension,
            "terms": [
                {"vertices": [list(l) for l in key], "coeff": format_rational(coeff)}
                for key, coeff in sorted(self.terms.items())
            ],
        }
        d.update(extra)
        return d

    def to_json(self, **extra) -> str:
        return json.dumps(self.to_json_dict(**extra), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict, polytope=None) -> "AffineChain":
        P = polytope if polytope is not None else polytope_from_descriptor(d["polytope"])
        c = cls(P, d["dimension"])
        for term in d["terms"]:
            labels = [tuple(v) for v in term["vertices"]]
            c.add(labels, parse_rational(term["coeff"]))
        return c

    @classmethod
    def from_json(cls, s: str, polytope=None) -> "AffineChain":
        return cls.from_json_dict(json.loads(s), polytope=polytope)


@dataclass
class CycleCertificate:
    boundary_on_boundary: bool
    total_signed_volume: Fraction
    per_facet_degree: dict
    is_fundamental: bool
    failures: list

    def to_json_dict(self) -> dict:
        return {
            "boundary_on_boundary": self.boundary_on_boundary,
            "total_signed_volume": format_rational(self.total_signed_volume),
            "per_facet_degree": {
                f"{k[0]}:{k[1]}": format_rational(v)
                for k, v in sorted(self.per_facet_degree.items())
            },
            "is_fundamental": self.is_fundamental,
            "failures": list(self.failures),
        }


def _interior_reference_point(P):
    """Centroid of the vertex set; interior by convexity, off every facet."""
    labels = list(P.labels)
    d = P.dim
    coords = [Fraction(0)] * d
    for l in labels:
        v = P.vertex(l)
        for i in range(d):
            coords[i] += v[i]
    return tuple(c / len(labels) for c in coords)


def _facet_key(facet: Facet):
    return (facet.kind, facet.edge_index)


def _facet_reference_simplices(P, facet: Facet):
    """A simplicial tiling of the facet, as label tuples (any valid tiling)."""
    if isinstance(P, ProductPolytope):
        if facet.kind == "polygon1-edge":
            i, i2 = facet.edge_index, wrap_index(facet.edge_index + 1, P.n)
            r = P.m
            lab = lambda a, j: (a, wrap_index(j, P.m))
            bottom, top = i, i2
        else:
            j, j2 = facet.edge_index, wrap_index(facet.edge_index + 1, P.m)
            r = P.n
            lab = lambda a, u: (wrap_index(u, P.n), a)
            bottom, top = j, j2
        tets = []
        for u in range(2, r):
            tri = (1, u, u + 1)
            a, b, c = tri
            tets.append((lab(bottom, a), lab(bottom, b), lab(bottom, c), lab(top, a)))
            tets.append((lab(bottom, b), lab(bottom, c), lab(top, a), lab(top, b)))
            tets.append((lab(bottom, c), lab(top, a), lab(top, b), lab(top, c)))
        return tets
    if isinstance(P, PrismPolytope):
        if facet.kind in ("bottom", "top"):
            z = 1 if facet.kind == "bottom" else 2
            return [((1, z), (u, z), (u + 1, z)) for u in range(2, P.m)]
        i, i2 = facet.edge_index, wrap_index(facet.edge_index + 1, P.m)
        return [((i, 1), (i2, 1), (i2, 2)), ((i, 1), (i2, 2), (i, 2))]
    raise TypeError(f"no facet tiling rule for {P!r}")


def _weighted_facet_measure(P, simplices_with_coeffs, zpoint):
    """Sum of coeff * signed_volume(simplex + apex z); a consistent rational
    stand-in for (d-1)-volume on a fixed facet hyperplane."""
    from polyprod.geometry import signed_volume

    total = Fraction(0)
    for labels, coeff in simplices_with_coeffs:
        pts = [P.vertex(l) for l in labels] + [zpoint]
        total += coeff * signed_volume(pts)
    return total


def verify_fundamental_cycle(chain: AffineChain, P=None) -> CycleCertificate:
    """Check that a top-dimensional chain represents the fundamental class of
    (P, boundary P): boundary supported on facets, exact volume, and degree
    +-1 on every facet with a globally consistent sign."""
    P = P if P is not None else chain.polytope
    if chain.dimension != P.dim:
        raise ValueError("chain dimension does not match the polytope")
    label_set = set(P.labels)
    for key in chain.terms:
        if not set(key) <= label_set:
            raise ValueError(f"chain vertices {key!r} not on the polytope")

    failures = []
    z = _interior_reference_point(P)
    boundary = chain.boundary()

    per_facet_terms = {_facet_key(f): [] for f in P.facets()}
    boundary_ok = True
    for tet, coeff in boundary.terms.items():
        facet = P.facet_containing(tet)
        if facet is None:
            boundary_ok = False
            failures.append(f"boundary simplex {tet} lies in no facet")
        else:
            per_facet_terms[_facet_key(facet)].append((tet, coeff))

    total = chain.total_signed_volume()
    vol = P.volume()
    degrees = {}
    for f in P.facets():
        ref_total = sum(
            (
                abs(_weighted_facet_measure(P, [(t, Fraction(1))], z))
                for t in _facet_reference_simplices(P, f)
            ),
            Fraction(0),
        )
        num = _weighted_facet_measure(P, per_facet_terms[_facet_key(f)], z)
        degrees[_facet_key(f)] = num / ref_total if ref_total else Fraction(0)

    is_fund = False
    if boundary_ok and total != 0 and abs(total) == vol:
        s = 1 if total > 0 else -1
        if all(d == s for d in degrees.values()):
            is_fund = True
        else:
            failures.append("facet degrees inconsistent with volume sign")
    else:
        if abs(total) != vol:
            failures.append(f"total signed volume {total} != +-{vol}")
    return CycleCertificate(boundary_ok, total, degrees, is_fund, failures)


@dataclass
class TriangulationReport:
    valid: bool
    level: str
    simplex_count: int
    total_volume: Fraction
    failures: list

    def to_json_dict(self) -> dict:
        return {
            "valid": self.valid,
            "level": self.level,
            "simplex_count": self.simplex_count,
            "total_volume": format_rational(self.total_volume),
            "failures": list(self.failures),
        }


def verify_triangulation(simplices, P, level: str = "fast") -> TriangulationReport:
    """Verify that a simplex set triangulates P.

    fast: every interior facet simplex is shared by exactly two simplices on
    opposite sides, boundary facet simplices lie in facets (tiling each facet
    exactly), and total volume matches.  full: additionally every pair of
    simplices has disjoint interiors, decided exactly.
    """
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    sims = [tuple(s) for s in simplices]
    keys = []
    for s in sims:
        key, sign = canonical_simplex(s)
        if sign == 0 or P.orient(key) == 0:
            raise ValueError(f"degenerate simplex in input: {s!r}")
        keys.append(key)
    if len(set(keys)) != len(keys):
        return TriangulationReport(False, level, len(keys), Fraction(0), ["duplicate simplices"])

    failures = []
    buckets = {}
    for key in keys:
        for i in range(len(key)):
            tet = key[:i] + key[i + 1:]
            apex = key[i]
            side = P.orient(tet + (apex,))
            buckets.setdefault(tet, []).append((key, side))

    z = _interior_reference_point(P)
    per_facet = {_facet_key(f): [] for f in P.facets()}
    for tet, owners in buckets.items():
        if len(owners) > 2:
            failures.append(f"facet {tet} shared by {len(owners)} simplices")
        elif len(owners) == 2:
            if owners[0][1] * owners[1][1] != -1:
                failures.append(f"facet {tet} not crossed with opposite orientations")
        else:
            facet = P.facet_containing(tet)
            if facet is None:
                failures.append(f"unmatched interior facet {tet}")
            else:
                per_facet[_facet_key(facet)].append(tet)

    total = sum((abs(P.simplex_volume(k)) for k in keys), Fraction(0))
    if total != P.volume():
        failures.append(f"total volume {total} != {P.volume()}")

    for f in P.facets():
        ref = _facet_reference_simplices(P, f)
        ref_total = sum(
            (abs(_weighted_facet_measure(P, [(t, Fraction(1))], z)) for t in ref),
            Fraction(0),
        )
        got = sum(
            (abs(_weighted_facet_measure(P, [(t, Fraction(1))], z)) for t in per_facet[_facet_key(f)]),
            Fraction(0),
        )
        if got != ref_total:
            failures.append(
                f"facet {_facet_key(f)} boundary measure {got} != {ref_total}"
            )

    if level == "full" and not failures:
        from polyprod.optimizer import feasibility_point

        for a, b in combinations(keys, 2):
            w = feasibility_point(a, b, P)
            if w is not None:
                failures.append(f"simplices {a} and {b} share interior point {w}")
                break

    return TriangulationReport(not failures, level, len(keys), total, failures)


def replicate_chain(chain: AffineChain, n: int, m: int) -> AffineChain:
    """Fold a fundamental chain of P(j,k) onto P(n,m) by partitioning each
    polygon into fans of congruent cells and reflecting alternate copies.

    Requires (j-2) | (n-2) and (k-2) | (m-2); the result has norm
    ||c|| * (n-2)(m-2) / ((j-2)(k-2)).
    """
    src = chain.polytope
    if not isinstance(src, ProductPolytope):
        raise ValueError("replicate_chain expects a chain on a product polytope")
    j, k = src.n, src.m
    if (n - 2) % (j - 2) != 0 or (m - 2) % (k - 2) != 0:
        raise ValueError("cell sizes must divide: (j-2)|(n-2) and (k-2)|(m-2)")
    target = ProductPolytope(n, m, src.coordinatization_id)
    maps1 = _fan_cell_maps(j, n)
    maps2 = _fan_cell_maps(k, m)
    out = AffineChain(target, chain.dimension)
    for i1, mu in enumerate(maps1):
        for i2, nu in enumerate(maps2):
            sgn = -1 if (i1 + i2) % 2 else 1
            for labels, coeff in chain.terms.items():
                image = [(mu[a], nu[b]) for (a, b) in labels]
                out.add(image, sgn * coeff)
    return out


def _fan_cell_maps(j: int, n: int):
    """Vertex maps of C_j onto the fan cells of C_n, reflecting alternate cells
    so that neighboring copies agree along the shared chords."""
    count = (n - 2) // (j - 2)
    maps = []
    for i in range(count):
        s = 2 + i * (j - 2)
        run = [s + t for t in range(j - 1)]
        if i % 2 == 1:
            run.reverse()
        mapping = {1: 1}
        for v in range(2, j + 1):
            mapping[v] = wrap_index(run[v - 2], n)
        maps.append(mapping)
    return maps


def straighten(raw_terms, P) -> AffineChain:
    """Snap a chain given by explicit rational coordinates onto vertex labels.

    Each raw vertex is replaced by the lexicographically smallest vertex of
    the minimal face of P containing it; simplices whose vertices collide
    vanish in the alternating algebra.  For affine input with vertices in P
    the face-compatibility requirement (each face of a simplex lands in a
    single face of P) holds automatically; vertices outside P raise.
    """
    out = AffineChain(P, P.dim)
    for points, coeff in raw_terms:
        snapped = []
        for p in points:
            face = P.minimal_face(tuple(Fraction(x) for x in p))
            if not face.vertex_labels:
                raise ValueError("face-compatibility violated: face without vertices")
            snapped.append(min(face.vertex_labels))
        out.add(snapped, coeff)
    return out
