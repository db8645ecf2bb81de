"""Exact rational geometric predicates in dimensions 2-4.

Points are tuples of `fractions.Fraction`.  Determinants are computed by
fraction-free (Bareiss) elimination over the integers after clearing row
denominators, which keeps intermediate values small on the many 4x4
determinants the rest of the package asks for.
"""

from __future__ import annotations

import math
from fractions import Fraction

Rational = Fraction

Point = tuple  # tuple of Fraction, fixed length per context


def parse_rational(s: str) -> Fraction:
    """Parse "p/q" (or "p") into an exact rational."""
    return Fraction(s)


def format_rational(x: Fraction) -> str:
    """Serialize exactly as "p/q", omitting "/q" when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _check_dim(points, dim=None):
    if not points:
        raise ValueError("empty point list")
    d = len(points[0])
    for p in points:
        if len(p) != d:
            raise ValueError("points of mixed dimension")
    if dim is not None and d != dim:
        raise ValueError(f"expected dimension {dim}, got {d}")
    return d


def _int_rows(rows):
    """Clear denominators row by row; return integer rows and the scale product."""
    scaled = []
    scale = 1
    for row in rows:
        l = 1
        for x in row:
            l = l * x.denominator // math.gcd(l, x.denominator)
        scaled.append([int(x * l) for x in row])
        scale *= l
    return scaled, scale


def _bareiss_det(m):
    """Determinant of a square integer matrix by fraction-free elimination."""
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def det(rows) -> Fraction:
    """Exact determinant of a square matrix of rationals."""
    if not rows:
        return Fraction(1)
    int_rows, scale = _int_rows([list(map(Fraction, r)) for r in rows])
    return Fraction(_bareiss_det(int_rows), scale)


def _edge_matrix(points):
    base = points[0]
    return [[Fraction(p[i]) - Fraction(base[i]) for i in range(len(base))] for p in points[1:]]


def orientation(points) -> int:
    """Sign of the simplex spanned by d+1 points in dimension d.

    Returns +1, 0, or -1; 0 exactly when the points are affinely dependent.
    """
    d = _check_dim(points)
    if len(points) != d + 1:
        raise ValueError(f"need {d + 1} points in dimension {d}, got {len(points)}")
    value = det(_edge_matrix(points))
    return (value > 0) - (value < 0)


def signed_volume(points) -> Fraction:
    """Signed volume of the simplex on d+1 points in dimension d (det / d!)."""
    d = _check_dim(points)
    if len(points) != d + 1:
        raise ValueError(f"need {d + 1} points in dimension {d}, got {len(points)}")
    return det(_edge_matrix(points)) / math.factorial(d)


def polygon_area(vertices) -> Fraction:
    """Exact shoelace area of a convex polygon given in counterclockwise order.

    Raises if fewer than 3 vertices, if any consecutive triple fails to turn
    strictly left (not strictly convex, collinear, or clockwise input).
    """
    _check_dim(vertices, 2)
    n = len(vertices)
    if n < 3:
        raise ValueError("polygon needs at least 3 vertices")
    for i in range(n):
        a, b, c = vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]
        turn = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if turn <= 0:
            raise ValueError("vertices not in strictly convex counterclockwise position")
    twice = Fraction(0)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        twice += x1 * y2 - x2 * y1
    return twice / 2


def affine_span_dim(points) -> int:
    """Dimension of the affine hull, by exact rank of the edge matrix."""
    _check_dim(points)
    rows = _edge_matrix(points)
    # exact Gaussian elimination rank
    rank = 0
    cols = len(points[0])
    rows = [row[:] for row in rows]
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pr = rows[r]
        for i in range(r + 1, len(rows)):
            if rows[i][c] != 0:
                f = rows[i][c] / pr[c]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        r += 1
        rank = r
        if r == len(rows):
            break
    return rank
