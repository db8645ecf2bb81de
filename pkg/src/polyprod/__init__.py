"""Exact-arithmetic triangulations, affine chains, and binary covers of
products of two convex polygons.

All arithmetic is over exact rationals (`fractions.Fraction`); nothing in
this package ever rounds.
"""

from polyprod.geometry import (
    Rational,
    orientation,
    signed_volume,
    polygon_area,
    affine_span_dim,
)
from polyprod.product_polytope import ProductPolytope, PrismPolytope, build_product

__all__ = [
    "Rational",
    "orientation",
    "signed_volume",
    "polygon_area",
    "affine_span_dim",
    "ProductPolytope",
    "PrismPolytope",
    "build_product",
]
