"""Certified geometric queries on polynomial and rational patches.

Closest point, bounding volumes, intersection, self-intersection and
continuous collision queries are compiled into sum-of-squares / moment
relaxations and solved to global optimality with an embedded semidefinite
interior-point engine.
"""
from .polynomials import Polynomial, MonomialBasis, monomial_basis
from .domains import SemialgebraicDomain, canonical_domain, product_domain
from .patches import (PatchSpec, ShapeFunction, shape_function, time_extend,
                      bezier_extract, clear_denominators)

__version__ = "0.1.0"
