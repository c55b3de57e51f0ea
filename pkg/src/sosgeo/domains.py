"""Canonical parameter domains as semialgebraic sets.

A domain is a list of polynomial inequalities g_i(u) >= 0 and equalities
h_j(u) = 0 over a fixed variable count.  The canonical domains used by the
patch families are the unit triangle {u1 >= 0, u2 >= 0, 1 - u1 - u2 >= 0},
the unit square / cube (per-coordinate bounds) and the unit interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polynomials import Polynomial, DimensionMismatch


@dataclass(frozen=True)
class SemialgebraicDomain:
    num_vars: int
    inequalities: tuple = ()           # Polynomials g_i, domain is g_i >= 0
    equalities: tuple = ()             # Polynomials h_j, h_j = 0
    name: str = ""

    def __post_init__(self):
        for p in list(self.inequalities) + list(self.equalities):
            if p.num_vars != self.num_vars:
                raise DimensionMismatch(
                    f"domain constraint in {p.num_vars} vars, expected {self.num_vars}")

    def contains(self, point, tol=1e-9):
        ok = all(g.evaluate(point) >= -tol for g in self.inequalities)
        return ok and all(abs(h.evaluate(point)) <= tol for h in self.equalities)

    def sample_grid(self, n):
        """Points of a regular n-per-axis grid over [0, 1]^k restricted to the
        domain inequalities.  Used for cheap dense checks; the canonical
        domains all live inside the unit box."""
        k = self.num_vars
        if k == 0:
            return np.zeros((1, 0))
        axes = [np.linspace(0.0, 1.0, n)] * k
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        keep = np.ones(len(pts), dtype=bool)
        for g in self.inequalities:
            keep &= g.evaluate_many(pts) >= -1e-12
        return pts[keep]


def _interval_bounds(k, index):
    u = Polynomial.variable(k, index)
    return (u, 1.0 - u)


def canonical_domain(kind):
    """Unit triangle, square, cube or interval by name."""
    if kind == "triangle":
        u1 = Polynomial.variable(2, 0)
        u2 = Polynomial.variable(2, 1)
        return SemialgebraicDomain(2, (u1, u2, 1.0 - u1 - u2), name="triangle")
    if kind == "square":
        ineqs = _interval_bounds(2, 0) + _interval_bounds(2, 1)
        return SemialgebraicDomain(2, ineqs, name="square")
    if kind == "cube":
        ineqs = ()
        for i in range(3):
            ineqs = ineqs + _interval_bounds(3, i)
        return SemialgebraicDomain(3, ineqs, name="cube")
    if kind == "interval":
        return SemialgebraicDomain(1, _interval_bounds(1, 0), name="interval")
    if kind == "point":
        return SemialgebraicDomain(0, (), name="point")
    raise ValueError(f"unknown canonical domain {kind!r}")


def embed_domain(domain, num_vars, offset):
    """Shift a domain's variables by ``offset`` inside a larger space."""
    var_map = [offset + i for i in range(domain.num_vars)]
    ineqs = tuple(g.embed(num_vars, var_map) for g in domain.inequalities)
    eqs = tuple(h.embed(num_vars, var_map) for h in domain.equalities)
    return SemialgebraicDomain(num_vars, ineqs, eqs, name=domain.name)


def product_domain(left, right, extra=()):
    """Concatenate two domains over stacked variables and append any extra
    inequality polynomials (already expressed in the product space)."""
    k = left.num_vars + right.num_vars
    le = embed_domain(left, k, 0)
    re = embed_domain(right, k, left.num_vars)
    ineqs = le.inequalities + re.inequalities + tuple(extra)
    eqs = le.equalities + re.equalities
    for q in extra:
        if q.num_vars != k:
            raise DimensionMismatch("extra constraints must live in the product space")
    name = f"{left.name}*{right.name}" if left.name and right.name else ""
    return SemialgebraicDomain(k, ineqs, eqs, name=name)
