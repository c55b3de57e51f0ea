"""Patch families and their polynomial / rational shape functions.

Every supported patch kind maps a canonical parameter domain into R^n through
x(u) = a(u) / b(u) with polynomial numerators a_j and denominator b (b = 1
for the polynomial families).  Control point orderings are fixed here and
documented next to each basis builder; downstream SDP layouts inherit their
determinism from these orderings.

Triangle patches use the Bernstein-Bezier basis on barycentric coordinates
(b1, b2, b3) = (u1, u2, 1 - u1 - u2) by default; a Lagrange interpolating
basis over the uniform lattice is available through ``basis="lagrange"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polynomials import Polynomial, DimensionMismatch, PolynomialError
from .domains import SemialgebraicDomain, canonical_domain, product_domain

_DENOM_MIN = 1e-8          # denominator must stay above this on a sample grid
_DENOM_GRID = 20           # grid resolution per axis for that check


class PatchError(ValueError):
    pass


# ----------------------------------------------------------------------
# 1D Bernstein helpers

def _bernstein_1d(degree, var, num_vars):
    """Bernstein polynomials B_i^degree in the given variable index."""
    u = Polynomial.variable(num_vars, var)
    one_minus = 1.0 - u
    out = []
    for i in range(degree + 1):
        out.append(math.comb(degree, i) * (u ** i) * (one_minus ** (degree - i)))
    return out


def _triangle_multis(degree):
    """Barycentric exponent triples in the documented control-point order:
    vertices (d,0,0),(0,d,0),(0,0,d); then edge 1-2, edge 2-3, edge 3-1
    points walking away from the first vertex of each edge; interior last."""
    verts = [(degree, 0, 0), (0, degree, 0), (0, 0, degree)]
    if degree == 1:
        return verts
    edge12 = [(degree - t, t, 0) for t in range(1, degree)]
    edge23 = [(0, degree - t, t) for t in range(1, degree)]
    edge31 = [(t, 0, degree - t) for t in range(1, degree)]
    interior = [(i, j, degree - i - j)
                for i in range(1, degree)
                for j in range(1, degree - i)]
    return verts + edge12 + edge23 + edge31 + interior


def _bernstein_triangle(degree):
    b1 = Polynomial.variable(2, 0)
    b2 = Polynomial.variable(2, 1)
    b3 = 1.0 - b1 - b2
    out = []
    for (i, j, l) in _triangle_multis(degree):
        coeff = math.factorial(degree) // (
            math.factorial(i) * math.factorial(j) * math.factorial(l))
        out.append(coeff * (b1 ** i) * (b2 ** j) * (b3 ** l))
    return out


def _lagrange_triangle(degree):
    """Lagrange basis over the uniform lattice sharing the Bernstein ordering.
    Node for multi-index (i, j, l) sits at (i/d, j/d).  Built by inverting
    the monomial Vandermonde at the nodes."""
    from .polynomials import monomial_basis

    multis = _triangle_multis(degree)
    nodes = np.array([(i / degree, j / degree) for (i, j, _) in multis])
    basis = monomial_basis(2, degree)
    V = np.empty((len(nodes), len(basis)))
    for col, mono in enumerate(basis.monomials):
        V[:, col] = nodes[:, 0] ** mono[0] * nodes[:, 1] ** mono[1]
    coeffs = np.linalg.inv(V)
    out = []
    for node in range(len(nodes)):
        terms = {mono: coeffs[col, node] for col, mono in enumerate(basis.monomials)}
        out.append(Polynomial(2, terms, drop_tol=1e-12))
    return out


def _tensor_basis(deg_u, deg_v):
    """Row-major tensor Bernstein basis: index = i * (deg_v + 1) + j with i
    along u and j along v."""
    bu = _bernstein_1d(deg_u, 0, 2)
    bv = _bernstein_1d(deg_v, 1, 2)
    return [pu * pv for pu in bu for pv in bv]


def _hex_basis():
    """Trilinear basis on the unit cube; corner index = i + 2j + 4k for the
    corner (i, j, k) in {0,1}^3."""
    axes = []
    for var in range(3):
        u = Polynomial.variable(3, var)
        axes.append([1.0 - u, u])
    basis = [None] * 8
    for i in range(2):
        for j in range(2):
            for k in range(2):
                basis[i + 2 * j + 4 * k] = axes[0][i] * axes[1][j] * axes[2][k]
    return basis


def _coons_basis():
    """Bilinearly blended Coons patch from four cubic boundary curves.

    Control points, 12 in total:
      0..3   bottom curve  (v = 0), u from 0 to 1
      4..7   top curve     (v = 1), u from 0 to 1
      8..9   left interior  (u = 0), v increasing (endpoints shared with 0 and 4)
      10..11 right interior (u = 1), v increasing (endpoints shared with 3 and 7)
    The blend (1-v) bottom + v top + (1-u) left + u right minus the bilinear
    corner interpolant yields degree-4 shape functions.
    """
    u = Polynomial.variable(2, 0)
    v = Polynomial.variable(2, 1)
    bu = _bernstein_1d(3, 0, 2)   # cubic in u
    bv = _bernstein_1d(3, 1, 2)   # cubic in v
    phi = [Polynomial.zero(2) for _ in range(12)]

    def add(idx, poly):
        phi[idx] = phi[idx] + poly

    for i in range(4):
        add(i, (1.0 - v) * bu[i])          # bottom loft
        add(4 + i, v * bu[i])              # top loft
    left = [0, 8, 9, 4]                    # cubic left boundary control indices
    right = [3, 10, 11, 7]
    for i in range(4):
        add(left[i], (1.0 - u) * bv[i])
        add(right[i], u * bv[i])
    # subtract bilinear interpolant of the four corners
    add(0, -(1.0 - u) * (1.0 - v))
    add(3, -u * (1.0 - v))
    add(4, -(1.0 - u) * v)
    add(7, -u * v)
    return phi


# ----------------------------------------------------------------------
# kind registry

def _kind_info(kind, degrees=None):
    """(control point count, domain kind, basis degree descriptor)."""
    table = {
        "linear-triangle": (3, "triangle"),
        "quadratic-triangle": (6, "triangle"),
        "cubic-triangle": (10, "triangle"),
        "quadratic-bezier-curve": (3, "interval"),
        "bicubic-tensor": (16, "square"),
        "cubic-coons": (12, "square"),
        "trilinear-hex": (8, "cube"),
    }
    if kind in table:
        return table[kind]
    if kind == "bezier-tensor":
        if not degrees or len(degrees) != 2:
            raise PatchError("bezier-tensor requires degrees=[deg_u, deg_v]")
        du, dv = degrees
        return ((du + 1) * (dv + 1), "square")
    if kind in ("bspline-surface", "nurbs-surface"):
        return (None, "square")
    raise PatchError(f"unknown patch kind {kind!r}")


TRIANGLE_DEGREE = {"linear-triangle": 1, "quadratic-triangle": 2, "cubic-triangle": 3}


@dataclass
class PatchSpec:
    """Declarative patch description; geometry only, no compiled state.

    control_points has one row per control point in the ordering fixed by the
    basis builders.  weights (rational patches) must be strictly positive.
    knots is {"u": [...], "v": [...]} for the spline kinds with clamped knot
    vectors.  velocities, when present, pair rows with control_points for the
    collision pipeline.
    """
    kind: str
    control_points: np.ndarray
    weights: np.ndarray | None = None
    knots: dict | None = None
    degrees: tuple | None = None
    basis: str = "bernstein"
    velocities: np.ndarray | None = None

    def __post_init__(self):
        self.control_points = np.atleast_2d(np.asarray(self.control_points, dtype=float))
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if np.any(self.weights <= 0):
                raise PatchError("weights must be strictly positive")
            if len(self.weights) != len(self.control_points):
                raise PatchError("one weight per control point required")
        if self.velocities is not None:
            self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
            if self.velocities.shape != self.control_points.shape:
                raise PatchError("velocities must match control_points in shape")
        if self.degrees is not None:
            self.degrees = tuple(int(d) for d in self.degrees)
        expected, _ = _kind_info(self.kind, self.degrees)
        if expected is not None and len(self.control_points) != expected:
            raise PatchError(
                f"{self.kind} expects {expected} control points, "
                f"got {len(self.control_points)}")
        if self.kind in ("bspline-surface", "nurbs-surface"):
            if not self.knots or "u" not in self.knots or "v" not in self.knots:
                raise PatchError(f"{self.kind} requires knots with 'u' and 'v' vectors")
        if self.basis not in ("bernstein", "lagrange"):
            raise PatchError(f"unknown basis {self.basis!r}")
        if self.basis == "lagrange" and self.kind not in TRIANGLE_DEGREE:
            raise PatchError("lagrange basis is only defined for triangle kinds")

    @property
    def embedding_dim(self):
        return self.control_points.shape[1]

    def domain_kind(self):
        return _kind_info(self.kind, self.degrees)[1]


@dataclass
class ShapeFunction:
    """x(u) = numerators(u) / denominator(u) over a semialgebraic domain."""
    domain: SemialgebraicDomain
    numerators: tuple
    denominator: Polynomial
    shape_degree: int = 0

    def __post_init__(self):
        k = self.domain.num_vars
        for p in list(self.numerators) + [self.denominator]:
            if p.num_vars != k:
                raise DimensionMismatch("shape function parts disagree on variables")
        degs = [p.degree for p in self.numerators] + [self.denominator.degree]
        self.shape_degree = max(degs)
        self._check_denominator()

    def _check_denominator(self):
        b = self.denominator
        if b.degree == 0:
            val = b.evaluate((0.0,) * self.domain.num_vars) if self.domain.num_vars else b.coefficient(())
            if val < _DENOM_MIN:
                raise PatchError(f"denominator {val} is not strictly positive")
            return
        pts = self.domain.sample_grid(_DENOM_GRID)
        vals = b.evaluate_many(pts)
        if vals.size and vals.min() < _DENOM_MIN:
            raise PatchError(
                f"denominator dips to {vals.min():.3e} on the domain sample grid")

    @property
    def num_vars(self):
        return self.domain.num_vars

    @property
    def embedding_dim(self):
        return len(self.numerators)

    def is_polynomial(self):
        return self.denominator.degree == 0 and \
            abs(self.denominator.coefficient((0,) * self.num_vars) - 1.0) < 1e-14

    def evaluate(self, point):
        b = self.denominator.evaluate(point)
        return np.array([a.evaluate(point) for a in self.numerators]) / b

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=float)
        b = self.denominator.evaluate_many(pts)
        cols = [a.evaluate_many(pts) / b for a in self.numerators]
        return np.stack(cols, axis=-1)


def _basis_for(spec):
    kind = spec.kind
    if kind in TRIANGLE_DEGREE:
        deg = TRIANGLE_DEGREE[kind]
        if spec.basis == "lagrange":
            return _lagrange_triangle(deg)
        return _bernstein_triangle(deg)
    if kind == "quadratic-bezier-curve":
        return _bernstein_1d(2, 0, 1)
    if kind == "bicubic-tensor":
        return _tensor_basis(3, 3)
    if kind == "bezier-tensor":
        return _tensor_basis(*spec.degrees)
    if kind == "cubic-coons":
        return _coons_basis()
    if kind == "trilinear-hex":
        return _hex_basis()
    raise PatchError(f"no direct basis for kind {spec.kind!r}")


def shape_function(spec):
    """Build the (rational) polynomial map of a patch.

    Spline kinds must be single-span (one Bezier piece); use bezier_extract
    first for multi-span surfaces.
    """
    if spec.kind in ("bspline-surface", "nurbs-surface"):
        pieces = bezier_extract(spec)
        if len(pieces) != 1:
            raise PatchError(
                f"{spec.kind} spans {len(pieces)} Bezier pieces; "
                "extract them first with bezier_extract")
        return shape_function(pieces[0])
    basis = _basis_for(spec)
    k = basis[0].num_vars
    n = spec.embedding_dim
    pts = spec.control_points
    if spec.weights is None:
        nums = []
        for j in range(n):
            acc = Polynomial.zero(k)
            for i, phi in enumerate(basis):
                acc = acc + pts[i, j] * phi
            nums.append(acc)
        denom = Polynomial.constant(k, 1.0)
    else:
        w = spec.weights
        denom = Polynomial.zero(k)
        for i, phi in enumerate(basis):
            denom = denom + w[i] * phi
        nums = []
        for j in range(n):
            acc = Polynomial.zero(k)
            for i, phi in enumerate(basis):
                acc = acc + w[i] * pts[i, j] * phi
            nums.append(acc)
    domain = canonical_domain(spec.domain_kind())
    return ShapeFunction(domain, tuple(nums), denom)


def time_extend(spec, velocities, t_max=1.0):
    """Spacetime shape function x(u, t) = sum (p_i + v_i * t_max * t) phi_i(u)
    over domain x [0, 1]; the last variable is normalized time."""
    if t_max <= 0:
        raise PatchError("t_max must be positive")
    velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
    if velocities.shape != spec.control_points.shape:
        raise PatchError("velocities must match control_points in shape")
    base = shape_function(spec)
    vel_spec = PatchSpec(spec.kind, velocities, weights=spec.weights,
                         knots=spec.knots, degrees=spec.degrees, basis=spec.basis)
    vel = shape_function(vel_spec)
    k = base.num_vars
    ident = list(range(k))
    t = Polynomial.variable(k + 1, k)
    nums = []
    for a, av in zip(base.numerators, vel.numerators):
        nums.append(a.embed(k + 1, ident) + t_max * t * av.embed(k + 1, ident))
    denom = base.denominator.embed(k + 1, ident)
    domain = product_domain(base.domain, canonical_domain("interval"))
    return ShapeFunction(domain, tuple(nums), denom)


def clear_denominators(left, right, shared_tail=0):
    """Equality polynomials a1_j * b2 - a2_j * b1 = 0 over the product of the
    two parameter spaces.  With shared_tail > 0 the last variables of both
    shape functions (e.g. normalized time) are identified instead of stacked.
    Identically zero components are kept so indices line up with coordinates.
    """
    if left.embedding_dim != right.embedding_dim:
        raise DimensionMismatch("shape functions map into different dimensions")
    s = shared_tail
    ka, kb = left.num_vars - s, right.num_vars - s
    if ka < 0 or kb < 0:
        raise DimensionMismatch("shared_tail exceeds a variable count")
    k = ka + kb + s
    lmap = list(range(ka)) + [ka + kb + i for i in range(s)]
    rmap = [ka + i for i in range(kb)] + [ka + kb + i for i in range(s)]
    b1 = left.denominator.embed(k, lmap)
    b2 = right.denominator.embed(k, rmap)
    out = []
    for a1, a2 in zip(left.numerators, right.numerators):
        out.append(a1.embed(k, lmap) * b2 - a2.embed(k, rmap) * b1)
    return out


def joint_domain(left, right, shared_tail=0, extra=()):
    """Product domain matching the variable layout of clear_denominators.
    Shared trailing variables keep a single copy of their constraints."""
    if shared_tail == 0:
        return product_domain(left.domain, right.domain, extra)
    s = shared_tail
    ka, kb = left.num_vars - s, right.num_vars - s
    k = ka + kb + s
    lmap = list(range(ka)) + [ka + kb + i for i in range(s)]
    rmap = [ka + i for i in range(kb)] + [ka + kb + i for i in range(s)]
    seen = set()
    ineqs, eqs = [], []
    for dom, vmap, keep_shared in ((left.domain, lmap, True), (right.domain, rmap, False)):
        for g in dom.inequalities:
            uses_shared = any(e[i] for e in g.terms for i in range(dom.num_vars - s, dom.num_vars))
            if uses_shared and not keep_shared:
                continue
            ineqs.append(g.embed(k, vmap))
        for h in dom.equalities:
            eqs.append(h.embed(k, vmap))
    ineqs.extend(extra)
    return SemialgebraicDomain(k, tuple(ineqs), tuple(eqs))


# ----------------------------------------------------------------------
# Bezier extraction from (rational) tensor B-spline surfaces

def _infer_degree(knots):
    knots = list(knots)
    first = knots[0]
    p = 0
    while p + 1 < len(knots) and knots[p + 1] == first:
        p += 1
    if knots[-1] != knots[-(p + 1)] or p == 0:
        raise PatchError("knot vector must be clamped with matching end multiplicities")
    return p


def _insert_knot(points, knots, degree, t):
    """Boehm single knot insertion for one parametric direction.  ``points``
    is (n_ctrl, dim)."""
    n = len(points)
    # find span index k with knots[k] <= t < knots[k+1]
    span = None
    for i in range(degree, n):
        if knots[i] <= t < knots[i + 1]:
            span = i
            break
    if span is None:
        span = n - 1
    new_pts = np.empty((n + 1, points.shape[1]))
    new_pts[:span - degree + 1] = points[:span - degree + 1]
    for i in range(span - degree + 1, span + 1):
        denom = knots[i + degree] - knots[i]
        alpha = 0.0 if denom == 0 else (t - knots[i]) / denom
        new_pts[i] = (1 - alpha) * points[i - 1] + alpha * points[i]
    new_pts[span + 1:] = points[span:]
    new_knots = sorted(list(knots) + [t])
    return new_pts, new_knots


def _to_bezier_segments(points, knots, degree):
    """Raise every interior knot to full multiplicity, then slice spans."""
    pts = np.asarray(points, dtype=float)
    kv = list(knots)
    interior = sorted(set(k for k in kv[degree + 1:-(degree + 1)]))
    for t in interior:
        while kv.count(t) < degree:
            pts, kv = _insert_knot(pts, kv, degree, t)
    breakpoints = [kv[0]] + interior + [kv[-1]]
    segments = []
    for s in range(len(breakpoints) - 1):
        start = s * degree
        segments.append(pts[start:start + degree + 1].copy())
    return segments, breakpoints


def bezier_extract(spec):
    """Split a clamped (rational) tensor-product B-spline surface into Bezier
    pieces via repeated knot insertion.  Pieces come back row-major in (u, v)
    span order as bezier-tensor (or bicubic-tensor) PatchSpecs."""
    if spec.kind not in ("bspline-surface", "nurbs-surface"):
        raise PatchError(f"bezier_extract expects a spline surface, got {spec.kind!r}")
    ku = list(spec.knots["u"])
    kv = list(spec.knots["v"])
    pu = _infer_degree(ku)
    pv = _infer_degree(kv)
    nu = len(ku) - pu - 1
    nv = len(kv) - pv - 1
    if nu * nv != len(spec.control_points):
        raise PatchError(
            f"knot vectors imply a {nu} x {nv} control grid, "
            f"got {len(spec.control_points)} points")
    n = spec.embedding_dim
    rational = spec.kind == "nurbs-surface" and spec.weights is not None
    if rational:
        w = spec.weights[:, None]
        data = np.hstack([spec.control_points * w, w])
    else:
        data = spec.control_points.copy()
    dim = data.shape[1]
    grid = data.reshape(nu, nv, dim)

    # split along u: treat each column collection as a curve of row-vectors
    u_rows = grid.reshape(nu, nv * dim)
    u_segments, _ = _to_bezier_segments(u_rows, ku, pu)
    pieces = []
    for useg in u_segments:
        sub = useg.reshape(pu + 1, nv, dim)
        v_rows = np.transpose(sub, (1, 0, 2)).reshape(nv, (pu + 1) * dim)
        v_segments, _ = _to_bezier_segments(v_rows, kv, pv)
        for vseg in v_segments:
            block = np.transpose(vseg.reshape(pv + 1, pu + 1, dim), (1, 0, 2))
            flat = block.reshape((pu + 1) * (pv + 1), dim)
            if rational:
                weights = flat[:, -1]
                points = flat[:, :-1] / weights[:, None]
                pieces.append(PatchSpec("bezier-tensor", points, weights=weights,
                                        degrees=(pu, pv)))
            else:
                if (pu, pv) == (3, 3):
                    pieces.append(PatchSpec("bicubic-tensor", flat))
                else:
                    pieces.append(PatchSpec("bezier-tensor", flat, degrees=(pu, pv)))
    # reorder: currently u-major over v-major already (u segments outer) - keep
    return pieces
