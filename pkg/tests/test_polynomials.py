"""Polynomial arithmetic: oracles are naive term-by-term evaluation loops
written here, independent of the library's vectorized paths."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sosgeo.polynomials import (Polynomial, DimensionMismatch, UnboundVariable,
                                monomial_basis, basis_size, poly_arith)


def naive_eval(terms, point):
    """Oracle: plain Python sum of coeff * prod(x_i ** e_i)."""
    total = 0.0
    for expts, coeff in terms.items():
        v = coeff
        for x, e in zip(point, expts):
            v *= x ** e
        total += v
    return total


def random_poly(rng, k, deg, nterms=8):
    terms = {}
    for _ in range(nterms):
        e = tuple(int(x) for x in rng.integers(0, deg + 1, size=k))
        if sum(e) <= deg:
            terms[e] = float(rng.standard_normal())
    return Polynomial(k, terms)


# ----------------------------------------------------------------------
# monomial bases

def test_basis_sizes_frozen():
    assert len(monomial_basis(1, 2)) == 3
    assert len(monomial_basis(2, 2)) == 6
    assert len(monomial_basis(3, 4)) == 35


def test_basis_size_formula():
    for k in range(1, 5):
        for d in range(0, 6):
            assert len(monomial_basis(k, d)) == basis_size(k, d) == math.comb(k + d, d)


def test_basis_starts_at_constant_and_is_deterministic():
    b1 = monomial_basis(3, 4)
    b2 = monomial_basis(3, 4)
    assert b1.monomials[0] == (0, 0, 0)
    assert b1.monomials == b2.monomials
    # graded: total degree never decreases along the ordering
    degs = [sum(m) for m in b1.monomials]
    assert degs == sorted(degs)


def test_basis_order_u1_before_u2():
    assert monomial_basis(2, 1).monomials == ((0, 0), (1, 0), (0, 1))
    assert monomial_basis(2, 2).monomials == (
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


# ----------------------------------------------------------------------
# arithmetic

def test_mul_example():
    u1 = Polynomial.variable(2, 0)
    p = (1.0 + u1) * (1.0 - u1)
    assert p.terms == {(0, 0): 1.0, (2, 0): -1.0}


def test_mul_by_zero():
    u1 = Polynomial.variable(2, 0)
    z = Polynomial.zero(2)
    assert (u1 * z).is_zero()
    assert (z * u1).is_zero()


def test_add_matches_pointwise_oracle():
    rng = np.random.default_rng(0)
    p = Polynomial(2, {(2, 0): 1.0, (1, 1): 2.0})
    q = Polynomial(2, {(0, 2): 1.0})
    s = p + q
    target = Polynomial(2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0})
    for _ in range(20):
        x = rng.uniform(-2, 2, size=2)
        assert s.evaluate(x) == pytest.approx(target.evaluate(x), abs=1e-12)
        # (u1 + u2)^2 expands to p + q here
        assert s.evaluate(x) == pytest.approx((x[0] + x[1]) ** 2, rel=1e-12, abs=1e-12)


def test_dimension_mismatch_raises():
    p = Polynomial.variable(2, 0)
    q = Polynomial.variable(3, 0)
    with pytest.raises(DimensionMismatch):
        _ = p + q
    with pytest.raises(DimensionMismatch):
        _ = p * q
    with pytest.raises(DimensionMismatch):
        p.evaluate((1.0, 2.0, 3.0))


def test_zero_coefficient_dropped():
    u1 = Polynomial.variable(2, 0)
    p = u1 - u1
    assert p.is_zero()
    assert p.terms == {}


# ----------------------------------------------------------------------
# evaluation

def test_evaluate_examples():
    k2 = Polynomial(2, {(0, 0): 1.0, (1, 0): -1.0, (0, 1): -1.0})  # 1 - u1 - u2
    assert k2.evaluate((0.25, 0.25)) == pytest.approx(0.5, abs=1e-15)
    seven = Polynomial.constant(3, 7.0)
    assert seven.evaluate((0.1, 0.2, 0.3)) == 7.0


def test_evaluate_matches_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = random_poly(rng, 2, 4)
        x = rng.uniform(-1.5, 1.5, size=2)
        assert p.evaluate(x) == pytest.approx(naive_eval(p.terms, x), rel=1e-13, abs=1e-13)


def test_evaluate_many_matches_scalar_path():
    rng = np.random.default_rng(2)
    p = random_poly(rng, 3, 5)
    pts = rng.uniform(-1, 1, size=(40, 3))
    vec = p.evaluate_many(pts)
    for i in range(len(pts)):
        assert vec[i] == pytest.approx(naive_eval(p.terms, pts[i]), rel=1e-12, abs=1e-12)


def test_evaluate_exact_for_integers():
    p = Polynomial(2, {(3, 0): 2.0, (1, 2): 1.0, (0, 0): -5.0})
    assert p.evaluate((3, 2)) == 2 * 27 + 3 * 4 - 5


# ----------------------------------------------------------------------
# substitution

def test_substitute_univariate():
    x = Polynomial.variable(1, 0)
    sq = x * x
    u_plus_1 = Polynomial(1, {(1,): 1.0, (0,): 1.0})
    out = sq.substitute({0: u_plus_1})
    assert out.terms == {(2,): 1.0, (1,): 2.0, (0,): 1.0}


def test_substitute_identity():
    rng = np.random.default_rng(3)
    p = random_poly(rng, 2, 3)
    ident = {0: Polynomial.variable(2, 0), 1: Polynomial.variable(2, 1)}
    assert p.substitute(ident) == p


def test_substitute_unbound_raises():
    p = Polynomial.variable(2, 1)
    with pytest.raises(UnboundVariable):
        p.substitute({0: Polynomial.variable(2, 0)})


def test_embed_reindexes_variables():
    p = Polynomial(2, {(2, 1): 3.0})  # 3 u1^2 u2
    q = p.embed(4, [2, 0])            # u1 -> w3, u2 -> w1
    assert q.terms == {(1, 0, 2, 0): 3.0}
    rng = np.random.default_rng(4)
    for _ in range(5):
        w = rng.uniform(-1, 1, size=4)
        assert q.evaluate(w) == pytest.approx(p.evaluate((w[2], w[0])), rel=1e-12)


def test_derivative():
    u = Polynomial.variable(1, 0)
    p = u ** 3 + 2.0 * u
    d = p.derivative(0)
    assert d.terms == {(2,): 3.0, (0,): 2.0}


# ----------------------------------------------------------------------
# ring axioms (property tests)

small_ints = st.integers(min_value=-4, max_value=4)


@st.composite
def int_polys(draw, k=2, deg=3):
    n = draw(st.integers(min_value=0, max_value=5))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(min_value=0, max_value=deg)) for _ in range(k))
        terms[e] = float(draw(small_ints))
    return Polynomial(k, terms)


@settings(max_examples=60, deadline=None)
@given(int_polys(), int_polys(), int_polys())
def test_ring_axioms_exact_on_ints(p, q, r):
    assert (p + q) == (q + p)
    assert (p * q) == (q * p)
    assert ((p + q) + r) == (p + (q + r))
    assert ((p * q) * r) == (p * (q * r))
    lhs = p * (q + r)
    rhs = p * q + p * r
    # distributivity, allowing for drop-threshold cleanup on tiny sums
    diff = lhs - rhs
    assert diff.max_abs_coeff() <= 1e-12 * max(1.0, p.max_abs_coeff() *
                                               (q.max_abs_coeff() + r.max_abs_coeff()))


def test_ring_axioms_float_coefficients():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p, q, r = (random_poly(rng, 2, 3) for _ in range(3))
        scale = max(1.0, p.max_abs_coeff(), q.max_abs_coeff(), r.max_abs_coeff()) ** 2
        assert ((p + q) + r - (p + (q + r))).max_abs_coeff() <= 1e-12 * scale
        assert (p * q - q * p).max_abs_coeff() <= 1e-12 * scale
        assert (p * (q + r) - (p * q + p * r)).max_abs_coeff() <= 1e-12 * scale


def test_evaluate_respects_products():
    rng = np.random.default_rng(6)
    for _ in range(20):
        p = random_poly(rng, 2, 4)
        q = random_poly(rng, 2, 4)
        x = rng.uniform(-1, 1, size=2)
        lhs = (p * q).evaluate(x)
        rhs = p.evaluate(x) * q.evaluate(x)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_poly_arith_dispatch():
    p = Polynomial.variable(1, 0)
    q = Polynomial.constant(1, 2.0)
    assert poly_arith("add", p, q).terms == {(1,): 1.0, (0,): 2.0}
    assert poly_arith("mul", p, q).terms == {(1,): 2.0}
    assert poly_arith("sub", p, q).terms == {(1,): 1.0, (0,): -2.0}
