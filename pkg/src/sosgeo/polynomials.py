"""Sparse multivariate polynomial arithmetic.

Polynomials are dictionaries mapping exponent tuples to float coefficients,
with an explicit variable count so that arithmetic between mismatched
variable spaces fails loudly instead of broadcasting.  Monomial bases are
ordered graded-lexicographically (total degree first, then lexicographic
with the first variable ranked highest) so that every downstream matrix
layout is deterministic across runs.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

# Coefficients below DROP_RELATIVE times the largest operand coefficient are
# discarded after add/mul so cancellation noise does not accumulate.
DROP_RELATIVE = 1e-14


class PolynomialError(ValueError):
    pass


class DimensionMismatch(PolynomialError):
    pass


class UnboundVariable(PolynomialError):
    pass


def grlex_key(exponents):
    """Graded-lex sort key: total degree, then u1 before u2 before ..."""
    return (sum(exponents), tuple(-e for e in exponents))


def _validate_exponents(num_vars, exponents):
    if len(exponents) != num_vars:
        raise DimensionMismatch(
            f"exponent tuple {exponents} does not match {num_vars} variables")
    if any((not isinstance(e, int)) or e < 0 for e in exponents):
        raise PolynomialError(f"exponents must be non-negative ints, got {exponents}")


class Polynomial:
    """Immutable-by-convention sparse polynomial in ``num_vars`` variables."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars, terms=None, *, drop_tol=0.0):
        if num_vars < 0:
            raise PolynomialError("num_vars must be non-negative")
        self.num_vars = int(num_vars)
        clean = {}
        for expts, coeff in (terms or {}).items():
            expts = tuple(int(e) for e in expts)
            _validate_exponents(self.num_vars, expts)
            c = float(coeff) + clean.get(expts, 0.0)
            clean[expts] = c
        if drop_tol > 0.0:
            clean = {e: c for e, c in clean.items() if abs(c) > drop_tol}
        else:
            clean = {e: c for e, c in clean.items() if c != 0.0}
        self.terms = clean

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls, num_vars):
        return cls(num_vars, {})

    @classmethod
    def constant(cls, num_vars, value):
        return cls(num_vars, {(0,) * num_vars: float(value)})

    @classmethod
    def variable(cls, num_vars, index):
        if not 0 <= index < num_vars:
            raise DimensionMismatch(f"variable index {index} out of range for {num_vars} vars")
        expts = [0] * num_vars
        expts[index] = 1
        return cls(num_vars, {tuple(expts): 1.0})

    @classmethod
    def monomial(cls, num_vars, exponents, coeff=1.0):
        return cls(num_vars, {tuple(exponents): float(coeff)})

    # ------------------------------------------------------------------
    # inspection

    @property
    def degree(self):
        """Total degree; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_zero(self):
        return not self.terms

    def coefficient(self, exponents):
        return self.terms.get(tuple(exponents), 0.0)

    def max_abs_coeff(self):
        if not self.terms:
            return 0.0
        return max(abs(c) for c in self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"Polynomial({self.num_vars}, 0)"
        parts = []
        for e in sorted(self.terms, key=grlex_key)[:6]:
            c = self.terms[e]
            mono = "*".join(f"u{i + 1}^{p}" if p > 1 else f"u{i + 1}"
                            for i, p in enumerate(e) if p)
            parts.append(f"{c:+.6g}" + (f"*{mono}" if mono else ""))
        tail = " + ..." if len(self.terms) > 6 else ""
        return f"Polynomial({self.num_vars}, {' '.join(parts)}{tail})"

    # ------------------------------------------------------------------
    # arithmetic

    def _check_same_space(self, other):
        if self.num_vars != other.num_vars:
            raise DimensionMismatch(
                f"cannot combine polynomials in {self.num_vars} and {other.num_vars} variables")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.num_vars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_space(other)
        tol = DROP_RELATIVE * max(self.max_abs_coeff(), other.max_abs_coeff())
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.num_vars, out, drop_tol=tol)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.num_vars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.num_vars,
                              {e: c * float(other) for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_space(other)
        tol = DROP_RELATIVE * max(self.max_abs_coeff(), other.max_abs_coeff())
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(self.num_vars, out, drop_tol=tol)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise PolynomialError("only non-negative integer powers are supported")
        out = Polynomial.constant(self.num_vars, 1.0)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # ------------------------------------------------------------------
    # evaluation and composition

    def evaluate(self, point):
        """Direct monomial evaluation, exact for integer data within float range."""
        if len(point) != self.num_vars:
            raise DimensionMismatch(
                f"point of length {len(point)} for {self.num_vars} variables")
        total = 0.0
        for e, c in self.terms.items():
            term = c
            for x, p in zip(point, e):
                if p:
                    term *= float(x) ** p
            total += term
        return total

    __call__ = evaluate

    def evaluate_many(self, points):
        """Vectorized evaluation at an (N, num_vars) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[1] != self.num_vars:
            raise DimensionMismatch(
                f"points of width {pts.shape[1]} for {self.num_vars} variables")
        out = np.zeros(pts.shape[0])
        if not self.terms:
            return out
        maxdeg = max(max(e) for e in self.terms) if self.num_vars else 0
        # powers[:, j, p] = points[:, j] ** p
        powers = np.ones((pts.shape[0], self.num_vars, maxdeg + 1))
        for p in range(1, maxdeg + 1):
            powers[:, :, p] = powers[:, :, p - 1] * pts
        cols = np.arange(self.num_vars)
        for e, c in self.terms.items():
            out += c * np.prod(powers[:, cols, e], axis=1)
        return out

    def derivative(self, var):
        if not 0 <= var < self.num_vars:
            raise DimensionMismatch(f"variable index {var} out of range")
        out = {}
        for e, c in self.terms.items():
            if e[var] == 0:
                continue
            key = list(e)
            key[var] -= 1
            out[tuple(key)] = out.get(tuple(key), 0.0) + c * e[var]
        return Polynomial(self.num_vars, out)

    def substitute(self, bindings):
        """Compose with ``bindings``: a dict mapping every used variable index
        to a Polynomial.  All bound polynomials must share one variable space,
        which becomes the space of the result."""
        used = set()
        for e in self.terms:
            used.update(i for i, p in enumerate(e) if p)
        missing = used - set(bindings)
        if missing:
            raise UnboundVariable(f"no binding for variable indices {sorted(missing)}")
        if not bindings:
            # Constant polynomial with no bindings keeps its space.
            return Polynomial(self.num_vars, dict(self.terms))
        spaces = {b.num_vars for b in bindings.values()}
        if len(spaces) != 1:
            raise DimensionMismatch(f"bindings live in different variable spaces {spaces}")
        new_k = spaces.pop()
        # Cache powers of each binding.
        max_pow = {}
        for e in self.terms:
            for i, p in enumerate(e):
                if p:
                    max_pow[i] = max(max_pow.get(i, 0), p)
        pow_cache = {}
        for i, top in max_pow.items():
            powers = [Polynomial.constant(new_k, 1.0)]
            for _ in range(top):
                powers.append(powers[-1] * bindings[i])
            pow_cache[i] = powers
        result = Polynomial.zero(new_k)
        for e, c in self.terms.items():
            term = Polynomial.constant(new_k, c)
            for i, p in enumerate(e):
                if p:
                    term = term * pow_cache[i][p]
            result = result + term
        return result

    def embed(self, num_vars, var_map):
        """Re-index variables into a larger space: old index i -> var_map[i]."""
        if len(var_map) != self.num_vars:
            raise DimensionMismatch("var_map length must equal num_vars")
        if any(not 0 <= j < num_vars for j in var_map):
            raise DimensionMismatch("var_map target out of range")
        out = {}
        for e, c in self.terms.items():
            key = [0] * num_vars
            for i, p in enumerate(e):
                key[var_map[i]] += p
            out[tuple(key)] = out.get(tuple(key), 0.0) + c
        return Polynomial(num_vars, out)


class MonomialBasis:
    """Graded-lex ordered monomials of total degree <= degree."""

    __slots__ = ("num_vars", "degree", "monomials", "index")

    def __init__(self, num_vars, degree):
        self.num_vars = int(num_vars)
        self.degree = int(degree)
        self.monomials = tuple(sorted(_exponents_upto(self.num_vars, self.degree),
                                      key=grlex_key))
        self.index = {m: i for i, m in enumerate(self.monomials)}

    def __len__(self):
        return len(self.monomials)

    def __getitem__(self, i):
        return self.monomials[i]

    def __iter__(self):
        return iter(self.monomials)

    def __repr__(self):
        return f"MonomialBasis(k={self.num_vars}, d={self.degree}, size={len(self)})"


def _exponents_upto(num_vars, degree):
    if num_vars == 0:
        return [()]
    out = []

    def rec(prefix, remaining, budget):
        if remaining == 1:
            for e in range(budget + 1):
                out.append(prefix + (e,))
            return
        for e in range(budget + 1):
            rec(prefix + (e,), remaining - 1, budget - e)

    rec((), num_vars, degree)
    return out


@lru_cache(maxsize=None)
def monomial_basis(num_vars, degree):
    """Shared, cached basis instance.  Size is C(num_vars + degree, degree)."""
    if num_vars < 0 or degree < 0:
        raise PolynomialError("num_vars and degree must be non-negative")
    return MonomialBasis(num_vars, degree)


def basis_size(num_vars, degree):
    return math.comb(num_vars + degree, degree)


# Functional aliases used by callers that prefer free functions over methods.

def poly_arith(op, p, q):
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "neg":
        return -p
    raise PolynomialError(f"unknown op {op!r}")


def evaluate(p, point):
    return p.evaluate(point)


def substitute(p, bindings):
    return p.substitute(bindings)
