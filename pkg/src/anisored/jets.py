"""Truncated bivariate Taylor jets with array values.

A jet of order K at a point x0 stores c[i, j] for i + j <= K so that

    f(x0 + y) = sum c[i, j] y1^i y2^j + O(|y|^(K+1)).

Arithmetic is exact on the retained coefficients, so derivatives of
algebraic quantities (inverses, solutions of matrix equations) are obtained
to rounding error without finite differences.  ``d(axis)`` drops one order.
"""
from math import factorial

import numpy as np

from .algebra2 import inverse2


def multi_indices(order):
    """(i, j) pairs by increasing total degree."""
    return [(i, k - i) for k in range(order + 1) for i in range(k, -1, -1)]


class Jet:
    __array_ufunc__ = None  # make ndarray @ Jet defer to Jet.__rmatmul__

    def __init__(self, coeffs, order):
        coeffs = np.asarray(coeffs)
        if coeffs.shape[0] < order + 1 or coeffs.shape[1] < order + 1:
            raise ValueError("coefficient array too small for the order")
        self.order = order
        self.coeffs = coeffs[:order + 1, :order + 1].copy()
        i, j = np.indices((order + 1, order + 1))
        self.coeffs[i + j > order] = 0

    @classmethod
    def const(cls, value, order):
        value = np.asarray(value)
        c = np.zeros((order + 1, order + 1) + value.shape, dtype=np.result_type(value, float))
        c[0, 0] = value
        return cls(c, order)

    @property
    def value(self):
        return self.coeffs[0, 0]

    @property
    def vshape(self):
        return self.coeffs.shape[2:]

    def derivative(self, i, j):
        """Value of d1^i d2^j at the expansion point."""
        return factorial(i) * factorial(j) * self.coeffs[i, j]

    def truncate(self, order):
        return Jet(self.coeffs, min(order, self.order))

    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, Jet.const(other, self.order)

    def _combine(self, other, op):
        a, b = self._coerce(other)
        k = a.order
        sample = op(a.coeffs[0, 0], b.coeffs[0, 0])
        out = np.zeros((k + 1, k + 1) + np.shape(sample), dtype=np.result_type(sample, float))
        for i, j in multi_indices(k):
            acc = 0
            for p in range(i + 1):
                for q in range(j + 1):
                    acc = acc + op(a.coeffs[p, q], b.coeffs[i - p, j - q])
            out[i, j] = acc
        return Jet(out, k)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.coeffs + b.coeffs, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __matmul__(self, other):
        return self._combine(other, np.matmul)

    def __rmatmul__(self, other):
        return Jet.const(other, self.order)._combine(self, np.matmul)

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.coeffs * other, self.order)
        return self._combine(other, np.multiply)

    def __rmul__(self, other):
        if np.isscalar(other):
            return Jet(self.coeffs * other, self.order)
        return Jet.const(other, self.order)._combine(self, np.multiply)

    def conj(self):
        return Jet(np.conj(self.coeffs), self.order)

    def d(self, axis):
        """Partial derivative along axis 0 (x1) or 1 (x2); order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = self.order - 1
        out = np.zeros((k + 1, k + 1) + self.vshape, dtype=self.coeffs.dtype)
        for i, j in multi_indices(k):
            if axis == 0:
                out[i, j] = (i + 1) * self.coeffs[i + 1, j]
            else:
                out[i, j] = (j + 1) * self.coeffs[i, j + 1]
        return Jet(out, k)

    def map(self, fn):
        """Apply a linear, coefficient-wise map (indexing, transposes)."""
        return Jet(np.stack([np.stack([fn(c) for c in row]) for row in self.coeffs]), self.order)

    def __repr__(self):
        return f"Jet(order={self.order}, vshape={self.vshape})"


def solve_by_order(value0, residual, linear_solve, order):
    """Build a jet X with X(x0) = value0 solving ``residual(X) == 0``.

    ``residual`` must be affine in the top-degree coefficients once all lower
    ones are fixed, with linear part given by ``linear_solve``: for each
    multi-index the coefficient is found from the residual computed with that
    coefficient zeroed.
    """
    value0 = np.asarray(value0)
    coeffs = np.zeros((order + 1, order + 1) + value0.shape, dtype=complex)
    coeffs[0, 0] = value0
    for idx in multi_indices(order)[1:]:
        r = residual(Jet(coeffs, order)).coeffs[idx]
        coeffs[idx] = linear_solve(r)
    return Jet(coeffs, order)


def inverse(f):
    """Inverse of a 2x2-matrix-valued jet."""
    f0inv = inverse2(f.value)
    eye = np.eye(2)
    return solve_by_order(f0inv, lambda g: f @ g - eye, lambda r: -f0inv @ r, f.order)
