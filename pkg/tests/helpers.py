"""Shared fixtures-as-functions and independent oracles for the test suite."""
import numpy as np
from hypothesis import strategies as st

from anisored.checkers import example5_tensor
from anisored.fields import CoefficientTensor, PolyField, tensor_from_matrix
from anisored.quadpoly import QuadMatPoly

SQ2 = np.sqrt(2.0)

# "PASS criterion N: ..." lines collected by test_acceptance, echoed by conftest
ACCEPTANCE = []


def iso_tensor():
    a = np.zeros((2, 2, 2, 2))
    a[:, :, 0, 0] = np.eye(2)
    a[:, :, 1, 1] = np.eye(2)
    return CoefficientTensor.constant(a)


def iso_poly():
    return QuadMatPoly(np.eye(2), np.zeros((2, 2)), np.eye(2))


def ex5(a, b, c, f, bb=None, cc=None):
    return CoefficientTensor.constant(example5_tensor(a, b, c, f), bb, cc)


def ex5_poly(a, b, c, f):
    return QuadMatPoly.from_tensor(example5_tensor(a, b, c, f))


def oracle_roots(p):
    """Roots of det P from numpy's companion-matrix solver (independent of Aberth)."""
    from anisored.quadpoly import det_quartic
    return np.roots(det_quartic(p)[::-1])


def oracle_sylvester(a, b, c):
    """Psi A - B Psi + C = 0 via scipy's Bartels-Stewart: (-B) Psi + Psi A = -C."""
    from scipy.linalg import solve_sylvester
    return solve_sylvester(-b, a, -c)


def varying_tensor(rng, amp=0.1):
    """Polynomial coefficients: A = A0 (1 + amp x1) + amp x2 A1 plus random B, C of degree 1.

    A0 and A1 are not proportional, so T genuinely varies in space.
    """
    a0 = example5_tensor(2, 1, 1, 2)
    a1 = example5_tensor(2, 0, 1, 1)
    ac = np.zeros((2, 2, 2, 2, 2, 2))
    ac[0, 0] = a0
    ac[1, 0] = amp * a0
    ac[0, 1] = amp * a1
    b = PolyField(0.3 * rng.normal(size=(2, 2, 2, 2, 2)))
    c = PolyField(0.3 * rng.normal(size=(2, 2, 2, 2)))
    return CoefficientTensor.polynomial(PolyField(ac), b, c)


def random_poly(rng, degree, ncomp, complex_=False):
    c = rng.normal(size=(degree + 1, degree + 1, ncomp))
    if complex_:
        c = c + 1j * rng.normal(size=c.shape)
    i, j = np.indices((degree + 1, degree + 1))
    c[i + j > degree] = 0
    return PolyField(c)


finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def elliptic_polys(draw):
    """Random major-symmetric strongly elliptic QuadMatPoly (rejection sampled)."""
    from hypothesis import assume
    from anisored.checkers import elliptic_at
    m = np.array(draw(st.lists(finite, min_size=16, max_size=16))).reshape(4, 4)
    shift = draw(st.floats(0.5, 4.0))
    g = (m + m.T) / 2 + shift * np.eye(4)
    a = tensor_from_matrix(g)
    assume(elliptic_at(a))
    p = QuadMatPoly.from_tensor(a)
    from anisored.quadpoly import split_spectrum
    s = split_spectrum(p)
    assume(s.im_margin > 1e-3 * s.scale)
    return p
