import numpy as np

from anisored.fields import PolyField
from anisored.jets import Jet, inverse, multi_indices


def _poly(rng, deg=3, vshape=(2, 2)):
    return PolyField(rng.normal(size=(deg + 1, deg + 1) + vshape))


def test_multi_indices():
    assert multi_indices(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_product_matches_polynomial_product():
    rng = np.random.default_rng(0)
    f, g = _poly(rng, vshape=()), _poly(rng, vshape=())
    x0 = (0.3, -0.2)
    prod = (f * g).jet(x0, 4)
    assert np.allclose((f.jet(x0, 4) * g.jet(x0, 4)).coeffs, prod.coeffs, atol=1e-12)


def test_derivative_matches_poly_deriv():
    rng = np.random.default_rng(1)
    f = _poly(rng)
    x0 = (0.1, 0.4)
    assert np.allclose(f.jet(x0, 3).d(0).coeffs, f.deriv(0).jet(x0, 2).coeffs, atol=1e-12)
    assert np.allclose(f.jet(x0, 3).d(1).coeffs, f.deriv(1).jet(x0, 2).coeffs, atol=1e-12)
    assert np.isclose(f.jet(x0, 3).derivative(1, 1), f.deriv(0).deriv(1)(*x0)).all()


def test_matrix_inverse_jet():
    rng = np.random.default_rng(2)
    f = PolyField(rng.normal(size=(2, 2, 2, 2)) * 0.2 + np.eye(2)[None, None] * (np.arange(4).reshape(2, 2, 1, 1) == 0))
    j = f.jet((0.0, 0.0), 3)
    prod = j @ inverse(j)
    want = Jet.const(np.eye(2), 3)
    assert np.allclose(prod.coeffs, want.coeffs, atol=1e-13)


def test_const_and_rmatmul():
    j = Jet.const(np.eye(2), 2)
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose((m @ j).value, m)
    assert (m @ j).order == 2
