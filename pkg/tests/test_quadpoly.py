import numpy as np
import pytest
from hypothesis import given, settings

from anisored import algebra2 as alg
from anisored import quadpoly as qp
from anisored.errors import RealRootDetected
from helpers import SQ2, elliptic_polys, ex5_poly, iso_poly, oracle_roots

PI = np.pi


def test_eval_p_examples():
    p = ex5_poly(2, 1, 1, 2)
    assert np.allclose(qp.eval_p(p, 0), p.lam22)
    assert np.allclose(qp.eval_p(iso_poly(), 1j), 0)
    assert np.allclose(qp.eval_p(p, 1), [[5, 2.5], [2.5, 4]], atol=1e-15)


def test_det_quartic_examples():
    assert np.allclose(qp.det_quartic(iso_poly()), [1, 0, 2, 0, 1])
    assert np.allclose(qp.det_quartic(ex5_poly(2, 0, 1, 1)), [1, 0, 3, 0, 2])


@settings(max_examples=50, deadline=None)
@given(elliptic_polys())
def test_det_quartic_pointwise(p):
    c = qp.det_quartic(p)
    for lam in (0, 1, -1, 2, -2):
        direct = alg.det2(qp.eval_p(p, lam))
        assert abs(alg.poly_eval(c, lam) - direct) <= 1e-11 * max(1.0, abs(direct), np.max(np.abs(c)) * 16)


def test_split_iso_double():
    s = qp.split_spectrum(iso_poly())
    assert np.allclose(s.upper, [1j, 1j]) and np.allclose(s.lower, [-1j, -1j])
    assert s.separation == 0.0


def test_split_family():
    s = qp.split_spectrum(ex5_poly(2, 0, 1, 1))
    assert np.allclose(sorted(s.upper, key=lambda z: z.imag), [1j / SQ2, 1j], atol=1e-14)


def test_split_singular_lam22():
    p = qp.QuadMatPoly(np.eye(2), np.zeros((2, 2)), np.diag([1.0, 0.0]))
    with pytest.raises(RealRootDetected):
        qp.split_spectrum(p)


def test_moments_iso_closed_form():
    p = iso_poly()
    m0, m1, _ = qp.contour_moments(p, qp.split_spectrum(p))
    assert np.allclose(m0, PI * np.eye(2), atol=1e-12)
    assert np.allclose(m1, 1j * PI * np.eye(2), atol=1e-12)


def test_moments_family_closed_form_and_residues():
    p = ex5_poly(2, 0, 1, 1)
    s = qp.split_spectrum(p)
    m0, m1, _ = qp.contour_moments(p, s)
    assert np.max(np.abs(m0 - np.diag([PI / SQ2, PI]))) <= 1e-9 * PI
    assert np.max(np.abs(m1 - np.diag([1j * PI / 2, 1j * PI]))) <= 1e-9 * PI
    r0, r1 = qp.residue_moments(p, s)
    assert alg.norm2(m0 - r0) <= 1e-9 * alg.norm2(r0)
    assert alg.norm2(m1 - r1) <= 1e-9 * alg.norm2(r1)


def test_moments_self_convergence():
    p = ex5_poly(2, 1, 1, 2)
    s = qp.split_spectrum(p)
    a0, a1, _ = qp.contour_moments(p, s, 512)
    b0, b1, _ = qp.contour_moments(p, s, 1024)
    assert np.max(np.abs(a0 - b0)) <= 1e-12 and np.max(np.abs(a1 - b1)) <= 1e-12


def test_right_divisor_examples():
    f = qp.right_divisor(iso_poly())
    assert np.allclose(f.x_div, 1j * np.eye(2), atol=1e-13)
    assert f.residual <= 1e-13
    f = qp.right_divisor(ex5_poly(2, 0, 1, 1))
    assert np.allclose(f.x_div, np.diag([1j / SQ2, 1j]), atol=1e-12)
    assert f.residual <= 1e-10
    f = qp.right_divisor(ex5_poly(2, 1, 1, 2))
    ev = sorted(alg.eigvals2(f.x_div), key=lambda z: z.imag)
    assert np.allclose(ev, [(-1 + 1j) / 2, (-1 + 1j * np.sqrt(13)) / 2], atol=1e-8)


def test_factorization_detector_sensitivity():
    p = ex5_poly(2, 0, 1, 1)
    x = qp.right_divisor(p).x_div
    assert qp.verify_factorization(p, x + 1e-3) >= 1e-4


def test_residual_scale_invariance():
    p = ex5_poly(2, 1, 1, 2)
    x = qp.right_divisor(p).x_div + 1e-4
    base = qp.verify_factorization(p, x)
    for c in (1e-3, 1.0, 1e3):
        assert qp.verify_factorization(p.scaled(c), x) <= 2 * base
        assert qp.verify_factorization(p.scaled(c), x) >= base / 2
        assert qp.right_divisor(p.scaled(c)).residual <= 1e-13


def test_is_simple_examples():
    assert not qp.is_simple(iso_poly()).simple
    rep = qp.is_simple(ex5_poly(2, 0, 1, 1))
    assert rep.simple and abs(rep.separation - (1 - 1 / SQ2)) <= 1e-12
    assert qp.is_simple(ex5_poly(2, 1, 1, 2)).simple


@settings(max_examples=60, deadline=None)
@given(elliptic_polys())
def test_corpus_properties(p):
    s = qp.split_spectrum(p)
    # conjugate pairs, and agreement with numpy's companion solver
    assert s.conj_defect <= 1e-9 * s.scale
    ref = oracle_roots(p)
    for z in s.roots:
        assert np.min(np.abs(ref - z)) <= 1e-7 * s.scale
    f = qp.right_divisor(p, s)
    assert f.residual <= 1e-9
    t = -f.x_div
    l11inv = alg.inverse2(p.lam11)
    q = t @ t - l11inv @ p.lam12 @ t + l11inv @ p.lam22
    assert alg.norm2(q) <= 1e-9 * (1 + alg.norm2(t) ** 2)
    if qp.is_simple(p, split=s).simple and abs(s.upper[0] - s.upper[1]) > 1e-3 * s.scale:
        r0, r1 = qp.residue_moments(p, s)
        assert alg.norm2(f.moment0 - r0) <= 1e-9 * alg.norm2(r0)
