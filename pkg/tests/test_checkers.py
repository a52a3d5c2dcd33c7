import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from anisored import checkers as ck
from anisored.errors import HypothesisViolated
from anisored.fields import CoefficientTensor, Grid2, tensor_from_matrix
from helpers import ex5, iso_tensor


def test_symmetries_examples():
    s = ck.check_symmetries(ex5(2, 1, 1, 2))
    assert s.major and s.minor
    a = np.array(ck.example5_tensor(2, 1, 1, 2))
    a[0, 1, 0, 0] += 0.5
    assert not ck.check_symmetries(CoefficientTensor.constant(a)).major
    z = ck.check_symmetries(CoefficientTensor.constant(np.zeros((2, 2, 2, 2))))
    assert z.major and z.minor


def test_ellipticity_examples():
    r = ck.check_strong_ellipticity(ex5(2, 0, 1, 1))
    assert r.strong_elliptic and abs(r.delta_est - 1.0) <= 1e-6
    a = np.zeros((2, 2, 2, 2))
    a[:, :, 0, 0] = -np.eye(2)
    a[:, :, 1, 1] = np.eye(2)
    assert not ck.check_strong_ellipticity(CoefficientTensor.constant(a)).strong_elliptic
    assert not ck.check_strong_ellipticity(ex5(2, 1, 1, 0.3)).strong_elliptic


def test_simple_domain_examples():
    assert not ck.check_simple_domain(iso_tensor()).simple
    assert ck.check_simple_domain(ex5(2, 0, 1, 1)).simple
    assert not ck.check_simple_domain(ex5(2, 0, 1, 0.5)).simple


def test_example5_accepts():
    t, rep = ck.example5(ck.Example5Params(2, 0, 1, 1))
    assert np.allclose(rep.lam11, np.diag([2, 1])) and np.allclose(rep.lam12, 0)
    assert np.allclose(rep.lam22, np.diag([1, 1]))
    t, rep = ck.example5(ck.Example5Params(2, 1, 1, 2))
    assert rep.factor_coefficient == pytest.approx(7)
    assert rep.det_factor_residual <= 1e-14
    assert rep.e == 0.5 and rep.d == 0.0


def test_example5_rejects():
    with pytest.raises(HypothesisViolated) as e:
        ck.example5(ck.Example5Params(2, 1, 1, 0.3))
    assert "3/8" in str(e.value) and e.value.inequality == "f > (2ab^2c-b^4)/a^3"
    with pytest.raises(HypothesisViolated) as e:
        ck.example5(ck.Example5Params(2, 0, 1, 0.5))
    assert e.value.inequality == "f != c^2/a"
    for bad in [(-1, 0, 1, 1), (2, 0, -1, 1), (1, 2, 1, 9)]:
        with pytest.raises(HypothesisViolated):
            ck.example5(ck.Example5Params(*bad))


def test_example5_field_parameters():
    g = Grid2(0.5, 9)
    t, rep = ck.example5(ck.Example5Params(lambda x, y: 2 + 0.1 * x, 1.0, 1.0, 2.0), grid=g)
    assert t.mode == "grid" and rep.det_factor_residual <= 1e-13
    assert ck.check_strong_ellipticity(t).strong_elliptic
    assert ck.check_simple_domain(t).simple
    with pytest.raises(HypothesisViolated):
        ck.example5(ck.Example5Params(lambda x, y: 2 + 0 * x, 1.0, 1.0, lambda x, y: 0.3 + x), grid=g)


def _random_symmetric(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4))
    g = (m + m.T) / 2 + rng.uniform(-1.0, 3.0) * np.eye(4)
    return CoefficientTensor.constant(tensor_from_matrix(g))


def test_algebraic_matches_angular_sign():
    agree, pos = 0, 0
    for seed in range(200):
        r = ck.check_strong_ellipticity(_random_symmetric(seed))
        agree += r.strong_elliptic == (r.delta_est > 0)
        pos += r.strong_elliptic
    assert agree == 200 and 20 < pos < 180


def test_delta_lower_bound():
    rng = np.random.default_rng(3)
    for t in ck.random_corpus(5, seed=11):
        d = ck.check_strong_ellipticity(t).delta_est
        a = rng.normal(size=(10 ** 4, 2))
        b = rng.normal(size=(10 ** 4, 2))
        a /= np.linalg.norm(a, axis=1)[:, None]
        b /= np.linalg.norm(b, axis=1)[:, None]
        q = np.einsum("abjl,na,nb,nj,nl->n", t.a, a, a, b, b)
        assert q.min() >= d - 1e-6


params5 = st.tuples(st.floats(0.2, 4), st.floats(-2, 2), st.floats(0.2, 4), st.floats(0, 10))


@settings(max_examples=100, deadline=None)
@given(params5)
def test_accepted_family_is_elliptic_and_simple(p):
    a, b, c, f = p
    try:
        t, rep = ck.example5(ck.Example5Params(a, b, c, f))
    except HypothesisViolated:
        return
    assume(abs(f - c * c / a) > 1e-3 and a * c - b * b > 1e-3)
    assume(f - max(b * b * c / a ** 2, (2 * a * b * b * c - b ** 4) / a ** 3) > 1e-3)
    assert ck.check_strong_ellipticity(t).strong_elliptic
    assert ck.check_simple_domain(t).simple
    assert rep.det_factor_residual <= 1e-10


def test_random_corpus_deterministic():
    a = [t.a for t in ck.random_corpus(3, seed=5)]
    b = [t.a for t in ck.random_corpus(3, seed=5)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(ck.check_strong_ellipticity(CoefficientTensor.constant(x)).strong_elliptic for x in a)
