"""Hypothesis checks on coefficient tensors and the (a, b, c, f) example family.

The family is

    A^11 = [[a, b], [b, c]]   A^12 = [[b, d], [c, e]]
    A^21 = [[b, c], [d, e]]   A^22 = [[c, e], [e, f]]

with e = bc/a and d = (2b^2 - ac)/a.  For it

    det P(lam) = (a lam^2 + 2b lam + c) (ac - b^2)/a^2 (a lam^2 + 2b lam + g),
    g = (a^2 f - b^2 c)/(ac - b^2).
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from . import algebra2 as alg
from .errors import (AnisoredError, HypothesisViolated, RealRootDetected)
from .fields import CoefficientTensor, Grid2
from .quadpoly import QuadMatPoly, det_quartic, is_simple, right_divisor, split_spectrum

SYM_TOL = 1e-12
F_SEP_TOL = 1e-8
N_DIRS = 360


def _tensor_samples(t, points=None):
    """A at every sample point, shape (m, 2, 2, 2, 2), and the points."""
    if t.mode == "constant":
        return np.asarray(t.a)[None], np.zeros((1, 2))
    if points is None:
        points = t.sample_points(t.grid if t.mode == "grid" else Grid2(0.5, 17))
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if t.mode == "grid":
        idx = [t.node_index(x) for x in points]
        return np.stack([t.a[i, j] for i, j in idx]), points
    return t.values(points[:, 0], points[:, 1])[0], points


@dataclass
class SymmetryReport:
    major: bool
    minor: bool
    major_defect: float
    minor_defect: float


def check_symmetries(t, points=None, tol=SYM_TOL):
    """Major A^{jl}_{ab} = A^{lj}_{ba} and minor A^{jl}_{ab} = A^{jb}_{al}."""
    a, _ = _tensor_samples(t, points)
    scale = np.maximum(np.max(np.abs(a), axis=(1, 2, 3, 4)), alg.TINY)[:, None, None, None, None]
    major = float(np.max(np.abs(a - a.transpose(0, 2, 1, 4, 3)) / scale))
    minor = float(np.max(np.abs(a - a.transpose(0, 1, 4, 3, 2)) / scale))
    return SymmetryReport(major=major <= tol, minor=minor <= tol,
                          major_defect=major, minor_defect=minor)


def symbol(a, b):
    """l(b)_{alpha beta} = sum_{j,l} A^{jl}_{alpha beta} b_j b_l for b of shape (..., 2)."""
    return np.einsum("abjl,...j,...l->...ab", a, b, b)


def _min_form(a, theta):
    """min over unit vectors of the quadratic form of the symmetric part of l(b(theta))."""
    b = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    m = symbol(a, b)
    m = (m + np.swapaxes(m, -1, -2)) / 2
    return np.linalg.eigvalsh(m)[..., 0]


def delta_estimate(a, n_dirs=N_DIRS):
    """Estimate of min a^T l(b) a over unit a, b.

    The minimum over a is the smallest eigenvalue (exact); over b an angular
    grid on [0, pi) is refined by a bounded scalar search around every grid
    local minimum.  Returns (delta, a_vec, b_vec).
    """
    theta = np.pi * np.arange(n_dirs) / n_dirs
    vals = _min_form(a, theta)
    step = np.pi / n_dirs
    cand = [k for k in range(n_dirs) if vals[k] <= vals[k - 1] and vals[k] <= vals[(k + 1) % n_dirs]]
    best_t, best_v = theta[int(np.argmin(vals))], float(np.min(vals))
    for k in cand:
        res = minimize_scalar(lambda s: float(_min_form(a, np.array(s))),
                              bounds=(theta[k] - step, theta[k] + step), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < best_v:
            best_t, best_v = float(res.x), float(res.fun)
    b = np.array([np.cos(best_t), np.sin(best_t)])
    m = symbol(a, b)
    w, v = np.linalg.eigh((m + m.T) / 2)
    return best_v, v[:, 0], b


def elliptic_at(a):
    """Algebraic test: L11 positive definite, det P(0) > 0 and no real roots of det P."""
    p = QuadMatPoly.from_tensor(a)
    l11 = (p.lam11 + p.lam11.T) / 2
    if not (alg.det2(l11) > 0 and alg.trace2(l11) > 0):
        return False
    if not alg.det2(p.lam22) > 0:
        return False
    try:
        split_spectrum(p)
    except (RealRootDetected, AnisoredError):
        return False
    return True


@dataclass
class EllipticityReport:
    major_sym: bool
    minor_sym: bool
    strong_elliptic: bool
    delta_est: float
    worst_point: tuple
    worst_directions: tuple


def check_strong_ellipticity(t, n_dirs=N_DIRS, points=None):
    a_all, pts = _tensor_samples(t, points)
    sym = check_symmetries(t, points)
    ok = True
    worst = (np.inf, None, None, None)
    for a, x in zip(a_all, pts):
        ok = elliptic_at(a) and ok
        d, av, bv = delta_estimate(a, n_dirs)
        if d < worst[0]:
            worst = (d, tuple(float(v) for v in x), av, bv)
    d, x, av, bv = worst
    return EllipticityReport(
        major_sym=sym.major, minor_sym=sym.minor, strong_elliptic=bool(ok and sym.major),
        delta_est=float(d), worst_point=x,
        worst_directions=(tuple(float(v) for v in av), tuple(float(v) for v in bv)))


@dataclass
class SimplePoint:
    x: tuple
    simple: bool
    separation: float
    t_eig_gap: float


@dataclass
class SimpleDomainReport:
    simple: bool
    points: list = field(repr=False)

    @property
    def min_separation(self):
        return min(p.separation for p in self.points)


def check_simple_domain(t, sample_pts=None, sep_tol=1e-8):
    """Four distinct characteristic roots and distinct eigenvalues of T at every point."""
    a_all, pts = _tensor_samples(t, sample_pts)
    out = []
    for a, x in zip(a_all, pts):
        p = QuadMatPoly.from_tensor(a)
        split = split_spectrum(p)
        rep = is_simple(p, sep_tol, split=split)
        ev = alg.eigvals2(-right_divisor(p, split).x_div)
        gap = float(abs(ev[0] - ev[1]))
        out.append(SimplePoint(x=tuple(float(v) for v in x),
                               simple=bool(rep.simple and gap > sep_tol * rep.scale),
                               separation=rep.separation, t_eig_gap=gap))
    return SimpleDomainReport(simple=all(p.simple for p in out), points=out)


# -- the example family ----------------------------------------------------

@dataclass
class Example5Params:
    a_f: object
    b_f: object
    c_f: object
    f_f: object

    @property
    def e_f(self):
        return np.asarray(self.b_f) * np.asarray(self.c_f) / np.asarray(self.a_f)

    @property
    def d_f(self):
        a, b, c = (np.asarray(v, dtype=float) for v in (self.a_f, self.b_f, self.c_f))
        return (2 * b * b - a * c) / a

    @property
    def g_f(self):
        """Constant term of the second quadratic factor."""
        a, b, c, f = (np.asarray(v, dtype=float) for v in (self.a_f, self.b_f, self.c_f, self.f_f))
        return (a * a * f - b * b * c) / (a * c - b * b)


def example5_tensor(a, b, c, f):
    """A[..., alpha, beta, j, l] for (possibly array-valued) a, b, c, f."""
    a, b, c, f = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, f)))
    e = b * c / a
    d = (2 * b * b - a * c) / a
    out = np.zeros(a.shape + (2, 2, 2, 2))

    def put(j, l, m):
        for al in range(2):
            for be in range(2):
                out[..., al, be, j, l] = m[al][be]

    put(0, 0, [[a, b], [b, c]])
    put(0, 1, [[b, d], [c, e]])
    put(1, 0, [[b, c], [d, e]])
    put(1, 1, [[c, e], [e, f]])
    return out


def _nice(x):
    fr = Fraction(float(x)).limit_denominator(1000)
    return f"{fr.numerator}/{fr.denominator}" if abs(float(fr) - x) <= 1e-12 * max(1, abs(x)) \
        and fr.denominator != 1 else f"{x:.12g}"


def example5_hypotheses(a, b, c, f):
    """Check the family hypotheses at one point; raise on the first failure."""
    if not a > 0:
        raise HypothesisViolated("a > 0", f"a = {a:.12g} is not positive")
    if not c > 0:
        raise HypothesisViolated("c > 0", f"c = {c:.12g} is not positive")
    if not a * c - b * b > 0:
        raise HypothesisViolated("ac - b^2 > 0", f"ac - b^2 = {a * c - b * b:.12g}")
    t1 = b * b * c / (a * a)
    t2 = (2 * a * b * b * c - b ** 4) / a ** 3
    if not f > t1:
        raise HypothesisViolated("f > b^2c/a^2", f"f <= b^2c/a^2 = {_nice(t1)} (f = {f:.12g})")
    if not f > t2:
        raise HypothesisViolated("f > (2ab^2c-b^4)/a^3",
                                 f"f <= (2ab^2c-b^4)/a^3 = {_nice(t2)} (f = {f:.12g})")
    if abs(f - c * c / a) <= F_SEP_TOL * abs(f):
        raise HypothesisViolated("f != c^2/a", f"f = c^2/a = {_nice(c * c / a)}")


@dataclass
class Example5Report:
    params: tuple
    e: float
    d: float
    factor_coefficient: float
    det_factor_residual: float
    lam11: np.ndarray
    lam12: np.ndarray
    lam22: np.ndarray


def det_factor_residual(a, b, c, f):
    """Relative coefficient mismatch between det P and the closed-form factorization."""
    p = QuadMatPoly.from_tensor(example5_tensor(a, b, c, f))
    g = (a * a * f - b * b * c) / (a * c - b * b)
    k = (a * c - b * b) / (a * a)
    closed = k * np.convolve([c, 2 * b, a], [g, 2 * b, a])
    got = det_quartic(p).real
    return float(np.max(np.abs(got - closed)) / max(np.max(np.abs(closed)), alg.TINY))


def example5(params, grid=None, points=None):
    """Build the family tensor and verify its hypotheses pointwise.

    Scalars give a constant tensor.  Callables of (x1, x2) are sampled on
    ``grid`` and give a grid-mode tensor.
    """
    vals = [params.a_f, params.b_f, params.c_f, params.f_f]
    if all(np.ndim(v) == 0 and not callable(v) for v in vals):
        a, b, c, f = (float(v) for v in vals)
        example5_hypotheses(a, b, c, f)
        tensor = CoefficientTensor.constant(example5_tensor(a, b, c, f))
        p = QuadMatPoly.from_tensor(tensor.a)
        report = Example5Report(
            params=(a, b, c, f), e=b * c / a, d=(2 * b * b - a * c) / a,
            factor_coefficient=(a * a * f - b * b * c) / (a * c - b * b),
            det_factor_residual=det_factor_residual(a, b, c, f),
            lam11=p.lam11, lam12=p.lam12, lam22=p.lam22)
        return tensor, report
    if grid is None:
        raise ValueError("field-valued parameters need a grid")
    x1, x2 = grid.nodes()
    s = [np.broadcast_to(v(x1, x2) if callable(v) else v, x1.shape).astype(float) for v in vals]
    worst = 0.0
    for idx in np.ndindex(x1.shape):
        pt = [float(v[idx]) for v in s]
        example5_hypotheses(*pt)
        worst = max(worst, det_factor_residual(*pt))
    tensor = CoefficientTensor.sampled(example5_tensor(*s), None, None, grid)
    m = grid.mid
    return tensor, Example5Report(
        params=tuple(float(v[m, m]) for v in s), e=float(s[1][m, m] * s[2][m, m] / s[0][m, m]),
        d=float((2 * s[1][m, m] ** 2 - s[0][m, m] * s[2][m, m]) / s[0][m, m]),
        factor_coefficient=float(Example5Params(*[v[m, m] for v in s]).g_f),
        det_factor_residual=worst,
        lam11=tensor.a[m, m, :, :, 0, 0], lam12=tensor.a[m, m, :, :, 0, 1] + tensor.a[m, m, :, :, 1, 0],
        lam22=tensor.a[m, m, :, :, 1, 1])


# -- random corpus ---------------------------------------------------------

def random_elliptic_tensor(rng, max_tries=1000):
    """Rejection-sample a major-symmetric, strongly elliptic constant tensor.

    A comes from a random symmetric 4x4 matrix G via A[al, be, j, l] =
    G[2 al + j, 2 be + l], with a random diagonal shift so a fair share of
    draws are elliptic without being positive definite as 4x4 matrices.
    """
    from .fields import tensor_from_matrix
    for _ in range(max_tries):
        m = rng.normal(size=(4, 4))
        g = (m + m.T) / 2 + rng.uniform(0.0, 3.0) * np.eye(4)
        t = CoefficientTensor.constant(tensor_from_matrix(g))
        if check_strong_ellipticity(t, n_dirs=90).strong_elliptic:
            return t
    raise RuntimeError("no elliptic tensor found")


def random_corpus(n, seed=0):
    rng = np.random.default_rng(seed)
    return [random_elliptic_tensor(rng) for _ in range(n)]
