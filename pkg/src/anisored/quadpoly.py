"""The matrix quadratic P(lam) = L11 lam^2 + L12 lam + L22 and its factorization.

The right divisor X with spectrum in the upper half plane is built from two
contour moments of P^{-1},

    X = (oint zeta P(zeta)^{-1} dzeta) (oint P(zeta)^{-1} dzeta)^{-1},

so that P(lam) = (lam - X^*) L11 (lam - X).
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra2 as alg
from .errors import (ContourConstructionFailed, MomentSingular,
                     RealRootDetected, SpectrumLeak)

N_NODES = 512
SAMPLE_LAMBDAS = (0.0, 1.0, -1.0, 2.0, -2.0, 1j, -1j)
REAL_ROOT_TOL = 1e-9
# relative pair distance below which a pair is re-resolved as a near-double root
CLUSTER_TOL = 1e-6
CONTOUR_MARGIN = 0.1


@dataclass(frozen=True)
class QuadMatPoly:
    lam11: np.ndarray
    lam12: np.ndarray
    lam22: np.ndarray

    def __post_init__(self):
        for name in ("lam11", "lam12", "lam22"):
            m = alg.as_mat2(getattr(self, name), dtype=float)
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @classmethod
    def from_tensor(cls, a):
        """From A[alpha, beta, j, l]; the mixed term is [A^12] + [A^21]."""
        a = np.asarray(a, dtype=float)
        return cls(a[:, :, 0, 0], a[:, :, 0, 1] + a[:, :, 1, 0], a[:, :, 1, 1])

    def scaled(self, c):
        return QuadMatPoly(c * self.lam11, c * self.lam12, c * self.lam22)

    @property
    def coeff_norms(self):
        return tuple(float(alg.norm2(m)) for m in (self.lam11, self.lam12, self.lam22))

    def is_symmetric(self, tol=1e-12):
        scale = max(sum(self.coeff_norms), alg.TINY)
        return all(np.max(np.abs(m - m.T)) <= tol * scale
                   for m in (self.lam11, self.lam12, self.lam22))


def eval_p(p, lam):
    """P(lam); ``lam`` may be an array, giving shape lam.shape + (2, 2)."""
    lam = np.asarray(lam, dtype=complex)[..., None, None]
    return (p.lam11 * lam + p.lam12) * lam + p.lam22


def det_quartic(p):
    """Ascending coefficients of det P(lam)."""
    e = [[np.array([p.lam22[i, j], p.lam12[i, j], p.lam11[i, j]]) for j in range(2)]
         for i in range(2)]
    c = np.convolve(e[0][0], e[1][1]) - np.convolve(e[0][1], e[1][0])
    return c.astype(complex)


def _exact_eval(coeffs, z):
    """p(z) in exact rational arithmetic on the given floats, rounded once."""
    zr, zi = Fraction(z.real), Fraction(z.imag)
    ar, ai = Fraction(0), Fraction(0)
    for c in coeffs[::-1]:
        ar, ai = ar * zr - ai * zi + Fraction(c.real), ar * zi + ai * zr + Fraction(c.imag)
    return complex(float(ar), float(ai))


def _resolve_pair(coeffs, z1, z2):
    """Re-resolve two nearly coincident roots.

    Near a double root the pair splits as zc +- sqrt(-2 p(zc) / p''(zc)) where
    zc is the nearby critical point.  zc is a simple root of p' and is found
    to full accuracy; p(zc) is evaluated exactly so the split is not swamped
    by rounding in the Horner sum.
    """
    d1 = np.polynomial.polynomial.polyder(coeffs)
    d2 = np.polynomial.polynomial.polyder(d1)
    z = (z1 + z2) / 2
    for _ in range(8):
        g, dg = alg.poly_eval_d(d1, z)
        if g == 0 or dg == 0:
            break
        trial = z - g / dg
        if abs(alg.poly_eval(d1, trial)) >= abs(g):
            break
        z = trial
    curv = complex(alg.poly_eval(d2, z))
    if curv == 0:
        return z1, z2
    half = np.sqrt(-2 * _exact_eval(coeffs, z) / curv)
    return z + half, z - half


@dataclass(frozen=True)
class SpectralSplit:
    roots: tuple
    upper: tuple
    lower: tuple
    separation: float
    im_margin: float
    conj_defect: float

    @property
    def scale(self):
        return max(max(abs(r) for r in self.roots), alg.TINY)


def _min_pairwise(zs):
    return min(abs(zs[i] - zs[j]) for i in range(len(zs)) for j in range(i + 1, len(zs)))


def split_spectrum(p, seed=None):
    """Characteristic roots split into the upper and lower half planes.

    Raises RealRootDetected if a root lies within 1e-9 * scale of the real
    axis, i.e. the symbol fails to be elliptic.
    """
    coeffs = det_quartic(p)
    roots = alg.quartic_roots(coeffs, seed=seed)
    scale = max(np.max(np.abs(roots)), alg.TINY)
    if np.any(np.abs(roots.imag) <= REAL_ROOT_TOL * scale):
        bad = roots[np.argmin(np.abs(roots.imag))]
        raise RealRootDetected(f"characteristic root {bad:.6g} on the real axis")
    upper = list(roots[roots.imag > 0])
    lower = list(roots[roots.imag < 0])
    if len(upper) != 2:
        raise RealRootDetected("roots do not split 2 + 2 across the real axis")

    monic = coeffs / coeffs[4]
    if abs(upper[0] - upper[1]) < CLUSTER_TOL * scale:
        upper = list(_resolve_pair(monic, *upper))
    if abs(lower[0] - lower[1]) < CLUSTER_TOL * scale:
        lower = list(_resolve_pair(monic, *lower))

    # real coefficients: lower = conj(upper); pair them and symmetrize
    if abs(upper[0] - np.conj(lower[0])) + abs(upper[1] - np.conj(lower[1])) > \
            abs(upper[0] - np.conj(lower[1])) + abs(upper[1] - np.conj(lower[0])):
        lower = lower[::-1]
    defect = max(abs(u - np.conj(v)) for u, v in zip(upper, lower))
    upper = [(u + np.conj(v)) / 2 for u, v in zip(upper, lower)]
    upper.sort(key=lambda z: (z.real, z.imag))
    lower = [np.conj(u) for u in upper]
    lower.sort(key=lambda z: (z.real, z.imag))
    all_roots = sorted(upper + lower, key=lambda z: (z.real, z.imag))
    return SpectralSplit(
        roots=tuple(complex(z) for z in all_roots),
        upper=tuple(complex(z) for z in upper),
        lower=tuple(complex(z) for z in lower),
        separation=float(_min_pairwise(all_roots)),
        im_margin=float(min(abs(z.imag) for z in all_roots)),
        conj_defect=float(defect),
    )


def choose_contour(split):
    """Circles whose union encloses the upper roots and nothing else.

    First choice is one circle about the centroid of the upper roots with
    radius 1.25 * (max distance to a root), floored at half the centroid's
    height so a repeated root still gets a proper circle.  When that circle
    would come within 10% of its radius of the real axis, each upper root
    gets its own small circle instead.
    """
    u1, u2 = split.upper
    c = (u1 + u2) / 2
    r = max(1.25 * max(abs(u1 - c), abs(u2 - c)), 0.5 * c.imag)
    if c.imag - r >= CONTOUR_MARGIN * r:
        return ((complex(c), float(r)),)
    gap = abs(u1 - u2)
    circles = tuple((complex(u), float(min(gap / 2.5, u.imag / 2))) for u in (u1, u2))
    if any(rad <= 0 for _, rad in circles):
        raise ContourConstructionFailed("no admissible contour around the upper roots")
    return circles


def contour_moments(p, split, n_nodes=N_NODES, circles=None):
    """Trapezoidal approximations of oint P^{-1} and oint zeta P^{-1}.

    Returns (moment0, moment1, circles).  Nodes are summed in index order.
    """
    if circles is None:
        circles = choose_contour(split)
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    m0 = np.zeros((2, 2), dtype=complex)
    m1 = np.zeros((2, 2), dtype=complex)
    for center, radius in circles:
        e = np.exp(1j * theta)
        zeta = center + radius * e
        weight = (2 * np.pi / n_nodes) * 1j * radius * e
        pinv = alg.inverse2(eval_p(p, zeta))
        m0 += np.sum(weight[:, None, None] * pinv, axis=0)
        m1 += np.sum((weight * zeta)[:, None, None] * pinv, axis=0)
    return m0, m1, circles


def residue_moments(p, split):
    """Residue-theorem moments, valid only when the upper roots are simple."""
    coeffs = det_quartic(p)
    dcoeffs = np.polynomial.polynomial.polyder(coeffs)
    u1, u2 = split.upper
    if abs(u1 - u2) <= CLUSTER_TOL * split.scale:
        raise ValueError("residue formula needs simple upper roots")
    m0 = np.zeros((2, 2), dtype=complex)
    m1 = np.zeros((2, 2), dtype=complex)
    for lam in split.upper:
        res = alg.cof_transpose(eval_p(p, lam)) / alg.poly_eval(dcoeffs, lam)
        m0 += 2j * np.pi * res
        m1 += 2j * np.pi * lam * res
    return m0, m1


@dataclass(frozen=True)
class SpectralFactorization:
    x_div: np.ndarray
    moment0: np.ndarray
    moment1: np.ndarray
    circles: tuple
    residual: float
    split: SpectralSplit = field(repr=False)

    @property
    def contour_center(self):
        return self.circles[0][0]

    @property
    def contour_radius(self):
        return self.circles[0][1]


def right_divisor(p, split=None, n_nodes=N_NODES):
    """X = moment1 moment0^{-1}, with Spec(X) checked to lie in the upper half plane."""
    if split is None:
        split = split_spectrum(p)
    m0, m1, circles = contour_moments(p, split, n_nodes=n_nodes)
    if abs(alg.det2(m0)) <= 1e-12 * alg.norm2(m0) ** 2:
        raise MomentSingular("contour moment of P^{-1} is singular")
    x = m1 @ alg.inverse2(m0)
    ev = alg.eigvals2(x)
    if np.any(ev.imag <= 0):
        raise SpectrumLeak(f"eigenvalues {ev} of X not all in the upper half plane")
    return SpectralFactorization(x_div=x, moment0=m0, moment1=m1, circles=circles,
                                 residual=verify_factorization(p, x), split=split)


def factor_product(p, x, lam):
    """(lam - X^*) L11 (lam - X)."""
    eye = np.eye(2)
    return (lam * eye - alg.adjoint(x)) @ p.lam11 @ (lam * eye - x)


def verify_factorization(p, f, lambdas=SAMPLE_LAMBDAS):
    """sup over lambdas of |P(lam) - (lam - X^*) L11 (lam - X)|_F, relative.

    The denominator is |L11| |lam|^2 + |L12| |lam| + |L22|, which keeps the
    measure invariant under p -> c p and never vanishes.
    """
    x = f.x_div if isinstance(f, SpectralFactorization) else np.asarray(f, dtype=complex)
    n11, n12, n22 = p.coeff_norms
    worst = 0.0
    for lam in lambdas:
        r = alg.norm2(eval_p(p, lam) - factor_product(p, x, lam))
        a = abs(lam)
        worst = max(worst, float(r / max(n11 * a * a + n12 * a + n22, alg.TINY)))
    return worst


@dataclass(frozen=True)
class SimpleReport:
    simple: bool
    separation: float
    scale: float


def is_simple(p, sep_tol=1e-8, split=None):
    """Four distinct characteristic roots, separated by more than sep_tol * scale."""
    if split is None:
        split = split_spectrum(p)
    return SimpleReport(simple=bool(split.separation > sep_tol * split.scale),
                        separation=split.separation, scale=float(split.scale))
