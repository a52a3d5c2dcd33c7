"""Fixed-size complex arithmetic: 2x2 matrices, quartic roots, 4x4 solves.

The 2x2 helpers broadcast over leading axes, so a field of matrices with
shape ``(n, n, 2, 2)`` goes through the same code as a single matrix.
"""
import os
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateLeadingCoefficient, NoConvergence,
                     SingularMatrix, SingularSystem)

DEFAULT_SEED = 0x5EED
TINY = 1e-300
EPS = np.finfo(float).eps


def root_seed():
    """Seed for the root solver; ``ANISORED_SEED`` overrides the default."""
    env = os.environ.get("ANISORED_SEED")
    return int(env, 0) if env else DEFAULT_SEED


def _finite(x, what):
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} has non-finite entries")
    return x


def as_mat2(m, dtype=complex):
    m = np.asarray(m, dtype=dtype)
    if m.shape[-2:] != (2, 2):
        raise ValueError(f"expected trailing shape (2, 2), got {m.shape}")
    return _finite(m, "matrix")


def det2(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def trace2(m):
    return m[..., 0, 0] + m[..., 1, 1]


def cof_transpose(m):
    """Transposed cofactor matrix [[m22, -m12], [-m21, m11]].

    Works for any element type numpy can negate, including ``Fraction``
    object arrays, so ``cof_transpose(m) @ m == det(m) * I`` can be checked
    exactly.
    """
    m = np.asarray(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def norm2(m):
    """Frobenius norm over the trailing 2x2 axes."""
    return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))


def inverse2(m):
    m = np.asarray(m)
    d = det2(m)
    scale = np.maximum(norm2(m) ** 2, TINY)
    if np.any(np.abs(d) <= 1e-14 * scale):
        raise SingularMatrix("2x2 determinant below 1e-14 * |m|^2")
    return cof_transpose(m) / d[..., None, None]


def adjoint(m):
    """Conjugate transpose."""
    return np.conj(np.swapaxes(m, -1, -2))


def _sort_pair(a, b):
    swap = (a.real > b.real) | ((a.real == b.real) & (a.imag > b.imag))
    return np.where(swap, b, a), np.where(swap, a, b)


def eigvals2(m):
    """Both eigenvalues from the characteristic quadratic, sorted by (re, im).

    The larger-magnitude root is formed first and the other recovered from
    the determinant, which avoids cancellation.
    """
    m = np.asarray(m, dtype=complex)
    half = trace2(m) / 2
    d = det2(m)
    s = np.sqrt(half * half - d)
    big = np.where(np.abs(half + s) >= np.abs(half - s), half + s, half - s)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, d / np.where(big != 0, big, 1), 0)
    lo, hi = _sort_pair(big, small)
    return np.stack([lo, hi], axis=-1)


@dataclass(frozen=True)
class MatOps:
    det: complex
    trace: complex
    inverse: np.ndarray
    cof_transpose: np.ndarray
    adjoint: np.ndarray
    eigenvalues: tuple


def mat_ops(m):
    """Bundle of the standard 2x2 quantities for a single matrix."""
    m = as_mat2(m)
    if m.shape != (2, 2):
        raise ValueError("mat_ops takes a single 2x2 matrix")
    ev = eigvals2(m)
    return MatOps(det=complex(det2(m)), trace=complex(trace2(m)),
                  inverse=inverse2(m), cof_transpose=cof_transpose(m),
                  adjoint=adjoint(m), eigenvalues=(complex(ev[0]), complex(ev[1])))


# -- polynomials ---------------------------------------------------------------

def poly_eval(coeffs, z):
    """Horner evaluation; ``coeffs`` ascending."""
    acc = np.zeros_like(np.asarray(z, dtype=complex)) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def poly_eval_d(coeffs, z):
    """Value and first derivative together."""
    p = coeffs[-1] + 0j
    dp = 0j
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _taylor_shift(coeffs, c):
    """Coefficients of q(y) = p(y + c)."""
    b = np.array(coeffs, dtype=complex)
    n = len(b) - 1
    for k in range(n):
        for j in range(n - 1, k - 1, -1):
            b[j] += c * b[j + 1]
    return b


def quartic_roots(coeffs, seed=None, max_iter=200):
    """All four roots of c0 + c1 z + ... + c4 z^4, sorted by (re, im).

    Aberth-Ehrlich simultaneous iteration from a randomly perturbed circle
    (fixed seed), then a Newton polish that only accepts improving steps and
    a coefficient-space polish that keeps root clusters balanced.
    Multiple roots come back as tight clusters; deciding multiplicity is the
    caller's business.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (5,):
        raise ValueError("quartic_roots needs exactly 5 coefficients")
    _finite(c, "polynomial")
    scale = max(np.max(np.abs(c)), TINY)
    if abs(c[4]) <= 1e-14 * scale:
        raise DegenerateLeadingCoefficient("leading coefficient vanishes")
    a = c / c[4]
    abs_a = np.abs(a)

    center = -a[3] / 4
    b = _taylor_shift(a, center)
    radius = max(abs(b[k]) ** (1.0 / (4 - k)) for k in range(4))
    if radius == 0.0:
        return np.full(4, center)

    rng = np.random.default_rng(root_seed() if seed is None else seed)
    angles = 2 * np.pi * (np.arange(4) + 0.5 + 0.25 * rng.uniform(-1, 1, 4)) / 4
    z = center + radius * np.exp(1j * angles)

    done = np.zeros(4, dtype=bool)
    for _ in range(max_iter):
        for k in range(4):
            if done[k]:
                continue
            p, dp = poly_eval_d(a, z[k])
            if abs(p) <= 4 * EPS * poly_eval(abs_a, abs(z[k])).real:
                done[k] = True
                continue
            diff = z[k] - np.delete(z, k)
            diff[diff == 0] = EPS * radius
            if dp == 0:
                z[k] += EPS * radius * (1 + 1j)
                continue
            ratio = p / dp
            corr = ratio / (1 - ratio * np.sum(1 / diff))
            z[k] -= corr
            if abs(corr) <= EPS * radius:
                done[k] = True  # roots at the origin never meet the relative test
        if done.all():
            break
    else:
        raise NoConvergence(f"Aberth iteration did not converge in {max_iter} steps")

    for k in range(4):
        for _ in range(3):
            p, dp = poly_eval_d(a, z[k])
            if p == 0 or dp == 0:
                break
            trial = z[k] - p / dp
            if abs(poly_eval(a, trial)) < abs(p):
                z[k] = trial
            else:
                break
    z = _vieta_polish(z, a)
    order = np.lexsort((z.imag, z.real))
    return z[order]


def _vieta_polish(z, a, iters=50):
    """Gauss-Newton on roots -> monic coefficients, with backtracking.

    Newton on p(z) stalls at |error| ~ eps^(1/m) inside an m-fold cluster and
    leaves the cluster lopsided, so the re-expanded coefficients are off by
    far more than eps.  Least-squares steps on the coefficient map restore
    the cluster's balance; only improving steps are taken.
    """
    def resid(r):
        return poly_from_roots(r)[:4] - a[:4]

    r = resid(z)
    best = np.linalg.norm(r)
    for _ in range(iters):
        if best == 0:
            break
        jac = np.stack([-poly_from_roots(np.delete(z, k)) for k in range(4)], axis=1)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            trial = z + t * step
            rt = resid(trial)
            if np.linalg.norm(rt) < best:
                break
            t /= 2
        else:
            break
        z, r, best = trial, rt, np.linalg.norm(rt)
    return z


def poly_from_roots(roots, lead=1.0):
    """Ascending coefficients of lead * prod(z - r)."""
    out = np.array([lead], dtype=complex)
    for r in roots:
        out = np.convolve(out, [-r, 1.0])
    return out


# -- 4x4 solve ---------------------------------------------------------------

def lin_solve4(a, b):
    """Solve a x = b by Gaussian elimination with partial pivoting.

    Raises SingularSystem when a pivot drops below 1e-13 * |a|_inf.
    """
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    if a.shape != (4, 4) or b.shape != (4,):
        raise ValueError("lin_solve4 needs a (4, 4) matrix and a length-4 rhs")
    _finite(a, "matrix")
    _finite(b, "rhs")
    norm = np.max(np.sum(np.abs(a), axis=1))
    if norm == 0:
        raise SingularSystem("zero matrix")
    for k in range(4):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= 1e-13 * norm:
            raise SingularSystem(f"pivot {k} below 1e-13 * |a|")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        b[k + 1:] -= f * b[k]
    x = np.empty(4, dtype=complex)
    for k in range(3, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x
