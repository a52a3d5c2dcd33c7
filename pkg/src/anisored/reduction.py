"""Reduction of the 2x2 second-order system to first-order block form and
then to a diagonal second-order system.

With T = -X, S = L11^{-1} L12 - T, Psi solving Psi T - S Psi + M = 0 and

    W = [u, Psi u + d1 u + T d2 u],

the system becomes d1 W + M1 d2 W = M0 W with M1 = diag(T, S) and

    M0 = [[-Psi, I], [Q, Psi - L11^{-1} B1]],
    Q  = d1 Psi + S d2 Psi - L11^{-1} C - (Psi - L11^{-1} B1) Psi.

Applying -d1 - diag(cof'T, cof'S) d2 gives P W = sum K_alpha D^alpha W with
D = -i d and

    K_(1,0) = -i M0
    K_(0,1) = -i (Ccof M0 - d1 M1 - Ccof d2 M1)
    K_(0,0) = -(d1 M0 + Ccof d2 M0).

The formula helpers below only use +, -, @ and ``block``, so they run
unchanged on single matrices, on grid fields of shape (n, n, 2, 2) and on
Taylor jets.
"""
import json
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from . import algebra2 as alg
from . import jets as jt
from .errors import (ConjugacyViolated, QuadraticResidualTooLarge,
                     SingularSystem, SpectraNotDisjoint)
from .fields import fd_derivative, lam_mats
from .jets import Jet
from .quadpoly import QuadMatPoly, right_divisor

EYE2 = np.eye(2)
ZERO2 = np.zeros((2, 2))


# -- generic helpers -------------------------------------------------------

def block(tl, tr, bl, br):
    """[[tl, tr], [bl, br]] over the trailing axes; jets or arrays."""
    parts = [tl, tr, bl, br]
    jets_in = [p for p in parts if isinstance(p, Jet)]
    if jets_in:
        k = min(p.order for p in jets_in)
        arrs = [p.truncate(k).coeffs if isinstance(p, Jet) else Jet.const(p, k).coeffs
                for p in parts]
    else:
        arrs = [np.asarray(p) for p in parts]
    lead = np.broadcast_shapes(*[a.shape[:-2] for a in arrs])
    dtype = np.result_type(*arrs)
    arrs = [np.broadcast_to(a, lead + a.shape[-2:]).astype(dtype) for a in arrs]
    out = np.concatenate([np.concatenate(arrs[:2], axis=-1),
                          np.concatenate(arrs[2:], axis=-1)], axis=-2)
    return Jet(out, k) if jets_in else out


def cof(m):
    if isinstance(m, Jet):
        return Jet(alg.cof_transpose(m.coeffs), m.order)
    return alg.cof_transpose(m)


def mv(m, v):
    """Matrix times vector over the trailing axes."""
    if isinstance(m, Jet) or isinstance(v, Jet):
        return m @ v
    return (m @ v[..., None])[..., 0]


def vcat(a, b):
    if isinstance(a, Jet):
        k = min(a.order, b.order)
        return Jet(np.concatenate([a.truncate(k).coeffs, b.truncate(k).coeffs], axis=-1), k)
    return np.concatenate([a, b], axis=-1)


def value(f):
    return f.value if isinstance(f, Jet) else f


# -- the operations --------------------------------------------------------

def quadratic_residual(p, t):
    """|T^2 - L11^{-1} L12 T + L11^{-1} L22| / (1 + |T|^2)."""
    l11inv = alg.inverse2(p.lam11)
    r = t @ t - l11inv @ p.lam12 @ t + l11inv @ p.lam22
    return float(np.max(alg.norm2(r) / (1 + alg.norm2(t) ** 2)))


def compute_t_s(p, tol=1e-9, factorization=None):
    """T = -X and S = L11^{-1} L12 - T."""
    f = right_divisor(p) if factorization is None else factorization
    t = -f.x_div
    s = alg.inverse2(p.lam11) @ p.lam12 - t
    res = quadratic_residual(p, t)
    if res > tol:
        raise QuadraticResidualTooLarge(f"T residual {res:.3e} exceeds {tol:.1e}")
    return t, s


def compute_m(p, b1, b2, t, d1t, d2t):
    """M for a frozen quadratic p (constant L's)."""
    return m_source(alg.inverse2(p.lam11), p.lam12, b1, b2, t, d1t, d2t)


def m_source(l11inv, l12, b1, b2, t, d1t, d2t):
    return -(l11inv @ b1 @ t) + l11inv @ b2 - l11inv @ l12 @ d2t + t @ d2t - d1t


def sylvester_matrix(a, b):
    """4x4 matrix of Psi -> Psi A - B Psi on row-major vec(Psi)."""
    m = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                m[2 * i + j, 2 * i + k] += a[k, j]
                m[2 * i + j, 2 * k + j] -= b[i, k]
    return m


def sylvester_residual(psi, a, b, c):
    r = psi @ a - b @ psi + c
    scale = alg.norm2(a) * alg.norm2(psi) + alg.norm2(b) * alg.norm2(psi) + alg.norm2(c)
    return float(np.max(alg.norm2(r) / np.maximum(scale, alg.TINY)))


def solve_sylvester(a, b, c):
    """Psi with Psi A - B Psi + C = 0 through the 4x4 linearization."""
    a, b, c = (np.asarray(m, dtype=complex) for m in (a, b, c))
    try:
        x = alg.lin_solve4(sylvester_matrix(a, b), -c.reshape(4))
    except SingularSystem as e:
        raise SpectraNotDisjoint("Spec(A) and Spec(B) intersect") from e
    return x.reshape(2, 2)


def solve_sylvester_field(a, b, c):
    """Pointwise solve over the leading axes."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape, c.shape), dtype=complex)
    for idx in np.ndindex(out.shape[:-2]):
        out[idx] = solve_sylvester(a[idx], b[idx], c[idx])
    return out


def assemble_block(t, s, psi, d1psi, d2psi, l11inv, b1, c0):
    """(M1, M0) of the first-order block system."""
    g = psi - l11inv @ b1
    q = d1psi + s @ d2psi - l11inv @ c0 - g @ psi
    m1 = block(t, ZERO2, ZERO2, s)
    m0 = block(-psi, EYE2, q, g)
    return m1, m0


def build_w(u, d1u, d2u, psi, t):
    """W = [u, Psi u + d1 u + T d2 u]."""
    return vcat(u, mv(psi, u) + d1u + mv(t, d2u))


def assemble_diagonal(t, s, tol=1e-9):
    """(tr T, det T) and (tr S, det S); the second pair must be the conjugate."""
    t, s = value(t), value(s)
    p1 = (alg.trace2(t), alg.det2(t))
    p2 = (alg.trace2(s), alg.det2(s))
    defect = conjugacy_defect(p1, p2)
    if defect > tol:
        raise ConjugacyViolated(f"P2 differs from conj(P1) by {defect:.3e}")
    return p1, p2


def conjugacy_defect(p1, p2):
    return float(max(np.max(np.abs(b - np.conj(a)) / (1 + np.abs(a))) for a, b in zip(p1, p2)))


def k_block_defect(k_alpha):
    """max |K[2:, 2:] - conj K[:2, :2]| over the three K_alpha.

    Zero for constant coefficients with B = C = 0; nonzero lower-order terms
    break the relation, so this is reported but never enforced.
    """
    return float(max(np.max(np.abs(k[..., 2:, 2:] - np.conj(k[..., :2, :2])))
                     for k in k_alpha.values()))


def cof_block(t, s):
    return block(cof(t), ZERO2, ZERO2, cof(s))


def assemble_k(m0, m1, d1m0, d2m0, d1m1, d2m1, ccof):
    """(K_(1,0), K_(0,1), K_(0,0))."""
    k10 = -1j * m0
    k01 = -1j * (ccof @ m0 - d1m1 - ccof @ d2m1)
    k00 = -(d1m0 + ccof @ d2m0)
    return k10, k01, k00


def spectra(t, s):
    """(defect of Spec(S) = conj Spec(T), min distance between Spec(T) and Spec(S))."""
    et, es = alg.eigvals2(t), alg.eigvals2(s)
    cj = np.conj(et)
    straight = np.maximum(np.abs(es[..., 0] - cj[..., 0]), np.abs(es[..., 1] - cj[..., 1]))
    crossed = np.maximum(np.abs(es[..., 0] - cj[..., 1]), np.abs(es[..., 1] - cj[..., 0]))
    defect = np.minimum(straight, crossed)
    gap = np.min(np.abs(et[..., :, None] - es[..., None, :]), axis=(-2, -1))
    return float(np.max(defect)), float(np.min(gap))


# -- result containers -----------------------------------------------------

@dataclass
class ReductionData:
    """Values of every reduction quantity (a point, or a field on a grid)."""
    lam11: np.ndarray
    lam12: np.ndarray
    lam22: np.ndarray
    t_mat: np.ndarray
    s_mat: np.ndarray
    m_src: np.ndarray
    psi: np.ndarray
    m1_block: np.ndarray
    m0_block: np.ndarray
    p1_coeffs: tuple
    p2_coeffs: tuple
    k_alpha: dict
    where: dict = field(default_factory=dict)

    def residuals(self):
        """Re-verify the algebraic identities from the stored values alone."""
        l11inv = alg.inverse2(self.lam11)
        t, s = self.t_mat, self.s_mat
        quad = t @ t - l11inv @ self.lam12 @ t + l11inv @ self.lam22
        conj_def, gap = spectra(t, s)
        return {
            "quadratic": float(np.max(alg.norm2(quad) / (1 + alg.norm2(t) ** 2))),
            "sylvester": sylvester_residual(self.psi, t, s, self.m_src),
            "spectrum_conjugacy": conj_def,
            "spectrum_gap": gap,
            "diagonal_conjugacy": conjugacy_defect(self.p1_coeffs, self.p2_coeffs),
            "k_block_conjugacy": k_block_defect(self.k_alpha),
        }

    def to_json(self):
        out = {"where": self.where}
        for f in dc_fields(self):
            if f.name == "where":
                continue
            v = getattr(self, f.name)
            if isinstance(v, dict):
                out[f.name] = {k: encode_array(x) for k, x in v.items()}
            elif isinstance(v, tuple):
                out[f.name] = [encode_array(x) for x in v]
            else:
                out[f.name] = encode_array(v)
        return out

    @classmethod
    def from_json(cls, obj):
        kw = {"where": obj.get("where", {})}
        for f in dc_fields(cls):
            if f.name == "where":
                continue
            v = obj[f.name]
            if isinstance(v, dict) and "re" not in v:
                kw[f.name] = {k: decode_array(x) for k, x in v.items()}
            elif isinstance(v, list):
                kw[f.name] = tuple(decode_array(x) for x in v)
            else:
                kw[f.name] = decode_array(v)
        return cls(**kw)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def encode_array(x):
    """{"shape", "re", "im"} with flat row-major lists; exact float round trip."""
    x = np.asarray(x)
    out = {"shape": list(x.shape), "re": np.real(x).ravel().tolist()}
    if np.iscomplexobj(x):
        out["im"] = np.imag(x).ravel().tolist()
    return out


def decode_array(obj):
    re = np.array(obj["re"], dtype=float)
    arr = re + 1j * np.array(obj["im"], dtype=float) if "im" in obj else re
    return arr.reshape(obj["shape"])


class _Reduction:
    """Shared surface of point (jet) and grid reductions."""

    def data(self):
        f = self.f
        return ReductionData(
            lam11=value(f["lam11"]).real, lam12=value(f["lam12"]).real, lam22=value(f["lam22"]).real,
            t_mat=value(f["t"]), s_mat=value(f["s"]), m_src=value(f["m"]), psi=value(f["psi"]),
            m1_block=value(f["m1"]), m0_block=value(f["m0"]),
            p1_coeffs=self.p1, p2_coeffs=self.p2,
            k_alpha={"10": value(f["k10"]), "01": value(f["k01"]), "00": value(f["k00"])},
            where=self.where)


class PointReduction(_Reduction):
    """Reduction at one point from Taylor jets: derivatives exact to rounding."""

    def __init__(self, tensor, x, order=3):
        if order < 3:
            raise ValueError("jets of order >= 3 are needed for K_alpha")
        self.x = tuple(float(v) for v in x)
        self.where = {"mode": "point", "x": list(self.x)}
        j = tensor.jets(self.x, order)
        p0 = QuadMatPoly(j["lam11"].value.real, j["lam12"].value.real, j["lam22"].value.real)
        self.factorization = right_divisor(p0)
        t0, s0 = compute_t_s(p0, factorization=self.factorization)
        self.p0 = p0

        def lin(r):
            return solve_sylvester(t0, s0, r)

        l11inv = jt.inverse(j["lam11"])
        e = l11inv @ j["lam12"]
        fq = l11inv @ j["lam22"]
        t = jt.solve_by_order(t0, lambda x: x @ x - e @ x + fq, lin, order)
        s = e - t
        m = m_source(l11inv, j["lam12"], j["b1"], j["b2"], t, t.d(0), t.d(1))
        psi = jt.solve_by_order(solve_sylvester(t0, s0, m.value),
                                lambda x: x @ t - s @ x + m, lin, m.order)
        m1, m0 = assemble_block(t, s, psi, psi.d(0), psi.d(1), l11inv, j["b1"], j["c"])
        ccof = cof_block(t, s)
        k10, k01, k00 = assemble_k(m0, m1, m0.d(0), m0.d(1), m1.d(0), m1.d(1), ccof)
        self.p1, self.p2 = assemble_diagonal(t, s)
        self.f = dict(j, l11inv=l11inv, t=t, s=s, m=m, psi=psi, m1=m1, m0=m0,
                      ccof=ccof, k10=k10, k01=k01, k00=k00)

    def d(self, f, axis):
        return f.d(axis)

    def lift(self, u, order=3):
        """Jet of a PolyField test function at the reduction point."""
        return u.jet(self.x, order)


class GridReduction(_Reduction):
    """Reduction on grid nodes; derivatives by second-order finite differences."""

    def __init__(self, tensor, grid):
        self.grid = grid
        self.where = {"mode": "grid", "n": grid.n, "half_width": grid.half_width,
                      "center": list(grid.center)}
        a, b, c = tensor.on_grid(grid)
        lam11, lam12, lam22 = lam_mats(a)
        n = grid.n
        t = np.empty((n, n, 2, 2), dtype=complex)
        cache = {}
        for idx in np.ndindex(n, n):
            key = (lam11[idx].tobytes(), lam12[idx].tobytes(), lam22[idx].tobytes())
            if key not in cache:
                cache[key] = compute_t_s(QuadMatPoly(lam11[idx], lam12[idx], lam22[idx]))[0]
            t[idx] = cache[key]
        l11inv = alg.inverse2(lam11)
        s = l11inv @ lam12 - t
        b1, b2 = b[..., 0], b[..., 1]
        d = self.d
        m = m_source(l11inv, lam12, b1, b2, t, d(t, 0), d(t, 1))
        psi = solve_sylvester_field(t, s, m)
        m1, m0 = assemble_block(t, s, psi, d(psi, 0), d(psi, 1), l11inv, b1, c)
        ccof = cof_block(t, s)
        k10, k01, k00 = assemble_k(m0, m1, d(m0, 0), d(m0, 1), d(m1, 0), d(m1, 1), ccof)
        self.p1, self.p2 = assemble_diagonal(t, s)
        self.f = dict(lam11=lam11, lam12=lam12, lam22=lam22, b1=b1, b2=b2, c=c,
                      l11inv=l11inv, t=t, s=s, m=m, psi=psi, m1=m1, m0=m0,
                      ccof=ccof, k10=k10, k01=k01, k00=k00)

    def d(self, f, axis):
        return fd_derivative(f, self.grid.h, axis)

    def lift(self, u, order=None):
        """Samples of a PolyField (or pass an array through)."""
        if isinstance(u, np.ndarray):
            return u
        return u(*self.grid.nodes())
