"""Numerical experiments on grids: operator-identity residuals, flat test
functions, the vanishing-order estimator and the Carleman-ratio diagnostic.

Identity residuals run on either reduction backend.  ``PointReduction``
differentiates Taylor jets (exact to rounding); ``GridReduction`` uses
second-order finite differences, so its residuals shrink like h^2.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import AllZeroField, WeightOverflowUnavoidable
from .fields import PolyField, fd_derivative
from .jets import Jet
from .reduction import GridReduction, build_w, mv

# 2 * phi above this loses more than ~1e-3 relative accuracy to float spacing
LOG_EXPONENT_MAX = 7e12
DIRECT_EXPONENT_MAX = 709.0
SUBSAMPLE = 4


def diff_field(f, axis, order=1, h=None):
    """d^order / dx_axis^order of a PolyField (exact) or grid samples (needs h)."""
    if isinstance(f, PolyField):
        return f.deriv(axis, order)
    if h is None:
        raise ValueError("grid samples need the spacing h")
    return fd_derivative(f, h, axis, order)


# -- identity residuals ----------------------------------------------------

def _part(v, sl):
    if isinstance(v, Jet):
        return Jet(v.coeffs[..., sl], v.order)
    return v[..., sl]


def _vals(v):
    return v.value if isinstance(v, Jet) else v


def _diag4(red, fn):
    """4-vector [fn(T), fn(T), fn(S), fn(S)] used to apply diag(P1 I, P2 I)."""
    t, s = red.f["t"], red.f["s"]
    if isinstance(t, Jet):
        a, b = fn(t.coeffs), fn(s.coeffs)
        return Jet(np.stack([a, a, b, b], axis=-1), min(t.order, s.order))
    a, b = fn(t), fn(s)
    return np.stack([a, a, b, b], axis=-1)


def lu_fu(red, u):
    """Lu + Fu with L = sum A d_j d_l and F = sum B^l d_l + C."""
    f, d = red.f, red.d
    u1, u2 = d(u, 0), d(u, 1)
    return (mv(f["lam11"], d(u1, 0)) + mv(f["lam12"], d(u1, 1)) + mv(f["lam22"], d(u2, 1))
            + mv(f["b1"], u1) + mv(f["b2"], u2) + mv(f["c"], u))


def state_w(red, u):
    """W = [u, Psi u + d1 u + T d2 u] for a lifted u."""
    return build_w(u, red.d(u, 0), red.d(u, 1), red.f["psi"], red.f["t"])


def block_rows(red, w):
    """d1 W + M1 d2 W - M0 W."""
    f, d = red.f, red.d
    return d(w, 0) + mv(f["m1"], d(w, 1)) - mv(f["m0"], w)


def diag_apply(red, w):
    """P(x, D) W with P1 = D1^2 + tr T D1 D2 + det T D2^2 and D = -i d."""
    from .algebra2 import det2, trace2
    d = red.d
    w1 = d(w, 0)
    tr4 = _diag4(red, trace2)
    det4 = _diag4(red, det2)
    return -(d(w1, 0) + tr4 * d(w1, 1) + det4 * d(d(w, 1), 1))


def k_apply(red, w):
    """sum_alpha K_alpha D^alpha W."""
    f, d = red.f, red.d
    return mv(f["k10"], -1j * d(w, 0)) + mv(f["k01"], -1j * d(w, 1)) + mv(f["k00"], w)


def _mask(red):
    """Grid residuals are measured on the central half of the box."""
    if not isinstance(red, GridReduction):
        return Ellipsis
    g = red.grid
    x1, x2 = g.nodes()
    keep = np.maximum(np.abs(x1 - g.center[0]), np.abs(x2 - g.center[1])) <= g.half_width / 2 + 1e-12
    return keep


def _norm(v, mask):
    v = np.asarray(_vals(v))
    return float(np.max(np.abs(v[mask]))) if v.size else 0.0


@dataclass
class BlockResidual:
    row1: float
    row2: float


def block_residual(red, u):
    """Max norms of row 1 and of row 2 - L11^{-1}(Lu + Fu).

    ``u`` is a PolyField or callable (grid mode) of 2-vectors; both rows
    vanish for every u, not only for solutions.
    """
    u = red.lift(u)
    r = block_rows(red, state_w(red, u))
    target = mv(red.f["l11inv"], lu_fu(red, u))
    m = _mask(red)
    return BlockResidual(row1=_norm(_part(r, slice(0, 2)), m),
                         row2=_norm(_part(r, slice(2, 4)) - target, m))


def diagonal_residual(red, w=None, u=None):
    """Max norm of P W - sum K D W - (-d1 - Ccof d2)(block rows of W).

    Pass either a 4-vector field ``w`` or a displacement ``u`` (then W is
    built from it).
    """
    if w is None:
        uu = red.lift(u)
        w = state_w(red, uu)
    else:
        w = red.lift(w)
    r = block_rows(red, w)
    rhs = -(red.d(r, 0) + mv(red.f["ccof"], red.d(r, 1)))
    return _norm(diag_apply(red, w) - k_apply(red, w) - rhs, _mask(red))


def observed_orders(errors):
    """log2 of successive error ratios for a halving sequence of h."""
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(e[:-1] / e[1:])


def refinement_study(tensor, u, grid, levels=3):
    """Grid-mode identity residuals on grid, grid/2, grid/4 and their orders."""
    rows = []
    g = grid
    for _ in range(levels):
        red = GridReduction(tensor, g)
        b = block_residual(red, u)
        rows.append({"n": g.n, "h": g.h, "block_row1": b.row1, "block_row2": b.row2,
                     "diagonal": diagonal_residual(red, u=u)})
        g = g.refine()
    out = {"rows": rows}
    for key in ("block_row2", "diagonal"):
        out[f"order_{key}"] = observed_orders([r[key] for r in rows]).tolist()
    return out


def order_ok(study, key, min_order=1.8, floor=1e-10):
    """(passed, min observed order, discretely exact).

    With constant coefficients the difference operators reproduce the
    identities exactly, so every residual sits at rounding level and the
    orders are noise; such a study passes as discretely exact.
    """
    errs = [r[key] for r in study["rows"]]
    order = float(min(study[f"order_{key}"]))
    exact = bool(max(errs) <= floor)
    return exact or order >= min_order, order, exact


# -- flat functions --------------------------------------------------------

@dataclass
class FlatFn:
    """exp(-|x|^-nu) v(x), zero at the origin.

    ``sigma`` and ``nu0`` are recorded only to flag nu outside (nu0, 1/(sigma-1)).
    """
    nu: float
    v_poly: PolyField = None
    cutoff_r: float = None
    sigma: float = None
    nu0: float = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.v_poly is None:
            self.v_poly = PolyField(np.ones((1, 1)))

    def nu_admissible(self):
        lo = -np.inf if self.nu0 is None else self.nu0
        hi = np.inf if self.sigma is None or self.sigma <= 1 else 1 / (self.sigma - 1)
        return bool(lo < self.nu < hi)

    def log_factor(self, x1, x2):
        """-|x|^-nu, with -inf at the origin."""
        r = np.hypot(x1, x2)
        with np.errstate(divide="ignore"):
            out = -(r ** -self.nu)
        return np.where(r > 0, out, -np.inf)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        e = np.exp(self.log_factor(x1, x2))
        v = self.v_poly(x1, x2)
        out = e.reshape(e.shape + (1,) * (v.ndim - e.ndim)) * v
        if self.cutoff_r is not None:
            r = np.hypot(x1, x2)
            out = np.where((r < self.cutoff_r).reshape(out.shape[:r.ndim] + (1,) * (out.ndim - r.ndim)),
                           out, 0.0)
        return out


def flat_fn_eval(f, x):
    return float(np.asarray(f(x[0], x[1])).reshape(-1)[0])


# -- quadrature over balls and annuli ---------------------------------------

def coverage(grid, r_lo, r_hi):
    """Fraction of each node's cell with r_lo <= |x - center| <= r_hi (4x4 subsamples)."""
    x1, x2 = grid.nodes()
    off = (np.arange(SUBSAMPLE) + 0.5) / SUBSAMPLE - 0.5
    dx, dy = np.meshgrid(off * grid.h, off * grid.h, indexing="ij")
    r = np.hypot(x1[..., None, None] - grid.center[0] + dx,
                 x2[..., None, None] - grid.center[1] + dy)
    inside = (r >= r_lo) & (r <= r_hi)
    return inside.mean(axis=(-2, -1))


@dataclass
class VanishingFit:
    slope: float
    local_slopes: list
    radii: list
    volumes: list


def vanishing_order(u, grid, radii):
    """Least-squares slope of log V(r) against log r, V(r) = int_{B_r} |u|^2."""
    radii = sorted(float(r) for r in radii)
    if len(radii) < 4:
        raise ValueError("need at least 4 radii")
    if radii[-1] > grid.half_width + 1e-12:
        raise ValueError("radii must lie inside the grid")
    u = np.asarray(u)
    dens = np.abs(u) ** 2
    if dens.ndim > 2:
        dens = dens.reshape(grid.n, grid.n, -1).sum(axis=-1)
    vols = [float(np.sum(dens * coverage(grid, 0.0, r)) * grid.h ** 2) for r in radii]
    if min(vols) <= 1e-300:
        raise AllZeroField("int |u|^2 below 1e-300 on some ball")
    lr, lv = np.log(radii), np.log(vols)
    slope = float(np.polyfit(lr, lv, 1)[0])
    local = (np.diff(lv) / np.diff(lr)).tolist()
    return VanishingFit(slope=slope, local_slopes=local, radii=radii, volumes=vols)


# -- Carleman diagnostic ---------------------------------------------------

@dataclass
class CarlemanProbe:
    tau_list: list
    nu: float
    r_min: float
    r_max: float = None
    weight_mode: str = "log"

    def __post_init__(self):
        self.tau_list = [float(t) for t in self.tau_list]
        if any(b <= a for a, b in zip(self.tau_list, self.tau_list[1:])):
            raise ValueError("tau_list must be ascending")
        if not all(np.isfinite(self.tau_list)):
            raise ValueError("tau_list must be finite")
        if not self.r_min > 0 or not self.nu > 0:
            raise ValueError("r_min and nu must be positive")
        if self.weight_mode not in ("log", "direct"):
            raise ValueError("weight_mode is 'log' or 'direct'")


@dataclass
class CarlemanRow:
    tau: float
    log_lhs: float
    log_rhs: float
    lhs: float
    rhs: float
    ratio: float
    defined: bool = True


def _log_norm(log_weight, density, cell):
    """0.5 * log sum exp(2 log_weight) * density * cell, density >= 0."""
    pos = (density > 0) & (cell > 0)
    if not np.any(pos):
        return -np.inf
    return 0.5 * float(logsumexp(2 * log_weight[pos] + np.log(density[pos] * cell[pos])))


def _direct_norm(weight, density, cell):
    """Scaled 2-norm of weight * sqrt(density * cell)."""
    v = weight * np.sqrt(density * cell)
    top = np.max(v)
    if top == 0:
        return 0.0
    return float(top * np.sqrt(np.sum((v / top) ** 2)))


def diag_operator_grid(t_mat, s_mat, w, h):
    """diag(P1 I, P2 I) w for constant T, S by finite differences."""
    from .algebra2 import det2, trace2
    tr4 = np.array([trace2(t_mat)] * 2 + [trace2(s_mat)] * 2)
    det4 = np.array([det2(t_mat)] * 2 + [det2(s_mat)] * 2)
    w11 = fd_derivative(w, h, 0, 2)
    w12 = fd_derivative(fd_derivative(w, h, 0), h, 1)
    w22 = fd_derivative(w, h, 1, 2)
    return -(w11 + tr4 * w12 + det4 * w22)


def carleman_ratio(rd, w, probe, grid):
    """Weighted norms of the Carleman inequality on r_min <= |x| <= r_max.

    lhs = |e^phi r^-1 grad w| + tau |e^phi r^(-nu-2) w|, rhs = |e^phi P w|,
    phi = (tau / nu) r^-nu.  ``rd`` supplies T and S (taken at the grid
    center); ``w`` holds grid samples of shape (n, n, 4).
    """
    if probe.r_min < 2 * grid.h - 1e-12:
        raise ValueError("r_min must be at least 2h")
    r_max = grid.half_width if probe.r_max is None else probe.r_max
    t_mat, s_mat = np.asarray(rd.t_mat), np.asarray(rd.s_mat)
    if t_mat.ndim > 2:
        t_mat, s_mat = t_mat[grid.mid, grid.mid], s_mat[grid.mid, grid.mid]
    w = np.asarray(w, dtype=complex)
    h = grid.h
    pw = diag_operator_grid(t_mat, s_mat, w, h)
    g1, g2 = fd_derivative(w, h, 0), fd_derivative(w, h, 1)
    r = grid.radius()
    cell = coverage(grid, probe.r_min, r_max) * h * h
    active = cell > 0
    rr = np.where(active, r, 1.0)
    grad_dens = (np.sum(np.abs(g1) ** 2 + np.abs(g2) ** 2, axis=-1)) / rr ** 2
    w_dens = np.sum(np.abs(w) ** 2, axis=-1) * rr ** (-2 * probe.nu - 4)
    p_dens = np.sum(np.abs(pw) ** 2, axis=-1)
    rows = []
    for tau in probe.tau_list:
        phi = np.where(active, (tau / probe.nu) * rr ** (-probe.nu), 0.0)
        if probe.weight_mode == "log":
            if 2 * np.max(phi) > LOG_EXPONENT_MAX:
                raise WeightOverflowUnavoidable(f"log weight {2 * np.max(phi):.3g} too large; raise r_min")
            la = _log_norm(phi, grad_dens, cell)
            lb = _log_norm(phi, w_dens, cell)
            log_lhs = float(np.logaddexp(la, np.log(tau) + lb))
            log_rhs = _log_norm(phi, p_dens, cell)
        else:
            if np.max(phi) > DIRECT_EXPONENT_MAX:
                raise WeightOverflowUnavoidable(f"weight exponent {np.max(phi):.3g} overflows; use log mode")
            e = np.exp(phi)
            lhs = _direct_norm(e, grad_dens, cell) + tau * _direct_norm(e, w_dens, cell)
            rhs = _direct_norm(e, p_dens, cell)
            with np.errstate(divide="ignore"):
                log_lhs, log_rhs = float(np.log(lhs)), float(np.log(rhs))
        defined = np.isfinite(log_lhs) and np.isfinite(log_rhs)
        with np.errstate(over="ignore"):
            rows.append(CarlemanRow(
                tau=tau, log_lhs=log_lhs, log_rhs=log_rhs,
                lhs=float(np.exp(log_lhs)), rhs=float(np.exp(log_rhs)),
                ratio=float(np.exp(log_lhs - log_rhs)) if defined else float("nan"),
                defined=bool(defined)))
    return rows


def flat_state(grid, nu=1.0, v=None, ncomp=4):
    """Samples of a flat function about the grid center, copied into every component."""
    f = FlatFn(nu=nu, v_poly=v)
    x1, x2 = grid.nodes()
    vals = f(x1 - grid.center[0], x2 - grid.center[1])
    if vals.ndim == 2:
        vals = vals[..., None]
    return np.repeat(vals[..., :1], ncomp, axis=-1) if vals.shape[-1] == 1 else vals
