"""Coefficient fields, grids and finite-difference stencils.

Three field modes share one convention: tensor indices are always the
*trailing* axes.

* ``constant`` -- a plain array, e.g. A with shape (2, 2, 2, 2)
* ``poly``     -- a PolyField whose coefficients have shape (d1, d2, *value)
* ``grid``     -- samples with shape (n, n, *value) on a Grid2

A is indexed A[alpha, beta, j, l], B as B[alpha, beta, l] and C as
C[alpha, beta].
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import GridTooCoarse
from .jets import Jet


@dataclass(frozen=True)
class Grid2:
    """Square node grid; n odd so the center is a node."""
    half_width: float
    n: int
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.n < 9 or self.n % 2 == 0:
            raise GridTooCoarse(f"grid.n must be odd >= 9, got {self.n}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def h(self):
        return 2 * self.half_width / (self.n - 1)

    @property
    def axis(self):
        return np.linspace(-self.half_width, self.half_width, self.n)

    def nodes(self):
        t = self.axis
        x1, x2 = np.meshgrid(self.center[0] + t, self.center[1] + t, indexing="ij")
        return x1, x2

    def radius(self):
        """Distance of each node from the grid center."""
        x1, x2 = self.nodes()
        return np.hypot(x1 - self.center[0], x2 - self.center[1])

    def refine(self):
        return Grid2(self.half_width, 2 * self.n - 1, self.center)

    @property
    def mid(self):
        return self.n // 2


def fd_derivative(f, h, axis, order=1):
    """Second-order finite differences along a grid axis (0 -> x1, 1 -> x2).

    Central stencils inside, one-sided second-order stencils on the border.
    """
    f = np.asarray(f)
    if f.shape[axis] < 9:
        raise GridTooCoarse("need at least 9 nodes along the differentiated axis")
    if order == 1:
        return np.gradient(f, h, axis=axis, edge_order=2)
    if order != 2:
        raise ValueError("order must be 1 or 2")
    g = np.moveaxis(f, axis, 0)
    out = np.empty(g.shape, dtype=np.result_type(g, float))
    out[1:-1] = g[2:] - 2 * g[1:-1] + g[:-2]
    out[0] = 2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]
    out[-1] = 2 * g[-1] - 5 * g[-2] + 4 * g[-3] - g[-4]
    return np.moveaxis(out / (h * h), 0, axis)


class PolyField:
    """Bivariate polynomial sum coeffs[i, j] x1^i x2^j with array values."""

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim < 2:
            raise ValueError("PolyField needs at least 2 coefficient axes")
        self.coeffs = coeffs

    @classmethod
    def from_monomials(cls, terms, vshape=()):
        """terms: iterable of (i, j, coeff) with coeff of shape vshape."""
        terms = list(terms)
        d1 = max((t[0] for t in terms), default=0) + 1
        d2 = max((t[1] for t in terms), default=0) + 1
        out = np.zeros((d1, d2) + tuple(vshape), dtype=complex if any(
            np.iscomplexobj(t[2]) for t in terms) else float)
        for i, j, c in terms:
            out[i, j] += c
        return cls(out)

    @classmethod
    def stack(cls, fields, vshape):
        """Assemble an array-valued PolyField from a nested list of scalar ones."""
        flat = [f if isinstance(f, PolyField) else cls(np.array([[f]], dtype=float))
                for f in np.asarray(fields, dtype=object).ravel()]
        d1 = max(f.coeffs.shape[0] for f in flat)
        d2 = max(f.coeffs.shape[1] for f in flat)
        dtype = np.result_type(*[f.coeffs for f in flat], float)
        out = np.zeros((d1, d2, len(flat)), dtype=dtype)
        for k, f in enumerate(flat):
            out[:f.coeffs.shape[0], :f.coeffs.shape[1], k] = f.coeffs
        return cls(out.reshape((d1, d2) + tuple(vshape)))

    @property
    def vshape(self):
        return self.coeffs.shape[2:]

    @property
    def degree(self):
        return self.coeffs.shape[0] + self.coeffs.shape[1] - 2

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast(x1, x2).shape
        d1, d2 = self.coeffs.shape[:2]
        p1 = np.broadcast_to(x1, shape).reshape(-1, 1) ** np.arange(d1)
        p2 = np.broadcast_to(x2, shape).reshape(-1, 1) ** np.arange(d2)
        flat = np.einsum("ni,nj,ijk->nk", p1, p2, self.coeffs.reshape(d1, d2, -1))
        return flat.reshape(shape + self.vshape)

    def deriv(self, axis, order=1):
        c = self.coeffs
        for _ in range(order):
            d = c.shape[axis]
            if d == 1:
                c = np.zeros_like(c)
                continue
            k = np.arange(1, d).reshape((-1,) + (1,) * (c.ndim - 1))
            c = np.moveaxis(np.moveaxis(c, axis, 0)[1:] * k, 0, axis)
        return PolyField(c)

    def jet(self, x0, order):
        """Taylor jet at x0, exact up to rounding."""
        c = self.coeffs
        d1, d2 = c.shape[:2]
        out = np.zeros((order + 1, order + 1) + self.vshape, dtype=np.result_type(c, float))
        for p in range(min(order, d1 - 1) + 1):
            for q in range(min(order - p, d2 - 1) + 1):
                acc = 0
                for i in range(p, d1):
                    for j in range(q, d2):
                        acc = acc + comb(i, p) * comb(j, q) * x0[0] ** (i - p) * x0[1] ** (j - q) * c[i, j]
                out[p, q] = acc
        return Jet(out, order)

    def __add__(self, other):
        d1 = max(self.coeffs.shape[0], other.coeffs.shape[0])
        d2 = max(self.coeffs.shape[1], other.coeffs.shape[1])
        vs = np.broadcast_shapes(self.vshape, other.vshape)
        out = np.zeros((d1, d2) + vs, dtype=np.result_type(self.coeffs, other.coeffs))
        for f in (self, other):
            out[:f.coeffs.shape[0], :f.coeffs.shape[1]] += f.coeffs
        return PolyField(out)

    def __mul__(self, other):
        """Product with a scalar-valued PolyField (or a number)."""
        if np.isscalar(other):
            return PolyField(self.coeffs * other)
        a, b = self.coeffs, other.coeffs
        if b.ndim != 2:
            raise ValueError("right factor must be scalar-valued")
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1) + self.vshape,
                       dtype=np.result_type(a, b))
        for i in range(b.shape[0]):
            for j in range(b.shape[1]):
                out[i:i + a.shape[0], j:j + a.shape[1]] += b[i, j] * a
        return PolyField(out)

    __rmul__ = __mul__

    def __repr__(self):
        return f"PolyField(degree={self.degree}, vshape={self.vshape})"


def lam_mats(a):
    """(L11, L12, L22) from A[..., alpha, beta, j, l]; works on jets' coefficient arrays too."""
    return a[..., 0, 0], a[..., 0, 1] + a[..., 1, 0], a[..., 1, 1]


@dataclass
class CoefficientTensor:
    a: object
    b: object
    c: object
    mode: str = "constant"
    grid: Grid2 = None

    def __post_init__(self):
        if self.mode not in ("constant", "poly", "grid"):
            raise ValueError(f"unknown field mode {self.mode!r}")
        if self.mode == "grid" and self.grid is None:
            raise ValueError("grid mode needs a grid")

    @classmethod
    def constant(cls, a, b=None, c=None):
        a = np.asarray(a, dtype=float)
        b = np.zeros((2, 2, 2)) if b is None else np.asarray(b, dtype=float)
        c = np.zeros((2, 2)) if c is None else np.asarray(c, dtype=float)
        if a.shape != (2, 2, 2, 2) or b.shape != (2, 2, 2) or c.shape != (2, 2):
            raise ValueError("constant tensor shapes must be (2,2,2,2), (2,2,2), (2,2)")
        return cls(a, b, c, "constant")

    @classmethod
    def polynomial(cls, a, b=None, c=None):
        def lift(f, vshape):
            if f is None:
                return PolyField(np.zeros((1, 1) + vshape))
            if isinstance(f, PolyField):
                return f
            return PolyField(np.asarray(f, dtype=float)[None, None])
        return cls(lift(a, (2, 2, 2, 2)), lift(b, (2, 2, 2)), lift(c, (2, 2)), "poly")

    @classmethod
    def sampled(cls, a, b, c, grid):
        n = grid.n
        b = np.zeros((n, n, 2, 2, 2)) if b is None else np.asarray(b, dtype=float)
        c = np.zeros((n, n, 2, 2)) if c is None else np.asarray(c, dtype=float)
        a = np.asarray(a, dtype=float)
        if a.shape != (n, n, 2, 2, 2, 2) or b.shape != (n, n, 2, 2, 2) or c.shape != (n, n, 2, 2):
            raise ValueError("sampled tensor shapes must match the grid")
        return cls(a, b, c, "grid", grid)

    def raw(self, name):
        """Storage array with the tensor indices trailing."""
        f = getattr(self, name)
        return f.coeffs if isinstance(f, PolyField) else np.asarray(f)

    def values(self, x1, x2):
        """(A, B, C) at points; only for constant and poly modes."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast(x1, x2).shape
        if self.mode == "constant":
            return tuple(np.broadcast_to(f, shape + f.shape).copy() for f in (self.a, self.b, self.c))
        if self.mode == "poly":
            return self.a(x1, x2), self.b(x1, x2), self.c(x1, x2)
        raise ValueError("grid-mode tensors only have values on their own nodes")

    def on_grid(self, grid):
        if self.mode == "grid":
            if grid != self.grid:
                raise ValueError("grid-mode tensor sampled on a different grid")
            return self.a, self.b, self.c
        return self.values(*grid.nodes())

    def at(self, x):
        """Constant tensor frozen at a point (grid mode: x must be a node)."""
        if self.mode == "grid":
            i, j = self.node_index(x)
            return CoefficientTensor.constant(self.a[i, j], self.b[i, j], self.c[i, j])
        a, b, c = self.values(x[0], x[1])
        return CoefficientTensor.constant(a, b, c)

    def node_index(self, x):
        g = self.grid
        idx = []
        for k in range(2):
            t = (x[k] - g.center[k] + g.half_width) / g.h
            r = int(round(t))
            if abs(t - r) > 1e-9 or not 0 <= r < g.n:
                raise ValueError(f"point {x} is not a node of the grid")
            idx.append(r)
        return tuple(idx)

    def quadpoly_at(self, x=(0.0, 0.0)):
        from .quadpoly import QuadMatPoly
        return QuadMatPoly.from_tensor(self.at(x).a)

    def jets(self, x, order):
        """Jets of L11, L12, L22, B1, B2, C at x (constant and poly modes)."""
        if self.mode == "grid":
            raise ValueError("jets need constant or polynomial coefficients")
        if self.mode == "constant":
            ja, jb, jc = (Jet.const(f, order) for f in (self.a, self.b, self.c))
        else:
            ja, jb, jc = (f.jet(x, order) for f in (self.a, self.b, self.c))
        l11, l12, l22 = (Jet(m, order) for m in lam_mats(ja.coeffs))
        return {"lam11": l11, "lam12": l12, "lam22": l22,
                "b1": Jet(jb.coeffs[..., 0], order), "b2": Jet(jb.coeffs[..., 1], order),
                "c": jc}

    def sample_points(self, grid):
        """Points a domain check visits: all nodes of ``grid``."""
        if self.mode == "grid":
            grid = self.grid
        x1, x2 = grid.nodes()
        return np.stack([x1.ravel(), x2.ravel()], axis=1)


def tensor_from_matrix(g):
    """A[alpha, beta, j, l] = G[2 alpha + j, 2 beta + l].

    Major symmetry of A is exactly symmetry of the 4x4 matrix G.
    """
    g = np.asarray(g, dtype=float)
    return g.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)
