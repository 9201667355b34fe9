"""The mean surface of boundary data on the disk (d = 2).

In polar coordinates the scaled mean-curvature operator reads

    Delta h - Hess h(x, x) = (1 - r^2) h_rr + h_r / r + h_tt / r^2,

degenerate in the radial direction at r = 1.  It is discretised on a polar
grid whose rings are equally spaced in hyperbolic distance, rho_k = k drho,
r_k = tanh(rho_k); the spacing in r shrinks geometrically towards the
boundary ring r = 1 carrying the Dirichlet data.  Radial derivatives use
three-point nonuniform differences, exact on quadratics in r; ring 1 uses
the diameter through the pole (antipodal node, pole, rings 1 and 2).  Angular
differences are divided by 2(1 - cos dt) and 2 sin dt instead of dt^2 and
2 dt, which makes them exact on cos t and sin t; together the scheme is
exact on affine functions, the solutions of Mean = 0 with affine data.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mink_linalg import GeometryError

DEFAULT_NR = 192
DEFAULT_NTHETA = 512
SOLVER_TOL = 1e-9


@dataclass(frozen=True)
class PolarGrid:
    """Pole, interior rings 1..n_r-1 and the boundary ring n_r at r = 1.

    rho_max is the hyperbolic radius of the last interior ring; by default
    r_max = 1 - 1/(2 n_r).
    """
    n_r: int = DEFAULT_NR
    n_theta: int = DEFAULT_NTHETA
    rho_max: float = None

    def __post_init__(self):
        if self.n_r < 8 or self.n_theta < 8:
            raise ValueError("grid too coarse: n_r >= 8, n_theta >= 8")
        if self.n_theta % 2:
            raise ValueError("n_theta must be even (ring 1 uses antipodal nodes)")
        if self.rho_max is None:
            object.__setattr__(self, "rho_max", float(np.arctanh(1.0 - 0.5 / self.n_r)))

    @property
    def drho(self):
        return self.rho_max / (self.n_r - 1)

    @property
    def grading(self):
        """Ratio of consecutive values of 1 - r far from the pole."""
        return float(np.exp(2 * self.drho))

    @property
    def rho(self):
        return np.append(np.arange(self.n_r) * self.drho, np.inf)

    @property
    def r(self):
        r = np.tanh(np.arange(self.n_r) * self.drho)
        return np.append(r, 1.0)

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def dtheta(self):
        return 2 * np.pi / self.n_theta

    def nodes(self):
        """Cartesian nodes, shape (n_r + 1, n_theta, 2); row 0 is the pole repeated."""
        r, t = self.r, self.theta
        return np.stack([np.outer(r, np.cos(t)), np.outer(r, np.sin(t))], axis=-1)

    def refine(self):
        return PolarGrid(2 * self.n_r - 1, 2 * self.n_theta, self.rho_max)

    def coarsen(self):
        return PolarGrid((self.n_r + 1) // 2, self.n_theta // 2, self.rho_max)


@dataclass
class ScalarField:
    grid: PolarGrid
    values: np.ndarray                      # (n_r + 1, n_theta)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = (self.grid.n_r + 1, self.grid.n_theta)
        if self.values.shape != shape:
            raise ValueError("values have shape %s, grid wants %s" % (self.values.shape, shape))
        if not np.all(np.isfinite(self.values)):
            raise GeometryError("non-finite field values")

    def __call__(self, x):
        return interpolate(self, x)

    def resample(self, g):
        """Field of the callable g at this grid's nodes (boundary ring kept at r < 1)."""
        X = self.grid.nodes()
        X[-1] *= 1.0 - 1e-9
        vals = np.asarray(g(X.reshape(-1, 2))).reshape(X.shape[:2])
        vals[0] = vals[0, 0]
        return ScalarField(self.grid, vals)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - other.values)

    def scaled(self, c):
        return ScalarField(self.grid, c * self.values)

    @classmethod
    def from_function(cls, grid, f, boundary=None):
        """Sample f at the nodes; the boundary ring takes `boundary` if given."""
        X = grid.nodes()
        vals = np.empty(X.shape[:2])
        vals[:-1] = np.asarray(f(X[:-1].reshape(-1, 2))).reshape(grid.n_r, grid.n_theta)
        if boundary is None:
            vals[-1] = np.asarray(f(X[-1] * (1.0 - 1e-12)))
        else:
            vals[-1] = boundary
        return cls(grid, vals)


def _lagrange4(nodes, z):
    """Weights of the cubic through 4 nodes per row, evaluated at z."""
    w = np.ones_like(nodes)
    for a in range(4):
        for b in range(4):
            if a != b:
                w[:, a] *= (z - nodes[:, b]) / (nodes[:, a] - nodes[:, b])
    return w


def interpolate(h, x, order=3):
    """Interpolation in (r, theta), periodic in theta.

    order 3 uses 4-point Lagrange stencils in both directions, which is
    exact for affine functions along rays and O(dtheta^4) around rings;
    order 1 is bilinear.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    x = x.reshape(-1, 2)
    g = h.grid
    r = np.hypot(x[:, 0], x[:, 1])
    if np.any(r > 1.0 + 1e-12):
        raise GeometryError("interpolation point outside the closed disk")
    r = np.minimum(r, 1.0)
    radii = g.r
    i = np.clip(np.searchsorted(radii, r, side="right") - 1, 0, g.n_r - 1)
    u = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * np.pi) / g.dtheta
    j = np.floor(u).astype(int) % g.n_theta
    ft = u - np.floor(u)
    V = h.values
    if order == 1:
        fr = (r - radii[i]) / (radii[i + 1] - radii[i])
        j1 = (j + 1) % g.n_theta
        lo = (1 - ft) * V[i, j] + ft * V[i, j1]
        hi = (1 - ft) * V[i + 1, j] + ft * V[i + 1, j1]
        return ((1 - fr) * lo + fr * hi).reshape(shape)
    i0 = np.clip(i - 1, 0, g.n_r - 3)
    ri = i0[:, None] + np.arange(4)[None, :]
    wr = _lagrange4(radii[ri], r)
    tj = (j[:, None] + np.arange(-1, 3)[None, :]) % g.n_theta
    wt = _lagrange4(np.broadcast_to(np.arange(-1.0, 3.0), (len(r), 4)), ft)
    out = np.zeros(len(r))
    for a in range(4):
        ring = np.sum(V[ri[:, a][:, None], tj] * wt, axis=1)
        out += wr[:, a] * ring
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# difference stencils

def _radial_weights(grid):
    """Three-point weights for d/dr and d2/dr2 at interior rings 1..n_r-1."""
    r = grid.r
    rc = r[1:-1]
    hm = rc - r[:-2]
    hp = r[2:] - rc
    s = hm + hp
    d1 = np.stack([-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)])
    d2 = np.stack([2 / (hm * s), -2 / (hm * hp), 2 / (hp * s)])
    return rc, d1, d2


def _angular_denominators(grid):
    dt = grid.dtheta
    return 2 * np.sin(dt), 2 * (1 - np.cos(dt))


def _ring_operator(grid):
    """Coefficients (c_in, c_mid, c_out, c_ang) of the operator at interior rings.

    Value at (i, j) is c_in h[i-1, j] + c_mid h[i, j] + c_out h[i+1, j]
    + c_ang (h[i, j+1] + h[i, j-1]) - 2 c_ang h[i, j].
    """
    rc, d1, d2 = _radial_weights(grid)
    deg = 1 - rc ** 2
    c = deg * d2 + d1 / rc
    _, a2 = _angular_denominators(grid)
    c_ang = 1.0 / (rc ** 2 * a2)
    return c[0], c[1] - 2 * c_ang, c[2], c_ang


def _first_ring_weights(grid):
    """Radial coefficients at ring 1 from the diameter nodes -r1, 0, r1, r2.

    The value at -r1 is the antipodal ring-1 node.  A centred 3-point h_r
    divided by r1 ~ dr would leave an O(dr) error here; the 4-node stencil
    keeps the ring second order.  Returns (c_anti, c_pole, c_mid, c_out)
    without the angular part.
    """
    r1, r2 = grid.r[1], grid.r[2]
    nodes = np.array([-r1, 0.0, r1, r2])
    c = (1 - r1 * r1) * _fd_weights(nodes, r1, 2) + _fd_weights(nodes, r1, 1) / r1
    return c


def _pole_weight(grid):
    # Laplacian at the pole from the first-ring average: 4 (mean - h0) / r1^2
    return 4.0 / grid.r[1] ** 2


def _fd_weights(nodes, z, m):
    """Weights of the m-th derivative at z from values at `nodes` (Vandermonde solve)."""
    nodes = np.asarray(nodes, dtype=float) - z
    n = len(nodes)
    V = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[m] = float(np.prod(np.arange(1, m + 1)))
    return np.linalg.solve(V, rhs)


def apply_operator(h, edge="one-sided"):
    """Delta h - Hess h(x, x) at the pole and interior rings.

    Returns an array of shape (n_r, n_theta); row 0 is the pole value repeated.
    The last interior ring sits next to r = 1, where smooth fields such as
    L have unbounded r-derivatives.  With edge="one-sided" its radial
    derivatives come from the six rings on the inner side (a one-sided
    stencil of fourth order, exact on affine fields); edge="dirichlet" uses the solver's
    own stencil through the boundary ring, so that a solver output has zero
    discrete residual there too.
    """
    g = h.grid
    V = h.values
    c_in, c_mid, c_out, c_ang = _ring_operator(g)
    inner = V[1:-1]
    out = (c_in[:, None] * V[:-2] + c_mid[:, None] * inner + c_out[:, None] * V[2:]
           + c_ang[:, None] * (np.roll(inner, 1, axis=1) + np.roll(inner, -1, axis=1)))
    c1 = _first_ring_weights(g)
    half = g.n_theta // 2
    out[0] = (c1[0] * np.roll(V[1], -half) + c1[1] * V[0] + c1[2] * V[1] + c1[3] * V[2]
              + c_ang[0] * (np.roll(V[1], 1) + np.roll(V[1], -1) - 2 * V[1]))
    if edge == "one-sided":
        r = g.r
        k = g.n_r - 1
        z = r[k]
        nodes = r[k - 5:k + 1]
        w1 = _fd_weights(nodes, z, 1)
        w2 = _fd_weights(nodes, z, 2)
        W = V[k - 5:k + 1]
        hr = w1 @ W
        hrr = w2 @ W
        _, a2 = _angular_denominators(g)
        htt = (np.roll(V[k], -1) - 2 * V[k] + np.roll(V[k], 1)) / a2
        out[-1] = (1 - z * z) * hrr + hr / z + htt / z ** 2
    elif edge != "dirichlet":
        raise ValueError("edge must be 'one-sided' or 'dirichlet'")
    pole = _pole_weight(g) * (np.mean(V[1]) - V[0, 0])
    return np.vstack([np.full((1, g.n_theta), pole), out])


def _assemble(grid):
    """Sparse matrix on the unknowns (pole, rings 1..n_r-1) and the boundary coupling."""
    nr, nt = grid.n_r, grid.n_theta
    c_in, c_mid, c_out, c_ang = _ring_operator(grid)
    n = 1 + (nr - 1) * nt

    def idx(i, j):
        return np.where(i == 0, 0, 1 + (i - 1) * nt + np.mod(j, nt))

    I, J = np.meshgrid(np.arange(1, nr), np.arange(nt), indexing="ij")
    row = idx(I, J).ravel()
    rows, cols, vals = [], [], []

    def add(r_, c_, v_):
        rows.append(r_)
        cols.append(c_)
        vals.append(v_)

    ii = I.ravel()
    jj = J.ravel()
    k = ii - 1
    add(row, row, c_mid[k])
    add(row, idx(ii, jj + 1), c_ang[k])
    add(row, idx(ii, jj - 1), c_ang[k])
    inner = ii > 1
    add(row[inner], idx(ii[inner] - 1, jj[inner]), c_in[k][inner])
    first = ii == 1
    c1 = _first_ring_weights(grid)
    rf, jf = row[first], jj[first]
    add(rf, np.zeros(first.sum(), dtype=int), np.full(first.sum(), c1[1]))
    add(rf, idx(np.ones_like(jf), jf + nt // 2), np.full(first.sum(), c1[0]))
    # replace the 3-point radial weights on ring 1 by the diameter stencil
    add(rf, rf, np.full(first.sum(), c1[2] - (c_mid[0] + 2 * c_ang[0])))
    last = (ii < nr - 1) & ~first
    add(row[last], idx(ii[last] + 1, jj[last]), c_out[k][last])
    add(rf, idx(np.full_like(jf, 2), jf), np.full(first.sum(), c1[3]))
    w = _pole_weight(grid)
    add(np.zeros(nt, dtype=int), idx(np.ones(nt, dtype=int), np.arange(nt)), np.full(nt, w / nt))
    add(np.array([0]), np.array([0]), np.array([-w]))
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A, c_out[-1]


@dataclass
class MeanProblem:
    boundary: object            # BoundaryFunction, sample array or callable of the angle
    grid: PolarGrid = field(default_factory=PolarGrid)
    tol: float = SOLVER_TOL

    def boundary_ring(self):
        b = self.boundary
        th = self.grid.theta
        samples = getattr(b, "samples", None)
        if samples is None and not callable(b):
            samples = np.asarray(b, dtype=float)
        if samples is not None:
            samples = np.asarray(samples, dtype=float)
            if samples.size == th.size:
                return samples.copy()
            if samples.size % th.size == 0:
                return samples[:: samples.size // th.size].copy()
            # periodic linear interpolation of the samples
            u = th / (2 * np.pi) * samples.size
            i = np.floor(u).astype(int) % samples.size
            f = u - np.floor(u)
            return (1 - f) * samples[i] + f * samples[(i + 1) % samples.size]
        return np.asarray(b(th), dtype=float)


_FACTOR_CACHE = {}


def _factor(grid):
    key = (grid.n_r, grid.n_theta, grid.rho_max)
    if key not in _FACTOR_CACHE:
        A, c_last = _assemble(grid)
        _FACTOR_CACHE.clear()
        _FACTOR_CACHE[key] = (A, spla.splu(A), c_last)
    return _FACTOR_CACHE[key]


def solve_mean(problem):
    """Discrete solution of Mean(h) = 0 with Dirichlet data on r = 1."""
    g = problem.grid
    bvals = problem.boundary_ring()
    if not np.all(np.isfinite(bvals)):
        raise ValueError("boundary data must be finite")
    A, lu, c_last = _factor(g)
    rhs = np.zeros(A.shape[0])
    rhs[1 + (g.n_r - 2) * g.n_theta:] = -c_last * bvals
    u = lu.solve(rhs)
    # one step of iterative refinement; the rows next to r = 1 carry
    # coefficients of size ~1/dr^2, which costs a few digits in the LU solve
    u += lu.solve(rhs - A @ u)
    # normwise relative residual: the rows next to r = 1 have entries ~1/dr^2,
    # so the absolute residual is dominated by rounding in A @ u
    anorm = float(abs(A).sum(axis=1).max())
    resid = float(np.max(np.abs(A @ u - rhs))) / (anorm * np.max(np.abs(u)) + np.max(np.abs(rhs)))
    if not np.isfinite(resid) or resid > problem.tol:
        raise GeometryError("linear solve failed: relative residual %.3e" % resid)
    vals = np.empty((g.n_r + 1, g.n_theta))
    vals[0] = u[0]
    vals[1:-1] = u[1:].reshape(g.n_r - 1, g.n_theta)
    vals[-1] = bvals
    h = ScalarField(g, vals, {"residual": resid})
    h.info["scaled_residual"] = float(np.max(np.abs(apply_operator(h, edge="dirichlet"))))
    return h


# ---------------------------------------------------------------------------
# exact solution for the disk, used as an oracle

def radial_mode(k, r):
    """Radial profile of the solution with data e^{ikt}: (r/(1+L))^k (1 + k L)."""
    k = abs(int(k))
    r = np.asarray(r, dtype=float)
    L = np.sqrt(np.maximum(1 - r * r, 0.0))
    return (r / (1 + L)) ** k * (1 + k * L)


def spectral_mean(samples, x):
    """Exact mean b-map of the trigonometric interpolant of the samples."""
    samples = np.asarray(getattr(samples, "samples", samples), dtype=float)
    N = samples.size
    c = np.fft.rfft(samples) / N
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.hypot(x[:, 0], x[:, 1])
    t = np.arctan2(x[:, 1], x[:, 0])
    out = np.full(len(x), c[0].real)
    kmax = len(c) - 1
    for k in range(1, kmax + 1):
        w = 1.0 if (N % 2 == 0 and k == kmax) else 2.0
        out += w * radial_mode(k, r) * (c[k] * np.exp(1j * k * t)).real
    return out


def spectral_field(samples, grid):
    """spectral_mean on every ring of a grid, one FFT per ring."""
    samples = np.asarray(getattr(samples, "samples", samples), dtype=float)
    N = samples.size
    c = np.fft.rfft(samples) / N
    nt = grid.n_theta
    keep = min(len(c), nt // 2 + 1)
    k = np.arange(keep)
    vals = np.empty((grid.n_r + 1, nt))
    for i, r in enumerate(grid.r):
        coef = np.zeros(nt // 2 + 1, dtype=complex)
        coef[:keep] = c[:keep] * radial_mode_array(k, r)
        vals[i] = np.fft.irfft(coef * nt, n=nt)
    vals[0] = vals[0].mean()
    return ScalarField(grid, vals)


def radial_mode_array(k, r):
    L = np.sqrt(max(1 - r * r, 0.0))
    with np.errstate(divide="ignore", under="ignore"):
        return np.where(k == 0, 1.0, (r / (1 + L)) ** k * (1 + k * L))


# ---------------------------------------------------------------------------
# derivatives of grid fields

def polar_derivatives(h):
    """h_r, h_t, h_rr, h_rt, h_tt at the interior rings 1..n_r-1."""
    g = h.grid
    V = h.values
    _, d1, d2 = _radial_weights(g)
    a1, a2 = _angular_denominators(g)

    def dr(W):
        return d1[0][:, None] * W[:-2] + d1[1][:, None] * W[1:-1] + d1[2][:, None] * W[2:]

    def dt(W):
        return (np.roll(W, -1, axis=1) - np.roll(W, 1, axis=1)) / a1

    hr = dr(V)
    hrr = d2[0][:, None] * V[:-2] + d2[1][:, None] * V[1:-1] + d2[2][:, None] * V[2:]
    inner = V[1:-1]
    ht = dt(inner)
    htt = (np.roll(inner, -1, axis=1) - 2 * inner + np.roll(inner, 1, axis=1)) / a2
    hrt = dr(dt(V))
    return hr, ht, hrr, hrt, htt


def cartesian_hessian(h):
    """Euclidean Hessian (H_xx, H_xy, H_yy) at the interior rings."""
    g = h.grid
    hr, ht, hrr, hrt, htt = polar_derivatives(h)
    r = g.r[1:-1][:, None]
    c, s = np.cos(g.theta)[None, :], np.sin(g.theta)[None, :]
    tt = hr / r + htt / r ** 2
    rt = hrt / r - ht / r ** 2
    Hxx = hrr * c * c + tt * s * s - 2 * rt * c * s
    Hyy = hrr * s * s + tt * c * c + 2 * rt * c * s
    Hxy = (hrr - tt) * c * s + rt * (c * c - s * s)
    return Hxx, Hxy, Hyy


def mean_curvature_field(h, d=2, edge="one-sided"):
    """Mean(h) = (1/d) L (Delta h - Hess h(x,x)) at the pole and interior rings."""
    L = np.sqrt(1 - h.grid.r[:-1] ** 2)
    return apply_operator(h, edge) * L[:, None] / d


def mean_curvature(h, x=None, edge="one-sided"):
    """Mean curvature of a grid field, at the nodes or interpolated at x."""
    M = mean_curvature_field(h, edge=edge)
    if x is None:
        return M
    vals = np.vstack([M, M[-1:]])
    return interpolate(ScalarField(h.grid, vals), x)


def cmc_family(h_mean, t):
    """h_mean - t L, whose mean curvature is t."""
    L = np.sqrt(np.maximum(1 - h_mean.grid.r ** 2, 0.0))
    return ScalarField(h_mean.grid, h_mean.values - t * L[:, None])


def second_form(h, x=None):
    """II_h = L^-1 Hess h, as (n_r-1, n_theta, 2, 2) at the interior rings or at x."""
    Hxx, Hxy, Hyy = cartesian_hessian(h)
    L = np.sqrt(1 - h.grid.r[1:-1] ** 2)[:, None]
    II = np.stack([np.stack([Hxx, Hxy], -1), np.stack([Hxy, Hyy], -1)], -2) / L[..., None, None]
    if x is None:
        return II
    comps = []
    for a, b in ((0, 0), (0, 1), (1, 1)):
        vals = np.vstack([II[:1, :, a, b] * 0 + II[0, :, a, b].mean(), II[:, :, a, b],
                          II[-1:, :, a, b]])
        comps.append(interpolate(ScalarField(h.grid, vals), x))
    xx, xy, yy = comps
    return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -2)


def shape_trace(h):
    """tr(g^-1 II_h) at the interior rings; equals d Mean(h)."""
    g = h.grid
    II = second_form(h)
    X = g.nodes()[1:-1]
    r2 = g.r[1:-1][:, None] ** 2
    L2 = (1 - r2)[..., None, None]
    ginv = L2 * (np.eye(2) - X[..., :, None] * X[..., None, :])
    return np.einsum("...ij,...ji->...", ginv, II)


def _rho_theta_derivatives(V, grid):
    """(f_rho, f_t, f_rhorho, f_rhot, f_tt) on rings 2..n_r-3.

    Fourth-order central differences in rho (rings 0, 1 are continued through
    the pole to the antipodal rays) and spectral differences in theta.
    """
    n = grid.n_theta
    V = V[: grid.n_r]
    E = np.vstack([np.roll(V[2], n // 2), np.roll(V[1], n // 2), V])
    k = np.fft.fftfreq(n, 1.0 / n)
    k1 = 1j * k
    if n % 2 == 0:
        k1[n // 2] = 0.0
    F = np.fft.fft(E, axis=1)
    Et = np.fft.ifft(F * k1, axis=1).real
    Ett = np.fft.ifft(F * (-k * k), axis=1).real
    h = grid.drho

    def d1(W):
        return (W[:-4] - 8 * W[1:-3] + 8 * W[3:-1] - W[4:]) / (12 * h)

    def d2(W):
        return (-W[:-4] + 16 * W[1:-3] - 30 * W[2:-2] + 16 * W[3:-1] - W[4:]) / (12 * h * h)

    # E row m is ring m - 2, so rows 2..-3 of the stencil output are rings 2..n_r-3
    return d1(E)[2:], Et[2:-2][2:], d2(E)[2:], d1(Et)[2:], Ett[2:-2][2:]


def codazzi_defect(h, r_max=0.8, r_min=0.125):
    """max |D_X(L II)(Y,Z) - D_Y(L II)(X,Z)| over coordinate triples, rings with r <= r_max.

    L II = Hess h, so the defect measures the failure of the third Euclidean
    derivatives to be symmetric.  Both differentiations use fourth-order
    stencils in rho and spectral ones in theta, so for a smooth field the
    result is a discretisation floor well below the solver error.  Rings with
    r < r_min are skipped: the polar 1/r and 1/r^2 factors amplify the
    stencil error there.
    """
    g = h.grid
    ring = np.arange(2, g.n_r - 2)
    r = g.r[ring][:, None]
    q = 1 - r ** 2
    c, s = np.cos(g.theta)[None, :], np.sin(g.theta)[None, :]

    def polar(V):
        fp, ft, fpp, fpt, ftt = _rho_theta_derivatives(V, g)
        return fp / q, ft, (fpp + 2 * r * fp) / q ** 2, fpt / q, ftt

    hr, ht, hrr, hrt, htt = polar(h.values)
    tt = hr / r + htt / r ** 2
    rt = hrt / r - ht / r ** 2
    H = {
        "xx": hrr * c * c + tt * s * s - 2 * rt * c * s,
        "yy": hrr * s * s + tt * c * c + 2 * rt * c * s,
        "xy": (hrr - tt) * c * s + rt * (c * c - s * s),
    }

    def grad(W):
        # Hessian lives on rings 2..n_r-3; pad with zeros so ring indices line up
        P = np.zeros((g.n_r, g.n_theta))
        P[ring] = W
        fr, ft, *_ = polar(P)
        return fr * c - ft * s / r, fr * s + ft * c / r

    xx_x, xx_y = grad(H["xx"])
    xy_x, xy_y = grad(H["xy"])
    yy_x, yy_y = grad(H["yy"])
    d1 = np.abs(xy_x - xx_y)   # D_x H(y, x) - D_y H(x, x)
    d2 = np.abs(yy_x - xy_y)   # D_x H(y, y) - D_y H(x, y)
    # the padded Hessian is only trusted two rings inside its own support
    keep = (ring >= 4) & (ring <= g.n_r - 5) & (g.r[ring] >= r_min) & (g.r[ring] <= r_max)
    return float(max(d1[keep].max(), d2[keep].max()))


# ---------------------------------------------------------------------------
# grid dump

GRID_HEADER = "# cominkowski grid v1"


def write_grid(h, path, name="h"):
    g = h.grid
    lines = [GRID_HEADER, "name %s" % name, "n_r %d" % g.n_r, "n_theta %d" % g.n_theta,
             "rho_max %.17g" % g.rho_max, "grading %.17g" % g.grading,
             "rows %d" % (g.n_r + 1)]
    lines += [" ".join("%.17g" % v for v in row) for row in h.values]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_grid(path):
    with open(path) as f:
        rows = [r.rstrip("\n") for r in f]
    if rows[0] != GRID_HEADER:
        raise ValueError("%s:1: not a grid dump" % path)
    meta = dict(r.split(" ", 1) for r in rows[1:7])
    g = PolarGrid(int(meta["n_r"]), int(meta["n_theta"]), float(meta["rho_max"]))
    vals = np.array([[float(t) for t in r.split()] for r in rows[7:7 + g.n_r + 1]])
    return meta["name"], ScalarField(g, vals)
