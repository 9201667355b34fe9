"""Mean-curvature measures, the S1 norm and the volume of the convex core.

For a function h on the Klein ball the mean-curvature measure acts on test
functions by

    MM(h)(phi) = int h L^-d (Delta phi - Hess phi(x,x) - 2 <x, grad phi> - d L^-2 phi) dx
               = int (h / L) (Delta_H phi - d phi) dA_H,

the exact adjoint of h -> d Mean(h) dA_H; it vanishes on affine h and
gives alpha times the hyperbolic length on the bending line of a wedge.

The S1 norm and the volume are integrals over the Dirichlet polygon of
Gamma-invariant functions: for equivariant h1, h2 the quotient
(h1 - h2) / L is invariant, and

    ||tau||_S1 = d int_D (h_mean - h_minus) / L dA_H,
    vol(tau)   =   int_D (h_plus - h_minus) / L dA_H.

With this normalisation ||tau||_S1 is the total mass of MM(h_minus) on the
quotient, hence the length of a simplicial lamination, and in d = 2
vol(tau) = (||tau|| + ||-tau||) / 2.
"""
from dataclasses import dataclass, field

import numpy as np

from .envelope import lower_envelope, upper_envelope
from .fuchsian2 import translation_length
from .lamination import SERIES_TOL, sample_boundary
from .mean_solver import MeanProblem, PolarGrid, solve_mean
from .mink_linalg import GeometryError, conformal_factor

SANDWICH_TOL = 1e-6
AREA_TOL = 0.005


class ConsistencyError(GeometryError):
    """The computed surfaces violate an ordering they must satisfy."""


# ---------------------------------------------------------------------------
# test functions

@dataclass(frozen=True)
class TestFunction:
    """phi(x) = (1 - |x - c|^2 / R^2)^4 on the Euclidean ball B(c, R), zero outside.

    C^3, with support strictly inside the unit ball.
    """
    __test__ = False          # not a pytest class

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if not 0 < self.radius or np.linalg.norm(c) + self.radius >= 1.0:
            raise GeometryError("test function support must lie inside the open ball")

    @property
    def dim(self):
        return self.center.size

    def _s(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return y, np.sum(y * y, axis=-1) / self.radius ** 2

    def __call__(self, x):
        _, s = self._s(x)
        return np.where(s < 1, np.clip(1 - s, 0, None) ** 4, 0.0)

    def gradient(self, x):
        y, s = self._s(x)
        t = np.clip(1 - s, 0, None)
        return (-8 * t ** 3 / self.radius ** 2)[..., None] * y

    def hessian(self, x):
        y, s = self._s(x)
        t = np.clip(1 - s, 0, None)
        R2 = self.radius ** 2
        outer = y[..., :, None] * y[..., None, :]
        return ((48 * t ** 2 / R2 ** 2)[..., None, None] * outer
                - (8 * t ** 3 / R2)[..., None, None] * np.eye(self.dim))


def adjoint_mean(phi, x):
    """Delta phi - Hess phi(x,x) - 2 <x, grad phi> - d L^-2 phi, times L^-d."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if hasattr(phi, "parts"):
        val, g, H = phi.parts(x)
    else:
        val, g, H = phi(x), phi.gradient(x), phi.hessian(x)
    L2 = 1 - np.sum(x * x, axis=-1)
    lap = np.trace(H, axis1=-2, axis2=-1)
    rad = np.einsum("...i,...ij,...j->...", x, H, x)
    core = lap - rad - 2 * np.sum(x * g, axis=-1) - d * val / L2
    return core * L2 ** (-d / 2)


def _ball_rule(center, radius, n_radial, n_angular):
    """Gauss in the radius times trapezoid in the angle on a Euclidean disk."""
    s, ws = np.polynomial.legendre.leggauss(n_radial)
    rr = 0.5 * radius * (s + 1)
    wr = 0.5 * radius * ws * rr
    t = 2 * np.pi * np.arange(n_angular) / n_angular
    R, T = np.meshgrid(rr, t, indexing="ij")
    pts = np.stack([center[0] + R * np.cos(T), center[1] + R * np.sin(T)], -1).reshape(-1, 2)
    w = (wr[:, None] * np.full(n_angular, 2 * np.pi / n_angular)[None, :]).ravel()
    return pts, w


def _interval_rule(a, b, n, breaks=()):
    cuts = [a] + sorted(c for c in breaks if a < c < b) + [b]
    s, ws = np.polynomial.legendre.leggauss(n)
    xs, w = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        xs.append(lo + 0.5 * (hi - lo) * (s + 1))
        w.append(0.5 * (hi - lo) * ws)
    return np.concatenate(xs)[:, None], np.concatenate(w)


def mm_weak(h, phi, n_radial=200, n_angular=256, breaks=()):
    """MM(h)(phi) by quadrature over the support of phi.

    d = 1: Gauss on the support interval, split at `breaks` (kinks of h).
    d = 2: polar product rule centred on the support disk.
    """
    if phi.dim == 1:
        c, R = float(phi.center[0]), phi.radius
        x, w = _interval_rule(c - R, c + R, n_radial, breaks)
    elif phi.dim == 2:
        x, w = _ball_rule(phi.center, phi.radius, n_radial, n_angular)
    else:
        raise ValueError("mm_weak handles d = 1 and d = 2")
    vals = np.asarray(h(x), dtype=float).reshape(-1)
    return float(np.sum(w * vals * adjoint_mean(phi, x)))


def line_integral(line, phi, n=400):
    """int_l phi d(hyperbolic length), for a chord meeting the support of phi."""
    t = np.array([-line.n[1], line.n[0]])
    p = line.p
    # chord parameter range meeting the Euclidean support disk
    q = p - phi.center
    b = q @ t
    disc = b * b - (q @ q - phi.radius ** 2)
    if disc <= 0:
        return 0.0
    s0, s1 = -b - np.sqrt(disc), -b + np.sqrt(disc)
    s, ws = np.polynomial.legendre.leggauss(n)
    ss = s0 + 0.5 * (s1 - s0) * (s + 1)
    x = p[None, :] + ss[:, None] * t[None, :]
    Lp = float(conformal_factor(p))
    dl = Lp / (1 - np.sum(x * x, axis=1))
    return float(0.5 * (s1 - s0) * np.sum(ws * phi(x) * dl))


# ---------------------------------------------------------------------------
# quadrature on the Dirichlet polygon

@dataclass
class DomainQuadrature:
    """Nodes and hyperbolic-area weights on the Dirichlet polygon.

    Geodesic polar coordinates about the centre: for each edge the angle
    runs over the edge's span in `panels` Gauss panels, and for each angle
    the hyperbolic radius runs from 0 to the edge, where the ray meets it
    (computed exactly), with Gauss nodes weighted by sinh(rho).
    """
    points: np.ndarray
    weights: np.ndarray
    rho: np.ndarray
    n_rho: int
    n_theta: int
    panels: int

    @property
    def area(self):
        return float(np.sum(self.weights))

    def area_error(self, genus=2):
        exact = 4 * np.pi * (genus - 1)
        return abs(self.area - exact) / exact

    def integrate(self, f_vals):
        return float(np.sum(self.weights * f_vals))


def domain_quadrature(polygon, n_rho=48, n_theta=24, panels=2):
    V = polygon.vertices
    ang = np.arctan2(V[:, 1], V[:, 0])
    order = np.argsort(ang)
    V, ang = V[order], ang[order]
    sr, wr = np.polynomial.legendre.leggauss(n_rho)
    st, wt = np.polynomial.legendre.leggauss(n_theta)
    pts, wts, rhos = [], [], []
    n = len(V)
    for k in range(n):
        a, b = V[k], V[(k + 1) % n]
        t0, t1 = ang[k], ang[(k + 1) % n]
        if t1 <= t0:
            t1 += 2 * np.pi
        edges = np.linspace(t0, t1, panels + 1)
        normal = np.array([b[1] - a[1], a[0] - b[0]])
        off = normal @ a
        for lo, hi in zip(edges[:-1], edges[1:]):
            th = lo + 0.5 * (hi - lo) * (st + 1)
            wth = 0.5 * (hi - lo) * wt
            u = np.column_stack([np.cos(th), np.sin(th)])
            r_edge = off / (u @ normal)
            R = np.arctanh(r_edge)
            rho = 0.5 * R[:, None] * (sr[None, :] + 1)
            w = wth[:, None] * 0.5 * R[:, None] * wr[None, :] * np.sinh(rho)
            x = np.tanh(rho)[..., None] * u[:, None, :]
            pts.append(x.reshape(-1, 2))
            wts.append(w.ravel())
            rhos.append(rho.ravel())
    return DomainQuadrature(np.concatenate(pts), np.concatenate(wts), np.concatenate(rhos),
                            n_rho, n_theta, panels)


# ---------------------------------------------------------------------------
# surfaces of a cocycle

@dataclass
class Surfaces:
    boundary: object
    lower: object
    upper: object
    mean: object


def compute_surfaces(tau, grid=None, n_boundary=2048, tol=SERIES_TOL):
    """b_tau, h_minus, h_plus and h_mean for a cocycle (cached on the cocycle)."""
    grid = PolarGrid() if grid is None else grid
    key = ("surfaces", grid.n_r, grid.n_theta, grid.rho_max, n_boundary, tol)
    cache = getattr(tau, "_cache", {})
    if key in cache:
        return cache[key]
    if n_boundary % grid.n_theta and grid.n_theta % n_boundary:
        raise ValueError("boundary sample count and n_theta must divide one another")
    b = sample_boundary(tau, max(n_boundary, grid.n_theta), tol)
    bN = b if b.N == n_boundary else b.subsample(n_boundary)
    out = Surfaces(b, lower_envelope(bN), upper_envelope(bN),
                   solve_mean(MeanProblem(b, grid)))
    cache[key] = out
    return out


def _sandwich(values, what):
    worst = float(np.min(values))
    if worst < -SANDWICH_TOL:
        raise ConsistencyError("%s is negative at a quadrature node (%.3e)" % (what, worst))
    return worst


def s1_integral(surf, quad, d=2, check=True):
    """d int_D (h_mean - h_minus) / L dA_H.

    check=False skips the sandwich test; the error estimates use it for
    deliberately coarsened surfaces.
    """
    x = quad.points
    gap = surf.mean(x) - surf.lower(x)
    if check:
        _sandwich(gap, "h_mean - h_minus")
        _sandwich(surf.upper(x) - surf.mean(x), "h_plus - h_mean")
    return d * quad.integrate(gap * np.cosh(quad.rho))


def volume_integral(surf, quad, check=True):
    x = quad.points
    gap = surf.upper(x) - surf.lower(x)
    if check:
        _sandwich(gap, "h_plus - h_minus")
    return quad.integrate(gap * np.cosh(quad.rho))


def _check_area(quad):
    err = quad.area_error()
    if err > AREA_TOL:
        raise GeometryError("quadrature area %.6f is off 4 pi by %.3f%%" % (quad.area, 100 * err))
    return err


def s1_norm(tau, grid=None, n_boundary=2048, quad=None):
    """||tau||_S1 at the given resolution."""
    quad = domain_quadrature(tau.group.polygon) if quad is None else quad
    _check_area(quad)
    return s1_integral(compute_surfaces(tau, grid, n_boundary), quad)


def core_volume(tau, grid=None, n_boundary=2048, quad=None):
    """Volume of the convex core, int_D (h_plus - h_minus) / L dA_H."""
    quad = domain_quadrature(tau.group.polygon) if quad is None else quad
    _check_area(quad)
    return volume_integral(compute_surfaces(tau, grid, n_boundary), quad)


def lamination_length(lam):
    """sum of weight times translation length over the curves of `lam`."""
    if lam is None or not getattr(lam, "curves", None):
        return 0.0
    return float(sum(w * translation_length(c.A if hasattr(c, "A") else c) for c, w in lam.curves))


# ---------------------------------------------------------------------------
# reports with error bars

@dataclass
class NormReport:
    s1_plus: float
    s1_minus: float
    volume: float
    lam_length: float
    area_check: float
    error_bar: float
    settings: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    KEYS = ("s1_plus", "s1_minus", "volume", "lam_length", "area_check", "error_bar")
    HEADER = "# cominkowski norm report v1"

    def to_text(self):
        lines = [self.HEADER]
        lines += ["%s %.12g" % (k, getattr(self, k)) for k in self.KEYS]
        lines += ["err_%s %.6g" % (k, v) for k, v in sorted(self.errors.items())]
        lines += ["set_%s %s" % (k, v) for k, v in sorted(self.settings.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [r for r in text.splitlines() if r.strip()]
        if rows[0] != cls.HEADER:
            raise ValueError("line 1: not a norm report")
        kv = dict(r.split(" ", 1) for r in rows[1:])
        vals = {k: float(kv[k]) for k in cls.KEYS}
        errs = {k[4:]: float(v) for k, v in kv.items() if k.startswith("err_")}
        sets = {k[4:]: v for k, v in kv.items() if k.startswith("set_")}
        return cls(settings=sets, errors=errs, **vals)

    def symmetrization_gap(self):
        return abs(self.volume - 0.5 * (self.s1_plus + self.s1_minus))


def _estimates(tau, grid, n_boundary, quad_fine, quad_coarse, tol=SERIES_TOL):
    """Values and error bars of (s1(tau), s1(-tau), vol) at one resolution.

    The error of each value is the sum of the changes seen when the domain
    quadrature, the boundary sampling and the PDE grid are each coarsened
    once, plus the discrete PDE residual times the integrated weight.
    """
    neg = -tau
    surf_p = compute_surfaces(tau, grid, n_boundary, tol)
    surf_m = compute_surfaces(neg, grid, n_boundary, tol)

    def triple(sp_, sm_, q, check=False):
        return np.array([s1_integral(sp_, q, check=check), s1_integral(sm_, q, check=check),
                         volume_integral(sp_, q, check=check)])

    base = triple(surf_p, surf_m, quad_fine, check=True)
    d_quad = np.abs(base - triple(surf_p, surf_m, quad_coarse))
    half = max(n_boundary // 2, 16)
    sp_h = Surfaces(surf_p.boundary, lower_envelope(surf_p.boundary.subsample(half)),
                    upper_envelope(surf_p.boundary.subsample(half)), surf_p.mean)
    sm_h = Surfaces(surf_m.boundary, lower_envelope(surf_m.boundary.subsample(half)),
                    upper_envelope(surf_m.boundary.subsample(half)), surf_m.mean)
    d_env = np.abs(base - triple(sp_h, sm_h, quad_fine))
    coarse = grid.coarsen()
    sp_c = Surfaces(surf_p.boundary, surf_p.lower, surf_p.upper,
                    solve_mean(MeanProblem(surf_p.boundary, coarse)))
    sm_c = Surfaces(surf_m.boundary, surf_m.lower, surf_m.upper,
                    solve_mean(MeanProblem(surf_m.boundary, coarse)))
    d_pde = np.abs(base - triple(sp_c, sm_c, quad_fine))
    w_int = quad_fine.integrate(np.cosh(quad_fine.rho))
    res = max(surf_p.mean.info.get("scaled_residual", 0.0), surf_m.mean.info.get("scaled_residual", 0.0))
    d_res = 2 * res * w_int * np.array([1.0, 1.0, 0.0])
    return base, d_quad, d_env, d_pde, d_res


def norm_report(tau, lam=None, grid=None, n_boundary=2048, n_rho=48, n_theta=24, panels=2,
                tol=SERIES_TOL):
    """s1(tau), s1(-tau), vol(tau) with composite error bars."""
    grid = PolarGrid() if grid is None else grid
    P = tau.group.polygon
    qf = domain_quadrature(P, n_rho, n_theta, panels)
    qc = domain_quadrature(P, max(n_rho // 2, 4), max(n_theta // 2, 4), panels)
    area_err = _check_area(qf)
    base, dq, de, dp, dr = _estimates(tau, grid, n_boundary, qf, qc, tol)
    err = dq + de + dp + dr
    names = ("s1_plus", "s1_minus", "volume")
    errors = {}
    for i, nme in enumerate(names):
        errors[nme] = float(err[i])
        errors[nme + "_quad"] = float(dq[i])
        errors[nme + "_envelope"] = float(de[i])
        errors[nme + "_pde"] = float(dp[i])
    settings = {"n_r": grid.n_r, "n_theta": grid.n_theta, "n_boundary": n_boundary,
                "quad_nodes": len(qf.weights)}
    bar = float(np.max(err))
    return NormReport(float(base[0]), float(base[1]), float(base[2]), lamination_length(lam),
                      qf.area, bar, settings, errors)


# ---------------------------------------------------------------------------
# the measure identity via a partition of unity

@dataclass(frozen=True)
class OrbitBump:
    """psi(x) = beta(cosh d(x, X)) for a point X of the hyperboloid, beta(q) = (1 - s)^4_+,
    s = (q - 1) / (cosh R - 1)."""
    X: np.ndarray
    radius: float

    def _q(self, x):
        x = np.asarray(x, dtype=float)
        L = np.sqrt(1 - np.sum(x * x, axis=-1))
        a = self.X[2] - x @ self.X[:2]
        return x, L, a, a / L

    def parts(self, x):
        """value, gradient and Hessian in Klein coordinates."""
        x, L, a, q = self._q(x)
        Q = np.cosh(self.radius) - 1
        s = (q - 1) / Q
        t = np.clip(1 - s, 0, None)
        b0 = t ** 4
        b1 = -4 * t ** 3 / Q
        b2 = 12 * t ** 2 / Q ** 2
        ga = -self.X[:2]
        gq = ga[None, :] / L[:, None] + (a / L ** 3)[:, None] * x
        outer_ax = ga[None, :, None] * x[:, None, :]
        Hq = ((outer_ax + np.swapaxes(outer_ax, 1, 2)) / (L ** 3)[:, None, None]
              + (a / L ** 3)[:, None, None] * np.eye(2)
              + (3 * a / L ** 5)[:, None, None] * x[:, :, None] * x[:, None, :])
        val = b0
        grad = b1[:, None] * gq
        hess = b2[:, None, None] * gq[:, :, None] * gq[:, None, :] + b1[:, None, None] * Hq
        return val, grad, hess


@dataclass
class PartitionOfUnity:
    """phi = psi_0 / sum_g psi_g over the orbit of the origin.

    sum over Gamma of phi o g is identically 1, so MM(h)(phi) is the total
    mass on the quotient of the measure of an equivariant h.
    """
    group: object
    radius: float = 2.8

    def __post_init__(self):
        if self.radius <= self.group.polygon.circumradius:
            raise ValueError("bump radius must exceed the circumradius so the sum stays positive")
        words = self.group.ball(2 * self.radius + 1e-9)
        self.bumps = [OrbitBump(w.A @ np.array([0.0, 0.0, 1.0]), self.radius) for w in words]
        self.center = np.zeros(2)

    @property
    def dim(self):
        return 2

    def _all(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        v0, g0, h0 = self.bumps[0].parts(x)
        S = np.zeros(len(x))
        gS = np.zeros((len(x), 2))
        hS = np.zeros((len(x), 2, 2))
        for b in self.bumps:
            v, g, h = b.parts(x)
            S += v
            gS += g
            hS += h
        # far from the orbit no bump is on; psi_0 vanishes there too
        S = np.where(S > 0, S, 1.0)
        f = v0 / S
        gf = g0 / S[:, None] - (v0 / S ** 2)[:, None] * gS
        hf = (h0 / S[:, None, None]
              - (g0[:, :, None] * gS[:, None, :] + gS[:, :, None] * g0[:, None, :]) / (S ** 2)[:, None, None]
              - (v0 / S ** 2)[:, None, None] * hS
              + (2 * v0 / S ** 3)[:, None, None] * gS[:, :, None] * gS[:, None, :])
        return f, gf, hf

    def parts(self, x):
        return self._all(x)

    def __call__(self, x):
        return self._all(x)[0]

    def gradient(self, x):
        return self._all(x)[1]

    def hessian(self, x):
        return self._all(x)[2]


def measure_total(h, pou, n_rho=160, n_theta=512):
    """MM(h)(phi) for the partition-of-unity function phi, in geodesic polar coordinates."""
    s, ws = np.polynomial.legendre.leggauss(n_rho)
    R = pou.radius
    rho = 0.5 * R * (s + 1)
    wr = 0.5 * R * ws
    t = 2 * np.pi * np.arange(n_theta) / n_theta
    r = np.tanh(rho)
    dr = wr / np.cosh(rho) ** 2            # dr = sech^2 rho drho
    X = np.stack([np.outer(r, np.cos(t)), np.outer(r, np.sin(t))], -1).reshape(-1, 2)
    W = (r * dr)[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]
    vals = np.asarray(h(X), dtype=float)
    f = vals * adjoint_mean(pou, X)
    return float(np.sum(W.ravel() * f))
