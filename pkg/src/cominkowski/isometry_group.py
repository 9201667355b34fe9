"""Isometries (A, v) of Minkowski space and their action on co-Minkowski space.

A is a linear isometry of the form with A[d, d] > 0 (it preserves the upper
sheet of the hyperboloid), v is a translation vector.  The group law is
(A1, v1)(A2, v2) = (A1 A2, v1 + A1 v2).

In the cylindrical model a co-Minkowski point is a pair (x, h) with x in the
Klein ball.  It stands for the spacelike plane {y : <(x,1), y> = h}, and the
action of (A, v) is the one induced on these planes.
"""
from dataclasses import dataclass

import numpy as np

from .mink_linalg import GeometryError, J, homogeneous, mink_form

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Isometry:
    A: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        v = np.array(self.v, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or v.shape != (A.shape[0],):
            raise ValueError("shape mismatch between A %s and v %s" % (A.shape, v.shape))
        A.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "v", v)

    @property
    def dim(self):
        return self.A.shape[0] - 1

    @classmethod
    def identity(cls, d=2):
        return cls(np.eye(d + 1), np.zeros(d + 1))

    @classmethod
    def linear(cls, A):
        A = np.asarray(A, dtype=float)
        return cls(A, np.zeros(A.shape[0]))

    @classmethod
    def translation(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(np.eye(v.size), v)

    def inverse(self):
        Ainv = lorentz_inverse(self.A)
        return Isometry(Ainv, -Ainv @ self.v)

    def __matmul__(self, other):
        return compose(self, other)

    def defect(self):
        d = self.dim
        return float(np.max(np.abs(self.A.T @ J(d) @ self.A - J(d))))


def lorentz_inverse(A):
    """A^-1 = J A^T J for A in O(d,1)."""
    Jd = J(A.shape[0] - 1)
    return Jd @ A.T @ Jd


def validate(iso, tol=ORTHO_TOL):
    """True iff A preserves the form (to tol) and the upper sheet."""
    A = iso.A
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(iso.v)):
        return False
    return iso.defect() <= tol * max(1.0, np.max(np.abs(A)) ** 2) and A[-1, -1] > 0


def reorthonormalize(A):
    """Gram-Schmidt in the Minkowski form, timelike column first.

    Brings a nearly Lorentzian matrix back onto O+(d,1); used after long
    products where rounding has accumulated.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    order = [n - 1] + list(range(n - 1))
    cols = {}
    for j in order:
        c = A[:, j].copy()
        for k, e in cols.items():
            c -= mink_form(c, e) / mink_form(e, e) * e
        q = mink_form(c, c)
        c /= np.sqrt(abs(q))
        cols[j] = c
    out = np.column_stack([cols[j] for j in range(n)])
    if out[-1, -1] < 0:
        out[:, -1] *= -1.0
    return out


def compose(a, b):
    """Group law (A1 A2, v1 + A1 v2), with a J-Gram-Schmidt pass if needed."""
    A = a.A @ b.A
    v = a.v + a.A @ b.v
    d = A.shape[0] - 1
    scale = max(1.0, np.max(np.abs(A)) ** 2)
    if np.max(np.abs(A.T @ J(d) @ A - J(d))) > ORTHO_TOL * scale:
        A = reorthonormalize(A)
    return Isometry(A, v)


def boost(t, axis=0, d=2):
    """Hyperbolic translation of length t along the x_axis direction."""
    A = np.eye(d + 1)
    c, s = np.cosh(t), np.sinh(t)
    A[axis, axis] = c
    A[d, d] = c
    A[axis, d] = s
    A[d, axis] = s
    return A


def rotation(theta, d=2, plane=(0, 1)):
    """Euclidean rotation of the Klein ball (an elliptic isometry)."""
    A = np.eye(d + 1)
    i, j = plane
    c, s = np.cos(theta), np.sin(theta)
    A[i, i], A[i, j], A[j, i], A[j, j] = c, -s, s, c
    return A


def translation_along(theta, t):
    """Translation of length t along the diameter at angle theta (d=2)."""
    return rotation(theta) @ boost(t) @ rotation(-theta)


def act_klein(A, x):
    """Projective action A.x on the Klein ball (batched over leading axes)."""
    X = homogeneous(x) @ np.asarray(A).T
    if np.any(X[..., -1] <= 0):
        raise GeometryError("linear part does not preserve the upper sheet")
    return X[..., :-1] / X[..., -1:]


def act_klein_vectors(A, x):
    """Same action, also returning the last coordinate of A(x,1).

    That coordinate equals L(x)/L(A.x); it is the factor relating the
    homogeneous representatives.
    """
    X = homogeneous(x) @ np.asarray(A).T
    return X[..., :-1] / X[..., -1:], X[..., -1]


@dataclass(frozen=True)
class CoMinkPoint:
    x: np.ndarray
    h: float


def act_comink(iso, p):
    """(A,v)(x,h) = (A.x, L(A.x)/L(x) h + <A.x, vbar> - v_{d+1})."""
    x = np.asarray(p.x, dtype=float)
    y, lam = act_klein_vectors(iso.A, x)
    # lam = L(x) / L(A.x), computed without cancellation
    h = np.asarray(p.h) / lam + mink_form(homogeneous(y), iso.v)
    return CoMinkPoint(y, h)


def act_function(iso, h):
    """Action on functions whose graphs are spacelike surfaces.

    ((A,v)h)(x) = L(x)/L(A^-1.x) h(A^-1.x) + <x, vbar> - v_{d+1}.

    `h` may be any callable on arrays of Klein points; objects that know how
    to resample themselves (grid fields) get resampled on their own grid.
    """
    inv = lorentz_inverse(iso.A)
    v = iso.v

    def g(x):
        x = np.asarray(x, dtype=float)
        y, lam = act_klein_vectors(inv, x)
        return np.asarray(h(y)) * lam + mink_form(homogeneous(x), v)

    if hasattr(h, "resample"):
        return h.resample(g)
    return g


def dual_plane_function(P):
    """h_P(x) = <P, (x,1)>."""
    P = np.asarray(P, dtype=float)
    return lambda x: mink_form(homogeneous(np.asarray(x, dtype=float)), P)


def dual_action_check(iso, P, samples=None, rng=None):
    """Max over sample points of |(iso h_P) - h_{iso(P)}|, which should vanish."""
    P = np.asarray(P, dtype=float)
    d = P.size - 1
    if samples is None:
        rng = np.random.default_rng(0) if rng is None else rng
        dirs = rng.normal(size=(256, d))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        samples = dirs * (0.95 * rng.random(256) ** (1.0 / d))[:, None]
    lhs = act_function(iso, dual_plane_function(P))(samples)
    rhs = dual_plane_function(iso.A @ P + iso.v)(samples)
    return float(np.max(np.abs(lhs - rhs)))


def flip(h):
    """The map h -> -h, induced by -Id which is not in O+(d,1)."""
    return lambda x: -np.asarray(h(x))


def hessian_pullback(iso, hess_at_pullback, x):
    """Hessian of (A,v)h at x from the Hessian of h at A^-1.x.

    Hess[(A,v)h](x)(X,Y) = L(x)/L(A^-1.x) Hess h(A^-1.x)(DA^-1 X, DA^-1 Y),
    where DA^-1 is the differential of the projective map x -> A^-1.x.
    """
    inv = lorentz_inverse(iso.A)
    x = np.asarray(x, dtype=float)
    y, lam = act_klein_vectors(inv, x)
    D = klein_differential(inv, x)
    H = np.asarray(hess_at_pullback(y))
    return lam * np.einsum("ki,kl,lj->ij", D, H, D)


def klein_differential(A, x):
    """Jacobian of x -> A.x at a single point x."""
    A = np.asarray(A, dtype=float)
    X = A @ homogeneous(x)
    num, den = X[:-1], X[-1]
    Ab = A[:-1, :-1]
    a = A[-1, :-1]
    return (Ab * den - np.outer(num, a)) / den ** 2
