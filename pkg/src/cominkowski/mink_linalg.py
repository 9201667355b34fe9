"""Minkowski forms and the Klein ball model.

Points of the open unit ball B^d are plain arrays of shape (..., d).
Minkowski vectors have shape (..., d+1) with the timelike coordinate last,
and the form has signature (d, 1).

The conformal factor L(x) = sqrt(1 - |x|^2) drives everything: the
hyperbolic metric, the volume density and the Hessian conversions below.
"""
import numpy as np

INTERIOR_GUARD = 1e-9


class GeometryError(ValueError):
    """Raised when a point leaves the domain where a formula is valid."""


def mink_form(x, y):
    """Signature (d,1) bilinear form, batched along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]


def mink_norm2(x):
    return mink_form(x, x)


def classify(x, tol=1e-12):
    """Return 'spacelike', 'timelike' or 'lightlike'."""
    q = float(mink_norm2(x))
    scale = float(np.dot(x, x))
    if abs(q) <= tol * max(scale, 1.0):
        return "lightlike"
    return "spacelike" if q > 0 else "timelike"


def J(d):
    """Gram matrix of the Minkowski form."""
    m = np.eye(d + 1)
    m[d, d] = -1.0
    return m


def _check_interior(x, guard=INTERIOR_GUARD):
    r2 = np.sum(np.asarray(x) ** 2, axis=-1)
    if np.any(r2 > (1.0 - guard) ** 2):
        raise GeometryError("point outside the open unit ball (|x| > 1 - %g)" % guard)
    return r2


def conformal_factor(x, guard=INTERIOR_GUARD):
    """L(x) = sqrt(1 - |x|^2)."""
    r2 = _check_interior(x, guard)
    return np.sqrt(1.0 - r2)


def homogeneous(x):
    """(x, 1) in R^{d,1}."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)


def lift(x):
    """Point of the hyperboloid above x, i.e. (x, 1) / L(x)."""
    return homogeneous(x) / conformal_factor(x)[..., None]


def project(X):
    """Klein projection of a timelike or lightlike vector."""
    X = np.asarray(X, dtype=float)
    return X[..., :-1] / X[..., -1:]


def hyp_metric(x):
    """Matrix of the hyperbolic metric at x: L^-2 I + L^-4 x x^T."""
    x = np.asarray(x, dtype=float)
    L2 = conformal_factor(x) ** 2
    d = x.shape[-1]
    return (np.eye(d) / L2[..., None, None]
            + x[..., :, None] * x[..., None, :] / (L2 ** 2)[..., None, None])


def hyp_metric_inverse(x):
    """Inverse metric L^2 (I - x x^T)."""
    x = np.asarray(x, dtype=float)
    L2 = conformal_factor(x) ** 2
    d = x.shape[-1]
    return L2[..., None, None] * (np.eye(d) - x[..., :, None] * x[..., None, :])


def hyp_distance(x, y):
    """Hyperbolic distance between two points of the Klein ball.

    Uses the hyperboloid lifts X, Y and the identity
    <X - Y, X - Y> = 4 sinh^2(d/2), which stays accurate for nearby points
    where arccosh(-<X,Y>) would lose half the digits.
    """
    X = lift(x)
    Y = lift(y)
    q = mink_norm2(X - Y)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0)))


def hyp_volume_density(x):
    """Density of the hyperbolic volume with respect to Lebesgue measure."""
    x = np.asarray(x, dtype=float)
    return conformal_factor(x) ** (-(x.shape[-1] + 1))


def euclid_to_hyp_hessian(h_hess, grad, x):
    """Hyperbolic Hessian from the Euclidean one.

    Hess^H f(X,Y) = Hess f(X,Y) - L^-2 (<x,X> df(Y) + <x,Y> df(X)).
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    L2 = conformal_factor(x) ** 2
    cross = x[..., :, None] * grad[..., None, :]
    return np.asarray(h_hess) - (cross + np.swapaxes(cross, -1, -2)) / L2[..., None, None]


def mean_trace(h_hess, x):
    """Trace of a Euclidean Hessian with respect to the hyperbolic metric.

    Equals L^2 (Laplacian - Hess(x, x)).
    """
    x = np.asarray(x, dtype=float)
    h_hess = np.asarray(h_hess, dtype=float)
    L2 = conformal_factor(x) ** 2
    lap = np.trace(h_hess, axis1=-2, axis2=-1)
    radial = np.einsum("...i,...ij,...j->...", x, h_hess, x)
    return L2 * (lap - radial)


def mean_curvature_from_hessian(h_hess, x):
    """Mean curvature (1/d) L (Laplacian - Hess(x, x)) of the graph of h."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return mean_trace(h_hess, x) / (d * conformal_factor(x))


def L_derivatives(x):
    """L, grad L and the Euclidean Hessian of L at x."""
    x = np.asarray(x, dtype=float)
    L = conformal_factor(x)
    grad = -x / L[..., None]
    d = x.shape[-1]
    hess = -(np.eye(d) / L[..., None, None]
             + x[..., :, None] * x[..., None, :] / (L ** 3)[..., None, None])
    return L, grad, hess
