import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cominkowski.mink_linalg import (GeometryError, L_derivatives, classify, conformal_factor,
                                     euclid_to_hyp_hessian, homogeneous, hyp_distance, hyp_metric,
                                     hyp_metric_inverse, hyp_volume_density, lift, mean_curvature_from_hessian,
                                     mean_trace, mink_form, project)

coord = st.floats(-0.65, 0.65)
klein = st.tuples(coord, coord).map(np.array)


def test_mink_form_examples():
    assert mink_form(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 1
    assert mink_form(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == -1
    assert mink_form(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == 0
    assert classify(np.array([1.0, 0, 0])) == "spacelike"
    assert classify(np.array([0.0, 0, 1])) == "timelike"
    assert classify(np.array([1.0, 0, 1])) == "lightlike"


def test_conformal_factor():
    assert conformal_factor(np.zeros(2)) == 1.0
    assert np.isclose(conformal_factor(np.array([0.6, 0.0])), 0.8)
    r = np.linspace(0, 0.999, 50)
    L = conformal_factor(np.column_stack([r, 0 * r]))
    assert np.all(np.diff(L) < 0)
    with pytest.raises(GeometryError):
        conformal_factor(np.array([1.0, 0.0]))


@given(klein)
def test_conformal_identity(x):
    assert abs(conformal_factor(x) ** 2 + x @ x - 1) < 1e-15


def test_hyp_metric_examples():
    assert np.allclose(hyp_metric(np.zeros(2)), np.eye(2))
    # L^-2 I + L^-4 x x^T written out at x = (0.6, 0)
    g = hyp_metric(np.array([0.6, 0.0]))
    assert np.allclose(g, np.diag([1 / 0.64 + 0.36 / 0.4096, 1 / 0.64]), rtol=1e-14)
    assert np.isclose(g[0, 0], 0.8 ** -4)


@given(klein)
def test_hyp_metric_radial_eigenvalue(x):
    if np.linalg.norm(x) < 1e-3:
        return
    u = x / np.linalg.norm(x)
    L = conformal_factor(x)
    assert np.isclose(u @ hyp_metric(x) @ u, L ** -4, rtol=1e-12)


def test_hyp_metric_positive_definite(rng):
    x = rng.uniform(-1, 1, size=(10_000, 2))
    x = x[np.linalg.norm(x, axis=1) < 0.999]
    g = hyp_metric(x)
    np.linalg.cholesky(g)
    assert np.allclose(hyp_metric_inverse(x) @ g, np.eye(2), atol=1e-8)


def test_hyp_distance_from_origin():
    assert hyp_distance(np.array([0.3, 0.2]), np.array([0.3, 0.2])) == 0
    # length of the radial chord in the metric: int_0^r dr / (1 - r^2)
    for r in (0.1, 0.5, 0.9):
        along, _ = quad(lambda s: 1 / (1 - s * s), 0, r)
        d = hyp_distance(np.zeros(2), np.array([r, 0.0]))
        assert np.isclose(d, along, rtol=1e-12)
        assert np.isclose(d, np.arctanh(r), rtol=1e-12)
    assert np.isclose(hyp_distance(np.zeros(2), np.array([0.5, 0.0])), 0.5 * np.log(3.0))


def test_hyp_distance_close_points():
    x = np.array([0.4, -0.2])
    y = x + np.array([1e-9, 0.0])
    g = hyp_metric(x)
    expect = 1e-9 * np.sqrt(g[0, 0])
    assert np.isclose(hyp_distance(x, y), expect, rtol=1e-6)


@given(klein, klein, klein)
def test_hyp_distance_metric_axioms(x, y, z):
    dxy, dyx = hyp_distance(x, y), hyp_distance(y, x)
    assert abs(dxy - dyx) < 1e-10
    assert dxy >= 0
    assert hyp_distance(x, z) <= dxy + hyp_distance(y, z) + 1e-10


def test_lift_project():
    x = np.array([0.3, -0.5])
    X = lift(x)
    assert np.isclose(mink_form(X, X), -1)
    assert np.allclose(project(X), x)
    assert np.allclose(homogeneous(x), [0.3, -0.5, 1.0])


def test_volume_density():
    assert hyp_volume_density(np.zeros(2)) == 1
    assert np.isclose(hyp_volume_density(np.array([0.6, 0.0])), 1.953125, rtol=1e-14)
    for r in (0.3, 0.8, 0.95):
        rho = np.arctanh(r)
        area, _ = quad(lambda s: 2 * np.pi * s * hyp_volume_density(np.array([s, 0.0])), 0, r)
        assert np.isclose(area, 2 * np.pi * (np.cosh(rho) - 1), rtol=1e-10)


def test_hyp_hessian_origin():
    H = np.array([[2.0, 0.5], [0.5, -1.0]])
    assert np.allclose(euclid_to_hyp_hessian(H, np.array([1.0, 3.0]), np.zeros(2)), H)


@given(klein)
def test_euclidean_hessian_of_L(x):
    # Hess L = -L g_H holds for the Euclidean Hessian
    L, _, hess = L_derivatives(x)
    want = -L * hyp_metric(x)
    assert np.max(np.abs(hess - want)) <= 1e-12 * np.max(np.abs(want))


@given(klein, st.integers(0, 2 ** 31 - 1))
@settings(max_examples=30, deadline=None)
def test_hyperbolic_hessian_identity(x, seed):
    # L^-1 Hess f = Hess^H(f / L) - (f / L) g_H, with Hess^H(f / L) from the Christoffel formula
    r = np.random.default_rng(seed)
    Q = r.normal(size=(2, 2))
    Q = Q + Q.T
    b = r.normal(size=2)
    f = lambda y: 0.5 * y @ Q @ y + b @ y + 0.3
    L = conformal_factor(x)
    df = Q @ x + b
    # Euclidean derivatives of F = f / L, by hand
    F = f(x) / L
    gF = df / L + f(x) * x / L ** 3
    cross = np.outer(df, x) + np.outer(x, df)
    HF = Q / L + cross / L ** 3 + f(x) * (np.eye(2) / L ** 3 + 3 * np.outer(x, x) / L ** 5)
    lhs = Q / L
    rhs = euclid_to_hyp_hessian(HF, gF, x) - F * hyp_metric(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1.0, np.max(np.abs(HF)))


def _geodesic(x, X):
    """Unit-parameter hyperbolic geodesic through x with initial velocity X."""
    L = conformal_factor(x)
    P = homogeneous(x) / L
    W = np.append(X, 0.0) / L + homogeneous(x) * (x @ X) / L ** 3
    q = np.sqrt(mink_form(W, W))
    return lambda t: project(np.cosh(q * t) * P + np.sinh(q * t) / q * W)


def test_hyp_hessian_finite_differences(rng):
    # Hess^H f(X, X) is the second derivative of f along the geodesic with velocity X
    for _ in range(10):
        Q = rng.normal(size=(2, 2))
        Q = Q + Q.T
        b = rng.normal(size=2)
        f = lambda y: 0.5 * y @ Q @ y + b @ y
        x = rng.uniform(-0.5, 0.5, size=2)
        Hh = euclid_to_hyp_hessian(Q, Q @ x + b, x)
        for X in (np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.6, -0.8])):
            gam = _geodesic(x, X)
            eps = 1e-4
            fd = (f(gam(eps)) - 2 * f(gam(0.0)) + f(gam(-eps))) / eps ** 2
            assert abs(fd - X @ Hh @ X) < 1e-6 * max(1.0, abs(fd))


def test_mean_trace_examples(rng):
    x = rng.uniform(-0.6, 0.6, size=(50, 2))
    assert np.all(mean_trace(np.zeros((50, 2, 2)), x) == 0)
    L, _, hess = L_derivatives(x)
    assert np.allclose(mean_trace(-hess, x), 2 * L, rtol=1e-12)
    assert np.allclose(mean_curvature_from_hessian(-hess, x), 1.0, rtol=1e-12)
    assert mean_trace(np.eye(2), np.zeros(2)) == 2
    assert mean_trace(np.eye(3), np.zeros(3)) == 3
