import numpy as np
from hypothesis import given, settings, strategies as st

from cominkowski.isometry_group import (CoMinkPoint, Isometry, act_comink, act_function, act_klein, boost,
                                        compose, dual_action_check, dual_plane_function, flip,
                                        hessian_pullback, klein_differential, reorthonormalize, rotation,
                                        translation_along, validate)
from cominkowski.mink_linalg import J, conformal_factor, hyp_distance

from conftest import random_disk_points

angle = st.floats(0, 2 * np.pi)
rapidity = st.floats(-2, 2)
vec = st.lists(st.floats(-3, 3), min_size=3, max_size=3).map(np.array)
isometries = st.builds(lambda a, t, b, v: Isometry(rotation(a) @ boost(t) @ rotation(b), v),
                       angle, rapidity, angle, vec)
point = st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)).map(np.array)


def close(a, b, tol):
    return np.max(np.abs(a.A - b.A)) <= tol * max(1.0, np.max(np.abs(a.A))) and \
        np.max(np.abs(a.v - b.v)) <= tol * max(1.0, np.max(np.abs(a.v)))


def test_validate_examples():
    assert validate(Isometry.identity())
    assert not validate(Isometry.linear(np.diag([1.0, 1.0, -1.0])))
    for t in (0.3, 1.0, 3.0):
        A = boost(t)
        assert validate(Isometry.linear(A))
        assert np.allclose(A.T @ J(2) @ A, J(2))
    assert not validate(Isometry.linear(np.diag([1.0, 1.1, 1.0])))


def test_identity_and_inverse():
    g = Isometry(translation_along(0.7, 1.3), np.array([0.2, -1.0, 0.5]))
    e = Isometry.identity()
    assert close(compose(g, e), g, 1e-15)
    assert close(compose(e, g), g, 1e-15)
    assert close(compose(g, g.inverse()), e, 1e-12)


@given(isometries, isometries, isometries)
def test_associativity(a, b, c):
    assert close((a @ b) @ c, a @ (b @ c), 1e-12)


def test_reorthonormalize(rng):
    A = rotation(0.3) @ boost(1.2) @ rotation(-1.1)
    noisy = A + 1e-7 * rng.normal(size=(3, 3))
    B = reorthonormalize(noisy)
    assert Isometry.linear(B).defect() < 1e-12
    assert np.max(np.abs(B - A)) < 1e-5
    assert B[2, 2] > 0


def test_act_klein_examples():
    x = np.array([0.2, -0.4])
    assert np.allclose(act_klein(np.eye(3), x), x)
    for t in (0.1, 1.0, 2.5):
        assert np.allclose(act_klein(boost(t), np.zeros(2)), [np.tanh(t), 0.0], atol=1e-15)


@given(isometries, point, point)
def test_act_klein_isometry(g, x, y):
    d0 = hyp_distance(x, y)
    d1 = hyp_distance(act_klein(g.A, x), act_klein(g.A, y))
    assert abs(d0 - d1) < 1e-10 * max(1.0, d0)


def test_act_comink_translation():
    v = np.array([0.3, -0.7, 1.1])
    p = CoMinkPoint(np.array([0.1, 0.5]), 0.25)
    q = act_comink(Isometry.translation(v), p)
    assert np.allclose(q.x, p.x)
    assert np.isclose(q.h, p.h + p.x @ v[:2] - v[2])


@given(isometries, point, st.floats(-3, 3))
def test_act_comink_preserves_tL(g, x, t):
    lin = Isometry.linear(g.A)
    q = act_comink(lin, CoMinkPoint(x, t * conformal_factor(x)))
    assert abs(q.h - t * conformal_factor(q.x)) < 1e-10 * max(1.0, abs(t))


@given(isometries, isometries, point, st.floats(-2, 2))
def test_act_comink_group_action(a, b, x, h):
    p = CoMinkPoint(x, h)
    lhs = act_comink(a @ b, p)
    rhs = act_comink(a, act_comink(b, p))
    scale = max(1.0, abs(lhs.h))
    assert np.max(np.abs(lhs.x - rhs.x)) < 1e-11
    assert abs(lhs.h - rhs.h) < 1e-11 * scale * 10


def test_act_function_minus_L(rng):
    minus_L = lambda x: -conformal_factor(x)
    x = random_disk_points(rng, 300, 0.95)
    for _ in range(5):
        A = rotation(rng.uniform(0, 6)) @ boost(rng.uniform(0, 2))
        g = act_function(Isometry.linear(A), minus_L)
        assert np.allclose(g(x), minus_L(x), atol=1e-12)


def test_act_function_preserves_convexity(rng):
    h = lambda x: np.sqrt(1.0 + 4 * np.sum((x - 0.2) ** 2, axis=-1)) + x[..., 0]
    g = act_function(Isometry(boost(1.1) @ rotation(0.4), rng.normal(size=3)), h)
    p = random_disk_points(rng, 1000, 0.9)
    q = random_disk_points(rng, 1000, 0.9)
    mid = g(0.5 * (p + q))
    assert np.all(mid <= 0.5 * (g(p) + g(q)) + 1e-12)


def test_hessian_pullback_finite_differences(rng):
    Q = np.array([[2.0, 0.4], [0.4, 1.0]])
    h = lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, Q, x) + 0.3 * x[..., 1]
    hess = lambda y: Q
    for _ in range(5):
        iso = Isometry(rotation(rng.uniform(0, 6)) @ boost(rng.uniform(0, 1.5)), rng.normal(size=3))
        g = act_function(iso, h)
        x = rng.uniform(-0.4, 0.4, size=2)
        eps = 1e-4
        E = np.eye(2) * eps
        fd = np.array([[(g(x + a + b) - g(x + a - b) - g(x - a + b) + g(x - a - b)) / (4 * eps ** 2)
                        for b in E] for a in E])
        H = hessian_pullback(iso, hess, x)
        assert np.max(np.abs(H - fd)) < 1e-5 * max(1.0, np.max(np.abs(H)))


def test_klein_differential(rng):
    A = rotation(0.3) @ boost(0.8)
    x = np.array([0.1, -0.3])
    eps = 1e-6
    fd = np.column_stack([(act_klein(A, x + e) - act_klein(A, x - e)) / (2 * eps) for e in np.eye(2) * eps])
    assert np.allclose(klein_differential(A, x), fd, atol=1e-8)


def test_dual_action_examples(rng):
    P = rng.normal(size=3)
    assert dual_action_check(Isometry.identity(), P) == 0
    v = rng.normal(size=3)
    x = random_disk_points(rng, 50)
    moved = act_function(Isometry.translation(v), dual_plane_function(P))(x)
    assert np.allclose(moved, dual_plane_function(P + v)(x), atol=1e-14)
    assert np.allclose(moved, dual_plane_function(P)(x) + x @ v[:2] - v[2], atol=1e-14)


@settings(max_examples=50)
@given(isometries, vec)
def test_dual_action_equivariance(g, P):
    assert dual_action_check(g, P) < 1e-10


def test_flip():
    h = lambda x: x[..., 0] + 1
    assert np.allclose(flip(h)(np.array([[0.5, 0.0]])), -1.5)
