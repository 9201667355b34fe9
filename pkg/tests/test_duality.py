import numpy as np
from hypothesis import given, strategies as st

from cominkowski.duality import (AffineFunction, GeodesicLine, Wedge, canonical_map, dual_plane, dual_point,
                                 image_line, lies_above, line_from_normal, normal_vector, wedge_angle_invariance,
                                 wedge_eval)
from cominkowski.isometry_group import Isometry, act_function, boost, rotation
from cominkowski.mink_linalg import conformal_factor, homogeneous, mink_form

from conftest import random_disk_points

num = st.floats(-5, 5)
mink = st.lists(num, min_size=3, max_size=3).map(np.array)
affine = st.builds(lambda a, b, c: AffineFunction(np.array([a, b]), c), num, num, num)
lines = st.builds(lambda t, s: GeodesicLine(s * np.array([np.cos(t), np.sin(t)]),
                                            np.array([np.cos(t), np.sin(t)])),
                  st.floats(0, 2 * np.pi), st.floats(0, 0.9))


def test_dual_examples():
    zero = AffineFunction(np.zeros(2), 0.0)
    assert np.all(dual_point(zero) == 0)
    assert np.array_equal(dual_point(AffineFunction(np.array([1.5, -2.0]), 0.25)), [1.5, -2.0, -0.25])
    h0 = dual_plane(np.zeros(3))
    assert np.all(h0(np.array([[0.3, 0.4]])) == 0)
    t = 1.7
    assert np.allclose(dual_plane(np.array([0, 0, t]))(random_disk_points(np.random.default_rng(0), 10)), -t)
    # the hyperboloid support function -tL takes the same value at the origin
    assert -t * conformal_factor(np.zeros(2)) == -t


@given(affine)
def test_involution_exact(h):
    back = dual_plane(dual_point(h))
    assert np.array_equal(back.vbar, h.vbar) and back.c == h.c


@given(mink)
def test_involution_on_points(P):
    assert np.array_equal(dual_point(dual_plane(P)), P)


@given(mink, mink, st.floats(-3, 3))
def test_dual_plane_linear(P, Q, lam):
    x = np.array([[0.1, 0.2], [-0.5, 0.3]])
    lhs = dual_plane(P + lam * Q)(x)
    rhs = (dual_plane(P) + dual_plane(Q).scaled(lam))(x)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + abs(lam)) * 10)


@given(mink, mink)
def test_above_means_future_timelike(P, Q):
    if not lies_above(P, Q):
        return
    D = Q - P
    assert mink_form(D, D) < 0 and D[2] > 0


def test_above_example():
    P = np.array([0.0, 0.0, -2.0])      # h = 2
    Q = np.array([0.5, 0.0, 0.0])       # h = x_1 / 2
    assert lies_above(P, Q)
    assert not lies_above(Q, P)


def test_canonical_map_examples(rng):
    n = np.array([0.6, 0.8])
    l = GeodesicLine(0.4 * n, n)
    t = np.array([-0.8, 0.6])
    on = 0.4 * n + np.outer(np.linspace(-0.5, 0.5, 7), t)
    assert np.allclose(canonical_map(l, on), 0, atol=1e-15)
    l0 = GeodesicLine(np.zeros(2), n)
    x = random_disk_points(rng, 20)
    assert np.allclose(canonical_map(l0, x), x @ n)


@given(lines)
def test_canonical_map_is_dual_pairing(l):
    x = random_disk_points(np.random.default_rng(1), 50)
    v = normal_vector(l)
    assert np.isclose(mink_form(v, v), 1, atol=1e-12)
    assert np.allclose(canonical_map(l, x), mink_form(homogeneous(x), v), atol=1e-12 * max(1, np.abs(v).max()))


def test_normal_vector_through_origin():
    n = np.array([0.0, -1.0])
    assert np.allclose(normal_vector(GeodesicLine(np.zeros(2), n)), [0.0, -1.0, 0.0])


@given(lines, st.floats(0, 6.3), st.floats(-1.5, 1.5))
def test_equivariance_of_canonical_maps(l, a, t):
    A = rotation(a) @ boost(t)
    Al = image_line(A, l)
    if np.linalg.norm(Al.p) > 0.999:
        return
    assert np.allclose(normal_vector(Al), A @ normal_vector(l), atol=1e-10 * np.abs(A).max())
    x = random_disk_points(np.random.default_rng(2), 100, 0.8)
    g = act_function(Isometry.linear(A), lambda y: canonical_map(l, y))
    assert np.allclose(g(x), canonical_map(Al, x), atol=1e-10 * np.abs(A).max())


def test_line_from_normal_roundtrip():
    l = GeodesicLine(np.array([0.3, -0.2]), np.array([0.3, -0.2]))
    m = line_from_normal(normal_vector(l))
    assert np.allclose(m.p, l.p) and np.allclose(m.n, l.n)


def test_from_endpoints():
    l = GeodesicLine.from_endpoints(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.allclose(l.p, [0.5, 0.5])
    a, b = l.endpoints()
    assert np.allclose(sorted(map(tuple, [a, b])), [(0, 1), (1, 0)], atol=1e-12)


def test_wedge_one_dimensional():
    line = GeodesicLine(np.zeros(1), np.ones(1))
    w = Wedge(AffineFunction(np.array([-1.0]), 0.0), 2.0, line)
    x = np.linspace(-0.9, 0.9, 19)[:, None]
    assert np.allclose(wedge_eval(w, x), np.abs(x[:, 0]))


def test_wedge_zero_angle_and_continuity(rng):
    n = np.array([1.0, 0.0])
    line = GeodesicLine(np.array([0.3, 0.0]), n)
    hm = AffineFunction(np.array([0.4, -1.0]), 0.2)
    x = random_disk_points(rng, 100)
    assert np.allclose(Wedge(hm, 0.0, line)(x), hm(x))
    w = Wedge(hm, 1.3, line)
    y = np.column_stack([np.full(9, 0.3), np.linspace(-0.8, 0.8, 9)])
    e = np.array([1e-13, 0.0])
    assert np.max(np.abs(w(y + e) - w(y - e))) < 1e-12


def _midpoint_gap(w, rng):
    p = random_disk_points(rng, 1000)
    q = random_disk_points(rng, 1000)
    return np.min(0.5 * (w(p) + w(q)) - w(0.5 * (p + q)))


def test_wedge_convex_iff_positive_angle(rng):
    n = np.array([0.6, -0.8])
    line = GeodesicLine(0.2 * n, n)
    hm = AffineFunction(np.array([1.0, 2.0]), -0.5)
    assert _midpoint_gap(Wedge(hm, 0.7, line), rng) >= -1e-12
    assert _midpoint_gap(Wedge(hm, -0.7, line), rng) < -1e-3


def test_wedge_angle_invariance(rng):
    n = np.array([0.0, 1.0])
    w = Wedge(AffineFunction(np.array([0.3, -0.2]), 0.1), 0.8, GeodesicLine(0.1 * n, n))
    assert np.isclose(wedge_angle_invariance(Isometry.identity(), w), 0.8, atol=1e-8)
    assert np.isclose(wedge_angle_invariance(Isometry.translation(rng.normal(size=3)), w), 0.8, atol=1e-8)
    done = 0
    while done < 20:
        iso = Isometry(rotation(rng.uniform(0, 6.3)) @ boost(rng.uniform(0, 1.5)), rng.normal(size=3))
        try:
            alpha = wedge_angle_invariance(iso, w)
        except ValueError:
            continue
        assert abs(alpha - 0.8) < 1e-8
        done += 1
