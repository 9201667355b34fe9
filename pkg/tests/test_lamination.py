import numpy as np
import pytest

from cominkowski import acceptance
from cominkowski.duality import canonical_map, normal_vector
from cominkowski.fuchsian2 import axis, parse_word
from cominkowski.isometry_group import act_klein
from cominkowski.lamination import (BoundaryFunction, Cocycle, SimplicialLamination, boundary_value,
                                    check_equivariance, cocycle_by_relation, equivariant_map,
                                    lamination_cocycle, lifts_in_disk, sample_boundary, wedge_sum_eval)
from cominkowski.measures import TestFunction, line_integral, mm_weak
from cominkowski.mink_linalg import GeometryError, conformal_factor, homogeneous, mink_form

from conftest import random_disk_points


def random_word(G, rng, n):
    letters = [(int(rng.integers(4)), int(rng.choice([-1, 1]))) for _ in range(n)]
    return G.word(letters)


def test_validation(octagon):
    a1 = octagon.word(parse_word("a1"))
    with pytest.raises(ValueError):
        SimplicialLamination(octagon, [])
    with pytest.raises(ValueError):
        SimplicialLamination(octagon, [(a1, 0.0)])
    with pytest.raises(GeometryError):
        acceptance.lamination([("a1", 1.0), ("a2", 1.0)])


def test_basepoint_perturbed_off_lift(lam_a1):
    # the axis of a1 is a diameter, so the origin had to move
    assert 0 < np.linalg.norm(lam_a1.basepoint) < 1e-5
    assert all(abs(l.side(lam_a1.basepoint)) > 1e-9 for l in lam_a1.lines)


def test_cocycle_examples(octagon, tau_a1, rng):
    assert np.all(tau_a1(np.eye(3)) == 0)
    v = rng.normal(size=3)
    cob = Cocycle.from_coboundary(octagon, v)
    for g in octagon.generators:
        assert np.allclose(cob(g.A), g.A @ v - v, atol=1e-14)
    w = octagon.word(parse_word("a1 a2^-1 a3"))
    assert np.allclose(cob(w), w.A @ v - v, atol=1e-12)


def test_cocycle_relation(octagon, lam_a1, rng):
    # every value from a direct walk to A.x0, none through the relation
    for _ in range(100):
        A = random_word(octagon, rng, int(rng.integers(1, 3))).A
        B = random_word(octagon, rng, int(rng.integers(1, 3))).A
        lhs = lamination_cocycle(lam_a1, A @ B)
        rhs = lamination_cocycle(lam_a1, A) + A @ lamination_cocycle(lam_a1, B)
        assert np.max(np.abs(lhs - rhs)) < 1e-8 * max(1.0, np.abs(lhs).max())


def test_cocycle_relation_for_words(octagon, tau_a1, rng):
    for _ in range(20):
        w = random_word(octagon, rng, 3)
        assert np.allclose(cocycle_by_relation(tau_a1, w.letters), lamination_cocycle(tau_a1.terms[0][0], w.A),
                           atol=1e-8)


def test_generator_value_of_own_axis(octagon, tau_a1):
    # a1 translates along its own axis; the path from x0 to a1.x0 runs along it
    a1 = octagon.generators[0].A
    val = tau_a1(a1)
    assert np.all(np.isfinite(val))
    assert np.allclose(tau_a1.letter_value(0, -1), -np.linalg.inv(a1) @ val)


def test_basepoint_independence(octagon):
    a1 = octagon.word(parse_word("a1"))
    lam0 = SimplicialLamination(octagon, [(a1, 1.0)])
    lam1 = SimplicialLamination(octagon, [(a1, 1.0)], basepoint=np.array([0.2, 0.3]))
    diffs, mats = [], []
    for g in octagon.generators:
        diffs.append(lamination_cocycle(lam1, g.A) - lamination_cocycle(lam0, g.A))
        mats.append(g.A - np.eye(3))
    M, d = np.vstack(mats), np.concatenate(diffs)
    v, *_ = np.linalg.lstsq(M, d, rcond=None)
    assert np.max(np.abs(M @ v - d)) < 1e-8
    assert np.max(np.abs(d)) > 0.1


def test_wedge_sum_examples(lam_a1):
    x0 = lam_a1.basepoint
    assert wedge_sum_eval(lam_a1, x0)[0] == 0
    # one step across the horizontal diameter
    y = np.array([0.1, -0.05 * np.sign(x0[1])])
    val = wedge_sum_eval(lam_a1, y)[0]
    assert val > 0
    assert np.isclose(val, abs(y[1]), rtol=1e-12)


def test_wedge_sum_equivariance(octagon, tau_a1):
    h = equivariant_map(tau_a1)
    for g in octagon.generators:
        for A in (g.A, np.linalg.inv(g.A)):
            assert check_equivariance(tau_a1, h, A) < 1e-8


def test_wedge_sum_convex(lam_a1, rng):
    p = random_disk_points(rng, 1000, 0.95)
    q = random_disk_points(rng, 1000, 0.95)
    h = lambda y: wedge_sum_eval(lam_a1, y)
    assert np.min(0.5 * (h(p) + h(q)) - h(0.5 * (p + q))) > -1e-10


def test_boundary_extension(lam_a1, tau_a1, rng):
    theta = rng.uniform(0, 2 * np.pi, 16)
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    b = boundary_value(tau_a1, theta)
    gaps = [np.max(np.abs(wedge_sum_eval(lam_a1, r * xi) - b)) for r in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05


def test_boundary_coboundary_exact(octagon, rng):
    v = rng.normal(size=3)
    tau = Cocycle.from_coboundary(octagon, v)
    theta = np.linspace(0, 2 * np.pi, 33)
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    assert np.array_equal(boundary_value(tau, theta), -mink_form(homogeneous(xi), v))


def test_boundary_linearity(octagon, tau_a1):
    tau2 = Cocycle.from_lamination(acceptance.lamination([acceptance.TWO_CURVE]))
    theta = np.linspace(0.1, 6.2, 40)
    alpha = -0.7
    lhs = boundary_value(tau_a1 + alpha * tau2, theta)
    rhs = boundary_value(tau_a1, theta) + alpha * boundary_value(tau2, theta)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_boundary_at_axis_endpoint(lam_a1, tau_a1):
    # the lift through xi = (1, 0) is lightlike-incident to it and contributes 0
    l0 = axis(lam_a1.group.generators[0].A)
    assert abs(mink_form(homogeneous(np.array([1.0, 0.0])), normal_vector(l0))) < 1e-15
    vals = boundary_value(tau_a1, np.array([0.0, np.pi, 1e-9]))
    assert np.all(np.isfinite(vals))
    assert abs(vals[0] - vals[2]) < 1e-6


def test_boundary_tail_bound(tau_a1):
    _, bound = boundary_value(tau_a1, np.linspace(0, 6, 12), with_bound=True)
    assert np.all(bound < 1e-10)


def test_boundary_function(tau_a1, b_a1):
    assert b_a1.N == 2048
    assert b_a1.tail_bound < 1e-10
    sub = b_a1.subsample(512)
    assert np.array_equal(sub.samples, b_a1.samples[::4])
    assert np.allclose(b_a1(b_a1.angles[:10]), b_a1.samples[:10])
    assert np.allclose((-b_a1).samples, -b_a1.samples)
    with pytest.raises(ValueError):
        b_a1.subsample(300)


def test_check_equivariance_examples(octagon, rng):
    A = octagon.generators[1].A
    zero = Cocycle.from_coboundary(octagon, np.zeros(3))
    assert check_equivariance(zero, lambda x: -conformal_factor(x), A) < 1e-12
    v = rng.normal(size=3)
    cob = Cocycle.from_coboundary(octagon, v)
    hv = lambda x: -mink_form(homogeneous(x), v)
    assert check_equivariance(cob, hv, A) < 1e-10
    bump = lambda x: np.exp(-10 * np.sum(np.asarray(x) ** 2, axis=-1))
    assert check_equivariance(zero, bump, A) > 0.1


def test_measure_supported_on_lifts(lam_a1):
    # MM(h_lambda)(phi) = sum of omega_j int_{l_j} phi over lifts
    h = lambda y: wedge_sum_eval(lam_a1, y)
    lines = lifts_in_disk(lam_a1, np.arctanh(0.9))
    for c, R in ((np.array([0.05, 0.02]), 0.3), (np.array([-0.3, 0.1]), 0.25)):
        phi = TestFunction(c, R)
        rhs = sum(w * line_integral(l, phi) for l, w in lines)
        lhs = mm_weak(h, phi)
        assert abs(lhs - rhs) < 0.01 * abs(rhs)


def test_lifts_in_disk(lam_a1):
    lines = lifts_in_disk(lam_a1, 2.0)
    assert len(lines) >= 1
    assert all(w == 1.0 for _, w in lines)
