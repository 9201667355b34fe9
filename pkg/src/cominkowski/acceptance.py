"""The eleven acceptance checks, shared by the test suite and the CLI.

Each check returns a CheckResult; nothing here asserts, so a failing
check still reports its measured values.
"""
from dataclasses import dataclass

import numpy as np

from . import anosov_flow as af
from .duality import GeodesicLine, AffineFunction, Wedge, dual_plane, dual_point
from .fuchsian2 import build_octagon_group, parse_word, translation_length
from .isometry_group import Isometry, boost, dual_action_check, rotation
from .lamination import Cocycle, SimplicialLamination, boundary_value
from .mean_solver import (PolarGrid, ScalarField, _ring_operator, apply_operator,
                          mean_curvature_field)
from .measures import (TestFunction, compute_surfaces, core_volume, domain_quadrature, line_integral,
                       mm_weak, norm_report, s1_norm)

TWO_CURVE = ("a3 a4^-1", 0.5)
LAMINATION_CONFIGS = (
    (("a1", 1.0),),
    (("a1", 1.0), TWO_CURVE),
    (("a2", 0.7),),
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self):
        return "criterion %2d %-28s %s  %s" % (self.number, self.name,
                                               "PASS" if self.passed else "FAIL", self.detail)


_GROUP = []


def octagon():
    if not _GROUP:
        _GROUP.append(build_octagon_group())
    return _GROUP[0]


def lamination(curves, group=None):
    G = octagon() if group is None else group
    return SimplicialLamination(G, [(G.word(parse_word(w)), wt) for w, wt in curves])


def random_isometry(rng):
    """Random element of the identity component of O(2,1) with a random translation part."""
    A = rotation(rng.uniform(0, 2 * np.pi)) @ boost(rng.uniform(0, 2)) @ rotation(rng.uniform(0, 2 * np.pi))
    return Isometry(A, rng.normal(size=3))


# -- 1 ------------------------------------------------------------------------

def check_norm_length(grid=None, n_boundary=2048):
    grid = PolarGrid() if grid is None else grid
    lam = lamination([("a1", 1.0)])
    tau = Cocycle.from_lamination(lam)
    ell = translation_length(octagon().word(parse_word("a1")).A)
    rel = abs(s1_norm(tau, grid, n_boundary) - ell) / ell
    rel_fine = abs(s1_norm(tau, grid.refine(), 2 * n_boundary) - ell) / ell
    ok = rel < 0.05 and rel_fine < rel
    return CheckResult(1, "norm = lamination length", ok,
                       "rel err %.3e, refined %.3e (length %.6f)" % (rel, rel_fine, ell))


# -- 2 ------------------------------------------------------------------------

def check_symmetrization(configs=LAMINATION_CONFIGS):
    """Volume on a second, unrelated quadrature against the s1 average.

    On one shared discretization the identity is exact (h_mean is linear
    in b and h^-_{-b} = -h^+_b), so the volume side uses its own nodes.
    """
    other = domain_quadrature(octagon().polygon, n_rho=40, n_theta=20, panels=3)
    worst, ok = [], True
    for curves in configs:
        tau = Cocycle.from_lamination(lamination(curves))
        rep = norm_report(tau)
        gap = abs(core_volume(tau, quad=other) - 0.5 * (rep.s1_plus + rep.s1_minus))
        bar = rep.errors["volume"] + 0.5 * (rep.errors["s1_plus"] + rep.errors["s1_minus"])
        ok = ok and gap < bar
        worst.append("%.2e<%.2e" % (gap, bar))
    return CheckResult(2, "symmetrization", ok, "gap<bar: " + ", ".join(worst))


# -- 3 ------------------------------------------------------------------------

def check_coboundaries(count=10, seed=3):
    rng = np.random.default_rng(seed)
    G = octagon()
    worst_s1, worst_aff = 0.0, 0.0
    for _ in range(count):
        tau = Cocycle.from_coboundary(G, rng.normal(size=3))
        worst_s1 = max(worst_s1, abs(s1_norm(tau)))
        h = compute_surfaces(tau).mean
        X = h.grid.nodes().reshape(-1, 2)
        A = np.column_stack([X, np.ones(len(X))])
        coef, *_ = np.linalg.lstsq(A, h.values.ravel(), rcond=None)
        worst_aff = max(worst_aff, float(np.max(np.abs(A @ coef - h.values.ravel()))))
    ok = worst_s1 < 1e-4 and worst_aff < 1e-6
    return CheckResult(3, "coboundary degeneracy", ok,
                       "max s1 %.2e, max affine deviation %.2e" % (worst_s1, worst_aff))


# -- 4 ------------------------------------------------------------------------

def check_norm_axioms(seed=4):
    rng = np.random.default_rng(seed)
    G = octagon()
    t1 = Cocycle.from_lamination(lamination([("a1", 1.0)]))
    t2 = Cocycle.from_lamination(lamination([TWO_CURVE]))
    t3 = Cocycle.from_lamination(lamination([("a2", 1.0)]))
    base = s1_norm(t1)
    homog = max(abs(s1_norm(a * t1) - a * base) / (a * base) for a in (0.5, 2.0))
    slack = np.inf
    for x, y in ((t1, t2), (t1, t3), (t1, -t3)):
        rx, ry, rs = norm_report(x), norm_report(y), norm_report(x + y)
        bar = rx.errors["s1_plus"] + ry.errors["s1_plus"] + rs.errors["s1_plus"]
        slack = min(slack, (rx.s1_plus + ry.s1_plus - rs.s1_plus) + bar)
    shift = 0.0
    for _ in range(3):
        v = rng.normal(size=3)
        moved = t1 + Cocycle.from_coboundary(G, v)
        shift = max(shift, abs(s1_norm(moved) - base) / base)
    ok = homog < 0.01 and slack >= 0 and shift < 0.01
    return CheckResult(4, "asymmetric norm axioms", ok,
                       "homogeneity %.2e, triangle slack+bar %.3e, coboundary shift %.2e"
                       % (homog, slack, shift))


# -- 5 ------------------------------------------------------------------------

def check_wedge_measure(count=20, seed=5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        n = rng.normal(size=2)
        n /= np.linalg.norm(n)
        line = GeodesicLine(rng.uniform(-0.4, 0.4) * n, n)
        alpha = rng.uniform(0.2, 2.0)
        wedge = Wedge(AffineFunction(rng.normal(size=2), rng.normal()), alpha, line)
        tdir = np.array([-n[1], n[0]])
        R = rng.uniform(0.08, 0.25)
        c = line.p + rng.uniform(-0.3, 0.3) * tdir + rng.uniform(-0.5, 0.5) * R * n
        if np.linalg.norm(c) + R >= 0.95:
            c *= 0.5
        phi = TestFunction(c, R)
        lhs = mm_weak(wedge, phi)
        rhs = alpha * line_integral(line, phi)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    phi1 = TestFunction(np.array([0.1]), 0.5)
    one_d = abs(mm_weak(lambda x: np.abs(x[:, 0]), phi1, breaks=(0.0,)) - 2 * phi1(np.array([0.0])))
    one_d = float(one_d / (2 * phi1(np.array([0.0]))))
    ok = worst < 0.01 and one_d < 1e-3
    return CheckResult(5, "wedge measure", ok,
                       "max rel err %.2e over %d bumps, d=1 rel err %.2e" % (worst, count, one_d))


# -- 6 ------------------------------------------------------------------------

def check_sandwich(configs=LAMINATION_CONFIGS):
    quad = domain_quadrature(octagon().polygon)
    x = quad.points
    worst = -np.inf
    for curves in configs:
        tau = Cocycle.from_lamination(lamination(curves))
        for t in (tau, -tau):
            s = compute_surfaces(t)
            m = s.mean(x)
            worst = max(worst, float(np.max(s.lower(x) - m)), float(np.max(m - s.upper(x))))
    return CheckResult(6, "sandwich", worst <= 1e-6,
                       "max of h- - h_mean and h_mean - h+: %.2e at %d nodes" % (worst, len(x)))


# -- 7 ------------------------------------------------------------------------

def _stencil_scale(grid, values):
    """Largest row sum of |coefficients| times max |h|: the roundoff scale of the operator."""
    c_in, c_mid, c_out, c_ang = _ring_operator(grid)
    rows = np.abs(c_in) + np.abs(c_mid) + np.abs(c_out) + 2 * np.abs(c_ang)
    return float(np.max(rows) * np.max(np.abs(values)))


def check_operator(t=1.7):
    """Mean(affine) against the roundoff scale, Mean(-tL) = t, and its convergence.

    Refinement keeps rho_max, so the nodes nest and each halving of the
    ring spacing should divide the error by about 4.
    """
    g = PolarGrid()
    aff = ScalarField.from_function(g, lambda P: 0.3 * P[..., 0] - 1.2 * P[..., 1] + 0.5)
    affine_rel = float(np.max(np.abs(apply_operator(aff)))) / _stencil_scale(g, aff.values)

    def cmc_error(grid):
        L = np.sqrt(np.maximum(1 - grid.r ** 2, 0.0))
        field = ScalarField(grid, np.outer(-t * L, np.ones(grid.n_theta)))
        return float(np.max(np.abs(mean_curvature_field(field) - t)))

    cmc_err = cmc_error(g)
    errs = []
    grid = PolarGrid(48, 128)
    for _ in range(4):
        errs.append(cmc_error(grid))
        grid = grid.refine()
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = affine_rel < 1e-14 and cmc_err < 1e-3 and np.all(orders > 1.8)
    return CheckResult(7, "operator exactness", ok,
                       "affine/roundoff scale %.1e, Mean(-tL)-t %.2e, orders %s"
                       % (affine_rel, cmc_err, " ".join("%.2f" % o for o in orders)))


# -- 8 ------------------------------------------------------------------------

def check_geometry():
    G = octagon()
    area = G.polygon.hyperbolic_area()
    quad_area = domain_quadrature(G.polygon).area
    rel = max(abs(area - 4 * np.pi), abs(quad_area - 4 * np.pi)) / (4 * np.pi)
    defect = G.relator_defect()
    ok = rel < 0.005 and defect < 1e-8
    return CheckResult(8, "geometry self-calibration", ok,
                       "area %.10f (rel %.1e), relator defect %.1e" % (area, rel, defect))


# -- 9 ------------------------------------------------------------------------

def check_contraction(seed=9):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, 64)
    frames = af.frames_from_ideal(th, rng.uniform(-0.5, 0.5, (64, 2)))
    _, a, _ = af.contraction_rate(*af.probe_sections(frames), t_max=10.0)
    fixed = 0.0
    sec = af.SectionSample.from_field(frames, af.delta_minus_section(0.0))
    for t in np.linspace(2, 10, 5):
        fixed = max(fixed, af.section_distance(sec, af.flow_on_sections(sec, t)))
    ok = 0.9 <= a <= 1.1 and fixed < 1e-10
    return CheckResult(9, "Anosov contraction", ok,
                       "fitted exponent %.4f, Delta- fixed-point defect %.1e" % (a, fixed))


# -- 10 -----------------------------------------------------------------------

def check_two_routes(count=64, seed=10):
    rng = np.random.default_rng(seed)
    tau = Cocycle.from_lamination(lamination([("a1", 1.0)]))
    th = rng.uniform(0, 2 * np.pi, count)
    gap = float(np.max(np.abs(af.fixed_point_boundary(tau, th) - boundary_value(tau, th))))
    return CheckResult(10, "two-route b_tau", gap < 1e-4,
                       "max discrepancy %.2e over %d ideal points" % (gap, count))


# -- 11 -----------------------------------------------------------------------

def check_duality(count=100, seed=11):
    rng = np.random.default_rng(seed)
    exact = True
    worst = 0.0
    for _ in range(count):
        P = rng.normal(size=3)
        exact = exact and np.array_equal(dual_point(dual_plane(P)), P)
        worst = max(worst, dual_action_check(random_isometry(rng), P, rng=rng))
    return CheckResult(11, "duality", exact and worst < 1e-10,
                       "involution exact: %s, max action defect %.1e" % (exact, worst))


CHECKS = (check_norm_length, check_symmetrization, check_coboundaries, check_norm_axioms,
          check_wedge_measure, check_sandwich, check_operator, check_geometry,
          check_contraction, check_two_routes, check_duality)


def run_all(echo=print):
    out = []
    for fn in CHECKS:
        res = fn()
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
