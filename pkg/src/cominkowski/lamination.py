"""Weighted simple closed geodesics, their cocycles and equivariant maps.

A simplicial lamination is a finite set of disjoint simple closed geodesics
with positive weights, each given by a group element whose axis projects to
it.  Crossing the lifts along a path from the basepoint gives

    tau(A)    = sum over lifts l crossing [x0, A.x0] of  w_l v_l,
    h(y)      = sum over lifts l crossing [x0, y]    of  w_l <(y,1), v_l>,
    b(xi)     = the same sum along the ray from x0 to the ideal point xi,

where v_l is the unit spacelike normal of l oriented along the path.  h is
convex, tau-equivariant, and extends continuously to the circle as b.
"""
from dataclasses import dataclass, field

import numpy as np

from .fuchsian2 import (check_disjoint, lifts_meeting_polygon, translation_length, walk)
from .isometry_group import Isometry, act_function, lorentz_inverse
from .mink_linalg import GeometryError, homogeneous, mink_form

SERIES_TOL = 1e-10
PERTURB = 1e-6


class TransversalityError(GeometryError):
    pass


@dataclass
class SimplicialLamination:
    group: object
    curves: list                      # [(GroupWord or matrix, weight)]
    basepoint: np.ndarray = None
    seed: int = 0
    word_len: int = 8
    lines: list = field(default=None, repr=False)
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.curves:
            raise ValueError("empty lamination")
        for _, w in self.curves:
            if not w > 0:
                raise ValueError("weights must be positive")
        lines, weights = [], []
        for core, w in self.curves:
            translation_length(core.A if hasattr(core, "A") else core)
            for l in lifts_meeting_polygon(self.group, core, self.word_len):
                lines.append(l)
                weights.append(float(w))
        if not check_disjoint(lines):
            raise GeometryError("lifts of the lamination intersect; curves are not disjoint and simple")
        self.lines = lines
        self.weights = np.array(weights)
        bp = np.zeros(2) if self.basepoint is None else np.asarray(self.basepoint, dtype=float)
        rng = np.random.default_rng(self.seed)
        for _ in range(4):
            if self._clear(bp):
                break
            u = rng.normal(size=2)
            bp = bp + PERTURB * u / np.linalg.norm(u)
        else:
            raise TransversalityError("basepoint stays on a lift after 3 perturbations")
        self.basepoint = bp

    def _clear(self, x, tol=1e-9):
        return all(abs(l.side(x)) > tol for l in self.lines)

    @property
    def total_length(self):
        """Sum of weight times length of the closed geodesics."""
        return float(sum(w * translation_length(c.A if hasattr(c, "A") else c) for c, w in self.curves))

    def wedge_sum(self, y):
        return wedge_sum_eval(self, y)


def wedge_sum_eval(lam, y):
    """h_lambda(y): weighted canonical maps of the lifts crossing [x0, y]."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    res = walk(lam.group, lam.basepoint, y, lam.lines, lam.weights)
    return res.total


def lamination_cocycle(lam, A):
    """tau_lambda(A) from the lifts crossing the segment [x0, A.x0]."""
    A = A.A if hasattr(A, "A") else np.asarray(A, dtype=float)
    X = A @ homogeneous(lam.basepoint)
    if np.linalg.norm(X[:2] / X[2] - lam.basepoint) < 1e-14:
        return np.zeros(3)
    res = walk(lam.group, lam.basepoint, X[None, :], lam.lines, lam.weights,
               accumulate_vectors=True)
    return res.vector_total[0]


def lamination_boundary(lam, theta, tol=SERIES_TOL):
    """b(xi) for xi = (cos theta, sin theta), with the tail bound of the series."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    res = walk(lam.group, lam.basepoint, xi, lam.lines, lam.weights, ideal=True, tol=tol)
    return res.total, res.tail_bound


@dataclass
class Cocycle:
    """Linear combination sum c_i tau_{lambda_i} plus the coboundary of v.

    tau(A) = sum c_i tau_{lambda_i}(A) + A v - v.
    """
    group: object
    terms: list = field(default_factory=list)   # [(SimplicialLamination, coef)]
    coboundary: np.ndarray = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.coboundary is None:
            self.coboundary = np.zeros(3)
        self.coboundary = np.asarray(self.coboundary, dtype=float)

    @classmethod
    def from_lamination(cls, lam, coef=1.0):
        return cls(lam.group, [(lam, float(coef))])

    @classmethod
    def from_coboundary(cls, group, v):
        return cls(group, [], np.asarray(v, dtype=float))

    def __add__(self, other):
        return Cocycle(self.group, self.terms + other.terms, self.coboundary + other.coboundary)

    def __mul__(self, c):
        return Cocycle(self.group, [(l, c * a) for l, a in self.terms], c * self.coboundary)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __call__(self, A):
        return cocycle_value(self, A)

    def generator_values(self):
        """tau on each generator, cached."""
        if "gens" not in self._cache:
            self._cache["gens"] = [cocycle_value(self, g.A) for g in self.group.generators]
        return self._cache["gens"]

    def letter_value(self, i, e):
        """tau(a_i^e) from the generator value, tau(a^-1) = -a^-1 tau(a)."""
        t = self.generator_values()[i]
        if e > 0:
            return t
        return -lorentz_inverse(self.group.generators[i].A) @ t

    def isometry(self, A):
        tv = cocycle_value(self, A)
        A = A.A if hasattr(A, "A") else np.asarray(A, dtype=float)
        return Isometry(A, tv)

    @property
    def is_coboundary_only(self):
        return all(c == 0 for _, c in self.terms)


def cocycle_value(tau, A):
    """tau(A), summed over the cocycle's sources.

    Words go through the cocycle relation from the generator values.  A bare
    matrix is walked directly; that is accurate while A[2, 2] stays below
    about 1e4, since the target A.x0 sits PERTURB away from a lift whenever
    the basepoint was nudged off one.
    """
    if hasattr(A, "letters") and len(A.letters) > 1:
        return cocycle_by_relation(tau, A.letters)
    A = A.A if hasattr(A, "A") else np.asarray(A, dtype=float)
    out = A @ tau.coboundary - tau.coboundary
    for lam, c in tau.terms:
        if c != 0:
            out = out + c * lamination_cocycle(lam, A)
    return out


def cocycle_by_relation(tau, letters):
    """tau of a word from the generator values and tau(AB) = tau(A) + A tau(B)."""
    G = tau.group
    A = np.eye(3)
    out = np.zeros(3)
    for i, e in letters:
        out = out + A @ tau.letter_value(i, e)
        A = A @ G.letter(i, e).A
    return out


@dataclass
class BoundaryFunction:
    """Samples of b on N equally spaced angles, with the exact evaluator."""
    samples: np.ndarray
    cocycle: Cocycle = None
    tail_bound: float = 0.0

    @property
    def N(self):
        return len(self.samples)

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.N) / self.N

    @property
    def points(self):
        th = self.angles
        return np.column_stack([np.cos(th), np.sin(th)])

    def __call__(self, theta):
        """Periodic linear interpolation of the samples."""
        theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        u = theta / (2 * np.pi) * self.N
        i = np.floor(u).astype(int) % self.N
        f = u - np.floor(u)
        return (1 - f) * self.samples[i] + f * self.samples[(i + 1) % self.N]

    def exact(self, theta):
        return boundary_value(self.cocycle, theta)

    def __neg__(self):
        return BoundaryFunction(-self.samples, None if self.cocycle is None else -self.cocycle,
                                self.tail_bound)

    def subsample(self, n):
        if self.N % n:
            raise ValueError("sample count %d does not divide %d" % (n, self.N))
        return BoundaryFunction(self.samples[:: self.N // n].copy(), self.cocycle, self.tail_bound)


def boundary_value(tau, theta, tol=SERIES_TOL, with_bound=False):
    """b_tau at angles theta.

    The lamination part is the crossing series along the ray; the
    coboundary part is the restriction of the affine function -<(xi,1), v>,
    which is the boundary value of the tau_v-equivariant map
    x -> -<(x,1), v>.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    out = -mink_form(homogeneous(xi), tau.coboundary)
    bound = np.zeros_like(out)
    for lam, c in tau.terms:
        if c != 0:
            b, tb = lamination_boundary(lam, theta, tol)
            out = out + c * b
            bound = bound + abs(c) * tb
    if with_bound:
        return out, bound
    return out


def sample_boundary(tau, N=2048, tol=SERIES_TOL):
    th = 2 * np.pi * np.arange(N) / N
    vals, bound = boundary_value(tau, th, tol, with_bound=True)
    return BoundaryFunction(vals, tau, float(np.max(bound)) if bound.size else 0.0)


def equivariant_map(tau):
    """The piecewise affine tau-equivariant map sum c_i h_{lambda_i} + h_v."""
    def h(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = -mink_form(homogeneous(y), tau.coboundary)
        for lam, c in tau.terms:
            if c != 0:
                out = out + c * wedge_sum_eval(lam, y)
        return out
    return h


def check_equivariance(tau, h, A, samples=None, rng=None, radius=0.9):
    """max |((A, tau(A)) h)(x) - h(x)| over interior sample points."""
    iso = tau.isometry(A)
    if samples is None:
        rng = np.random.default_rng(1) if rng is None else rng
        r = radius * np.sqrt(rng.random(200))
        t = 2 * np.pi * rng.random(200)
        samples = np.column_stack([r * np.cos(t), r * np.sin(t)])
    g = act_function(iso, h)
    return float(np.max(np.abs(np.asarray(g(samples)) - np.asarray(h(samples)))))


def lifts_in_disk(lam, radius, max_len=8):
    """All weighted lifts meeting the hyperbolic disk of `radius` about the origin.

    Every lift is g.l for a line l meeting the base polygon, and g.l can
    only reach the disk if d(0, g.0) <= radius + circumradius.
    Returns [(GeodesicLine, weight)].
    """
    from .duality import image_line
    from .fuchsian2 import same_line
    G = lam.group
    rmax = np.tanh(radius)
    words = G.ball(radius + G.polygon.circumradius + 1e-9, max_len)
    out = []
    for w in words:
        for l, wt in zip(lam.lines, lam.weights):
            m = image_line(w.A, l)
            if abs(m.offset) >= rmax:
                continue
            if any(same_line(m, o) for o, _ in out):
                continue
            out.append((m, float(wt)))
    return out
