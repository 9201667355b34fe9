"""Point/plane duality, canonical maps of hyperplanes and wedges.

An affine function h(x) = <x, vbar> + c on the Klein ball has the dual
Minkowski point (vbar, -c); conversely P gives h_P(x) = <P, (x,1)>.
"""
from dataclasses import dataclass

import numpy as np

from .isometry_group import act_function
from .mink_linalg import conformal_factor, homogeneous, mink_form


@dataclass(frozen=True)
class AffineFunction:
    vbar: np.ndarray
    c: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ np.asarray(self.vbar, dtype=float) + self.c

    def __add__(self, other):
        return AffineFunction(np.asarray(self.vbar) + other.vbar, self.c + other.c)

    def scaled(self, lam):
        return AffineFunction(lam * np.asarray(self.vbar), lam * self.c)


def dual_point(h):
    return np.concatenate([np.asarray(h.vbar, dtype=float), [-h.c]])


def dual_plane(P):
    P = np.asarray(P, dtype=float)
    return AffineFunction(P[:-1].copy(), -P[-1])


@dataclass(frozen=True)
class GeodesicLine:
    """Hyperplane of the Klein ball {x : <x - p, n> = 0}.

    p is the Euclidean foot of the perpendicular from the origin and n the
    unit normal; the side {<x - p, n> > 0} is l+, so the origin lies in l-.
    When the line passes through the origin n is whatever the caller chose.
    """
    p: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        n = np.array(self.n, dtype=float)
        n = n / np.linalg.norm(n)
        if np.dot(p, p) >= 1.0:
            raise ValueError("line misses the open ball")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_endpoints(cls, a, b, normal_hint=None):
        """Chord through two distinct points of the closed disk (d=2)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = b - a
        t = t / np.linalg.norm(t)
        n = np.array([-t[1], t[0]])
        s = float(np.dot(a, n))
        if abs(s) < 1e-15:
            s = 0.0
            if normal_hint is not None and np.dot(n, normal_hint) < 0:
                n = -n
        elif s < 0:
            n, s = -n, -s
        return cls(s * n, n)

    @property
    def offset(self):
        """Signed distance <p, n> from the origin."""
        return float(np.dot(self.p, self.n))

    def side(self, x):
        return np.asarray(x, dtype=float) @ self.n - self.offset

    def endpoints(self):
        """Ideal endpoints of a chord in the disk (d=2)."""
        s = self.offset
        t = np.array([-self.n[1], self.n[0]])
        half = np.sqrt(1.0 - s * s)
        return s * self.n - half * t, s * self.n + half * t

    def flipped(self):
        """Same line with the opposite orientation (l+ and l- swapped)."""
        return GeodesicLine(self.p, -self.n)


def canonical_map(l, x):
    """h_l(x) = <x - p_l, n_l> / L(p_l)."""
    return l.side(x) / conformal_factor(l.p)


def normal_vector(l):
    """Unit spacelike v_l with h_l(x) = <(x,1), v_l>, pointing into l+."""
    Lp = conformal_factor(l.p)
    return np.concatenate([l.n, [l.offset]]) / Lp


def line_from_normal(v):
    """Inverse of normal_vector for a spacelike v."""
    v = np.asarray(v, dtype=float)
    vbar, vt = v[:-1], v[-1]
    nb = np.linalg.norm(vbar)
    n = vbar / nb
    return GeodesicLine(n * (vt / nb), n)


def image_line(A, l):
    """A.l, keeping the orientation: the image of l+ is (A.l)+."""
    v = np.asarray(A) @ normal_vector(l)
    return line_from_normal(v)


@dataclass(frozen=True)
class Wedge:
    h_minus: AffineFunction
    angle: float
    line: GeodesicLine

    def __call__(self, x):
        return wedge_eval(self, x)


def wedge_eval(w, x):
    """h_-(x) + angle * h_l(x) on l+, h_-(x) on l-."""
    x = np.asarray(x, dtype=float)
    hl = canonical_map(w.line, x)
    return w.h_minus(x) + w.angle * np.where(w.line.side(x) > 0, hl, 0.0)


def _affine_fit(f, centre, eps):
    d = centre.size
    pts = [centre] + [centre + eps * e for e in np.eye(d)]
    vals = [float(f(p[None, :])[0]) for p in pts]
    return np.array([(vals[i + 1] - vals[0]) / eps for i in range(d)])


def wedge_angle_invariance(iso, w, window=0.95):
    """Angle of the wedge (A,v).w, read off from the jump of its gradient.

    Both sides of A.l carry an affine function, so the gradients on each side
    are recovered exactly by difference quotients taken inside each side.
    """
    g = act_function(iso, w)
    line = image_line(iso.A, w.line)
    q = line.p
    if np.linalg.norm(q) > window:
        raise ValueError("image line leaves the sampling window")
    Lp = float(conformal_factor(line.p))
    delta, eps = 1e-2 * Lp, 1e-3 * Lp
    g_plus = _affine_fit(g, q + delta * line.n, eps)
    g_minus = _affine_fit(g, q - delta * line.n, eps)
    return float(np.dot(g_plus - g_minus, line.n) * Lp)


def lies_above(P, Q, samples=4096):
    """True if h_P > h_Q on a dense sample of the closed disk boundary (d=2)."""
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    xs = np.column_stack([np.cos(th), np.sin(th)])
    diff = mink_form(homogeneous(xs), np.asarray(P) - np.asarray(Q))
    return bool(np.all(diff > 0))
