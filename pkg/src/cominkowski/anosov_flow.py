"""Geodesic flow on T^1 H^2 acting on lightlike planes, and b_tau as a fixed point.

A frame is a pair (x, v): x on the upper sheet of the hyperboloid, v a unit
spacelike vector orthogonal to x.  A lightlike affine plane is a pair
(w, h) with w future lightlike, describing {y : <w, y> = -h}; (w, h) and
(c w, c h) are the same plane for c > 0.  Planes attached to a frame are
stored normalized on the frame's slice <x, w> = -1.

Arrays are batched: a UnitTangent may hold M frames as (M, 3) arrays.
"""
from dataclasses import dataclass, field

import numpy as np

from .mink_linalg import J, GeometryError, mink_form

FRAME_TOL = 1e-10
DRIFT_TOL = 1e-8
ALEPH_MARGIN = 1e-6
REFERENCE = np.array([0.0, 0.0, 1.0])


class ConvergenceError(GeometryError):
    pass


# -- frames -----------------------------------------------------------------

@dataclass
class UnitTangent:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)

    def __len__(self):
        return 1 if self.x.ndim == 1 else len(self.x)

    def defect(self):
        """Largest violation of <x,x> = -1, <v,v> = 1, <x,v> = 0."""
        return float(max(np.max(np.abs(mink_form(self.x, self.x) + 1)),
                         np.max(np.abs(mink_form(self.v, self.v) - 1)),
                         np.max(np.abs(mink_form(self.x, self.v)))))

    def renormalized(self):
        """Gram-Schmidt in the Minkowski form."""
        x = self.x / np.sqrt(-mink_form(self.x, self.x))[..., None]
        v = self.v + mink_form(x, self.v)[..., None] * x
        v = v / np.sqrt(mink_form(v, v))[..., None]
        return UnitTangent(x, v)

    @property
    def backward_point(self):
        """Ideal point at t -> -infinity, the direction of x - v."""
        w = self.x - self.v
        return w[..., :2] / w[..., 2:]

    @property
    def forward_point(self):
        w = self.x + self.v
        return w[..., :2] / w[..., 2:]

    def transformed(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim == 3:
            return UnitTangent(np.einsum("mij,mj->mi", A, self.x), np.einsum("mij,mj->mi", A, self.v))
        return UnitTangent(self.x @ A.T, self.v @ A.T)

    def __getitem__(self, k):
        return UnitTangent(self.x[k], self.v[k])


def frame_at(p, direction):
    """Frame at the Klein point p pointing toward the Klein direction vector."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    d = np.atleast_2d(np.asarray(direction, dtype=float))
    p, d = np.broadcast_arrays(p, d)
    x = np.column_stack([p, np.ones(len(p))])
    x = x / np.sqrt(-mink_form(x, x))[:, None]
    v = np.column_stack([d, np.zeros(len(d))])
    return UnitTangent(x, v).renormalized()


def frames_from_ideal(theta, p=None):
    """Frames whose backward endpoint is (cos theta, sin theta).

    Based at the origin by default, or at the Klein points p; frames
    sharing theta lie on one weak-unstable leaf.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    if p is None:
        p = np.zeros_like(xi)
    p = np.broadcast_to(np.asarray(p, dtype=float), xi.shape)
    return frame_at(p, p - xi)


def geodesic_flow(u, t):
    """phi^t(x, v) = (cosh t x + sinh t v, sinh t x + cosh t v)."""
    t = np.asarray(t, dtype=float)
    c, s = np.cosh(t)[..., None], np.sinh(t)[..., None]
    out = UnitTangent(c * u.x + s * u.v, s * u.x + c * u.v)
    if out.defect() > DRIFT_TOL * max(1.0, float(np.max(c)) ** 2):
        out = out.renormalized()
    return out


def _orthogonal(u):
    """Unit spacelike e with <e, x> = <e, v> = 0 (d = 2)."""
    e = np.cross(u.x, u.v) @ J(2)
    return e / np.sqrt(mink_form(e, e))[..., None]


# -- lightlike planes ----------------------------------------------------------

@dataclass
class LightlikePlane:
    w: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.h = np.asarray(self.h, dtype=float)

    def normalized(self, x=REFERENCE):
        """Same plane, rescaled to <x, w> = -1."""
        lam = -1.0 / mink_form(np.asarray(x, dtype=float), self.w)
        if np.any(lam <= 0):
            raise GeometryError("w is not future lightlike")
        return LightlikePlane(lam[..., None] * self.w, lam * self.h)

    @property
    def ideal_point(self):
        return self.w[..., :2] / self.w[..., 2:]

    def defect(self, x=REFERENCE):
        return float(max(np.max(np.abs(mink_form(self.w, self.w))),
                         np.max(np.abs(mink_form(np.asarray(x), self.w) + 1))))

    @classmethod
    def from_ideal(cls, xi, h):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return cls(np.column_stack([xi, np.ones(len(xi))]), np.broadcast_to(h, len(xi)).copy())


def transport_plane(A, t, plane):
    """Image of {<w, y> = -h} under y -> A y + t."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 3:
        w = np.einsum("mij,mj->mi", A, plane.w)
    else:
        w = plane.w @ A.T
    return LightlikePlane(w, plane.h - mink_form(w, t))


def dx_metric(frame_x, p, q):
    """sqrt(-2<w1, w2> + (h1 - h2)^2) on the slice <frame_x, w> = -1.

    Evaluated as <w1 - w2, w1 - w2> + (h1 - h2)^2, which is the same on the
    slice and avoids the cancellation in -2<w1, w2> for nearby planes.
    """
    p = p.normalized(frame_x)
    q = q.normalized(frame_x)
    dw = p.w - q.w
    val = mink_form(dw, dw) + (p.h - q.h) ** 2
    return np.sqrt(np.maximum(val, 0.0))


# -- sections -------------------------------------------------------------------

@dataclass
class SectionSample:
    """A section evaluated at finitely many frames.

    `source` maps a UnitTangent batch to frame-normalized planes; it is what
    lets the flow look up values at phi^-t(u).  Sections obtained from data
    alone (source None) can be compared but not flowed.
    """
    frames: UnitTangent
    values: LightlikePlane
    source: object = None
    info: dict = field(default_factory=dict)

    @classmethod
    def from_field(cls, frames, fn):
        return cls(frames, fn(frames), fn)

    def slopes(self):
        """<w, v> per frame: -1 on Delta^-, +1 on Delta^+."""
        return mink_form(self.values.w, self.frames.v)

    def classify(self, tol=1e-9):
        s = self.slopes()
        return np.where(s <= -1 + tol, "Delta-", np.where(s >= 1 - tol, "Delta+", "aleph"))

    def in_aleph_plus(self, margin=0.0):
        return bool(np.all(self.slopes() < 1.0 - margin))


def delta_minus_section(height=0.0):
    """w = x - v with frame-normalized height `height` (a number or a function of frames)."""
    def fn(u):
        h = height(u) if callable(height) else np.full(len(u), float(height))
        return LightlikePlane(u.x - u.v, h)
    return fn


def aleph_section(angle, height):
    """w = x + cos(a) v + sin(a) e; <w, v> = cos(a) < 1 whenever a is not 0 mod 2 pi.

    `angle` and `height` are numbers or functions of the frames.
    """
    def fn(u):
        a = angle(u) if callable(angle) else np.full(len(u), float(angle))
        h = height(u) if callable(height) else np.full(len(u), float(height))
        e = _orthogonal(u)
        w = u.x + np.cos(a)[:, None] * u.v + np.sin(a)[:, None] * e
        return LightlikePlane(w, h)
    return fn


def probe_sections(frames):
    """Two aleph^+ sections with frame-dependent slopes and heights, for contraction fits."""
    s1 = SectionSample.from_field(frames, aleph_section(
        lambda u: 1.0 + 0.5 * np.sin(3 * u.x[:, 0]), lambda u: np.cos(u.x[:, 1] / u.x[:, 2])))
    s2 = SectionSample.from_field(frames, aleph_section(
        lambda u: 2.0 + 0.3 * np.cos(u.x[:, 1]), lambda u: u.x[:, 0] / u.x[:, 2]))
    return s1, s2


def flow_factor(t, slope):
    """lambda_t = 1 / (cosh t - sinh t <v, w0>)."""
    lam = 1.0 / (np.cosh(t) - np.sinh(t) * slope)
    assert np.all(lam > 0), "lambda_t must be positive on <v, w0> < 1"
    return lam


def flow_on_sections(s, t):
    """(Phi^t s)(u): the value of s at phi^-t(u), re-expressed at u.

    At phi^-t(u) = (x', v') the plane is (w0, h0) with <x', w0> = -1; at u it
    becomes (lambda_t w0, lambda_t h0) with lambda_t from <v', w0>.
    """
    if s.source is None:
        raise ValueError("section has no source to evaluate at flowed frames")
    fn = s.source

    def flowed(u):
        back = geodesic_flow(u, -t)
        P = fn(back)
        lam = flow_factor(t, mink_form(back.v, P.w))
        return LightlikePlane(lam[:, None] * P.w, lam * P.h)

    out = SectionSample.from_field(s.frames, flowed)
    out.info = dict(s.info, t=s.info.get("t", 0.0) + t)
    return out


def section_distance(s1, s2):
    """max over the sampled frames of d_x; a lower bound for the sup metric D."""
    return float(np.max(dx_metric(s1.frames.x, s1.values, s2.values)))


def contraction_rate(s1, s2, t_max=10.0, t_min=2.0, n_t=17):
    """Fit log D(Phi^t s1, Phi^t s2) = log C - a t over t in [t_min, t_max].

    Returns (C, a, history) with history a list of (t, D).  Identical
    sections give C = 0 and a = inf.
    """
    ts = np.linspace(t_min, t_max, n_t)
    for s in (s1, s2):
        far = s.source(geodesic_flow(s.frames, -ts[-1]))
        back = geodesic_flow(s.frames, -ts[-1])
        for sec in (s, SectionSample(back, far)):
            if not sec.in_aleph_plus(ALEPH_MARGIN):
                raise ValueError("section touches Delta^+ (<w, v> > 1 - %g)" % ALEPH_MARGIN)
    D = np.array([section_distance(flow_on_sections(s1, t), flow_on_sections(s2, t)) for t in ts])
    history = list(zip(ts.tolist(), D.tolist()))
    if np.all(D == 0):
        return 0.0, np.inf, history
    ok = D > 0
    slope, icpt = np.polyfit(ts[ok], np.log(D[ok]), 1)
    return float(np.exp(icpt)), float(-slope), history


def contraction_report(C, a, history):
    lines = ["C %.10g" % C, "a %.10g" % a]
    lines += ["D(%.4g) %.10g" % (t, d) for t, d in history]
    return "\n".join(lines) + "\n"


# -- the tau-twisted fixed point ----------------------------------------------------

def _side_data(tau):
    G = tau.group
    key = "anosov_sides"
    if key not in tau._cache:
        P = G.polygon
        tau._cache[key] = (P.matrices, P.inverse_matrices,
                           np.array([tau(w) for w in P.elements]),
                           P.normals * np.array([1, 1, -1]))
    return tau._cache[key]


def fold_frames(tau, u, max_steps=1000):
    """Write u = B u' with the base of u' in the Dirichlet polygon.

    Returns (B, tau(B), u') batched over frames; tau(B) is accumulated
    with tau(B S) = tau(B) + B tau(S) over the side elements S.
    """
    mats, invs, tvals, normals = _side_data(tau)
    M = len(u)
    X, V = u.x.copy(), u.v.copy()
    B = np.tile(np.eye(3), (M, 1, 1))
    tB = np.zeros((M, 3))
    for _ in range(max_steps):
        vals = (X @ normals.T) / X[:, 2:3]
        k = np.argmax(vals, axis=1)
        move = vals[np.arange(M), k] > 1e-12
        if not np.any(move):
            return B, tB, UnitTangent(X, V).renormalized()
        idx = np.nonzero(move)[0]
        kk = k[idx]
        tB[idx] += np.einsum("mij,mj->mi", B[idx], tvals[kk])
        B[idx] = B[idx] @ mats[kk]
        X[idx] = np.einsum("mij,mj->mi", invs[kk], X[idx])
        V[idx] = np.einsum("mij,mj->mi", invs[kk], V[idx])
    raise GeometryError("frame folding did not terminate")


def _start_plane(u):
    """An aleph^+ plane at each frame: <w, v> = 0, height 0."""
    return LightlikePlane(u.x + _orthogonal(u), np.zeros(len(u)))


def fixed_point_section(tau, frames, t_step=4.0, iters=50, tol=1e-8):
    """The Phi_tau-invariant section at the given frames, by Cauchy iteration.

    The backward orbit u, phi^-T u, phi^-2T u, ... is folded into the
    polygon step by step: phi^-T(u_k') = B_{k+1} u_{k+1}'.  The n-th iterate
    starts from an arbitrary aleph^+ plane at u_n' and carries it forward
    through (B_k, tau(B_k)), renormalizing at each folded frame.  The first
    fold, u = B_0 u_0', handles frames based outside the polygon.
    """
    if t_step < 2:
        raise ValueError("t_step must be at least 2")
    B0, t0, cur = fold_frames(tau, frames)
    chain = []
    prev = None
    history = []
    for n in range(1, iters + 1):
        B, tB, nxt = fold_frames(tau, geodesic_flow(cur, -t_step))
        chain.append((B, tB, cur))
        cur = nxt
        P = _start_plane(cur)
        for B, tB, base in reversed(chain):
            P = _renorm(transport_plane(B, tB, P), base.x)
        P = _renorm(transport_plane(B0, t0, P), frames.x)
        if prev is not None:
            D = float(np.max(dx_metric(frames.x, P, prev)))
            history.append(D)
            if D < tol:
                out = SectionSample(frames, P)
                out.info = {"iterations": n, "history": history, "t_step": t_step}
                return out
        prev = P
    last = history[-1] / history[-2] if len(history) > 1 else float("nan")
    raise ConvergenceError("fixed point not reached in %d iterations (last contraction %.3g)"
                           % (iters, last))


def _renorm(P, x):
    lam = -1.0 / mink_form(x, P.w)
    return LightlikePlane(lam[:, None] * P.w, lam * P.h)


def section_heights(s):
    """(ideal points, heights) of a Delta^- section, normalized at the reference frame."""
    P = s.values.normalized(REFERENCE)
    return P.ideal_point, P.h


def fixed_point_boundary(tau, theta, t_step=4.0, iters=50, tol=1e-8):
    """b_tau at angles theta from the invariant section at origin-based frames.

    The invariant plane over xi is {<(xi, 1), y> = -height}, and the
    support-function boundary value is b(xi) = -height.
    """
    s = fixed_point_section(tau, frames_from_ideal(theta), t_step, iters, tol)
    return -section_heights(s)[1]


def delta_minus_defect(s):
    """max |<w, v> + 1|: distance of a section from Delta^-."""
    return float(np.max(np.abs(s.slopes() + 1.0)))
