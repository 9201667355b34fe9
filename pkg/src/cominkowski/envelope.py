"""Convex envelopes of boundary data on the disk (d = 2).

h^-_b is the supremum of the affine functions lying below b on the circle.
For sampled b its graph is the lower boundary of the convex hull of the
lifted samples (cos t_k, sin t_k, b_k), so it is the maximum of the
supporting planes of the lower hull faces.  h^+_b = -h^-_{-b}.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .mink_linalg import GeometryError

LOWER_NZ = -1e-12
MIN_SAMPLES = 16
EVAL_CHUNK = 4096


def _samples(b):
    """(angles, values) from a BoundaryFunction or a plain sample array."""
    vals = np.asarray(getattr(b, "samples", b), dtype=float)
    th = 2 * np.pi * np.arange(vals.size) / vals.size
    return th, vals


@dataclass
class LowerEnvelope:
    """Lower hull of the lifted samples.

    planes[f] = (w1, w2, c): the face f is the graph of <x, w> + c over its
    projected triangle.  For an upper envelope `sign` is -1 and every value
    is negated on the way out.
    """
    boundary: object
    planes: np.ndarray
    triangles: np.ndarray
    vertices: np.ndarray
    sign: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self):
        return len(self.vertices)

    @property
    def single_face(self):
        return len(self.planes) == 1

    def __call__(self, x):
        return envelope_eval(self, x)

    def gradient(self, x):
        """Gradient of the active face (a subgradient on face boundaries)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = _active_faces(self, x)
        return self.sign * self.planes[k, :2]

    def max_violation(self):
        """Largest amount by which a face plane exceeds the data at a sample."""
        P = self.vertices
        vals = P[:, :2] @ self.planes[:, :2].T + self.planes[:, 2]
        return float(np.max(vals - P[:, 2:3]))


def _affine_fit(th, vals):
    A = np.column_stack([np.cos(th), np.sin(th), np.ones_like(th)])
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return coef, float(np.max(np.abs(A @ coef - vals)))


def lower_envelope(b, affine_tol=1e-12):
    """Lower convex envelope h^-_b of sampled boundary data."""
    th, vals = _samples(b)
    if vals.size < MIN_SAMPLES:
        raise ValueError("need at least %d boundary samples" % MIN_SAMPLES)
    if not np.all(np.isfinite(vals)):
        raise ValueError("boundary samples must be finite")
    pts = np.column_stack([np.cos(th), np.sin(th), vals])
    coef, resid = _affine_fit(th, vals)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if resid <= affine_tol * scale:
        return LowerEnvelope(b, coef[None, :], np.zeros((0, 3), dtype=int), pts)
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise GeometryError("convex hull failed: %s" % exc) from exc
    eq = hull.equations                      # n . p + off <= 0 inside
    low = eq[:, 2] < LOWER_NZ
    n, off = eq[low, :3], eq[low, 3]
    planes = np.column_stack([-n[:, 0] / n[:, 2], -n[:, 1] / n[:, 2], -off / n[:, 2]])
    return LowerEnvelope(b, planes, hull.simplices[low], pts)


def upper_envelope(b, affine_tol=1e-12):
    """h^+_b(x) = -h^-_{-b}(x)."""
    th, vals = _samples(b)
    env = lower_envelope(-vals, affine_tol)
    env.boundary = b
    env.sign = -1.0
    return env


def _active_faces(env, x):
    out = np.empty(len(x), dtype=int)
    W = env.planes[:, :2].T
    c = env.planes[:, 2]
    for s in range(0, len(x), EVAL_CHUNK):
        out[s:s + EVAL_CHUNK] = np.argmax(x[s:s + EVAL_CHUNK] @ W + c, axis=1)
    return out


def envelope_eval(env, x):
    """Value of the envelope at Klein points x.

    The lower hull is convex, so its value is the largest face plane; this
    avoids point location and clamps points just outside the inscribed
    polygon to the nearest face automatically.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    x = x.reshape(-1, 2)
    W = env.planes[:, :2].T
    c = env.planes[:, 2]
    out = np.empty(len(x))
    for s in range(0, len(x), EVAL_CHUNK):
        out[s:s + EVAL_CHUNK] = np.max(x[s:s + EVAL_CHUNK] @ W + c, axis=1)
    return (env.sign * out).reshape(shape)


# ---------------------------------------------------------------------------
# LP oracle

def lp_oracle(b, x):
    """max <x, w> + c subject to <xi_k, w> + c <= b_k, straight from the definition.

    Solved with the HiGHS dual simplex, independently of the hull
    construction.  Returns (value, (w1, w2, c)).
    """
    th, vals = _samples(b)
    x = np.asarray(x, dtype=float)
    if np.dot(x, x) >= 1:
        raise GeometryError("lp_oracle needs an interior point")
    cols = np.column_stack([np.cos(th), np.sin(th), np.ones(len(th))])
    res = linprog(-np.array([x[0], x[1], 1.0]), A_ub=cols, b_ub=vals,
                  bounds=[(None, None)] * 3, method="highs-ds")
    if res.status != 0:
        raise GeometryError("LP failed: %s" % res.message)
    return float(-res.fun), res.x


# ---------------------------------------------------------------------------
# mesh export

MESH_HEADER = "# cominkowski envelope mesh v1"


def write_mesh(env, path):
    """Plain-text triangle list: header, vertex block, face block."""
    V = env.vertices.copy()
    V[:, 2] *= env.sign
    lines = [MESH_HEADER,
             "kind %s" % ("upper" if env.sign < 0 else "lower"),
             "vertices %d" % len(V)]
    lines += ["%.17g %.17g %.17g" % tuple(v) for v in V]
    lines.append("faces %d" % len(env.triangles))
    lines += ["%d %d %d" % tuple(t) for t in env.triangles]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_mesh(path):
    with open(path) as f:
        rows = [r.strip() for r in f if r.strip()]
    if rows[0] != MESH_HEADER:
        raise ValueError("%s: not an envelope mesh (line 1)" % path)
    nv = int(rows[2].split()[1])
    V = np.array([[float(t) for t in r.split()] for r in rows[3:3 + nv]])
    nf = int(rows[3 + nv].split()[1])
    F = np.array([[int(t) for t in r.split()] for r in rows[4 + nv:4 + nv + nf]], dtype=int)
    return rows[1].split()[1], V, F.reshape(-1, 3)
