"""A genus-2 surface group acting on the Klein disk, and walks through its tiling.

The group is generated by four translations pairing opposite sides of the
regular octagon with interior angles pi/4.  Besides word enumeration,
axes and translation lengths, this module builds the Dirichlet polygon
centred at the origin and walks a segment or a ray through the tiling
polygon by polygon.  The walk keeps every quantity in the frame of the base
polygon, so its cost grows linearly with the hyperbolic length of the path
rather than with the number of group elements in a ball.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .duality import GeodesicLine, normal_vector
from .isometry_group import (Isometry, act_klein, lorentz_inverse, reorthonormalize,
                             translation_along)
from .mink_linalg import GeometryError, J, homogeneous, mink_form

DEDUP_TOL = 1e-6
TIE_TOL = 1e-12
EDGE_EPS = 1e-9
ORIGIN = np.array([0.0, 0.0, 1.0])


def octagon_side_length():
    """Translation length of the side pairings: twice the inradius."""
    # inradius r of the regular octagon with angles pi/4: cosh r = cot(pi/8)
    return 2.0 * np.arccosh(1.0 / np.tan(np.pi / 8))


@dataclass(frozen=True)
class GroupWord:
    """Reduced word as a tuple of (generator index, +-1) with its matrix."""
    letters: tuple
    iso: Isometry

    @property
    def A(self):
        return self.iso.A

    def __len__(self):
        return len(self.letters)

    def inverse(self):
        return GroupWord(tuple((i, -e) for i, e in reversed(self.letters)), self.iso.inverse())

    def __str__(self):
        return format_word(self.letters)


def format_word(letters):
    if not letters:
        return "1"
    return " ".join("a%d%s" % (i + 1, "" if e > 0 else "^-1") for i, e in letters)


def parse_word(text):
    """Inverse of format_word; accepts 'a1 a2^-1 ...' or '1'."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    out = []
    for tok in text.split():
        e = 1
        if tok.endswith("^-1"):
            tok, e = tok[:-3], -1
        if not tok.startswith("a"):
            raise ValueError("bad letter %r" % tok)
        out.append((int(tok[1:]) - 1, e))
    return tuple(out)


def reduce_letters(letters):
    out = []
    for l in letters:
        if out and out[-1][0] == l[0] and out[-1][1] == -l[1]:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


@dataclass
class SurfaceGroup:
    """Cocompact group given by generators and one relator."""
    generators: list
    relator: tuple
    genus: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def letter(self, i, e):
        g = self.generators[i]
        return g if e > 0 else g.inverse()

    def word(self, letters):
        letters = reduce_letters(tuple(letters))
        iso = Isometry.identity(2)
        for i, e in letters:
            iso = iso @ self.letter(i, e)
        return GroupWord(letters, iso)

    def relator_defect(self):
        return float(np.max(np.abs(self.word_matrix(self.relator) - np.eye(3))))

    def word_matrix(self, letters):
        M = np.eye(3)
        for i, e in letters:
            M = M @ self.letter(i, e).A
        return M

    @property
    def letters(self):
        return [(i, e) for i in range(len(self.generators)) for e in (1, -1)]

    # -- balls of group elements -------------------------------------------

    def ball(self, radius, max_len=8):
        """Elements g with d(0, g.0) <= radius, found by a pruned search.

        Any element g of the ball is the product of the side elements of the
        polygons met by the segment from the origin to g.0.  Each of those
        polygons meets the segment, so its centre lies within radius +
        circumradius of the origin; proper prefixes of a multi-letter side
        word add at most their own displacement.  Words outside that bound
        are not extended.
        """
        key = (round(float(radius), 9), max_len)
        if key not in self._cache:
            # the polygon is built from enumerate_words, never from ball
            slack = self.circumradius + self._side_prefix_reach() + 1e-9
            self._cache[key] = enumerate_words(self, max_len, max_displacement=radius,
                                               search_displacement=radius + slack)
        return self._cache[key]

    def _side_prefix_reach(self):
        """Largest displacement of a proper prefix of a side word (0 for single letters)."""
        reach = 0.0
        for w in self.polygon.elements:
            for k in range(1, len(w.letters)):
                A = self.word_matrix(w.letters[:k])
                reach = max(reach, float(np.arccosh(max(A[2, 2], 1.0))))
        return reach

    # -- Dirichlet polygon -------------------------------------------------

    @property
    def polygon(self):
        if "polygon" not in self._cache:
            self._cache["polygon"] = dirichlet_polygon(self)
        return self._cache["polygon"]

    @property
    def circumradius(self):
        return self.polygon.circumradius


def build_octagon_group():
    """Genus-2 group pairing opposite sides of the regular pi/4 octagon."""
    ell = octagon_side_length()
    gens = [Isometry.linear(translation_along(k * np.pi / 4, ell)) for k in range(4)]
    relator = ((0, 1), (1, -1), (2, 1), (3, -1), (0, -1), (1, 1), (2, -1), (3, 1))
    G = SurfaceGroup(gens, relator, 2)
    if G.relator_defect() > 1e-8:
        raise GeometryError("octagon relator defect %.3g" % G.relator_defect())
    return G


def _point_key(A, shift):
    X = A[:, 2] / (DEDUP_TOL * max(1.0, A[2, 2]))
    return tuple(np.floor(X + shift).astype(np.int64))


def enumerate_words(G, max_len, max_displacement=None, search_displacement=None, dedup=True):
    """Reduced words of length <= max_len, optionally inside a ball.

    Words with equal matrices (up to DEDUP_TOL relative max norm) are kept
    once, the shortest first.  Two elements are compared through the image
    of the origin, which determines the element because the action is free.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    if search_displacement is None:
        search_displacement = max_displacement
    ident = GroupWord((), Isometry.identity(2))
    out = [ident]
    seen0, seen1 = {}, {}

    def fresh(A):
        k0, k1 = _point_key(A, 0.0), _point_key(A, 0.5)
        scale = DEDUP_TOL * max(1.0, np.max(np.abs(A)))
        for seen, k in ((seen0, k0), (seen1, k1)):
            for other in seen.get(k, ()):
                if np.max(np.abs(other - A)) <= scale:
                    return False
        seen0.setdefault(k0, []).append(A)
        seen1.setdefault(k1, []).append(A)
        return True

    if dedup:
        fresh(ident.A)
    frontier = [ident]
    letters = G.letters
    mats = {l: G.letter(*l).A for l in letters}
    cosh_keep = np.inf if max_displacement is None else np.cosh(max_displacement) * (1 + 1e-12)
    cosh_search = np.inf if search_displacement is None else np.cosh(search_displacement) * (1 + 1e-12)
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            last = w.letters[-1] if w.letters else None
            for l in letters:
                if last is not None and last[0] == l[0] and last[1] == -l[1]:
                    continue
                A = w.A @ mats[l]
                if A[2, 2] > cosh_search:
                    continue
                if dedup and not fresh(A):
                    continue
                if A[2, 2] > 1e6:
                    A = reorthonormalize(A)
                nw = GroupWord(w.letters + (l,), Isometry.linear(A))
                nxt.append(nw)
                if A[2, 2] <= cosh_keep:
                    out.append(nw)
        frontier = nxt
    return out


def translation_length(g):
    """ln of the largest eigenvalue of a hyperbolic element."""
    A = g.A if hasattr(g, "A") else np.asarray(g)
    ev = np.linalg.eigvals(A)
    mu = np.max(np.abs(ev))
    if not np.all(np.abs(ev.imag) < 1e-9 * max(1.0, mu)) or mu < 1 + 1e-9:
        raise GeometryError("element is not hyperbolic")
    return float(np.log(mu))


def axis_endpoints(g):
    """(repelling, attracting) fixed points on the circle of a hyperbolic element."""
    A = g.A if hasattr(g, "A") else np.asarray(g)
    translation_length(A)
    w, V = np.linalg.eig(A)
    w = w.real
    i_att = int(np.argmax(w))
    i_rep = int(np.argmin(w))
    pts = []
    for i in (i_rep, i_att):
        v = V[:, i].real
        p = v[:2] / v[2]
        pts.append(p / np.linalg.norm(p))
    return pts[0], pts[1]


def axis(g):
    """Axis of a hyperbolic element as a chord of the Klein disk."""
    a, b = axis_endpoints(g)
    return GeodesicLine.from_endpoints(a, b)


def lines_cross(l1, l2, tol=1e-8):
    """True if two chords of the disk meet in the open disk."""
    a1, b1 = l1.endpoints()
    a2, b2 = l2.endpoints()
    ang = lambda p: np.arctan2(p[1], p[0])
    t1 = sorted([ang(a1), ang(b1)])
    s = [ang(a2), ang(b2)]
    inside = [(t1[0] + tol < x < t1[1] - tol) for x in s]
    outside = [(x < t1[0] - tol or x > t1[1] + tol) for x in s]
    return (inside[0] and outside[1]) or (inside[1] and outside[0])


def same_line(l1, l2, tol=1e-8):
    a1, b1 = l1.endpoints()
    a2, b2 = l2.endpoints()
    d = min(max(np.linalg.norm(a1 - a2), np.linalg.norm(b1 - b2)),
            max(np.linalg.norm(a1 - b2), np.linalg.norm(b1 - a2)))
    return d < tol


# -- Dirichlet polygon ------------------------------------------------------

@dataclass
class DirichletPolygon:
    """Sides {<(x,1), N_k> = 0} of the Dirichlet polygon, with inside N_k <= 0.

    Crossing side k leads into the polygon elements[k].D.
    """
    normals: np.ndarray     # (K, 3)
    elements: list          # GroupWord per side
    vertices: np.ndarray    # (V, 2) in counterclockwise order

    @cached_property
    def matrices(self):
        return np.array([w.A for w in self.elements])

    @cached_property
    def inverse_matrices(self):
        return np.array([lorentz_inverse(w.A) for w in self.elements])

    @cached_property
    def circumradius(self):
        r = np.max(np.linalg.norm(self.vertices, axis=1))
        return float(np.arctanh(r))

    @cached_property
    def inradius(self):
        return float(min(np.arccosh(w.A[2, 2]) for w in self.elements) / 2)

    def contains(self, x, tol=TIE_TOL):
        vals = homogeneous(np.atleast_2d(x)) @ (self.normals * np.array([1, 1, -1])).T
        return np.all(vals <= tol, axis=-1)

    def hyperbolic_area(self):
        """Gauss-Bonnet: (n - 2) pi minus the sum of interior angles."""
        V = self.vertices
        n = len(V)
        tot = 0.0
        for i in range(n):
            a, p, b = V[i - 1], V[i], V[(i + 1) % n]
            tot += vertex_angle(p, a, b)
        return (n - 2) * np.pi - tot


def vertex_angle(p, a, b):
    """Hyperbolic angle at p between the geodesics to a and b (Klein model)."""
    from .mink_linalg import hyp_metric
    g = hyp_metric(p)
    u, v = a - p, b - p
    c = u @ g @ v / np.sqrt((u @ g @ u) * (v @ g @ v))
    return float(np.arccos(np.clip(c, -1, 1)))


def _clip(poly, N):
    """Clip a convex polygon (list of points) by <(x,1), N> <= 0."""
    f = lambda x: x[0] * N[0] + x[1] * N[1] - N[2]
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = f(p), f(q)
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def dirichlet_polygon(G, radius=None, max_len=8):
    """Dirichlet polygon at the origin, from bisectors with nearby orbit points.

    The radius of the ball of orbit points is enlarged until it exceeds
    twice the circumradius of the resulting polygon, which makes the list
    of bisectors complete.
    """
    if radius is None:
        radius = 5.0
    while True:
        words = enumerate_words(G, max_len, max_displacement=radius,
                                search_displacement=2.0 * radius)
        poly = [np.array(p, dtype=float) for p in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
        sides = []
        for w in words[1:]:
            N = w.A @ ORIGIN - ORIGIN
            new = _clip(poly, N)
            if len(new) < 3:
                raise GeometryError("degenerate Dirichlet polygon")
            poly = new
            sides.append((N, w))
        V = np.array(poly)
        # keep the bisectors that support an edge of the final polygon
        used = []
        for N, w in sides:
            f = V @ N[:2] - N[2]
            if np.sum(np.abs(f) < 1e-9) >= 2:
                used.append((N, w))
        # remove duplicate consecutive vertices
        keep = [V[i] for i in range(len(V)) if np.linalg.norm(V[i] - V[i - 1]) > 1e-12]
        V = np.array(keep)
        if np.max(np.linalg.norm(V, axis=1)) >= 1.0:
            radius *= 1.5
            continue
        rc = float(np.arctanh(np.max(np.linalg.norm(V, axis=1))))
        if 2.0 * rc <= radius:
            break
        radius = 2.0 * rc + 0.5
    normals = np.array([N for N, _ in used])
    return DirichletPolygon(normals, [w for _, w in used], V)


def in_dirichlet_domain(G, x, word_len=8):
    """Is x at least as close to the origin as to every image g.0?

    Only elements with d(0, g.0) <= 2 d(0, x) can beat the origin, so the
    comparison runs over that ball (restricted to words of length
    <= word_len).  Ties within TIE_TOL count as inside.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(np.linalg.norm(x, axis=1) >= 1.0):
        raise GeometryError("in_dirichlet_domain needs points of the open disk")
    X = homogeneous(x)
    r = np.arctanh(np.linalg.norm(x, axis=1).max())
    words = G.ball(2.0 * r + 1e-9, word_len)
    if len(words) <= 1:
        return np.ones(len(x), dtype=bool)
    # <X, g0 - 0> <= 0 for all g, scaled by L so the tie tolerance is relative
    C = np.array([w.A @ ORIGIN - ORIGIN for w in words[1:]])
    vals = X @ (C * np.array([1, 1, -1])).T
    scale = np.maximum(1.0, np.abs(C[:, 2]))[None, :]
    return np.all(vals / scale <= TIE_TOL, axis=1)


def fold(G, x, max_steps=10_000):
    """Element f and point y = f^-1.x with y in the Dirichlet polygon."""
    P = G.polygon
    y = np.asarray(x, dtype=float).copy()
    F = np.eye(3)
    for _ in range(max_steps):
        vals = homogeneous(y) @ (P.normals * np.array([1, 1, -1])).T
        k = int(np.argmax(vals))
        if vals[k] <= TIE_TOL:
            return F, y
        y = act_klein(P.inverse_matrices[k], y)
        F = F @ P.matrices[k]
    raise GeometryError("folding did not terminate")


# -- walking through the tiling ---------------------------------------------

@dataclass
class WalkResult:
    total: np.ndarray        # sum of weighted pairings per target
    steps: np.ndarray        # polygons visited
    tail_bound: np.ndarray   # bound on the omitted tail (ideal targets)
    crossings: list = None   # per target: list of (global element, local line index, sign)
    vector_total: np.ndarray = None


def walk(G, start, targets, lines, weights, ideal=False, tol=1e-12, max_steps=400,
         record=False, accumulate_vectors=False):
    """Follow straight paths from `start` through the tiling of the disk.

    Parameters
    ----------
    G : SurfaceGroup
    start : (2,) point of the Dirichlet polygon.
    targets : (M, 2) end points; interior points, or ideal points on the
        unit circle when `ideal` is true.  (M, 3) arrays are read as
        homogeneous vectors, which keeps far targets A.x0 accurate.
    lines : list of GeodesicLine, the lifts meeting the base polygon, in its frame.
    weights : their weights.
    ideal : targets on the circle; the walk then stops once the bound on the
        remaining contributions drops below `tol`.

    Returns
    -------
    WalkResult whose `total` is sum over crossed lifts l of w_l <(y,1), v_l>,
    with v_l oriented along the path.  With `accumulate_vectors` the sum of
    w_l v_l (in the original frame) is also returned.
    """
    P = G.polygon
    Nsig = P.normals * np.array([1, 1, -1])
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    M = len(targets)
    T = targets.copy() if targets.shape[1] == 3 else homogeneous(targets)
    e = np.tile(np.asarray(start, dtype=float), (M, 1))
    if not np.all(P.contains(e, 1e-9)):
        raise GeometryError("walk must start in the base polygon")
    nl = len(lines)
    if nl:
        V = np.array([normal_vector(l) for l in lines])      # (nl, 3)
        Vsig = V * np.array([1, 1, -1])
        Lsig = np.array([np.concatenate([l.n, [l.offset]]) for l in lines])  # side(x) = x.n - offset
        Lsig[:, 2] *= -1
        w = np.asarray(weights, dtype=float)
        K = float(np.sum(np.abs(w) * np.linalg.norm(V, axis=1)) * np.sqrt(2.0))
    else:
        K = 0.0
    total = np.zeros(M)
    vec_total = np.zeros((M, 3)) if accumulate_vectors else None
    gmat = np.tile(np.eye(3), (M, 1, 1))
    edge_prev = [[] for _ in range(M)]
    steps = np.zeros(M, dtype=int)
    bound = np.full(M, np.inf)
    active = np.ones(M, dtype=bool)
    rec = [[] for _ in range(M)] if record else None
    for it in range(max_steps):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        Ti = T[idx]
        t = Ti[:, :2] / Ti[:, 2:3]
        ei = e[idx]
        he = homogeneous(ei)
        ht = homogeneous(t)
        f0 = he @ Nsig.T
        f1 = ht @ Nsig.T
        slope = f1 - f0
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(slope > 1e-15, -f0 / slope, np.inf)
        s = np.where(s < 0, 0.0, s)
        k = np.argmin(s, axis=1)
        s_exit = s[np.arange(idx.size), k]
        done = s_exit >= 1.0
        s_end = np.where(done, 1.0, s_exit)
        if nl:
            g0 = he @ Lsig.T
            g1 = ht @ Lsig.T
            dg = g1 - g0
            with np.errstate(divide="ignore", invalid="ignore"):
                sc = -g0 / dg
            # a lift met exactly where the path leaves the polygon shows up
            # again at the entry of the next one; count it at the exit and
            # drop the entry copy, recognised by its oriented world-frame normal
            hit = (dg != 0) & (sc >= -EDGE_EPS) & (sc < (s_end + np.where(done, 0.0, EDGE_EPS))[:, None])
            if it > 0:
                for a, b in zip(*np.nonzero(hit & (sc < EDGE_EPS))):
                    m = idx[a]
                    gv = np.sign(dg[a, b]) * (gmat[m] @ V[b])
                    if any(np.linalg.norm(gv - u) <= 1e-7 * np.linalg.norm(u) for u in edge_prev[m]):
                        hit[a, b] = False
            for m in idx:
                edge_prev[m] = []
            for a, b in zip(*np.nonzero(hit & (sc > (s_exit - EDGE_EPS)[:, None]) & ~done[:, None])):
                edge_prev[idx[a]].append(np.sign(dg[a, b]) * (gmat[idx[a]] @ V[b]))
            if np.any(hit):
                sign = np.sign(dg)
                contrib = (Ti @ Vsig.T) * sign * w[None, :]
                total[idx] += np.sum(np.where(hit, contrib, 0.0), axis=1)
                if accumulate_vectors:
                    gv = np.einsum("mij,lj->mli", gmat[idx], V)
                    vec_total[idx] += np.einsum("ml,mli->mi", np.where(hit, sign * w[None, :], 0.0), gv)
                if record:
                    for a, b in zip(*np.nonzero(hit)):
                        rec[idx[a]].append((gmat[idx[a]].copy(), int(b), float(sign[a, b])))
        steps[idx] += 1
        if ideal:
            bound[idx] = K * np.abs(Ti[:, 2])
        fin = idx[done]
        active[fin] = False
        go = idx[~done]
        if go.size == 0:
            continue
        kk = k[~done]
        sx = s_exit[~done][:, None]
        exitp = ei[~done] + sx * (t[~done] - ei[~done])
        Minv = P.inverse_matrices[kk]
        Xn = np.einsum("mij,mj->mi", Minv, homogeneous(exitp))
        e[go] = Xn[:, :2] / Xn[:, 2:3]
        Tn = np.einsum("mij,mj->mi", Minv, T[go])
        if ideal:
            # keep the target exactly lightlike: c (xi, 1) with |xi| = 1
            xi = Tn[:, :2] / np.linalg.norm(Tn[:, :2], axis=1)[:, None]
            Tn = np.column_stack([xi * Tn[:, 2:3], Tn[:, 2]])
        T[go] = Tn
        gmat[go] = np.einsum("mij,mjk->mik", gmat[go], P.matrices[kk])
        if ideal:
            # every later polygon contributes at most K |T_2| and |T_2| decays
            # geometrically along the ray; the factor 1e-3 absorbs the
            # bounded back-and-forth of |T_2| between neighbouring polygons
            nb = K * np.abs(T[go, 2])
            stop = nb < tol * 1e-3
            active[go[stop]] = False
            bound[go[stop]] = nb[stop]
    if np.any(active):
        raise GeometryError("walk did not converge in %d steps" % max_steps)
    return WalkResult(total, steps, bound, rec, vec_total)


def lifts_meeting_polygon(G, core, max_len=8):
    """Lines g.axis(core) that meet the Dirichlet polygon, in its frame.

    Found by walking one period along the axis: every polygon met by the
    closed geodesic contributes the corresponding translate of the axis.
    """
    if hasattr(core, "letters"):
        # a cyclically reduced conjugate has the same lifts and a better
        # conditioned matrix
        letters = list(reduce_letters(core.letters))
        while len(letters) > 1 and letters[0][0] == letters[-1][0] and letters[0][1] == -letters[-1][1]:
            letters = letters[1:-1]
        core = G.word(tuple(letters))
    A = core.A if hasattr(core, "A") else np.asarray(core)
    a, b = axis_endpoints(A)
    # a point of the axis, folded into the base polygon
    mid = 0.5 * (a + b)
    F, p = fold(G, mid)
    Finv = lorentz_inverse(F)
    a2, b2 = act_klein(Finv, np.array([a, b]) * (1 - 1e-15))
    line0 = GeodesicLine.from_endpoints(a2, b2)
    conj = Finv @ A @ F
    # one period along the axis, from p towards the attracting end
    q = act_klein(conj, p)
    elems = _visited_elements(G, p, q)
    lines = []
    for E in elems:
        l = _image_line(lorentz_inverse(E), line0)
        if not any(same_line(l, m) for m in lines):
            lines.append(l)
    return lines


def _image_line(A, l):
    a, b = l.endpoints()
    X = homogeneous(np.array([a, b])) @ A.T
    pts = X[:, :2] / X[:, 2:3]
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return GeodesicLine.from_endpoints(pts[0], pts[1])


def _visited_elements(G, p, q, max_steps=400):
    """Elements E with the segment [p, q] meeting E.D, in order."""
    P = G.polygon
    Nsig = P.normals * np.array([1, 1, -1])
    E = np.eye(3)
    out = [E.copy()]
    e = np.asarray(p, dtype=float)
    T = homogeneous(q)
    for _ in range(max_steps):
        t = T[:2] / T[2]
        f0 = homogeneous(e) @ Nsig.T
        f1 = homogeneous(t) @ Nsig.T
        slope = f1 - f0
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(slope > 1e-15, -f0 / slope, np.inf)
        s = np.maximum(s, 0.0)
        k = int(np.argmin(s))
        if s[k] >= 1.0:
            return out
        x = e + s[k] * (t - e)
        Minv = P.inverse_matrices[k]
        X = Minv @ homogeneous(x)
        e = X[:2] / X[2]
        T = Minv @ T
        E = E @ P.matrices[k]
        out.append(E.copy())
    raise GeometryError("segment walk did not terminate")


@dataclass(frozen=True)
class GeodesicLift:
    element: np.ndarray
    line: GeodesicLine


def lifts_crossing_segment(G, core, seg, word_len=8, saturate=True):
    """Distinct lifts g.axis(core_i) crossing the open segment seg = (p, q).

    Candidates g run over words of length <= word_len inside a ball large
    enough to contain every polygon met by the segment; with `saturate`
    word_len is raised by 2 until the crossing set stops changing.
    """
    p, q = (np.asarray(z, dtype=float) for z in seg)
    if np.linalg.norm(p - q) == 0:
        return []

    def collect(n):
        from .mink_linalg import hyp_distance
        far = max(hyp_distance(np.zeros(2), p), hyp_distance(np.zeros(2), q))
        found = []
        for c in core:
            A = c.A if hasattr(c, "A") else np.asarray(c)
            base = axis(A)
            # distance from the origin to the axis plus half a period bounds
            # how far the conjugating element has to move the origin
            da = float(np.arctanh(min(abs(base.offset), 1 - 1e-16)))
            R = far + da + translation_length(A) / 2 + 1e-6
            for w in G.ball(R, n):
                l = _image_line(w.A, base)
                sp, sq = l.side(p), l.side(q)
                if abs(sp) < 1e-13 or abs(sq) < 1e-13:
                    raise GeometryError("segment endpoint lies on a lift")
                if sp * sq < 0 and not any(same_line(l, m.line) for m in found):
                    conj = w.A @ A @ lorentz_inverse(w.A)
                    found.append(GeodesicLift(conj, l))
        return found

    res = collect(word_len)
    while saturate:
        more = collect(word_len + 2)
        if len(more) == len(res):
            break
        res, word_len = more, word_len + 2
    return res


def check_disjoint(lines, tol=1e-8):
    """True if no two distinct chords cross."""
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            if same_line(lines[i], lines[j], tol):
                continue
            if lines_cross(lines[i], lines[j], tol):
                return False
    return True


def form_defect(A):
    return float(np.max(np.abs(A.T @ J(2) @ A - J(2))))

