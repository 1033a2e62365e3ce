"""H-polytopes and the set operations used by the precursor-set iterations.

Sets are stored as ``{x : H x <= h}``.  All decisions (emptiness,
redundancy, containment) are made with LPs and the feasibility tolerance
:data:`rmpcau.lp.FEAS_TOL`; there is no exact arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateImage, DimensionCap, DimensionMismatch, ExplosionLimit, UnboundedSet
from .lp import FEAS_TOL, LinearProgram, LpStatus, feasible_point, solve_lp

DEFAULT_FM_ROW_CAP = 20_000
DEFAULT_VERTEX_DIM_CAP = 6
VERTEX_DEDUP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HPolytope:
    """The set ``{x : H x <= h}``."""

    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).ravel()
        H = np.asarray(self.H, dtype=float)
        if H.ndim == 1:
            H = H.reshape(h.size, -1) if h.size else H.reshape(0, H.size)
        if H.ndim != 2 or H.shape[0] != h.size:
            raise DimensionMismatch(f"H has shape {H.shape} but h has length {h.size}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(h))):
            raise ValueError("polytope data must be finite")
        H.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_box(cls, lower, upper):
        lower = np.asarray(lower, float).ravel()
        upper = np.asarray(upper, float).ravel()
        n = lower.size
        H = np.vstack([np.eye(n), -np.eye(n)])
        h = np.concatenate([upper, -lower])
        keep = np.isfinite(h)
        return cls(H[keep], h[keep])

    @classmethod
    def universe(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((1, dim)), np.array([-1.0]))

    @classmethod
    def from_dict(cls, data):
        H = np.asarray(data["H"], float)
        h = np.asarray(data["h"], float)
        if H.size == 0:
            H = H.reshape(0, int(data.get("dim", 0)))
        return cls(H, h)

    def to_dict(self):
        return {"H": self.H.tolist(), "h": self.h.tolist(), "dim": self.dim}

    # basic queries --------------------------------------------------------

    @property
    def dim(self):
        return self.H.shape[1]

    @property
    def n_rows(self):
        return self.H.shape[0]

    def contains_point(self, x, tol=FEAS_TOL):
        x = np.asarray(x, float)
        if self.n_rows == 0:
            return True
        return bool(np.all(self.H @ x <= self.h + tol))

    def is_empty(self):
        return feasible_point(self.H, self.h) is None

    def normalize(self):
        """Scale each row to a unit normal; zero rows are kept as they are."""
        norms = np.linalg.norm(self.H, axis=1)
        scale = np.where(norms > 0, norms, 1.0)
        return HPolytope(self.H / scale[:, None], self.h / scale)

    def support(self, direction):
        """``max direction @ x`` over the set (``inf`` when unbounded, ``-inf`` when empty)."""
        lp = LinearProgram(np.asarray(direction, float), self.H, self.h, maximize=True)
        sol = solve_lp(lp)
        if sol.status is LpStatus.INFEASIBLE:
            return -np.inf
        if sol.status is LpStatus.UNBOUNDED:
            return np.inf
        return sol.objective

    def bounding_box(self):
        lo = np.array([-self.support(-e) for e in np.eye(self.dim)])
        hi = np.array([self.support(e) for e in np.eye(self.dim)])
        return lo, hi

    def is_bounded(self):
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def interior_point(self):
        """A point well inside the set, or ``None`` when empty."""
        return feasible_point(self.H, self.h)

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, rows={self.n_rows})"


@dataclass(frozen=True, eq=False)
class VPolytope:
    vertices: np.ndarray

    @property
    def dim(self):
        return self.vertices.shape[1]

    def __len__(self):
        return self.vertices.shape[0]


# --------------------------------------------------------------------------
# elementary operations


def _check_dims(P, Q):
    if P.dim != Q.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {P.dim} vs {Q.dim}")


def intersect(P: HPolytope, Q: HPolytope) -> HPolytope:
    _check_dims(P, Q)
    return HPolytope(np.vstack([P.H, Q.H]), np.concatenate([P.h, Q.h]))


def cartesian_product(P: HPolytope, Q: HPolytope) -> HPolytope:
    H = np.block([
        [P.H, np.zeros((P.n_rows, Q.dim))],
        [np.zeros((Q.n_rows, P.dim)), Q.H],
    ])
    return HPolytope(H, np.concatenate([P.h, Q.h]))


def preimage(P: HPolytope, M, c=None) -> HPolytope:
    """``{z : M z + c in P}``."""
    M = np.atleast_2d(np.asarray(M, float))
    if M.shape[0] != P.dim:
        raise DimensionMismatch(f"map has {M.shape[0]} outputs, set has dimension {P.dim}")
    h = P.h if c is None else P.h - P.H @ np.asarray(c, float)
    return HPolytope(P.H @ M, h)


def slice_polytope(P: HPolytope, indices, values) -> HPolytope:
    """Fix coordinates ``indices`` to ``values`` and return the set over the rest."""
    indices = np.atleast_1d(np.asarray(indices, int))
    values = np.atleast_1d(np.asarray(values, float))
    keep = np.setdiff1d(np.arange(P.dim), indices)
    return HPolytope(P.H[:, keep], P.h - P.H[:, indices] @ values)


def _clean_rows(H, h, tol=FEAS_TOL):
    """Normalise, drop trivial rows and merge parallel duplicates.

    Returns ``None`` when a row proves the set empty.
    """
    norms = np.linalg.norm(H, axis=1)
    zero = norms <= 1e-12
    if np.any(h[zero] < -tol):
        return None
    H = H[~zero] / norms[~zero, None]
    h = h[~zero] / norms[~zero]
    if H.shape[0] == 0:
        return H, h
    # sort by rounded normals so that duplicates are adjacent, keep tightest rhs
    key = np.round(H, 9)
    order = np.lexsort(np.column_stack([key, h]).T[::-1])
    H, h, key = H[order], h[order], key[order]
    first = np.ones(H.shape[0], bool)
    first[1:] = np.any(key[1:] != key[:-1], axis=1)
    return H[first], h[first]


def remove_redundancy(P: HPolytope, tol=FEAS_TOL) -> HPolytope:
    """Drop every row whose removal leaves the set unchanged.

    A row is redundant iff maximising it over the remaining rows stays
    below its rhs (within ``tol``).  Empty input returns
    :meth:`HPolytope.empty`.
    """
    cleaned = _clean_rows(P.H, P.h, tol)
    if cleaned is None:
        return HPolytope.empty(P.dim)
    H, h = cleaned
    if H.shape[0] == 0:
        return HPolytope.universe(P.dim)
    if feasible_point(H, h) is None:
        return HPolytope.empty(P.dim)
    keep = np.ones(H.shape[0], bool)
    for i in range(H.shape[0]):
        keep[i] = False
        rows = np.flatnonzero(keep)
        A = np.vstack([H[rows], H[i]])
        b = np.concatenate([h[rows], [h[i] + 1.0]])
        sol = solve_lp(LinearProgram(H[i], A, b, maximize=True))
        if sol.status is not LpStatus.OPTIMAL or sol.objective > h[i] + tol:
            keep[i] = True
    return HPolytope(H[keep], h[keep])


def contains(P: HPolytope, Q: HPolytope, tol=FEAS_TOL) -> bool:
    """Whether ``Q`` is a subset of ``P`` (one LP per row of ``P``).

    An empty ``Q`` is contained in anything.  Raises :class:`UnboundedSet`
    if ``Q`` is unbounded along a row normal of ``P``.
    """
    _check_dims(P, Q)
    if P.n_rows == 0:
        return True
    if feasible_point(Q.H, Q.h) is None:
        return True
    Pn, Qn = P.normalize(), Q.normalize()
    for a, b in zip(Pn.H, Pn.h):
        if not np.any(a):
            if b < -tol:
                return False
            continue
        # a parallel row of Q that is at least as tight settles it without an LP
        if Qn.n_rows:
            same = np.all(np.abs(Qn.H - a) <= 1e-12, axis=1)
            if np.any(Qn.h[same] <= b + tol):
                continue
        sol = solve_lp(LinearProgram(a, Qn.H, Qn.h, maximize=True))
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedSet("inner set is unbounded along a tested direction")
        if sol.status is LpStatus.INFEASIBLE:
            return True
        if sol.objective > b + tol:
            return False
    return True


def equals(P: HPolytope, Q: HPolytope, tol=FEAS_TOL) -> bool:
    return contains(P, Q, tol) and contains(Q, P, tol)


def project_out(P: HPolytope, last_k: int, row_cap=DEFAULT_FM_ROW_CAP, tol=FEAS_TOL) -> HPolytope:
    """Eliminate the trailing ``last_k`` coordinates by Fourier-Motzkin.

    Redundant rows are removed after every single-variable elimination.
    """
    if not 0 <= last_k < P.dim:
        raise DimensionMismatch(f"cannot eliminate {last_k} of {P.dim} coordinates")
    current = remove_redundancy(P, tol)
    for _ in range(last_k):
        n = current.dim
        if _is_empty_marker(current):
            return HPolytope.empty(n - 1)
        H, h = current.H, current.h
        col = H[:, -1]
        pos = np.flatnonzero(col > 1e-12)
        neg = np.flatnonzero(col < -1e-12)
        zero = np.flatnonzero(np.abs(col) <= 1e-12)
        n_new = zero.size + pos.size * neg.size
        if n_new > row_cap:
            raise ExplosionLimit(f"elimination would create {n_new} rows (cap {row_cap})")
        Hp = H[pos] / col[pos, None]
        hp = h[pos] / col[pos]
        Hn = H[neg] / -col[neg, None]
        hn = h[neg] / -col[neg]
        combo_H = (Hp[:, None, :-1] + Hn[None, :, :-1]).reshape(-1, n - 1)
        combo_h = (hp[:, None] + hn[None, :]).ravel()
        newH = np.vstack([H[zero, :-1], combo_H])
        newh = np.concatenate([h[zero], combo_h])
        current = remove_redundancy(HPolytope(newH, newh), tol)
    return current


def _is_empty_marker(P):
    return P.n_rows == 1 and not np.any(P.H) and P.h[0] < 0


def enumerate_vertices(P: HPolytope, dim_cap=DEFAULT_VERTEX_DIM_CAP, tol=FEAS_TOL) -> VPolytope:
    """All vertices of a bounded polytope by brute force over active-row subsets."""
    n = P.dim
    if n > dim_cap:
        raise DimensionCap(f"vertex enumeration limited to dimension {dim_cap}, got {n}")
    R = remove_redundancy(P, tol)
    if _is_empty_marker(R):
        return VPolytope(np.zeros((0, n)))
    if not R.is_bounded():
        raise UnboundedSet("vertex enumeration needs a bounded polytope")
    H, h = R.H, R.h
    found = []
    combos = np.array(list(itertools.combinations(range(H.shape[0]), n)), dtype=int)
    for start in range(0, len(combos), 20000):
        idx = combos[start:start + 20000]
        M = H[idx]
        rhs = h[idx]
        ok = np.abs(np.linalg.det(M)) > 1e-10
        if not np.any(ok):
            continue
        pts = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = np.all(pts @ H.T <= h + tol * (1 + np.abs(h)), axis=1)
        found.append(pts[feas])
    if not found:
        return VPolytope(np.zeros((0, n)))
    pts = np.vstack(found)
    return VPolytope(_dedup(pts, VERTEX_DEDUP_TOL))


def _dedup(points, tol):
    out = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in out):
            out.append(p)
    return np.array(out).reshape(-1, points.shape[1])


def from_vertices(V, tol=1e-10):
    """H-representation of ``conv(V)``.

    Returns ``(polytope, flat)``; ``flat`` is True when the hull is lower
    dimensional, in which case the affine hull is encoded with pairs of
    opposite rows.
    """
    V = np.atleast_2d(np.asarray(V, float))
    n = V.shape[1]
    center = V.mean(axis=0)
    U, svals, _ = np.linalg.svd((V - center).T, full_matrices=True)
    rank = int(np.sum(svals > tol * max(1.0, np.abs(V).max())))
    basis = U[:, :rank]
    normal = U[:, rank:]
    rows, rhs = [], []
    if rank < n:
        offset = normal.T @ center
        rows += [normal.T, -normal.T]
        rhs += [offset, -offset]
    if rank == 1:
        t = (V - center) @ basis[:, 0]
        rows += [basis.T, -basis.T]
        rhs += [np.array([t.max() + basis[:, 0] @ center]), np.array([-t.min() - basis[:, 0] @ center])]
    elif rank >= 2:
        T = (V - center) @ basis
        hull = ConvexHull(T)
        A = hull.equations[:, :-1]
        b = -hull.equations[:, -1]
        rows.append(A @ basis.T)
        rhs.append(b + A @ (basis.T @ center))
    if not rows:
        return HPolytope.universe(n), True
    P = HPolytope(np.vstack(rows), np.concatenate(rhs))
    return remove_redundancy(P), rank < n


def affine_image(P: HPolytope, M, c, strict=False):
    """``{M x + c : x in P}`` for a bounded ``P``.

    Uses the inverse map when ``M`` is square and invertible, otherwise
    maps the vertices.  Returns ``(polytope, flat)``; with ``strict=True``
    a flat image raises :class:`DegenerateImage` instead.
    """
    M = np.atleast_2d(np.asarray(M, float))
    c = np.asarray(c, float).ravel()
    if M.shape[1] != P.dim or M.shape[0] != c.size:
        raise DimensionMismatch("affine map does not match polytope dimension")
    if M.shape[0] == M.shape[1] and abs(np.linalg.det(M)) > 1e-12:
        Minv = np.linalg.inv(M)
        return HPolytope(P.H @ Minv, P.h + P.H @ Minv @ c), False
    V = enumerate_vertices(P).vertices
    image, flat = from_vertices(V @ M.T + c)
    if flat and strict:
        raise DegenerateImage("affine image is lower dimensional", image=image, flat=True)
    return image, flat


def ordered_polygon(P: HPolytope):
    """Vertices of a 2-D polytope in counter-clockwise order (for plotting)."""
    if P.dim != 2:
        raise DimensionMismatch("ordered_polygon needs a 2-D set")
    V = enumerate_vertices(P).vertices
    if len(V) < 3:
        return V
    center = V.mean(axis=0)
    angle = np.arctan2(V[:, 1] - center[1], V[:, 0] - center[0])
    return V[np.argsort(angle)]


def sample_points(P: HPolytope, n, rng=None):
    """Vertices of ``P`` followed by random convex combinations of them.

    Works for flat polytopes too (no rejection sampling).
    """
    rng = np.random.default_rng(rng)
    V = enumerate_vertices(P).vertices
    if len(V) == 0:
        return np.zeros((0, P.dim))
    extra = max(0, n - len(V))
    weights = rng.dirichlet(np.full(len(V), 0.5), size=extra)
    pts = np.vstack([V, weights @ V])
    return pts[:n] if n >= len(V) else V[rng.choice(len(V), n, replace=False)]
