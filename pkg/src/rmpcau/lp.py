"""Dense linear programming.

Two interchangeable backends sit behind :func:`solve_lp`:

* ``"simplex"`` -- a dense two-phase tableau simplex with Bland's rule.
  It is the reference implementation and is fully deterministic.
* ``"highs"`` -- :func:`scipy.optimize.linprog` with the HiGHS solver, used
  by default because the receding-horizon loop solves thousands of
  medium-sized programs.

Both return an :class:`LpSolution` whose primal point has been checked
against the original constraints.
"""

from __future__ import annotations

import contextlib
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import NumericalFailure

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9

_default_backend = "highs"


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``min/max c @ x  s.t.  A x (<= | ==) b,  lower <= x <= upper``.

    ``equality`` is a boolean mask over the rows of ``A``; unmarked rows are
    ``<=``.  ``A`` may be a dense array or a scipy sparse matrix.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    equality: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    maximize: bool = False

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        A = self.A
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=float)
        else:
            A = np.asarray(A, dtype=float).reshape(-1, n) if np.size(A) else np.zeros((0, n))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[1] != n:
            raise ValueError(f"constraint matrix has {A.shape[1]} columns, objective has {n}")
        if A.shape[0] != b.size:
            raise ValueError(f"constraint matrix has {A.shape[0]} rows, rhs has {b.size}")
        eq = np.zeros(b.size, bool) if self.equality is None else np.asarray(self.equality, bool).ravel()
        if eq.size != b.size:
            raise ValueError("equality mask length differs from rhs length")
        lo = np.full(n, -np.inf) if self.lower is None else np.broadcast_to(np.asarray(self.lower, float), (n,)).copy()
        up = np.full(n, np.inf) if self.upper is None else np.broadcast_to(np.asarray(self.upper, float), (n,)).copy()
        data = A.data if sp.issparse(A) else A
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(data)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)) or np.any(lo == np.inf) or np.any(up == -np.inf):
            raise ValueError("invalid variable bounds")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "equality", eq)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def from_blocks(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                    lower=None, upper=None, maximize=False):
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        blocks, rhs, eq = [], [], []
        for A, b, is_eq in ((A_ub, b_ub, False), (A_eq, b_eq, True)):
            if A is None:
                continue
            A = A if sp.issparse(A) else np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, n)
            b = np.asarray(b, dtype=float).ravel()
            blocks.append(A)
            rhs.append(b)
            eq.append(np.full(b.size, is_eq))
        if not blocks:
            A = np.zeros((0, n))
        elif any(sp.issparse(B) for B in blocks):
            A = sp.vstack([sp.csr_matrix(B) for B in blocks], format="csr")
        else:
            A = np.vstack(blocks)
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        equality = np.concatenate(eq) if eq else np.zeros(0, bool)
        return cls(c, A, b, equality, lower, upper, maximize)

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return self.b.size

    def residual(self, x):
        """Largest constraint violation of ``x`` (0 when feasible)."""
        x = np.asarray(x, float)
        Ax = self.A @ x
        viol = Ax - self.b
        viol = np.where(self.equality, np.abs(viol), viol)
        parts = [viol, self.lower - x, x - self.upper]
        return float(max(0.0, max((p.max() for p in parts if p.size), default=0.0)))


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    backend: str = field(default="", compare=False)

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def get_default_backend():
    return _default_backend


def set_default_backend(name):
    global _default_backend
    if name not in _BACKENDS:
        raise ValueError(f"unknown LP backend {name!r}; choose from {sorted(_BACKENDS)}")
    _default_backend = name


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch the default LP backend."""
    previous = get_default_backend()
    set_default_backend(name)
    try:
        yield
    finally:
        set_default_backend(previous)


def solve_lp(lp: LinearProgram, backend=None, tol=FEAS_TOL) -> LpSolution:
    """Solve ``lp`` and certify the returned point.

    Raises :class:`NumericalFailure` when the backend stalls or returns a
    point violating the constraints by more than ``100 * tol``.
    """
    name = backend or _default_backend
    try:
        solver = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown LP backend {name!r}") from None
    sol = solver(lp, tol)
    if sol.optimal:
        scale = 1.0 + float(np.max(np.abs(sol.x), initial=0.0))
        if lp.residual(sol.x) > 100 * tol * scale:
            raise NumericalFailure(
                f"{name} returned a point with residual {lp.residual(sol.x):.3g}")
    return sol


def feasible_point(A, b, backend=None, tol=FEAS_TOL):
    """Return some ``x`` with ``A x <= b`` or ``None`` when the system is infeasible.

    The point returned is the centre of the largest inscribed ball when it
    exists (keeps the witness away from the boundary), otherwise any
    phase-1 point.
    """
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float).ravel()
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(n)
    norms = np.linalg.norm(A, axis=1)
    # maximise radius r subject to A x + |a_i| r <= b, 0 <= r <= 1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    lp = LinearProgram(c, np.hstack([A, norms[:, None]]), b,
                       lower=np.r_[np.full(n, -np.inf), 0.0],
                       upper=np.r_[np.full(n, np.inf), 1.0])
    sol = solve_lp(lp, backend=backend, tol=tol)
    if sol.status is LpStatus.INFEASIBLE:
        return None
    if not sol.optimal:
        raise NumericalFailure("phase-1 problem reported unbounded")
    x = sol.x[:n]
    if np.max(A @ x - b, initial=-np.inf) > tol * (1 + np.max(np.abs(x), initial=0)):
        return None
    return x


# --------------------------------------------------------------------------
# HiGHS backend


def _solve_highs(lp: LinearProgram, tol):
    c = -lp.c if lp.maximize else lp.c
    eq = lp.equality
    A = lp.A
    kwargs = {}
    if np.any(~eq):
        kwargs["A_ub"] = A[~eq]
        kwargs["b_ub"] = lp.b[~eq]
    if np.any(eq):
        kwargs["A_eq"] = A[eq]
        kwargs["b_eq"] = lp.b[eq]
    bounds = np.column_stack([
        np.where(np.isfinite(lp.lower), lp.lower, np.nan),
        np.where(np.isfinite(lp.upper), lp.upper, np.nan),
    ])
    bounds = [(None if np.isnan(lo) else lo, None if np.isnan(up) else up) for lo, up in bounds]
    res = linprog(c, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": tol * 1e-1,
                           "dual_feasibility_tolerance": tol * 1e-1},
                  **kwargs)
    if res.status == 0:
        obj = float(lp.c @ res.x)
        return LpSolution(LpStatus.OPTIMAL, np.asarray(res.x, float), obj, int(res.nit), "highs")
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, iterations=int(res.nit), backend="highs")
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, iterations=int(res.nit), backend="highs")
    raise NumericalFailure(f"HiGHS failed: {res.message}")


# --------------------------------------------------------------------------
# Dense two-phase simplex (Bland's rule)


class _StandardForm:
    """Map a general LP onto ``min c'z, A'z = b', z >= 0``.

    Every original variable becomes ``x = offset + T z`` for a sparse
    selection ``T``; finite upper bounds of two-sided variables become extra
    rows.
    """

    def __init__(self, lp: LinearProgram):
        A = lp.A.toarray() if sp.issparse(lp.A) else lp.A
        n = lp.n_vars
        cols = []  # (orig index, sign) per standard-form column
        offset = np.zeros(n)
        extra_rows = []
        for i in range(n):
            lo, up = lp.lower[i], lp.upper[i]
            if np.isfinite(lo):
                offset[i] = lo
                cols.append((i, 1.0))
                if np.isfinite(up):
                    extra_rows.append((len(cols) - 1, up - lo))
            elif np.isfinite(up):
                offset[i] = up
                cols.append((i, -1.0))
            else:
                cols.append((i, 1.0))
                cols.append((i, -1.0))
        nz = len(cols)
        T = np.zeros((n, nz))
        for j, (i, s) in enumerate(cols):
            T[i, j] = s
        rows = A @ T
        rhs = lp.b - A @ offset
        eq = lp.equality.copy()
        if extra_rows:
            E = np.zeros((len(extra_rows), nz))
            for r, (j, width) in enumerate(extra_rows):
                E[r, j] = 1.0
            rows = np.vstack([rows, E])
            rhs = np.concatenate([rhs, [w for _, w in extra_rows]])
            eq = np.concatenate([eq, np.zeros(len(extra_rows), bool)])
        # slacks for inequality rows
        n_slack = int(np.count_nonzero(~eq))
        S = np.zeros((rows.shape[0], n_slack))
        S[np.flatnonzero(~eq), np.arange(n_slack)] = 1.0
        self.A = np.hstack([rows, S])
        self.b = rhs
        cost = (-lp.c if lp.maximize else lp.c) @ T
        self.c = np.concatenate([cost, np.zeros(n_slack)])
        self.T = T
        self.offset = offset
        self.n_struct = nz

    def recover(self, z):
        return self.offset + self.T @ z[: self.n_struct]


def _pivot(tab, basis, row, col):
    tab[row] /= tab[row, col]
    others = np.abs(tab[:, col]) > 0
    others[row] = False
    tab[others] -= np.outer(tab[others, col], tab[row])
    basis[row] = col


def _run_simplex(tab, basis, n_cols, max_iter):
    """Minimise the objective in the last row of ``tab`` with Bland's rule.

    Returns ``(status, iterations)`` with status ``"optimal"`` or
    ``"unbounded"``.  Only the first ``n_cols`` columns may enter.
    """
    m = tab.shape[0] - 1
    for it in range(max_iter):
        reduced = tab[-1, :n_cols]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal", it
        col = int(candidates[0])
        column = tab[:m, col]
        positive = np.flatnonzero(column > PIVOT_TOL)
        if positive.size == 0:
            return "unbounded", it
        ratios = tab[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tab, basis, row, col)
    raise NumericalFailure(f"simplex exceeded {max_iter} iterations")


def _solve_simplex(lp: LinearProgram, tol, max_iter=None):
    sf = _StandardForm(lp)
    A, b, c = sf.A.copy(), sf.b.copy(), sf.c
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial variable per row
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    _, it1 = _run_simplex(tab, basis, n + m, max_iter)
    infeas = -tab[-1, -1]
    if infeas > tol * (1.0 + np.abs(b).max(initial=0.0)):
        return LpSolution(LpStatus.INFEASIBLE, iterations=it1, backend="simplex")

    # drive artificials out of the basis; drop rows that are linearly dependent
    keep = np.ones(m, bool)
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(tab[r, :n]) > PIVOT_TOL)
            if nz.size:
                _pivot(tab, basis, r, int(nz[0]))
            else:
                keep[r] = False
    rows = np.flatnonzero(keep)
    tab2 = np.zeros((rows.size + 1, n + 1))
    tab2[:-1, :n] = tab[rows, :n]
    tab2[:-1, -1] = tab[rows, -1]
    basis = basis[rows].copy()
    tab2[-1, :n] = c
    for r, j in enumerate(basis):
        if tab2[-1, j] != 0.0:
            tab2[-1] -= tab2[-1, j] * tab2[r]
    status, it2 = _run_simplex(tab2, basis, n, max_iter)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=it1 + it2, backend="simplex")
    z = np.zeros(n)
    z[basis] = tab2[:-1, -1]
    z = np.maximum(z, 0.0)
    x = sf.recover(z)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.c @ x), it1 + it2, "simplex")


_BACKENDS = {"highs": _solve_highs, "simplex": _solve_simplex}
