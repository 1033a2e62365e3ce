"""Robust MPC with adjustable uncertainty sets.

The finite-horizon problem uses the affine disturbance-feedback policy
``u = P s + p`` over the primitive-set sequence ``s = (s_0, ..., s_{N-1})``
and the uncertainty ``w = blkdiag(Y_k) s + y_off``.  Every constraint that
must hold for all ``s`` in ``S^N`` is replaced by its LP dual
(``max a's over {G s <= g}  ->  min lambda'g s.t. lambda'G = a', lambda >= 0``),
which makes the whole problem one LP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InfeasibleAtStep, InfeasibleModel, NumericalFailure, ShapeError
from .geometry import HPolytope
from .lp import LinearProgram, LpStatus, solve_lp
from .system import UncertainLtiSystem, UncertaintyParametrization, unvec, vec

logger = logging.getLogger(__name__)

DISTURBANCE_MODES = ("zero", "random-vertex", "random-interior", "adversarial-vertex", "scripted")


# --------------------------------------------------------------------------
# prediction model


@dataclass(frozen=True, eq=False)
class PredictionMatrices:
    """Stacked constraints ``C U + D W <= d`` and terminal state ``x_N``.

    ``U`` and ``W`` stack inputs and disturbances over the horizon.  Row
    block ``k`` of ``C, D, d`` holds the state rows of ``x_k`` followed by
    the input rows of ``u_k``.  ``x_N = x_free_N + M U + N_w W``.
    ``Su, Sw, Sx`` give every predicted state, ``x = Sx x0 + Su U + Sw W``.
    """

    C: np.ndarray
    D: np.ndarray
    d: np.ndarray
    M: np.ndarray
    N_w: np.ndarray
    x_free_N: np.ndarray
    Su: np.ndarray
    Sw: np.ndarray
    Sx: np.ndarray
    x0: np.ndarray
    horizon: int


def build_prediction_matrices(sys: UncertainLtiSystem, N: int, x0) -> PredictionMatrices:
    if N < 1:
        raise ValueError("horizon must be at least 1")
    x0 = np.asarray(x0, float).ravel()
    if x0.size != sys.n_x:
        raise DimensionMismatch(f"initial state has length {x0.size}, expected {sys.n_x}")
    A, B, E = sys.A, sys.B, sys.E
    nx, nu, nw = sys.n_x, sys.n_u, sys.n_w
    powers = [np.eye(nx)]
    for _ in range(N):
        powers.append(A @ powers[-1])
    Sx = np.vstack(powers)
    Su = np.zeros(((N + 1) * nx, N * nu))
    Sw = np.zeros(((N + 1) * nx, N * nw))
    for k in range(1, N + 1):
        for j in range(k):
            Apow = powers[k - 1 - j]
            Su[k * nx:(k + 1) * nx, j * nu:(j + 1) * nu] = Apow @ B
            Sw[k * nx:(k + 1) * nx, j * nw:(j + 1) * nw] = Apow @ E
    Fx, fx = sys.state_set.H, sys.state_set.h
    Fu, fu = sys.input_set.H, sys.input_set.h
    nf, ng = Fx.shape[0], Fu.shape[0]
    rows = nf + ng
    C = np.zeros((N * rows, N * nu))
    D = np.zeros((N * rows, N * nw))
    d = np.zeros(N * rows)
    for k in range(N):
        r0 = k * rows
        xs = slice(k * nx, (k + 1) * nx)
        C[r0:r0 + nf] = Fx @ Su[xs]
        D[r0:r0 + nf] = Fx @ Sw[xs]
        d[r0:r0 + nf] = fx - Fx @ Sx[xs] @ x0
        C[r0 + nf:r0 + rows, k * nu:(k + 1) * nu] = Fu
        d[r0 + nf:r0 + rows] = fu
    last = slice(N * nx, (N + 1) * nx)
    return PredictionMatrices(C, D, d, Su[last], Sw[last], Sx[last] @ x0, Su, Sw, Sx, x0, N)


# --------------------------------------------------------------------------
# problem description


@dataclass(frozen=True, eq=False)
class CostSpec:
    """Linear cost ``sum_{k<N} q x_k + q_f x_N + sum_k r u_k``."""

    q: np.ndarray
    q_f: np.ndarray
    r: np.ndarray

    def stacked(self, pm: PredictionMatrices):
        """Return ``(c_u, c_w, const)`` with cost ``= c_u U + c_w W + const``."""
        N = pm.horizon
        qbar = np.concatenate([np.tile(np.asarray(self.q, float), N), np.asarray(self.q_f, float)])
        c_u = pm.Su.T @ qbar + np.tile(np.asarray(self.r, float), N)
        c_w = pm.Sw.T @ qbar
        const = float(qbar @ pm.Sx @ pm.x0)
        return c_u, c_w, const


@dataclass(frozen=True, eq=False)
class RmpcProblem:
    """Everything needed to pose the finite-horizon problem at any measured state.

    ``lambdas`` weight the per-step size metric
    ``rho_k = <rho_Y, Y_k> + rho_y . y_off_k``; ``terminal`` is a set over
    ``(x, vec(Y), y_off)`` or ``None``.
    """

    system: UncertainLtiSystem
    uncertainty: UncertaintyParametrization
    horizon: int
    cost: CostSpec
    lambdas: np.ndarray
    rho_Y: np.ndarray
    rho_y: np.ndarray
    terminal: HPolytope | None = None
    prune_duals: bool = True

    def __post_init__(self):
        unc = self.uncertainty
        lam = np.broadcast_to(np.asarray(self.lambdas, float), (self.horizon,)).copy()
        if np.any(lam < 0):
            raise ValueError("lambda weights must be nonnegative")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "rho_Y", np.asarray(self.rho_Y, float).reshape(unc.n_w, unc.n_s))
        object.__setattr__(self, "rho_y", np.asarray(self.rho_y, float).reshape(unc.n_w))
        if self.terminal is not None and self.terminal.dim != self.system.n_x + unc.n_params:
            raise ShapeError(f"terminal set must live in dimension n_x + n_params = "
                             f"{self.system.n_x + unc.n_params}, got {self.terminal.dim}")

    def with_(self, **changes):
        return replace(self, **changes)

    def rho(self, Y, y_off):
        return float(np.sum(self.rho_Y * Y) + self.rho_y @ np.asarray(y_off, float))


@dataclass(frozen=True, eq=False)
class AffineDfPolicy:
    """``U = P s + p`` with ``P`` strictly block lower triangular."""

    P: np.ndarray
    p: np.ndarray
    n_u: int
    n_s: int

    def inputs(self, s_seq):
        return self.P @ np.asarray(s_seq, float).ravel() + self.p

    def is_causal(self, tol=0.0):
        N = self.p.size // self.n_u
        for k in range(N):
            block = self.P[k * self.n_u:(k + 1) * self.n_u, k * self.n_s:]
            if np.any(np.abs(block) > tol):
                return False
        return True


@dataclass(frozen=True, eq=False)
class RmpcSolution:
    status: LpStatus
    policy: AffineDfPolicy | None = None
    Y: list = field(default_factory=list)
    y_off: list = field(default_factory=list)
    tau: float | None = None
    objective: float | None = None
    rho: list = field(default_factory=list)

    @property
    def first_input(self):
        return self.policy.p[: self.policy.n_u].copy()

    def disturbances(self, s_seq):
        s_seq = np.asarray(s_seq, float).reshape(len(self.Y), -1)
        return np.concatenate([Y @ s + y for Y, s, y in zip(self.Y, s_seq, self.y_off)])


@dataclass(frozen=True, eq=False)
class RmpcLp:
    """The assembled LP with index maps back to every decision block."""

    lp: LinearProgram
    index: dict
    p_entries: np.ndarray  # rows (k, j, r, i) of the free entries of P
    problem: RmpcProblem
    pm: PredictionMatrices

    def decode(self, x) -> RmpcSolution:
        prob = self.problem
        unc = prob.uncertainty
        nu, ns, nw, N = prob.system.n_u, unc.n_s, unc.n_w, prob.horizon
        P = np.zeros((N * nu, N * ns))
        vals = x[self.index["P"]]
        k, j, r, i = self.p_entries.T if len(self.p_entries) else (np.zeros(0, int),) * 4
        P[k * nu + r, j * ns + i] = vals
        p = x[self.index["p"]]
        Yv = x[self.index["Y"]].reshape(N, nw * ns)
        yo = x[self.index["y_off"]].reshape(N, nw)
        Ys = [unvec(v, nw, ns) for v in Yv]
        yos = [v.copy() for v in yo]
        tau = float(x[self.index["tau"]][0])
        return RmpcSolution(LpStatus.OPTIMAL, AffineDfPolicy(P, p, nu, ns), Ys, yos, tau,
                            float(self.lp.c @ x), [prob.rho(Y, y) for Y, y in zip(Ys, yos)])


class _Layout:
    """Running allocator of LP columns."""

    def __init__(self):
        self.size = 0
        self.index = {}

    def add(self, name, n):
        idx = np.arange(self.size, self.size + n)
        self.size += n
        self.index[name] = idx
        return idx


def _s_coefficient_map(A_u, A_w, p_entries, p_cols, Y_cols, nu, nw, ns, N):
    """Sparse map from decision columns to the ``s``-coefficients of each row.

    Row ``t`` of a robust constraint reads ``(A_u[t] P + A_w[t] Ybd) s``;
    the result has one row per ``(t, block j, coordinate i)``.
    """
    width = N * ns
    rows, cols, vals = [], [], []
    if len(p_entries):
        k, j, r, i = p_entries.T
        coef = A_u[:, k * nu + r]  # m x n_P
        t, e = np.nonzero(coef)
        rows.append(t * width + j[e] * ns + i[e])
        cols.append(p_cols[e])
        vals.append(coef[t, e])
    # Y_j entry (r, i) sits at vec position i * nw + r
    jj, ii, rr = np.meshgrid(np.arange(N), np.arange(ns), np.arange(nw), indexing="ij")
    jj, ii, rr = jj.ravel(), ii.ravel(), rr.ravel()
    coef = A_w[:, jj * nw + rr]
    t, e = np.nonzero(coef)
    rows.append(t * width + jj[e] * ns + ii[e])
    cols.append(Y_cols.reshape(N, nw * ns)[jj[e], ii[e] * nw + rr[e]])
    vals.append(coef[t, e])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_dual_lp(problem: RmpcProblem, x0) -> RmpcLp:
    """Assemble the finite-dimensional LP for measured state ``x0``.

    Three groups of robust rows are dualised: the cost epigraph, the
    path constraints and the terminal rows.  Dual blocks whose
    ``s``-coefficients vanish identically are dropped when
    ``problem.prune_duals`` is set; their optimal value is zero anyway.
    """
    sys, unc = problem.system, problem.uncertainty
    N = problem.horizon
    nx, nu, nw, ns = sys.n_x, sys.n_u, unc.n_w, unc.n_s
    if sys.n_w != nw:
        raise DimensionMismatch("system and uncertainty parametrisation disagree on n_w")
    G, g = unc.G, unc.g
    l = G.shape[0]
    pm = build_prediction_matrices(sys, N, x0)
    c_u, c_w, c_const = problem.cost.stacked(pm)

    lay = _Layout()
    lay.add("tau", 1)
    p_entries = np.array([(k, j, r, i) for k in range(N) for j in range(k)
                          for r in range(nu) for i in range(ns)], dtype=int).reshape(-1, 4)
    p_cols = lay.add("P", len(p_entries))
    p_nom = lay.add("p", N * nu)
    Y_cols = lay.add("Y", N * nw * ns)
    y_cols = lay.add("y_off", N * nw)
    n_params = nw * ns + nw

    # robust row groups: (name, A_u, A_w, direct terms, rhs)
    groups = []
    eye_tau = sp.csr_matrix(([-1.0], ([0], [0])), shape=(1, 1))
    groups.append(("mu", c_u[None, :], c_w[None, :], [(lay.index["tau"], eye_tau)],
                   np.array([-c_const])))
    groups.append(("Lambda", pm.C, pm.D, [], pm.d))
    if problem.terminal is not None:
        F, f = problem.terminal.H, problem.terminal.h
        Fx, Fpar = F[:, :nx], F[:, nx:]
        last_params = np.concatenate([Y_cols[-nw * ns:], y_cols[-nw:]]) if n_params else np.zeros(0, int)
        groups.append(("Gamma", Fx @ pm.M, Fx @ pm.N_w, [(last_params, sp.csr_matrix(Fpar))],
                       f - Fx @ pm.x_free_N))

    ineq_blocks, eq_blocks = [], []
    ineq_rhs = []
    dual_meta = {}
    for name, A_u, A_w, direct, rhs in groups:
        m = A_u.shape[0]
        er, ec, ev = _s_coefficient_map(A_u, A_w, p_entries, p_cols, Y_cols, nu, nw, ns, N)
        # active (row, block) pairs that need a dual block
        if problem.prune_duals:
            active = np.zeros((m, N), bool)
            block_of = (er % (N * ns)) // ns
            active[er // (N * ns), block_of] = True
        else:
            active = np.ones((m, N), bool)
        t_idx, j_idx = np.nonzero(active)
        dual_cols = lay.add(name, t_idx.size * l).reshape(-1, l)
        dual_meta[name] = (t_idx, j_idx)
        ineq_blocks.append((m, A_u, A_w, direct, t_idx, dual_cols))
        ineq_rhs.append(rhs)
        eq_blocks.append((m, er, ec, ev, t_idx, j_idx, dual_cols))

    n_vars = lay.size
    # inequality rows: A_u p + A_w y_off + g'lambda + direct <= rhs
    rows, cols, vals = [], [], []
    row0 = 0
    for m, A_u, A_w, direct, t_idx, dual_cols in ineq_blocks:
        t, e = np.nonzero(A_u)
        rows.append(row0 + t); cols.append(p_nom[e]); vals.append(A_u[t, e])
        t, e = np.nonzero(A_w)
        rows.append(row0 + t); cols.append(y_cols[e]); vals.append(A_w[t, e])
        if t_idx.size:
            rows.append(np.repeat(row0 + t_idx, l)); cols.append(dual_cols.ravel())
            vals.append(np.tile(g, t_idx.size))
        for var_idx, mat in direct:
            coo = sp.coo_matrix(mat)
            rows.append(row0 + coo.row); cols.append(np.asarray(var_idx)[coo.col]); vals.append(coo.data)
        row0 += m
    n_ineq_robust = row0
    # admissible uncertainty parameters for every step
    HY, hY = unc.admissible_set.H, unc.admissible_set.h
    adm_rhs = []
    for k in range(N):
        par = np.concatenate([Y_cols[k * nw * ns:(k + 1) * nw * ns], y_cols[k * nw:(k + 1) * nw]])
        t, e = np.nonzero(HY)
        rows.append(row0 + t); cols.append(par[e]); vals.append(HY[t, e])
        adm_rhs.append(hY)
        row0 += HY.shape[0]
    A_ub = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(row0, n_vars))
    b_ub = np.concatenate(ineq_rhs + adm_rhs)

    # equality rows: G' lambda_{t,j} - (s-coefficient of row t, block j) = 0
    rows, cols, vals = [], [], []
    row0 = 0
    GT = G.T
    for m, er, ec, ev, t_idx, j_idx, dual_cols in eq_blocks:
        width = N * ns
        rows.append(row0 + er); cols.append(ec); vals.append(-ev)
        if t_idx.size:
            base = t_idx * width + j_idx * ns  # first equality row of each dual block
            rr = base[:, None, None] + np.arange(ns)[None, :, None]
            cc = dual_cols[:, None, :]
            vv = GT[None, :, :]
            rr, cc, vv = np.broadcast_arrays(rr, cc, vv)
            nz = vv != 0
            rows.append(row0 + rr[nz]); cols.append(cc[nz]); vals.append(vv[nz])
        row0 += m * width
    if unc.tie_over_horizon and N > 1:
        for k in range(1, N):
            for base_cols, size in ((Y_cols, nw * ns), (y_cols, nw)):
                first = base_cols[:size]
                cur = base_cols[k * size:(k + 1) * size]
                idx = np.arange(size)
                rows += [row0 + idx, row0 + idx]
                cols += [cur, first]
                vals += [np.ones(size), -np.ones(size)]
                row0 += size
    A_eq = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(row0, n_vars))
    # drop all-zero equality rows (blocks of rows with no s-dependence)
    nonzero_rows = np.diff(A_eq.indptr) > 0
    A_eq = A_eq[nonzero_rows]
    b_eq = np.zeros(A_eq.shape[0])

    c = np.zeros(n_vars)
    c[lay.index["tau"]] = 1.0
    for k in range(N):
        c[Y_cols[k * nw * ns:(k + 1) * nw * ns]] -= problem.lambdas[k] * vec(problem.rho_Y)
        c[y_cols[k * nw:(k + 1) * nw]] -= problem.lambdas[k] * problem.rho_y
    lower = np.full(n_vars, -np.inf)
    for name in ("mu", "Lambda", "Gamma"):
        if name in lay.index:
            lower[lay.index[name]] = 0.0
    lp = LinearProgram.from_blocks(c, A_ub, b_ub, A_eq, b_eq, lower=lower)
    index = dict(lay.index)
    index["n_robust_ineq"] = n_ineq_robust
    index["dual_blocks"] = dual_meta
    return RmpcLp(lp, index, p_entries, problem, pm)


def solve_ocp(problem: RmpcProblem, x0, backend=None) -> RmpcSolution:
    """Solve the finite-horizon problem at ``x0``.

    Raises :class:`InfeasibleModel` when no admissible policy and
    uncertainty set exist.
    """
    model = build_dual_lp(problem, x0)
    sol = solve_lp(model.lp, backend=backend)
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleModel(f"no feasible policy from x0={np.asarray(x0).tolist()}")
    if sol.status is LpStatus.UNBOUNDED:
        raise NumericalFailure("optimal control LP is unbounded; is the uncertainty metric bounded on the admissible set?")
    return model.decode(sol.x)


# --------------------------------------------------------------------------
# verification helpers


def primitive_sequences(problem: RmpcProblem):
    """Every vertex sequence of ``S^N`` (desk-scale horizons only)."""
    V = problem.uncertainty.primitive_vertices
    N = problem.horizon
    grids = np.meshgrid(*[np.arange(len(V))] * N, indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=1)
    return V[combos].reshape(len(combos), -1)


def robust_violation(problem: RmpcProblem, solution: RmpcSolution, x0, sequences=None):
    """Largest violation of path and terminal constraints over vertex sequences of ``S^N``."""
    pm = build_prediction_matrices(problem.system, problem.horizon, x0)
    if sequences is None:
        sequences = primitive_sequences(problem)
    unc = problem.uncertainty
    worst = -np.inf
    for s in sequences:
        U = solution.policy.inputs(s)
        W = solution.disturbances(s)
        worst = max(worst, float(np.max(pm.C @ U + pm.D @ W - pm.d)))
        if problem.terminal is not None:
            xN = pm.x_free_N + pm.M @ U + pm.N_w @ W
            z = np.concatenate([xN, unc.stack(solution.Y[-1], solution.y_off[-1])])
            worst = max(worst, float(np.max(problem.terminal.H @ z - problem.terminal.h)))
    for Y, y in zip(solution.Y, solution.y_off):
        th = unc.stack(Y, y)
        if unc.admissible_set.n_rows:
            worst = max(worst, float(np.max(unc.admissible_set.H @ th - unc.admissible_set.h)))
    return worst


def worst_case_cost(problem: RmpcProblem, solution: RmpcSolution, x0, sequences=None):
    pm = build_prediction_matrices(problem.system, problem.horizon, x0)
    c_u, c_w, const = problem.cost.stacked(pm)
    if sequences is None:
        sequences = primitive_sequences(problem)
    return max(float(c_u @ solution.policy.inputs(s) + c_w @ solution.disturbances(s) + const)
               for s in sequences)


# --------------------------------------------------------------------------
# closed loop


@dataclass
class ClosedLoopTrace:
    x: list = field(default_factory=list)
    u: list = field(default_factory=list)
    w: list = field(default_factory=list)
    s: list = field(default_factory=list)
    Y: list = field(default_factory=list)
    y_off: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    feasible: list = field(default_factory=list)

    @property
    def steps(self):
        return len(self.u)

    @property
    def states(self):
        return np.array(self.x)

    def feasible_count(self):
        return int(sum(self.feasible))


def _disturbance(mode, sol, unc_vertices, rng, x, u, sys, script, t):
    Y, y_off = sol.Y[0], sol.y_off[0]
    if mode == "zero":
        return np.zeros(Y.shape[0]), None
    if mode == "scripted":
        s = np.atleast_1d(np.asarray(script[t], float))
        return Y @ s + y_off, s
    if mode == "random-vertex":
        s = unc_vertices[rng.integers(len(unc_vertices))]
    elif mode == "random-interior":
        wts = rng.dirichlet(np.ones(len(unc_vertices)))
        s = wts @ unc_vertices
    elif mode == "adversarial-vertex":
        # vertex leaving the smallest normalised slack in the state constraints; random tie-break
        X = sys.state_set
        norms = np.linalg.norm(X.H, axis=1)
        slack = []
        for v in unc_vertices:
            xn = sys.step(x, u, Y @ v + y_off)
            slack.append(np.min((X.h - X.H @ xn) / norms))
        slack = np.array(slack)
        ties = np.flatnonzero(slack <= slack.min() + 1e-9)
        s = unc_vertices[ties[rng.integers(len(ties))]]
    else:
        raise ValueError(f"unknown disturbance mode {mode!r}; choose from {DISTURBANCE_MODES}")
    return Y @ s + y_off, s


def run_closed_loop(problem: RmpcProblem, x0, steps: int, mode="zero", seed=0, script=None,
                    backend=None, raise_on_infeasible=True) -> ClosedLoopTrace:
    """Receding-horizon simulation; the disturbance at each step is taken
    from the uncertainty set just committed to by the controller.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if mode not in DISTURBANCE_MODES:
        raise ValueError(f"unknown disturbance mode {mode!r}; choose from {DISTURBANCE_MODES}")
    if mode == "scripted":
        if script is None or len(script) < steps:
            raise ValueError("scripted mode needs one primitive-set point per step")
        for s in script[:steps]:
            if not problem.uncertainty.primitive_set.contains_point(np.atleast_1d(s)):
                raise ValueError(f"scripted point {s} lies outside the primitive set")
    rng = np.random.default_rng(seed)
    sys = problem.system
    x = np.asarray(x0, float).ravel()
    trace = ClosedLoopTrace(x=[x.copy()])
    for t in range(steps):
        try:
            sol = solve_ocp(problem, x, backend=backend)
        except InfeasibleModel as exc:
            trace.feasible.append(False)
            if raise_on_infeasible:
                raise InfeasibleAtStep(t, f"optimal control problem infeasible at step {t}, x={x.tolist()}",
                                       trace) from exc
            return trace
        u = sol.first_input
        w, s = _disturbance(mode, sol, problem.uncertainty.primitive_vertices, rng, x, u, sys, script, t)
        x = sys.step(x, u, w)
        trace.u.append(u)
        trace.w.append(w)
        trace.s.append(s)
        trace.Y.append(sol.Y[0])
        trace.y_off.append(sol.y_off[0])
        trace.tau.append(sol.tau)
        trace.objective.append(sol.objective)
        trace.feasible.append(True)
        trace.x.append(x.copy())
    return trace


@dataclass(frozen=True)
class SweepRow:
    lam: float
    y_star: float
    rho: float
    avg_distance: float


def lambda_sweep(problem: RmpcProblem, x0, lambdas, steps=50, mode="zero", seed=0,
                 distance_index=0, weight_profile=None, backend=None):
    """Solve and simulate for each scalarisation weight.

    ``weight_profile`` spreads a scalar ``lam`` over the horizon
    (default: everything on the first step, i.e. ``lam * rho_0``).
    Returns a list of :class:`SweepRow`.
    """
    N = problem.horizon
    if weight_profile is None:
        weight_profile = np.r_[1.0, np.zeros(N - 1)]
    rows = []
    for lam in lambdas:
        if lam < 0:
            raise ValueError("lambda values must be nonnegative")
        prob = problem.with_(lambdas=lam * np.asarray(weight_profile, float))
        sol = solve_ocp(prob, x0, backend=backend)
        trace = run_closed_loop(prob, x0, steps, mode=mode, seed=seed, backend=backend)
        avg = float(np.mean(trace.states[:, distance_index]))
        rows.append(SweepRow(float(lam), float(sol.Y[0].flat[0]), sol.rho[0], avg))
    return rows


def is_nondecreasing(values, tol=1e-6):
    values = np.asarray(values, float)
    return bool(np.all(np.diff(values) >= -tol * (1 + np.abs(values[:-1]))))
