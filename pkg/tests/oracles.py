"""Independent reference computations used by the test-suite.

Nothing here calls the dualisation code; robust constraints are imposed
vertex by vertex instead.
"""

import itertools

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from rmpcau.geometry import HPolytope


def simulate(A, B, E, x0, U, W):
    """Step-by-step state sequence x_0..x_N."""
    nu, nw = B.shape[1], E.shape[1]
    xs = [np.asarray(x0, float)]
    for k in range(len(U) // nu):
        xs.append(A @ xs[-1] + B @ U[k * nu:(k + 1) * nu] + E @ W[k * nw:(k + 1) * nw])
    return np.array(xs)


def robust_lp_by_enumeration(problem, x0):
    """Solve the adjustable-uncertainty OCP by imposing every constraint per
    vertex sequence of S^N.  Returns ``(objective, x)`` or ``(None, None)``.

    Decision vector: [tau, P (full N*nu x N*ns, causal entries only free), p, vec(Y_k)..., y_k...].
    """
    sys, unc = problem.system, problem.uncertainty
    A, B, E = sys.A, sys.B, sys.E
    N = problem.horizon
    nx, nu, nw, ns = sys.n_x, sys.n_u, unc.n_w, unc.n_s
    causal = [(k, j, r, i) for k in range(N) for j in range(k) for r in range(nu) for i in range(ns)]
    nP = len(causal)
    off_p = 1 + nP
    off_Y = off_p + N * nu
    off_y = off_Y + N * nw * ns
    n = off_y + N * nw

    def input_map(s):
        """Matrix R (N*nu x n) with U = R @ z for fixed s."""
        R = np.zeros((N * nu, n))
        for c, (k, j, r, i) in enumerate(causal):
            R[k * nu + r, 1 + c] += s[j * ns + i]
        R[:, off_p:off_Y] = np.eye(N * nu)
        return R

    def dist_map(s):
        R = np.zeros((N * nw, n))
        for k in range(N):
            for i in range(ns):
                for r in range(nw):
                    R[k * nw + r, off_Y + k * nw * ns + i * nw + r] += s[k * ns + i]
            R[k * nw:(k + 1) * nw, off_y + k * nw:off_y + (k + 1) * nw] = np.eye(nw)
        return R

    # state map x_k = Phi_k x0 + Gu_k U + Gw_k W
    def states_affine(Ru, Rw):
        X = [(np.zeros((nx, n)), x0.copy())]
        for k in range(N):
            lin, const = X[-1]
            X.append((A @ lin + B @ Ru[k * nu:(k + 1) * nu] + E @ Rw[k * nw:(k + 1) * nw], A @ const))
        return X

    x0 = np.asarray(x0, float)
    V = unc.primitive_vertices
    rows, rhs = [], []
    q = np.asarray(problem.cost.q, float)
    qf = np.asarray(problem.cost.q_f, float)
    r_cost = np.asarray(problem.cost.r, float)
    Fx, fx = sys.state_set.H, sys.state_set.h
    Fu, fu = sys.input_set.H, sys.input_set.h
    for combo in itertools.product(range(len(V)), repeat=N):
        s = V[list(combo)].ravel()
        Ru, Rw = input_map(s), dist_map(s)
        X = states_affine(Ru, Rw)
        for k in range(N):
            lin, const = X[k]
            rows.append(Fx @ lin); rhs.append(fx - Fx @ const)
            rows.append(Fu @ Ru[k * nu:(k + 1) * nu]); rhs.append(fu)
        if problem.terminal is not None:
            F, f = problem.terminal.H, problem.terminal.h
            lin, const = X[N]
            T = F[:, :nx] @ lin
            T[:, off_Y + (N - 1) * nw * ns:off_Y + N * nw * ns] += F[:, nx:nx + nw * ns]
            T[:, off_y + (N - 1) * nw:off_y + N * nw] += F[:, nx + nw * ns:]
            rows.append(T); rhs.append(f - F[:, :nx] @ const)
        cost_lin = np.zeros(n)
        cost_const = 0.0
        for k in range(N + 1):
            lin, const = X[k]
            w = qf if k == N else q
            cost_lin += w @ lin
            cost_const += w @ const
        cost_lin += np.tile(r_cost, N) @ Ru
        cost_lin[0] -= 1.0
        rows.append(cost_lin[None, :]); rhs.append(np.array([-cost_const]))
    HY, hY = unc.admissible_set.H, unc.admissible_set.h
    for k in range(N):
        T = np.zeros((HY.shape[0], n))
        T[:, off_Y + k * nw * ns:off_Y + (k + 1) * nw * ns] = HY[:, :nw * ns]
        T[:, off_y + k * nw:off_y + (k + 1) * nw] = HY[:, nw * ns:]
        rows.append(T); rhs.append(hY)
    A_eq, b_eq = [], []
    if unc.tie_over_horizon:
        for k in range(1, N):
            for base, size in ((off_Y, nw * ns), (off_y, nw)):
                for i in range(size):
                    e = np.zeros(n)
                    e[base + k * size + i] = 1.0
                    e[base + i] = -1.0
                    A_eq.append(e); b_eq.append(0.0)
    c = np.zeros(n)
    c[0] = 1.0
    for k in range(N):
        c[off_Y + k * nw * ns:off_Y + (k + 1) * nw * ns] -= problem.lambdas[k] * problem.rho_Y.ravel(order="F")
        c[off_y + k * nw:off_y + (k + 1) * nw] -= problem.lambdas[k] * problem.rho_y
    res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=np.array(b_eq) if b_eq else None,
                  bounds=[(None, None)] * n, method="highs")
    if res.status != 0:
        return None, None
    return res.fun, res.x


def hull_polytope(points):
    """H-rep of conv(points) via Qhull (full-dimensional point clouds, dim >= 2)."""
    hull = ConvexHull(np.asarray(points, float))
    return HPolytope(hull.equations[:, :-1], -hull.equations[:, -1])


def brute_force_vertices(H, h, tol=1e-9):
    """All feasible intersections of n rows, deduplicated."""
    H = np.asarray(H, float)
    h = np.asarray(h, float)
    n = H.shape[1]
    out = []
    for rows in itertools.combinations(range(H.shape[0]), n):
        M = H[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(H @ x <= h + tol) and not any(np.allclose(x, y, atol=1e-8) for y in out):
            out.append(x)
    return np.array(out)


def grid_membership(pred, grid):
    return np.array([pred(p) for p in grid])


def random_rmpc_instance(seed, with_terminal=None):
    """Small random problem: n_x in {1, 2}, n_u = n_w = 1, N <= 3, box primitive set."""
    from rmpcau.mpc import CostSpec, RmpcProblem
    from rmpcau.system import UncertainLtiSystem, UncertaintyParametrization, box_parameter_set

    rng = np.random.default_rng(seed)
    nx = int(rng.integers(1, 3))
    ns = int(rng.integers(1, 3))
    N = int(rng.integers(1, 4))
    A = rng.uniform(-1.0, 1.0, size=(nx, nx))
    B = rng.uniform(-1.0, 1.0, size=(nx, 1))
    E = rng.uniform(-1.0, 1.0, size=(nx, 1))
    X = HPolytope.from_box(-rng.uniform(2, 4, nx), rng.uniform(2, 4, nx))
    U = HPolytope.from_box([-rng.uniform(1, 2)], [rng.uniform(1, 2)])
    S = HPolytope.from_box(-np.ones(ns), np.ones(ns))
    lo = np.r_[-rng.uniform(0, 0.5, ns), -rng.uniform(0, 0.3)]
    hi = np.r_[rng.uniform(0, 0.5, ns), rng.uniform(0, 0.3)]
    unc = UncertaintyParametrization(S, box_parameter_set(lo, hi), 1, tie_over_horizon=bool(rng.integers(2)))
    sys = UncertainLtiSystem(A, B, E, X, U)
    cost = CostSpec(rng.uniform(-1, 1, nx), rng.uniform(-1, 1, nx), rng.uniform(-1, 1, 1))
    terminal = None
    if with_terminal or (with_terminal is None and rng.integers(2)):
        Hz = rng.normal(size=(3, nx + ns + 1))
        terminal = intersect_box(HPolytope(Hz, rng.uniform(1, 3, 3)), nx + ns + 1, 3.0)
    x0 = rng.uniform(-1, 1, nx)
    prob = RmpcProblem(sys, unc, N, cost, rng.uniform(0, 2, N), rng.uniform(-1, 1, (1, ns)),
                       rng.uniform(-1, 1, 1), terminal)
    return prob, x0


def intersect_box(P, dim, r):
    box = HPolytope.from_box(-r * np.ones(dim), r * np.ones(dim))
    return HPolytope(np.vstack([P.H, box.H]), np.concatenate([P.h, box.h]))


def nominal_mpc(sys, N, cost, x0, terminal_x=None):
    """Deterministic LP-MPC over open-loop inputs; returns (objective, U)."""
    A, B = sys.A, sys.B
    nx, nu = sys.n_x, sys.n_u
    x0 = np.asarray(x0, float)
    # x_k = A^k x0 + sum_j A^{k-1-j} B u_j
    lin = [np.zeros((nx, N * nu))]
    const = [x0]
    for k in range(N):
        L = A @ lin[-1]
        L[:, k * nu:(k + 1) * nu] += B
        lin.append(L)
        const.append(A @ const[-1])
    rows, rhs = [], []
    Fx, fx, Fu, fu = sys.state_set.H, sys.state_set.h, sys.input_set.H, sys.input_set.h
    for k in range(N):
        rows.append(Fx @ lin[k]); rhs.append(fx - Fx @ const[k])
        R = np.zeros((Fu.shape[0], N * nu)); R[:, k * nu:(k + 1) * nu] = Fu
        rows.append(R); rhs.append(fu)
    if terminal_x is not None:
        rows.append(terminal_x.H @ lin[N]); rhs.append(terminal_x.h - terminal_x.H @ const[N])
    c = sum(np.asarray(cost.q) @ lin[k] for k in range(N)) + np.asarray(cost.q_f) @ lin[N] \
        + np.tile(np.asarray(cost.r), N)
    c0 = sum(np.asarray(cost.q) @ const[k] for k in range(N)) + np.asarray(cost.q_f) @ const[N]
    res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs), bounds=[(None, None)] * (N * nu),
                  method="highs")
    if res.status != 0:
        return None, None
    return res.fun + c0, res.x
