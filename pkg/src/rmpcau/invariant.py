"""Robust precursor sets and fixed-point computation of adjustable invariant sets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged
from .geometry import (
    HPolytope,
    contains,
    intersect,
    preimage,
    project_out,
    remove_redundancy,
    sample_points,
    slice_polytope,
)
from .lp import FEAS_TOL, feasible_point

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class InvariantSetResult:
    set: HPolytope
    converged: bool
    iterations: int
    history: list = field(default_factory=list)
    kind: str = ""
    descent_ok: bool = True

    def to_dict(self):
        return {**self.set.to_dict(), "converged": self.converged,
                "iterations": self.iterations, "kind": self.kind,
                "history": list(self.history)}

    @classmethod
    def from_dict(cls, data):
        return cls(HPolytope.from_dict(data), bool(data.get("converged", True)),
                   int(data.get("iterations", 0)), list(data.get("history", [])),
                   data.get("kind", ""))


def pre_autonomous(target: HPolytope, aug) -> HPolytope:
    """States mapped into ``target`` for every vertex of the primitive set."""
    blocks = [preimage(target, aug.transition(s), aug.offset) for s in aug.vertices]
    P = HPolytope(np.vstack([B.H for B in blocks]), np.concatenate([B.h for B in blocks]))
    return remove_redundancy(P)


def pre_controlled(target: HPolytope, aug) -> HPolytope:
    """States from which some admissible input maps into ``target`` robustly."""
    U = aug.input_set
    Bz = aug.input_matrix
    n_u = Bz.shape[1]
    rows, rhs = [], []
    for s in aug.vertices:
        rows.append(np.hstack([target.H @ aug.transition(s), target.H @ Bz]))
        rhs.append(target.h)
    rows.append(np.hstack([np.zeros((U.n_rows, aug.n)), U.H]))
    rhs.append(U.h)
    lifted = HPolytope(np.vstack(rows), np.concatenate(rhs))
    return project_out(lifted, n_u)


def fixed_point(initial: HPolytope, pre, max_iter=DEFAULT_MAX_ITER, kind="", raise_on_failure=True):
    """Iterate ``Omega <- pre(Omega) & Omega`` until two iterates coincide.

    Every step checks that the new iterate lies inside the previous one;
    the result records whether that ever failed.
    """
    omega = remove_redundancy(initial)
    history = [omega.n_rows]
    descent_ok = True
    if feasible_point(omega.H, omega.h) is None:
        return InvariantSetResult(HPolytope.empty(initial.dim), True, 0, history, kind)
    for k in range(max_iter):
        nxt = remove_redundancy(intersect(pre(omega), omega))
        history.append(nxt.n_rows)
        if feasible_point(nxt.H, nxt.h) is None:
            logger.info("%s iteration %d: set became empty", kind, k + 1)
            return InvariantSetResult(HPolytope.empty(initial.dim), True, k + 1, history, kind, descent_ok)
        if not contains(omega, nxt):
            descent_ok = False
            logger.warning("%s iteration %d: iterate not contained in predecessor", kind, k + 1)
        if contains(nxt, omega):
            return InvariantSetResult(nxt, True, k + 1, history, kind, descent_ok)
        omega = nxt
    result = InvariantSetResult(omega, False, max_iter, history, kind, descent_ok)
    if raise_on_failure:
        raise NotConverged(f"{kind or 'fixed-point'} iteration did not converge in {max_iter} steps", result)
    return result


def compute_O_adj(aug, max_iter=DEFAULT_MAX_ITER, raise_on_failure=True) -> InvariantSetResult:
    """Adjustable positive invariant set of the closed loop ``u = K x + b``."""
    return fixed_point(aug.feasible_set, lambda W: pre_autonomous(W, aug), max_iter,
                       "positive", raise_on_failure)


def compute_C_adj(aug, max_iter=DEFAULT_MAX_ITER, raise_on_failure=True) -> InvariantSetResult:
    """Adjustable control invariant set."""
    return fixed_point(aug.feasible_set, lambda W: pre_controlled(W, aug), max_iter,
                       "control", raise_on_failure)


def classical_invariant_oracle(sys, K=None, b=None, max_iter=DEFAULT_MAX_ITER,
                               input_admissible=True, raise_on_failure=True) -> HPolytope:
    """Deterministic (``w = 0``) maximal positive or control invariant set in x-space.

    With ``K`` given the closed loop ``u = K x + b`` is used (positive
    invariance); otherwise the input is free in ``U`` (control invariance).
    """
    X, U = sys.state_set, sys.input_set
    if K is not None:
        K = np.atleast_2d(np.asarray(K, float))
        b = np.zeros(sys.n_u) if b is None else np.asarray(b, float).ravel()
        A_cl = sys.A + sys.B @ K
        c = sys.B @ b
        initial = X
        if input_admissible:
            initial = HPolytope(np.vstack([X.H, U.H @ K]), np.concatenate([X.h, U.h - U.H @ b]))

        def pre(W):
            return remove_redundancy(preimage(W, A_cl, c))
        kind = "classical-positive"
    else:
        initial = X

        def pre(W):
            lifted = HPolytope(
                np.vstack([np.hstack([W.H @ sys.A, W.H @ sys.B]),
                           np.hstack([np.zeros((U.n_rows, sys.n_x)), U.H])]),
                np.concatenate([W.h, U.h]))
            return project_out(lifted, sys.n_u)
        kind = "classical-control"
    return fixed_point(initial, pre, max_iter, kind, raise_on_failure).set


def parameter_slice(P: HPolytope, unc, Y, y_off) -> HPolytope:
    """x-space slice of a z-space set at fixed uncertainty parameters."""
    n_x = P.dim - unc.n_params
    idx = np.arange(n_x, P.dim)
    return slice_polytope(P, idx, unc.stack(Y, y_off))


def scaling_slice(P: HPolytope, unc, y):
    """Slice at the scalar-scaling parameters ``Y = y I``, ``y_off = 0``."""
    return parameter_slice(P, unc, y * np.eye(unc.n_w, unc.n_s), np.zeros(unc.n_w))


def positive_invariance_violations(aug, P: HPolytope, n_samples=200, rng=0, tol=FEAS_TOL):
    """Sampled ``z`` in ``P`` whose successor leaves ``P`` for some primitive vertex."""
    bad = []
    for z in sample_points(P, n_samples, rng):
        for s in aug.vertices:
            if not P.contains_point(aug.step(z, s), tol=10 * tol):
                bad.append((z, s))
                break
    return bad


def control_invariance_violations(aug, P: HPolytope, n_samples=200, rng=0, tol=FEAS_TOL):
    """Sampled ``z`` in ``P`` with no admissible input keeping every successor in ``P``."""
    U = aug.input_set
    Bz = aug.input_matrix
    bad = []
    for z in sample_points(P, n_samples, rng):
        rows = [P.H @ Bz for _ in aug.vertices] + [U.H]
        rhs = [P.h - P.H @ aug.transition(s) @ z + 10 * tol for s in aug.vertices] + [U.h]
        if feasible_point(np.vstack(rows), np.concatenate(rhs)) is None:
            bad.append(z)
    return bad
