"""Uncertain LTI model, adjustable uncertainty parametrisation and the
augmented state-space models over ``z = (x, vec(Y), y_off)``.

``vec`` stacks columns (Fortran order) throughout the package, so that
``Y @ s == shuffle(s) @ vec(Y)`` with ``shuffle(s) = kron(s.T, I)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .geometry import HPolytope, affine_image, cartesian_product, enumerate_vertices

logger = logging.getLogger(__name__)


def vec(Y):
    return np.asarray(Y, float).reshape(-1, order="F")


def unvec(v, n_w, n_s):
    return np.asarray(v, float).reshape((n_w, n_s), order="F")


def shuffle_matrix(s, n_w):
    """Matrix ``S(s)`` with ``S(s) @ vec(Y) == Y @ s``."""
    s = np.asarray(s, float).ravel()
    return np.kron(s[None, :], np.eye(n_w))


@dataclass(frozen=True, eq=False)
class UncertainLtiSystem:
    """``x+ = A x + B u + E w`` with ``x in state_set`` and ``u in input_set``."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    state_set: HPolytope
    input_set: HPolytope

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, float))
        B = np.asarray(self.B, float).reshape(A.shape[0], -1)
        E = np.asarray(self.E, float).reshape(A.shape[0], -1)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch("A must be square")
        if self.state_set.dim != A.shape[0]:
            raise DimensionMismatch("state set dimension differs from n_x")
        if self.input_set.dim != B.shape[1]:
            raise DimensionMismatch("input set dimension differs from n_u")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "E", E)

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.B.shape[1]

    @property
    def n_w(self):
        return self.E.shape[1]

    def step(self, x, u, w):
        return self.A @ x + self.B @ np.atleast_1d(u) + self.E @ np.atleast_1d(w)


@dataclass(frozen=True, eq=False)
class UncertaintyParametrization:
    """Uncertainty sets ``W = Y S + y_off`` with ``(vec(Y), y_off)`` in ``admissible_set``.

    ``tie_over_horizon`` forces one shared ``(Y, y_off)`` for every
    prediction step.
    """

    primitive_set: HPolytope
    admissible_set: HPolytope
    n_w: int
    tie_over_horizon: bool = True
    primitive_vertices: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.admissible_set.dim != self.n_w * self.n_s + self.n_w:
            raise DimensionMismatch(
                f"admissible set must live in dimension n_w*n_s + n_w = "
                f"{self.n_w * self.n_s + self.n_w}, got {self.admissible_set.dim}")
        if self.primitive_vertices is None:
            V = enumerate_vertices(self.primitive_set).vertices
        else:
            V = np.atleast_2d(np.asarray(self.primitive_vertices, float))
        if len(V) == 0:
            raise ValueError("primitive set is empty")
        object.__setattr__(self, "primitive_vertices", V)
        if self.admissible_set.is_empty():
            raise ValueError("admissible set of uncertainty parameters is empty")
        if not self.admissible_set.contains_point(np.zeros(self.n_params)):
            warnings.warn("the zero uncertainty set is not admissible; the {0} fallback "
                          "for recursive feasibility does not apply", stacklevel=2)

    @property
    def n_s(self):
        return self.primitive_set.dim

    @property
    def G(self):
        return self.primitive_set.H

    @property
    def g(self):
        return self.primitive_set.h

    @property
    def n_params(self):
        """Length of the stacked parameter vector ``(vec(Y), y_off)``."""
        return self.n_w * self.n_s + self.n_w

    def split(self, theta):
        theta = np.asarray(theta, float)
        k = self.n_w * self.n_s
        return unvec(theta[:k], self.n_w, self.n_s), theta[k:]

    def stack(self, Y, y_off):
        return np.concatenate([vec(Y), np.asarray(y_off, float).ravel()])

    def realize(self, Y, y_off, strict=False):
        return realize_uncertainty_set(Y, y_off, self.primitive_set, strict=strict)


# -- admissible-set templates -------------------------------------------------


def scalar_scaling_set(n_w, n_s, y_max, y_min=0.0):
    """``Y = y * I`` (``n_w == n_s``) with ``y_min <= y <= y_max`` and ``y_off = 0``.

    This is the symmetric-box template of the cruise-control study.
    """
    if n_w != n_s:
        raise DimensionMismatch("scalar scaling needs n_w == n_s")
    n = n_w * n_s + n_w
    I = vec(np.eye(n_w))
    idx = np.flatnonzero(I)
    rows, rhs = [], []
    # all entries of Y tied to the first diagonal entry; off-diagonals and offset zero
    for j in range(n_w * n_s):
        e = np.zeros(n)
        e[j] = 1.0
        if j in idx and j != idx[0]:
            e[idx[0]] = -1.0
            rows += [e, -e]
            rhs += [0.0, 0.0]
        elif j not in idx:
            rows += [e, -e]
            rhs += [0.0, 0.0]
    for j in range(n_w * n_s, n):
        e = np.zeros(n)
        e[j] = 1.0
        rows += [e, -e]
        rhs += [0.0, 0.0]
    e = np.zeros(n)
    e[idx[0]] = 1.0
    rows += [e, -e]
    rhs += [y_max, -y_min]
    return HPolytope(np.array(rows), np.array(rhs))


def diagonal_scaling_set(n_w, y_max, offset_bound=0.0):
    """Nonnegative diagonal ``Y`` (``n_s == n_w``) with entries up to ``y_max``, ``|y_off| <= offset_bound``."""
    y_max = np.broadcast_to(np.asarray(y_max, float), (n_w,))
    n = n_w * n_w + n_w
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag = np.flatnonzero(vec(np.eye(n_w)))
    upper[diag] = y_max
    lower[n_w * n_w:] = -offset_bound
    upper[n_w * n_w:] = offset_bound
    return HPolytope.from_box(lower, upper)


def box_parameter_set(lower, upper):
    """General box on every entry of ``(vec(Y), y_off)``."""
    return HPolytope.from_box(lower, upper)


def realize_uncertainty_set(Y, y_off, primitive_set, strict=False):
    """``{Y s + y_off : s in S}`` as ``(HPolytope, flat)``."""
    Y = np.atleast_2d(np.asarray(Y, float))
    return affine_image(primitive_set, Y, np.asarray(y_off, float).ravel(), strict=strict)


# -- augmented models -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AugmentedAutonomousSystem:
    """``z+ = T(s) z + offset`` in closed loop with ``u = K x + b``.

    ``feasible_set`` is ``X x M`` (optionally intersected with the input
    constraint ``K x + b in U``, see :func:`build_autonomous_augmentation`).
    """

    system: UncertainLtiSystem
    uncertainty: UncertaintyParametrization
    K: np.ndarray
    b: np.ndarray
    feasible_set: HPolytope

    @property
    def n(self):
        return self.system.n_x + self.uncertainty.n_params

    @property
    def n_x(self):
        return self.system.n_x

    @property
    def vertices(self):
        return self.uncertainty.primitive_vertices

    def transition(self, s):
        sys, unc = self.system, self.uncertainty
        return _block_transition(sys.A + sys.B @ self.K, sys.E, s, unc)

    @cached_property
    def offset(self):
        return np.concatenate([self.system.B @ self.b, np.zeros(self.uncertainty.n_params)])

    def step(self, z, s):
        return self.transition(s) @ z + self.offset


@dataclass(frozen=True, eq=False)
class AugmentedControlledSystem:
    """``z+ = T(s) z + [B; 0; 0] u``."""

    system: UncertainLtiSystem
    uncertainty: UncertaintyParametrization
    feasible_set: HPolytope

    @property
    def n(self):
        return self.system.n_x + self.uncertainty.n_params

    @property
    def n_x(self):
        return self.system.n_x

    @property
    def vertices(self):
        return self.uncertainty.primitive_vertices

    @property
    def input_set(self):
        return self.system.input_set

    def transition(self, s):
        return _block_transition(self.system.A, self.system.E, s, self.uncertainty)

    @cached_property
    def input_matrix(self):
        sys = self.system
        return np.vstack([sys.B, np.zeros((self.uncertainty.n_params, sys.n_u))])

    def step(self, z, u, s):
        return self.transition(s) @ z + self.input_matrix @ np.atleast_1d(u)


def _block_transition(A_x, E, s, unc):
    n_x = A_x.shape[0]
    p = unc.n_params
    T = np.zeros((n_x + p, n_x + p))
    T[:n_x, :n_x] = A_x
    k = unc.n_w * unc.n_s
    T[:n_x, n_x:n_x + k] = E @ shuffle_matrix(s, unc.n_w)
    T[:n_x, n_x + k:] = E
    T[n_x:, n_x:] = np.eye(p)
    return T


def _feasible_z_set(sys, unc, K=None, b=None):
    Z = cartesian_product(sys.state_set, unc.admissible_set)
    if K is None:
        return Z
    # input admissibility of the fixed feedback: F_u (K x + b) <= f_u
    U = sys.input_set
    rows = np.hstack([U.H @ K, np.zeros((U.n_rows, unc.n_params))])
    return HPolytope(np.vstack([Z.H, rows]), np.concatenate([Z.h, U.h - U.H @ b]))


def build_autonomous_augmentation(sys, unc, K, b=None, input_admissible=True):
    """Closed-loop model for the adjustable positive invariant set.

    With ``input_admissible`` the feasible set also requires
    ``K x + b in U``, which the terminal-set argument for the affine
    feedback needs.
    """
    K = np.atleast_2d(np.asarray(K, float))
    b = np.zeros(sys.n_u) if b is None else np.asarray(b, float).ravel()
    if K.shape != (sys.n_u, sys.n_x):
        raise DimensionMismatch(f"K must be {sys.n_u}x{sys.n_x}, got {K.shape}")
    if b.shape != (sys.n_u,):
        raise DimensionMismatch(f"b must have length {sys.n_u}")
    if unc.n_w != sys.n_w:
        raise DimensionMismatch("uncertainty parametrisation and system disagree on n_w")
    Z = _feasible_z_set(sys, unc, K, b) if input_admissible else _feasible_z_set(sys, unc)
    return AugmentedAutonomousSystem(sys, unc, K, b, Z)


def build_controlled_augmentation(sys, unc):
    if unc.n_w != sys.n_w:
        raise DimensionMismatch("uncertainty parametrisation and system disagree on n_w")
    return AugmentedControlledSystem(sys, unc, _feasible_z_set(sys, unc))
