"""Problem documents: JSON files describing a full problem instance.

Keys::

    A, B, E                      system matrices (nested lists)
    state_set, input_set         {"H": [[...]], "h": [...]}
    primitive_set                {"H", "h", optional "vertices"}
    admissible_set               {"H", "h"} over (vec(Y) column-major, y_off)
    tie_over_horizon             bool
    K, b                         feedback for the positive invariant set, or
    poles, x_ref                 pole locations; K by pole placement, b = -K x_ref
    horizon, lambdas, rho_Y, rho_y
    cost                         {"q", "q_f", "r"}
    x0                           initial state
    invariant                    {"max_iter", "slices"}
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import place_poles

from .geometry import HPolytope
from .mpc import CostSpec, RmpcProblem
from .system import UncertainLtiSystem, UncertaintyParametrization


class ConfigError(ValueError):
    pass


_REQUIRED = ("A", "B", "E", "state_set", "input_set", "primitive_set", "admissible_set",
             "horizon", "cost", "x0")


@dataclass
class ProblemConfig:
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [k for k in _REQUIRED if k not in self.data]
        if missing:
            raise ConfigError(f"problem document is missing keys: {', '.join(missing)}")
        try:
            self.system()
            self.uncertainty()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid problem document: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    @classmethod
    def loads(cls, text):
        try:
            return cls(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(str(exc)) from exc

    def dumps(self):
        return json.dumps(self.data, indent=2)

    def save(self, path):
        Path(path).write_text(self.dumps() + "\n")

    def copy(self):
        return ProblemConfig(copy.deepcopy(self.data))

    # builders -------------------------------------------------------------

    def system(self):
        d = self.data
        return UncertainLtiSystem(np.array(d["A"], float), np.array(d["B"], float),
                                  np.array(d["E"], float), HPolytope.from_dict(d["state_set"]),
                                  HPolytope.from_dict(d["input_set"]))

    def uncertainty(self):
        d = self.data
        S = d["primitive_set"]
        return UncertaintyParametrization(
            HPolytope.from_dict(S), HPolytope.from_dict(d["admissible_set"]),
            int(np.array(d["E"], float).shape[1]), bool(d.get("tie_over_horizon", True)),
            np.array(S["vertices"], float) if "vertices" in S else None)

    def feedback(self):
        """``(K, b)`` for the positive invariant set."""
        d = self.data
        sys = self.system()
        if "K" in d:
            K = np.atleast_2d(np.array(d["K"], float))
            b = np.array(d.get("b", np.zeros(sys.n_u)), float)
            return K, b
        if "poles" in d:
            K = -place_poles(sys.A, sys.B, np.array(d["poles"], float)).gain_matrix
            x_ref = np.array(d.get("x_ref", np.zeros(sys.n_x)), float)
            return K, -K @ x_ref
        raise ConfigError("positive invariant set needs 'K' (and 'b') or 'poles' in the problem document")

    @property
    def horizon(self):
        return int(self.data["horizon"])

    @property
    def x0(self):
        return np.array(self.data["x0"], float)

    @property
    def max_iter(self):
        return int(self.data.get("invariant", {}).get("max_iter", 100))

    @property
    def slices(self):
        return [float(y) for y in self.data.get("invariant", {}).get("slices", [0.0])]

    def problem(self, terminal=None, lambdas=None):
        d = self.data
        unc = self.uncertainty()
        N = self.horizon
        lam = np.array(d.get("lambdas", np.zeros(N)), float) if lambdas is None else lambdas
        c = d["cost"]
        return RmpcProblem(self.system(), unc, N, CostSpec(np.array(c["q"], float), np.array(c["q_f"], float),
                                                           np.array(c["r"], float)),
                           lam, np.array(d.get("rho_Y", np.zeros((unc.n_w, unc.n_s))), float),
                           np.array(d.get("rho_y", np.zeros(unc.n_w)), float), terminal)
