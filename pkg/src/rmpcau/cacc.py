"""Two-vehicle cooperative adaptive cruise control instance.

States are the gap ``d`` [m] and relative speed ``dv = v_front - v_ego``
[m/s]; the input is the ego acceleration and the disturbance the front
vehicle's acceleration, bounded by the adjustable size ``|w| <= y``.
"""

from __future__ import annotations

import numpy as np

from .config import ProblemConfig
from .geometry import HPolytope
from .system import scalar_scaling_set

DT = 0.2
D_MIN, D_MAX = 10.0, 20.0
DV_MAX = 5.0
U_MAX = 10.0
X0 = (15.0, 0.0)

# not given by the source study; documented defaults
HORIZON = 10
Y_MAX = 5.0
POLES = (0.7, 0.8)
LAMBDA = 2.0


def cacc_matrices(dt=DT):
    A = np.array([[1.0, dt], [0.0, 1.0]])
    B = np.array([[0.0], [-dt]])
    E = np.array([[0.0], [dt]])
    return A, B, E


def cacc_config(horizon=HORIZON, y_max=Y_MAX, lam=LAMBDA, poles=POLES, dt=DT) -> ProblemConfig:
    A, B, E = cacc_matrices(dt)
    X = HPolytope.from_box([D_MIN, -DV_MAX], [D_MAX, DV_MAX])
    U = HPolytope.from_box([-U_MAX], [U_MAX])
    S = HPolytope.from_box([-1.0], [1.0])
    Yset = scalar_scaling_set(1, 1, y_max)
    data = {
        "name": "cacc",
        "dt": dt,
        "A": A.tolist(), "B": B.tolist(), "E": E.tolist(),
        "state_set": X.to_dict(),
        "input_set": U.to_dict(),
        "primitive_set": {**S.to_dict(), "vertices": [[-1.0], [1.0]]},
        "admissible_set": Yset.to_dict(),
        "tie_over_horizon": True,
        "poles": list(poles),
        "x_ref": list(X0),
        "horizon": horizon,
        "lambdas": [lam] + [0.0] * (horizon - 1),
        "rho_Y": [[1.0]],
        "rho_y": [0.0],
        "cost": {"q": [1.0, 0.0], "q_f": [1.0, 0.0], "r": [0.0]},
        "x0": list(X0),
        "invariant": {"max_iter": 100, "slices": [0.0, 0.5, 1.0, 2.0]},
    }
    return ProblemConfig(data)
