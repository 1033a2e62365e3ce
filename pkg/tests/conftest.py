import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rmpcau.cacc import cacc_config  # noqa: E402
from rmpcau.invariant import compute_C_adj, compute_O_adj  # noqa: E402
from rmpcau.system import build_autonomous_augmentation, build_controlled_augmentation  # noqa: E402


@pytest.fixture(scope="session")
def cacc():
    return cacc_config()


@pytest.fixture(scope="session")
def cacc_aug(cacc):
    K, b = cacc.feedback()
    sys_, unc = cacc.system(), cacc.uncertainty()
    return build_autonomous_augmentation(sys_, unc, K, b), build_controlled_augmentation(sys_, unc)


@pytest.fixture(scope="session")
def cacc_sets(cacc_aug):
    auto, ctrl = cacc_aug
    return compute_O_adj(auto), compute_C_adj(ctrl)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
