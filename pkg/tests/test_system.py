import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmpcau.errors import DegenerateImage, DimensionMismatch
from rmpcau.geometry import HPolytope, enumerate_vertices, equals
from rmpcau.system import (
    UncertainLtiSystem,
    UncertaintyParametrization,
    box_parameter_set,
    build_autonomous_augmentation,
    build_controlled_augmentation,
    diagonal_scaling_set,
    realize_uncertainty_set,
    scalar_scaling_set,
    shuffle_matrix,
    unvec,
    vec,
)


def random_system(seed, n_x=2, n_u=1, n_w=1):
    rng = np.random.default_rng(seed)
    return UncertainLtiSystem(rng.normal(size=(n_x, n_x)), rng.normal(size=(n_x, n_u)),
                              rng.normal(size=(n_x, n_w)), HPolytope.from_box(-np.ones(n_x), np.ones(n_x)),
                              HPolytope.from_box(-np.ones(n_u), np.ones(n_u)))


def box_primitive(n_s):
    return HPolytope.from_box(-np.ones(n_s), np.ones(n_s))


def test_vec_is_column_major_and_shuffle_identity(rng):
    Y = rng.normal(size=(3, 2))
    s = rng.normal(size=2)
    assert np.array_equal(vec(Y), Y.T.ravel())
    assert np.allclose(shuffle_matrix(s, 3) @ vec(Y), Y @ s)
    assert np.array_equal(unvec(vec(Y), 3, 2), Y)


def test_cacc_augmented_dimension(cacc_aug):
    auto, ctrl = cacc_aug
    assert auto.n == 2 + 1 + 1 == ctrl.n


def test_cacc_input_column(cacc_aug):
    _, ctrl = cacc_aug
    assert np.allclose(ctrl.input_matrix.ravel(), [0, -0.2, 0, 0])


def test_transition_block_structure(cacc_aug):
    auto, _ = cacc_aug
    sys_ = auto.system
    for s in auto.vertices:
        T = auto.transition(s)
        expected = np.block([
            [sys_.A + sys_.B @ auto.K, sys_.E * s[0], sys_.E],
            [np.zeros((2, 2)), np.eye(2)],
        ])
        assert np.allclose(T, expected)
    assert np.allclose(auto.offset, np.r_[sys_.B @ auto.b, 0, 0])


def test_zero_gain_zero_primitive_reduces_to_autonomous():
    sys_ = random_system(1)
    S0 = HPolytope.from_box([0.0], [0.0])
    unc = UncertaintyParametrization(S0, box_parameter_set([0, -1], [1, 1]), 1)
    aug = build_autonomous_augmentation(sys_, unc, np.zeros((1, 2)), np.zeros(1), input_admissible=False)
    z = np.array([0.3, -0.2, 0.7, 0.0])
    assert np.allclose(aug.step(z, unc.primitive_vertices[0]), np.r_[sys_.A @ z[:2], z[2:]])


def test_scalar_vertex_block_equals_E():
    sys_ = random_system(2)
    unc = UncertaintyParametrization(box_primitive(1), scalar_scaling_set(1, 1, 1.0), 1)
    aug = build_controlled_augmentation(sys_, unc)
    T = aug.transition(np.array([1.0]))
    assert np.allclose(T[:2, 2:3], sys_.E)


def test_zero_input_column_behaves_autonomously():
    sys_ = random_system(3)
    sys0 = UncertainLtiSystem(sys_.A, np.zeros((2, 1)), sys_.E, sys_.state_set, sys_.input_set)
    unc = UncertaintyParametrization(box_primitive(1), scalar_scaling_set(1, 1, 1.0), 1)
    ctrl = build_controlled_augmentation(sys0, unc)
    auto = build_autonomous_augmentation(sys0, unc, np.zeros((1, 2)))
    z = np.array([0.1, 0.2, 0.5, 0.0])
    s = np.array([-1.0])
    assert np.allclose(ctrl.step(z, 7.0, s), auto.step(z, s))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_substitution_identity(seed):
    rng = np.random.default_rng(seed)
    sys_ = random_system(seed, n_x=2, n_u=1, n_w=2)
    unc = UncertaintyParametrization(box_primitive(2), box_parameter_set(-np.ones(6), np.ones(6)), 2)
    K = rng.normal(size=(1, 2))
    b = rng.normal(size=1)
    auto = build_autonomous_augmentation(sys_, unc, K, b)
    ctrl = build_controlled_augmentation(sys_, unc)
    z = rng.normal(size=auto.n)
    s = rng.uniform(-1, 1, size=2)
    u = K @ z[:2] + b
    assert np.max(np.abs(auto.step(z, s) - ctrl.step(z, u, s))) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_affine_in_s_midpoint(seed):
    rng = np.random.default_rng(seed)
    sys_ = random_system(seed, n_w=2)
    unc = UncertaintyParametrization(box_primitive(2), box_parameter_set(-np.ones(6), np.ones(6)), 2)
    auto = build_autonomous_augmentation(sys_, unc, rng.normal(size=(1, 2)), rng.normal(size=1))
    ctrl = build_controlled_augmentation(sys_, unc)
    z = rng.normal(size=auto.n)
    u = rng.normal(size=1)
    s1, s2 = rng.normal(size=2), rng.normal(size=2)
    mid = (s1 + s2) / 2
    assert np.allclose(auto.step(z, mid), (auto.step(z, s1) + auto.step(z, s2)) / 2, atol=1e-12)
    assert np.allclose(ctrl.step(z, u, mid), (ctrl.step(z, u, s1) + ctrl.step(z, u, s2)) / 2, atol=1e-12)


def test_dimension_mismatch():
    sys_ = random_system(4)
    unc = UncertaintyParametrization(box_primitive(1), scalar_scaling_set(1, 1, 1.0), 1)
    with pytest.raises(DimensionMismatch):
        build_autonomous_augmentation(sys_, unc, np.zeros((2, 2)))
    with pytest.raises(DimensionMismatch):
        build_autonomous_augmentation(sys_, unc, np.zeros((1, 2)), np.zeros(3))
    unc2 = UncertaintyParametrization(box_primitive(1), box_parameter_set(-np.ones(4), np.ones(4)), 2)
    with pytest.raises(DimensionMismatch):
        build_controlled_augmentation(sys_, unc2)
    with pytest.raises(DimensionMismatch):
        UncertainLtiSystem(np.eye(2), np.ones((2, 1)), np.ones((2, 1)), HPolytope.from_box([0], [1]),
                           HPolytope.from_box([0], [1]))


def test_realize_cacc_interval():
    W, flat = realize_uncertainty_set([[2.5]], [0.0], box_primitive(1))
    assert not flat and equals(W, HPolytope.from_box([-2.5], [2.5]))


def test_realize_zero_scaling_is_singleton():
    W, flat = realize_uncertainty_set(np.zeros((2, 2)), [0.3, -1.0], box_primitive(2))
    assert flat
    V = enumerate_vertices(W).vertices
    assert len(V) == 1 and np.allclose(V[0], [0.3, -1.0])
    with pytest.raises(DegenerateImage) as info:
        realize_uncertainty_set(np.zeros((2, 2)), [0.3, -1.0], box_primitive(2), strict=True)
    assert info.value.flat


def test_realize_rotation_matches_mapped_vertices():
    S = HPolytope.from_box([0, 0], [1, 1])
    c = np.cos(np.pi / 4)
    R = np.array([[c, -c], [c, c]])
    W, _ = realize_uncertainty_set(R, [1.0, 0.0], S)
    mapped = enumerate_vertices(S).vertices @ R.T + [1.0, 0.0]
    V = enumerate_vertices(W).vertices
    assert len(V) == 4
    for v in mapped:
        assert np.min(np.max(np.abs(V - v), axis=1)) < 1e-9


def test_realize_identity_returns_primitive():
    S = HPolytope(np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]), np.array([1.0, 0.0, 0.0]))
    W, _ = realize_uncertainty_set(np.eye(2), np.zeros(2), S)
    assert equals(W, S)


def test_templates():
    Y = scalar_scaling_set(2, 2, 3.0)
    assert Y.contains_point(np.r_[vec(1.5 * np.eye(2)), 0, 0])
    assert not Y.contains_point(np.r_[vec(np.diag([1.0, 2.0])), 0, 0])
    D = diagonal_scaling_set(2, 1.0, offset_bound=0.5)
    assert D.contains_point(np.r_[vec(np.diag([0.2, 0.9])), 0.5, -0.5])
    assert not D.contains_point(np.r_[vec([[0.2, 0.1], [0.0, 0.9]]), 0, 0])
    assert not D.contains_point(np.r_[vec(np.diag([-0.1, 0.9])), 0, 0])


def test_warns_when_zero_set_not_admissible():
    with pytest.warns(UserWarning, match="zero uncertainty set"):
        UncertaintyParametrization(box_primitive(1), scalar_scaling_set(1, 1, 2.0, y_min=1.0), 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        UncertaintyParametrization(box_primitive(1), scalar_scaling_set(1, 1, 2.0), 1)


def test_admissible_dimension_checked():
    with pytest.raises(DimensionMismatch):
        UncertaintyParametrization(box_primitive(1), HPolytope.from_box([0], [1]), 1)
