import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixadc_doa.array_model import (
    ArrayGeometry,
    SourceScene,
    steering_derivative,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
)
from mixadc_doa.covariance import sample_covariance

angles = st.floats(-1.5, 1.5)
sizes = st.integers(2, 300)


def test_broadside_is_all_ones():
    np.testing.assert_array_equal(steering_vector(ArrayGeometry(4, 0.5), 0.0), np.ones(4))


def test_thirty_degrees_half_wavelength():
    # 2*pi*0.5*sin(30 deg) = pi/2
    a = steering_vector(ArrayGeometry(2, 0.5), np.deg2rad(30))
    np.testing.assert_allclose(a, [1, 1j], atol=1e-15)


@given(sizes, angles)
def test_negative_angle_is_conjugate(M, theta):
    g = ArrayGeometry(M)
    np.testing.assert_allclose(steering_vector(g, -theta), steering_vector(g, theta).conj(), atol=1e-12)


@pytest.mark.parametrize("theta", [np.pi / 2, -np.pi / 2, 2.0])
def test_grazing_incidence_rejected(theta):
    with pytest.raises(ValueError):
        steering_vector(ArrayGeometry(4), theta)
    with pytest.raises(ValueError):
        steering_derivative(ArrayGeometry(4), theta)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(1)
    with pytest.raises(ValueError):
        ArrayGeometry(4, 0.0)
    pos = ArrayGeometry(5, 0.25).element_positions
    assert pos[0] == 0.0 and np.all(np.diff(pos) > 0)


def test_derivative_by_hand():
    np.testing.assert_allclose(steering_derivative(ArrayGeometry(3, 0.5), 0.0), [0, 1j * np.pi, 2j * np.pi])


@given(sizes, angles)
def test_derivative_first_entry_zero(M, theta):
    assert steering_derivative(ArrayGeometry(M), theta)[0] == 0


@given(st.integers(2, 64), st.floats(-1.4, 1.4), st.sampled_from([0.25, 0.5, 1.0]))
def test_derivative_matches_central_difference(M, theta, d):
    g, h = ArrayGeometry(M, d), 1e-6
    fd = (steering_vector(g, theta + h) - steering_vector(g, theta - h)) / (2 * h)
    an = steering_derivative(g, theta)
    assert np.max(np.abs(fd - an)) <= 1e-6 * max(1.0, np.max(np.abs(an)))


@given(sizes, angles)
def test_unit_modulus_and_norm(M, theta):
    a = steering_vector(ArrayGeometry(M), theta)
    assert np.max(np.abs(np.abs(a) - 1)) <= 4 * np.finfo(float).eps
    assert abs(np.vdot(a, a).real - M) <= 10 * M * np.finfo(float).eps


def test_steering_matrix_columns():
    g = ArrayGeometry(6)
    A = steering_matrix(g, [0.1, -0.3])
    np.testing.assert_allclose(A[:, 1], steering_vector(g, -0.3))


def test_scene_validation():
    with pytest.raises(ValueError):
        SourceScene((0.1, 0.1), 1.0, 10)
    with pytest.raises(ValueError):
        SourceScene((0.1,), -1.0, 10)
    with pytest.raises(ValueError):
        SourceScene((0.1,), 1.0, 0)
    with pytest.raises(ValueError):
        SourceScene((0.1, 0.2), 1.0).theta


def test_synthesis_is_deterministic():
    g, s = ArrayGeometry(8), SourceScene((0.2, -0.4), 2.0, 50)
    a, b = synthesize_snapshots(g, s, 7), synthesize_snapshots(g, s, 7)
    np.testing.assert_array_equal(a.data, b.data)
    assert a.stage == "unquantized" and a.data.shape == (8, 50)
    assert not np.array_equal(a.data, synthesize_snapshots(g, s, 8).data)


def test_noise_only_covariance_is_identity():
    N = 100_000
    R = sample_covariance(synthesize_snapshots(ArrayGeometry(8), SourceScene.single(0.3, 0.0, N), 3)).data
    assert np.max(np.abs(R - np.eye(8))) < 5 / np.sqrt(N)


def test_single_source_covariance_law_of_large_numbers():
    N, g = 100_000, ArrayGeometry(8)
    scene = SourceScene.single(0.3, 1.0, N)
    x = synthesize_snapshots(g, scene, 11)
    a = steering_vector(g, 0.3)
    R = sample_covariance(x).data
    assert np.max(np.abs(R - (np.outer(a, a.conj()) + np.eye(8)))) < 5 / np.sqrt(N)
    # the mean of each element estimates zero with standard error 1/sqrt(N) * sqrt(gamma + 1)
    assert np.max(np.abs(x.data.mean(axis=1))) < 5 * np.sqrt(2.0 / N)


def test_two_source_covariance():
    N, g = 100_000, ArrayGeometry(6)
    scene = SourceScene((-0.5, 0.4), 2.0, N)
    A = steering_matrix(g, scene.angles)
    R = sample_covariance(synthesize_snapshots(g, scene, 5)).data
    expected = 2.0 * A @ A.conj().T + np.eye(6)
    # entry variance is at most (sum of powers)^2 / N = 25/N
    assert np.max(np.abs(R - expected)) < 5 * 5 / np.sqrt(N)


@settings(max_examples=20)
@given(st.integers(0, 2**63 - 1))
def test_any_64_bit_seed(seed):
    x = synthesize_snapshots(ArrayGeometry(3), SourceScene.single(0.1, 1.0, 2), seed)
    assert np.all(np.isfinite(x.data))
