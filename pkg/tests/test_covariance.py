import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixadc_doa.array_model import ArrayGeometry, SourceScene, synthesize_snapshots
from mixadc_doa.covariance import (
    condition_number_ideal,
    error_term,
    error_term_blocks,
    ideal_covariance,
    load_matrix,
    sample_covariance,
    save_matrix,
    theoretical_covariance,
)
from mixadc_doa.quantizer import INFINITE_RESOLUTION, MixedAdcConfig, aqnm_observe


def test_two_element_hand_case():
    # a = [1, 1], alpha = 0.6366, beta = 0.3634, low-res diagonal 2*alpha^2 + 2*alpha*beta = 2*alpha
    R = theoretical_covariance(ArrayGeometry(2), SourceScene.single(0.0, 1.0), MixedAdcConfig(1, 1, 1)).data
    np.testing.assert_allclose(R, [[2, 0.6366], [0.6366, 1.2732]], atol=1e-12)


def test_all_high_resolution_reduces_to_ideal():
    g, s = ArrayGeometry(16), SourceScene.single(0.4, 3.0)
    for cfg in (MixedAdcConfig(16, 0, 1), MixedAdcConfig(4, 12, INFINITE_RESOLUTION)):
        np.testing.assert_allclose(theoretical_covariance(g, s, cfg).data, ideal_covariance(g, s).data, atol=1e-14)
        assert np.max(np.abs(error_term(g, s, cfg).data)) < 1e-14


def test_all_low_resolution_form():
    g, s = ArrayGeometry(8), SourceScene.single(-0.2, 2.0)
    cfg = MixedAdcConfig(0, 8, 2)
    a = np.exp(2j * np.pi * 0.5 * np.arange(8) * np.sin(-0.2))
    al, be = cfg.alpha, cfg.beta
    expected = al**2 * 2.0 * np.outer(a, a.conj()) + (al**2 + al * be * 3.0) * np.eye(8)
    np.testing.assert_allclose(theoretical_covariance(g, s, cfg).data, expected, atol=1e-13)


@settings(max_examples=30)
@given(st.integers(2, 40), st.floats(0, 1), st.integers(1, 5), st.floats(0.01, 100), st.floats(-1.4, 1.4))
def test_model_covariance_hermitian_positive_definite(M, kappa, b, gamma, theta):
    g = ArrayGeometry(M)
    cfg = MixedAdcConfig.from_kappa(M, kappa, b)
    R = theoretical_covariance(g, SourceScene.single(theta, gamma), cfg)
    assert R.is_hermitian()
    w = R.eigh[0]
    # R = gamma*Ta(Ta)^H + Q, so the smallest eigenvalue is at least min(Q)
    assert w[0] >= min(1.0, cfg.alpha**2 + cfg.alpha * cfg.beta * (gamma + 1)) * (1 - 1e-9)


@settings(max_examples=30)
@given(st.integers(2, 40), st.floats(0, 1), st.integers(1, 5), st.floats(0.01, 100), st.floats(-1.4, 1.4))
def test_split_and_block_forms_agree(M, kappa, b, gamma, theta):
    g, s = ArrayGeometry(M), SourceScene.single(theta, gamma)
    cfg = MixedAdcConfig.from_kappa(M, kappa, b)
    E = error_term(g, s, cfg).data
    np.testing.assert_allclose(ideal_covariance(g, s).data + E, theoretical_covariance(g, s, cfg).data,
                               atol=1e-12 * (gamma + 1))
    np.testing.assert_allclose(error_term_blocks(g, s, cfg).data, E, atol=1e-12 * (gamma + 1))


def test_error_term_shrinks_with_bits():
    g, s = ArrayGeometry(32), SourceScene.single(0.5, 1.0)
    norms = [np.linalg.norm(error_term(g, s, MixedAdcConfig(8, 24, b)).data) for b in range(1, 13)]
    assert all(x > y for x, y in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2 * norms[0]


def test_condition_numbers():
    assert condition_number_ideal(SourceScene.single(0.1, 0.0), ArrayGeometry(8)).computed == pytest.approx(1.0)
    assert condition_number_ideal(SourceScene.single(0.1, 1.0)).computed == 2.0
    rep = condition_number_ideal(SourceScene.single(0.1, 1.0), ArrayGeometry(8))
    assert rep.computed == pytest.approx(9.0, rel=1e-12)
    assert rep.single_element == 2.0


def test_sample_covariance_is_exactly_hermitian():
    y = synthesize_snapshots(ArrayGeometry(7), SourceScene.single(0.3, 1.0, 13), 1)
    R = sample_covariance(y)
    np.testing.assert_array_equal(R.data, R.data.conj().T)
    assert R.source == "sample"
    with pytest.raises(ValueError):
        sample_covariance(np.zeros(4))


def test_sample_covariance_converges_at_root_n_rate():
    g, cfg = ArrayGeometry(8), MixedAdcConfig(2, 6, 2)
    Ns = [100, 400, 1600, 6400]
    errs = []
    for N in Ns:
        s = SourceScene.single(0.3, 1.0, N)
        T = theoretical_covariance(g, s, cfg).data
        e = [np.linalg.norm(sample_covariance(aqnm_observe(synthesize_snapshots(g, s, k), g, s, cfg, k + 1)).data - T)
             for k in range(40)]
        errs.append(np.mean(e))
    slope = np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.08)


def test_text_roundtrip(tmp_path):
    R = theoretical_covariance(ArrayGeometry(5), SourceScene.single(0.7, 0.3), MixedAdcConfig(2, 3, 1))
    p = tmp_path / "R.txt"
    save_matrix(p, R)
    first = p.read_text().splitlines()[0].split()
    assert len(first) == 5 and all(tok.count(",") == 1 for tok in first)
    np.testing.assert_array_equal(load_matrix(p), R.data)
