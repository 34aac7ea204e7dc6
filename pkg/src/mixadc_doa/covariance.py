"""
Sample and model covariance matrices of the mixed-ADC observation.

The model covariance of the AQNM observation splits as
``R_y = R_ideal + R_err`` where ``R_ideal = gamma*a*a^H + I`` is what an
all-high-resolution array would see and ``R_err`` collects the distortion
introduced by the low-resolution chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Literal

import numpy as np

from .array_model import ArrayGeometry, SnapshotMatrix, SourceScene, steering_vector
from .quantizer import MixedAdcConfig

Source = Literal["sample", "theoretical-mixed", "theoretical-ideal", "error-term"]


@dataclass(frozen=True)
class CovarianceMatrix:
    data: np.ndarray
    source: Source

    @property
    def M(self) -> int:
        return self.data.shape[0]

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors, computed once."""
        return np.linalg.eigh(self.data)

    def is_hermitian(self, factor: float = 10.0) -> bool:
        R = self.data
        scale = max(np.max(np.abs(R)), np.finfo(float).tiny)
        return bool(np.max(np.abs(R - R.conj().T)) <= factor * np.finfo(float).eps * scale)


def sample_covariance(y: SnapshotMatrix | np.ndarray) -> CovarianceMatrix:
    """``(1/N) * Y @ Y^H``."""
    Y = np.asarray(getattr(y, "data", y))
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise ValueError("expected an M x N snapshot matrix with N >= 1")
    R = Y @ Y.conj().T / Y.shape[1]
    # enforce exact Hermitian symmetry against rounding in the product
    R = 0.5 * (R + R.conj().T)
    return CovarianceMatrix(R, "sample")


def ideal_covariance(geometry: ArrayGeometry, scene: SourceScene) -> CovarianceMatrix:
    a = steering_vector(geometry, scene.theta)
    R = scene.snr_linear * np.outer(a, a.conj()) + np.eye(geometry.M)
    return CovarianceMatrix(R, "theoretical-ideal")


def gain_and_noise(config: MixedAdcConfig, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of the chain gain ``T`` and the effective noise covariance ``Q``."""
    t = np.ones(config.M)
    q = np.ones(config.M)
    if config.M1:
        alpha, beta = config.alpha, config.beta
        t[config.M0:] = alpha
        q[config.M0:] = alpha**2 + alpha * beta * (gamma + 1.0)
    return t, q


def theoretical_covariance(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig,
                           theta: float | None = None) -> CovarianceMatrix:
    """Exact ``E[y y^H]`` of the single-source AQNM observation.

    Equals ``gamma * T a a^H T^H + Q``: high-resolution block ``gamma*a0*a0^H + I``,
    cross blocks scaled by ``alpha`` and low-resolution block
    ``alpha^2*gamma*a1*a1^H + (alpha^2 + alpha*beta*(gamma+1)) I``.
    ``theta`` overrides the scene direction (used for numerical derivatives).
    """
    config.check(geometry)
    theta = scene.theta if theta is None else theta
    t, q = gain_and_noise(config, scene.snr_linear)
    ta = t * steering_vector(geometry, theta)
    R = scene.snr_linear * np.outer(ta, ta.conj()) + np.diag(q)
    return CovarianceMatrix(R, "theoretical-mixed")


def error_term(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> CovarianceMatrix:
    """Deviation of the mixed-ADC covariance from the ideal one."""
    R = theoretical_covariance(geometry, scene, config).data - ideal_covariance(geometry, scene).data
    R[: config.M0, : config.M0] = 0.0
    return CovarianceMatrix(R, "error-term")


def error_term_blocks(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> CovarianceMatrix:
    """Error term assembled block by block in its factored textbook form.

    Cross blocks ``(alpha-1)*gamma*a0*a1^H`` and low-resolution block
    ``(alpha^2-1)*gamma*a1*a1^H + (gamma*alpha-1)*(1-alpha) I``. Kept separate
    from :func:`error_term` so the two constructions can be checked against
    each other.
    """
    a = steering_vector(geometry, scene.theta)
    g, alpha, M0 = scene.snr_linear, config.alpha, config.M0
    a0, a1 = a[:M0], a[M0:]
    R = np.zeros((geometry.M, geometry.M), dtype=complex)
    if config.M1:
        R[:M0, M0:] = (alpha - 1) * g * np.outer(a0, a1.conj())
        R[M0:, :M0] = R[:M0, M0:].conj().T
        R[M0:, M0:] = ((alpha**2 - 1) * g * np.outer(a1, a1.conj())
                       + (g * alpha - 1) * (1 - alpha) * np.eye(config.M1))
    return CovarianceMatrix(R, "error-term")


@dataclass(frozen=True)
class ConditionReport:
    computed: float
    """Eigenvalue ratio of ``gamma*a*a^H + I``, analytically ``gamma*M + 1``."""
    single_element: float
    """``gamma + 1``: the ratio the rank-one model gives only when ``M = 1``."""


def condition_number_ideal(scene: SourceScene, geometry: ArrayGeometry | None = None) -> ConditionReport:
    """Condition number of the ideal single-source covariance.

    ``geometry=None`` evaluates the scalar ``M = 1`` case.
    """
    g = scene.snr_linear
    if geometry is None:
        return ConditionReport(g + 1.0, g + 1.0)
    w = np.linalg.eigvalsh(ideal_covariance(geometry, scene).data)
    return ConditionReport(float(w[-1] / w[0]), g + 1.0)


def save_matrix(path, R: CovarianceMatrix | np.ndarray) -> None:
    """Write a complex matrix as text, one ``re,im`` pair per entry, row-major.

    Entries in a row are separated by single spaces.
    """
    A = np.asarray(getattr(R, "data", R), dtype=complex)
    with open(path, "w") as f:
        for row in A:
            f.write(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")


def load_matrix(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rows.append([complex(float(re), float(im)) for re, im in (tok.split(",") for tok in line.split())])
    return np.array(rows, dtype=complex)
