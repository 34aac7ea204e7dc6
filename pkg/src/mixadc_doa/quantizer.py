"""
Low-resolution ADC models: distortion factors, Lloyd-Max codebooks for a
Gaussian input, the true scalar quantizer, and the additive quantization
noise model (AQNM) surrogate of a mixed-resolution receive chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .array_model import ArrayGeometry, SnapshotMatrix, SourceScene, _complex_gaussian

# MSE of the optimal (Lloyd-Max) quantizer for a unit-variance Gaussian
DISTORTION_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}

INFINITE_RESOLUTION = math.inf


def distortion_factor(b) -> float:
    """Normalized quantization MSE ``beta`` of a ``b``-bit ADC.

    Tabulated values for ``b <= 5``, ``(sqrt(3)*pi/2) * 2**(-2b)`` beyond, and
    zero for ``INFINITE_RESOLUTION``.
    """
    if b == INFINITE_RESOLUTION:
        return 0.0
    if int(b) != b or b <= 0:
        raise ValueError(f"bit depth must be a positive integer, got {b}")
    b = int(b)
    if b in DISTORTION_TABLE:
        return DISTORTION_TABLE[b]
    return math.sqrt(3) * math.pi / 2 * 2.0 ** (-2 * b)


@dataclass(frozen=True)
class MixedAdcConfig:
    """Split of ``M`` receive chains into ``M0`` high- and ``M1`` low-resolution ADCs."""

    M0: int
    M1: int
    b_low: float = 2

    def __post_init__(self):
        if self.M0 < 0 or self.M1 < 0 or self.M0 + self.M1 < 1:
            raise ValueError(f"invalid chain split M0={self.M0}, M1={self.M1}")
        distortion_factor(self.b_low)

    @classmethod
    def from_kappa(cls, M: int, kappa: float, b_low=2) -> "MixedAdcConfig":
        """Build a split with ``M0 = round(kappa*M)``."""
        if not 0.0 <= kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
        M0 = int(round(kappa * M))
        return cls(M0, M - M0, b_low)

    @classmethod
    def high_resolution(cls, M: int) -> "MixedAdcConfig":
        return cls(M, 0, INFINITE_RESOLUTION)

    @property
    def M(self) -> int:
        return self.M0 + self.M1

    @property
    def kappa(self) -> float:
        return self.M0 / self.M

    @property
    def beta(self) -> float:
        return distortion_factor(self.b_low)

    @property
    def alpha(self) -> float:
        return 1.0 - self.beta

    def check(self, geometry: ArrayGeometry) -> None:
        if self.M != geometry.M:
            raise ValueError(f"ADC split covers {self.M} chains but the array has {geometry.M}")


@dataclass(frozen=True)
class Codebook:
    levels: np.ndarray
    thresholds: np.ndarray
    mse: float

    def quantize(self, x: np.ndarray) -> np.ndarray:
        return self.levels[np.searchsorted(self.thresholds, x)]


def _gauss_pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x**2) / math.sqrt(2 * math.pi)


@lru_cache(maxsize=None)
def lloydmax_codebook(b: int, rtol: float = 1e-12, max_iter: int = 200_000) -> Codebook:
    """MSE-optimal ``b``-bit quantizer for a standard Gaussian input.

    Runs Lloyd's fixed-point iteration (centroid and midpoint conditions) in
    closed form with the Gaussian pdf/cdf until the relative MSE change drops
    below ``rtol``.
    """
    if not 1 <= b <= 5:
        raise ValueError(f"Lloyd-Max codebooks are provided for 1 <= b <= 5, got {b}")
    n = 2**b
    # uniform start on +-3 sigma
    t = np.linspace(-3.0, 3.0, n + 1)[1:-1]
    prev = np.inf
    for _ in range(max_iter):
        edges = np.concatenate(([-np.inf], t, [np.inf]))
        p = np.diff(ndtr(edges))
        levels = -np.diff(_gauss_pdf(edges)) / p
        mse = 1.0 - np.sum(p * levels**2)
        t = 0.5 * (levels[1:] + levels[:-1])
        if abs(prev - mse) <= rtol * mse:
            break
        prev = mse
    levels = 0.5 * (levels - levels[::-1])  # exact symmetry
    t = 0.5 * (levels[1:] + levels[:-1])
    levels.setflags(write=False)
    t.setflags(write=False)
    return Codebook(levels, t, float(mse))


def quantize_true(x: SnapshotMatrix | np.ndarray, config: MixedAdcConfig, input_power: float) -> SnapshotMatrix:
    """Quantize low-resolution rows with a Lloyd-Max codebook.

    Real and imaginary parts are normalized by the per-component standard
    deviation ``sqrt(input_power/2)`` (ideal AGC), quantized, and scaled back.
    """
    if config.b_low == INFINITE_RESOLUTION:
        data = np.asarray(getattr(x, "data", x))
        return SnapshotMatrix(data.copy(), "true-quantized")
    if config.b_low > 5:
        raise ValueError("the true quantizer supports b_low <= 5; use the AQNM path beyond")
    data = np.asarray(getattr(x, "data", x))
    cb = lloydmax_codebook(int(config.b_low))
    sigma = math.sqrt(input_power / 2.0)
    q = cb.quantize(data.real / sigma) + 1j * cb.quantize(data.imag / sigma)
    return SnapshotMatrix(sigma * q, "true-quantized")


def quantization_noise_cov(scene: SourceScene, config: MixedAdcConfig) -> float:
    """Per-element variance ``alpha*beta*(P)`` of the AQNM noise, ``P = gamma + 1``.

    For multi-source scenes ``P`` is the total per-element input power.
    """
    return config.alpha * config.beta * scene.element_power


def aqnm_observe(x: SnapshotMatrix, geometry: ArrayGeometry, scene: SourceScene,
                 config: MixedAdcConfig, seed) -> SnapshotMatrix:
    """Apply the AQNM surrogate to the last ``M1`` rows of ``x``.

    High-resolution rows pass through; low-resolution rows become
    ``alpha*x1 + w_q`` with white circular Gaussian ``w_q``.
    """
    config.check(geometry)
    y = np.array(x.data, dtype=complex, copy=True)
    if config.M1 and config.beta > 0:
        rng = np.random.default_rng(seed)
        var = quantization_noise_cov(scene, config)
        y[config.M0:] = config.alpha * y[config.M0:] + _complex_gaussian(rng, (config.M1, y.shape[1]), var)
    return SnapshotMatrix(y, "aqnm")


def mixed_true_observe(x: SnapshotMatrix, geometry: ArrayGeometry, scene: SourceScene,
                       config: MixedAdcConfig) -> SnapshotMatrix:
    """Quantize the last ``M1`` rows of ``x`` with the true quantizer."""
    config.check(geometry)
    y = np.array(x.data, dtype=complex, copy=True)
    if config.M1:
        y[config.M0:] = quantize_true(y[config.M0:], config, scene.element_power).data
    return SnapshotMatrix(y, "true-quantized")
