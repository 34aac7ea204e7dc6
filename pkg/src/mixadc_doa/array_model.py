"""
Uniform linear array geometry and narrowband snapshot synthesis.

Element positions are expressed in wavelengths, so the carrier wavelength
never appears explicitly: the phase of element ``m`` for a plane wave from
``theta`` is ``2*pi*d_m*sin(theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

Stage = Literal["unquantized", "aqnm", "true-quantized"]

HALF_PI = 0.5 * np.pi


def _check_angle(theta) -> None:
    if np.any(np.abs(np.asarray(theta, dtype=float)) >= HALF_PI):
        raise ValueError("angle must lie strictly inside (-pi/2, pi/2)")


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``M`` elements spaced ``d`` wavelengths apart.

    Parameters
    ----------
    M : int
        Number of elements, at least 2.
    d : float
        Inter-element spacing in wavelengths (default half wavelength).
    """

    M: int
    d: float = 0.5
    element_positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        pos = np.arange(self.M) * float(self.d)
        pos.setflags(write=False)
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "element_positions", pos)


@dataclass(frozen=True)
class SourceScene:
    """Far-field sources with equal per-source SNR.

    Parameters
    ----------
    angles : sequence of float
        Source directions in radians.
    snr_linear : float
        Per-source SNR ``gamma``; the noise power is normalized to one.
    num_snapshots : int
        Number of snapshots ``N``.
    """

    angles: tuple[float, ...]
    snr_linear: float
    num_snapshots: int = 32

    def __post_init__(self):
        angles = tuple(float(a) for a in np.atleast_1d(self.angles))
        if not angles:
            raise ValueError("scene needs at least one source")
        _check_angle(angles)
        if len(set(angles)) != len(angles):
            raise ValueError("source angles must be distinct")
        if not self.snr_linear >= 0:
            raise ValueError(f"snr_linear must be non-negative, got {self.snr_linear}")
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise ValueError(f"num_snapshots must be a positive integer, got {self.num_snapshots}")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "num_snapshots", int(self.num_snapshots))

    @classmethod
    def single(cls, theta: float, snr_linear: float, num_snapshots: int = 32) -> "SourceScene":
        return cls((theta,), snr_linear, num_snapshots)

    @property
    def num_sources(self) -> int:
        return len(self.angles)

    @property
    def theta(self) -> float:
        """Direction of the only source; raises for multi-source scenes."""
        if self.num_sources != 1:
            raise ValueError("operation requires a single-source scene")
        return self.angles[0]

    @property
    def element_power(self) -> float:
        """Expected per-element input power ``K*gamma + 1``."""
        return self.num_sources * self.snr_linear + 1.0


@dataclass(frozen=True)
class SnapshotMatrix:
    """Complex ``M x N`` array samples tagged with their processing stage."""

    data: np.ndarray
    stage: Stage = "unquantized"

    @property
    def num_elements(self) -> int:
        return self.data.shape[0]

    @property
    def num_snapshots(self) -> int:
        return self.data.shape[1]


def steering_vector(geometry: ArrayGeometry, theta: float) -> np.ndarray:
    """Array manifold ``a(theta)`` with entries ``exp(j*2*pi*d_m*sin(theta))``."""
    _check_angle(theta)
    return np.exp(2j * np.pi * geometry.element_positions * np.sin(theta))


def steering_matrix(geometry: ArrayGeometry, thetas: Sequence[float]) -> np.ndarray:
    """Stack steering vectors column-wise, shape ``(M, len(thetas))``."""
    thetas = np.asarray(thetas, dtype=float)
    _check_angle(thetas)
    return np.exp(2j * np.pi * np.outer(geometry.element_positions, np.sin(thetas)))


def steering_derivative(geometry: ArrayGeometry, theta: float) -> np.ndarray:
    """Derivative of the manifold with respect to ``theta``.

    ``da/dtheta = j*2*pi*cos(theta) * D a(theta)`` with ``D = diag(d_m)``; the
    first entry is exactly zero because ``d_1 = 0``.
    """
    a = steering_vector(geometry, theta)
    return 2j * np.pi * np.cos(theta) * geometry.element_positions * a


def _complex_gaussian(rng: np.random.Generator, shape, power: float = 1.0) -> np.ndarray:
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_snapshots(geometry: ArrayGeometry, scene: SourceScene, seed) -> SnapshotMatrix:
    """Draw ``x(n) = sum_k a(theta_k) s_k(n) + w(n)`` for ``n = 1..N``.

    Sources are independent circular complex Gaussian with power
    ``scene.snr_linear`` each; the noise is white with unit power per element.
    The output depends only on the inputs and ``seed``.
    """
    rng = np.random.default_rng(seed)
    N = scene.num_snapshots
    A = steering_matrix(geometry, scene.angles)
    s = _complex_gaussian(rng, (scene.num_sources, N), scene.snr_linear)
    w = _complex_gaussian(rng, (geometry.M, N))
    return SnapshotMatrix(A @ s + w, "unquantized")
