"""
Subspace DOA estimators: eigen-split of a covariance matrix, the MUSIC
pseudo-spectrum with grid peak search, and root-MUSIC for ULAs.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .array_model import ArrayGeometry, steering_matrix
from .covariance import CovarianceMatrix


class DegenerateSpectrumWarning(UserWarning):
    """Signal and noise eigenvalues are not separated."""


class RootMagnitudeWarning(UserWarning):
    """A selected root-MUSIC root lies far inside the unit circle."""


class PeakSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SubspaceDecomposition:
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    eigenvalues: np.ndarray  # descending

    @property
    def num_sources(self) -> int:
        return self.signal_basis.shape[1]

    def noise_projector(self) -> np.ndarray:
        En = self.noise_basis
        return En @ En.conj().T


@dataclass(frozen=True)
class DoaEstimate:
    angles: np.ndarray  # radians, ascending
    method: Literal["music-grid", "root-music"]
    spectrum: np.ndarray | None = None
    grid: np.ndarray | None = None

    @property
    def angles_deg(self) -> np.ndarray:
        return np.rad2deg(self.angles)


def decompose(R: CovarianceMatrix | np.ndarray, num_sources: int) -> SubspaceDecomposition:
    """Split the eigenvectors of a Hermitian matrix into signal and noise bases.

    The ``num_sources`` dominant eigenvectors span the signal subspace. A
    :class:`DegenerateSpectrumWarning` is issued when the gap between the
    ``K``-th and ``K+1``-th eigenvalue is below ``1e-9`` times the largest.
    """
    A = np.asarray(getattr(R, "data", R))
    M = A.shape[0]
    if not 1 <= num_sources < M:
        raise ValueError(f"need 1 <= num_sources < M, got {num_sources} for M={M}")
    w, V = np.linalg.eigh(A)
    w, V = w[::-1], V[:, ::-1]
    K = num_sources
    if w[K - 1] - w[K] < 1e-9 * abs(w[0]):
        warnings.warn(f"eigenvalue gap after the {K} largest is below 1e-9 of the spectrum scale",
                      DegenerateSpectrumWarning, stacklevel=2)
    return SubspaceDecomposition(V[:, :K], V[:, K:], w)


def default_grid(step_deg: float = 0.05, limit_deg: float = 89.5) -> np.ndarray:
    """Uniform search grid in radians over ``[-limit_deg, limit_deg]``."""
    n = int(round(2 * limit_deg / step_deg)) + 1
    return np.deg2rad(np.linspace(-limit_deg, limit_deg, n))


def music_spectrum(dec: SubspaceDecomposition, geometry: ArrayGeometry, grid: Sequence[float]) -> np.ndarray:
    """Pseudo-spectrum ``1 / ||E_n^H a(theta)||^2`` on ``grid`` (radians)."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    v = dec.noise_basis.conj().T @ steering_matrix(geometry, grid)
    denom = np.sum(v.real**2 + v.imag**2, axis=0)
    return 1.0 / np.maximum(denom, np.finfo(float).tiny)


def spectrum_db(spectrum: np.ndarray) -> np.ndarray:
    """Spectrum in dB relative to its maximum."""
    spectrum = np.asarray(spectrum, dtype=float)
    return 10 * np.log10(spectrum / spectrum.max())


def find_peaks(spectrum: np.ndarray, grid: np.ndarray, num_sources: int) -> DoaEstimate:
    """Locate the ``num_sources`` largest local maxima of a gridded spectrum.

    Each peak is refined by a 3-point parabola through the log-spectrum. End
    points count as maxima when they exceed their only neighbour; they are
    not refined, which keeps the estimate inside the grid.
    """
    s = np.asarray(spectrum, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if num_sources < 1:
        raise ValueError("num_sources must be >= 1")
    n = s.size
    if n < 2:
        idx = np.arange(n)
    else:
        interior = np.flatnonzero((s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:])) + 1
        edges = [i for i, j in ((0, 1), (n - 1, n - 2)) if s[i] > s[j]]
        idx = np.concatenate((np.array(edges, dtype=int), interior))
    if idx.size < num_sources:
        raise PeakSearchError(f"found {idx.size} local maxima, need {num_sources}")
    idx = idx[np.argsort(s[idx])[::-1][:num_sources]]

    logs = np.log(np.maximum(s, np.finfo(float).tiny))
    out = []
    for i in idx:
        theta = grid[i]
        if 0 < i < n - 1:
            l, c, r = logs[i - 1], logs[i], logs[i + 1]
            den = l - 2 * c + r
            if den < 0:
                delta = np.clip(0.5 * (l - r) / den, -0.5, 0.5)
                step = grid[i + 1] - grid[i] if delta >= 0 else grid[i] - grid[i - 1]
                theta = theta + delta * step
        out.append(theta)
    return DoaEstimate(np.sort(np.array(out)), "music-grid", s, grid)


def music(R: CovarianceMatrix | np.ndarray, geometry: ArrayGeometry, num_sources: int,
          grid: np.ndarray | None = None) -> DoaEstimate:
    """Grid MUSIC on a covariance matrix."""
    grid = default_grid() if grid is None else grid
    dec = decompose(R, num_sources)
    return find_peaks(music_spectrum(dec, geometry, grid), grid, num_sources)


def root_music_polynomial(dec: SubspaceDecomposition) -> np.ndarray:
    """Coefficients (highest power first) of ``z^(M-1) a^H(1/z*) C a(z)``.

    ``C = E_n E_n^H``; the coefficient of ``z^(l+M-1)`` is the sum of the
    ``l``-th diagonal of ``C``.
    """
    C = dec.noise_projector()
    M = C.shape[0]
    return np.array([np.trace(C, offset=l) for l in range(M - 1, -M, -1)])


def _polish_double_roots(coeffs: np.ndarray, roots: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Newton steps on ``p'`` for roots within ``tol`` of the unit circle.

    Such roots are (near-)double, which limits companion-matrix accuracy to
    about ``sqrt(eps)``; ``p'`` has a simple root there.
    """
    d1 = np.polyder(coeffs)
    d2 = np.polyder(d1)
    out = roots.copy()
    for k, z in enumerate(roots):
        if abs(1.0 - abs(z)) >= tol:
            continue
        for _ in range(4):
            den = np.polyval(d2, z)
            if den == 0:
                break
            step = np.polyval(d1, z) / den
            if abs(step) > tol:
                break
            z = z - step
        out[k] = z
    return out


def root_music(dec: SubspaceDecomposition, geometry: ArrayGeometry, num_sources: int | None = None,
               return_roots: bool = False):
    """Root-MUSIC DOA estimate for a ULA with spacing at most half a wavelength.

    The ``2(M-1)`` polynomial roots are found as companion-matrix eigenvalues
    (``numpy.roots``); among roots inside the unit circle the ``K`` closest to
    it are mapped to ``arcsin(arg(z) / (2*pi*d))``.
    """
    K = dec.num_sources if num_sources is None else num_sources
    if geometry.d > 0.5 + 1e-12:
        raise ValueError("root-MUSIC needs spacing <= half a wavelength")
    if not 1 <= K < geometry.M:
        raise ValueError(f"need 1 <= num_sources < M, got {K}")
    coeffs = root_music_polynomial(dec)
    roots = np.roots(coeffs)
    mag = np.abs(roots)
    inside = roots[mag <= 1.0]
    if inside.size < K:
        # on-circle double roots may split outward under rounding; fold them back
        inside = np.where(mag <= 1.0, roots, 1.0 / roots.conj())
    chosen = inside[np.argsort(1.0 - np.abs(inside))[:K]]
    chosen = _polish_double_roots(coeffs, chosen)
    if np.any(np.abs(chosen) < 0.5):
        warnings.warn("selected root magnitude below 0.5", RootMagnitudeWarning, stacklevel=2)
    u = np.clip(np.angle(chosen) / (2 * np.pi * geometry.d), -1.0, 1.0)
    est = DoaEstimate(np.sort(np.arcsin(u)), "root-music")
    return (est, roots) if return_roots else est


def write_spectrum_csv(path, grid: np.ndarray, spectrum: np.ndarray) -> None:
    """Two-column CSV ``angle_deg, S_dB`` with the spectrum normalized to 0 dB."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["angle_deg", "S_dB"])
        for th, s in zip(np.rad2deg(grid), spectrum_db(spectrum)):
            w.writerow([f"{th:.6f}", f"{s:.6f}"])
