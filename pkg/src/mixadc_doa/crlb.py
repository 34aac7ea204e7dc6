"""
Fisher information and Cramer-Rao bound for single-source DOA estimation with
a mixed-ADC ULA under the additive quantization noise model.

The observation covariance is ``R = gamma * T a a^H T^H + Q`` with the chain
gains ``T = I_M0 (+) alpha I_M1`` and the effective noise
``Q = I_M0 (+) (alpha^2 + alpha*beta*(gamma+1)) I_M1``. Using the
Sherman-Morrison inverse of ``R`` every quadratic form collapses onto three
weighted position sums

    xi = sum_m w_m,   mu = sum_m w_m d_m,   nu = sum_m w_m d_m^2

with ``w_m = 1`` on high-resolution chains and ``alpha / (beta*gamma + 1)`` on
low-resolution chains, giving the per-snapshot information

    F = 8 pi^2 gamma^2 cos^2(theta) (xi*nu - mu^2) / (gamma*xi + 1)

and ``CRLB = 1 / (N F)``. Positions are in wavelengths, so no wavelength
factor appears.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .array_model import ArrayGeometry, SourceScene, steering_derivative, steering_vector
from .covariance import gain_and_noise, theoretical_covariance
from .quantizer import MixedAdcConfig

RAD2_TO_DEG2 = (180.0 / math.pi) ** 2


class DegenerateGeometryError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FimIntermediates:
    T: np.ndarray
    Q: np.ndarray
    xi: float
    mu: float
    nu: float


@dataclass(frozen=True)
class CrlbReport:
    crlb_rad2: float
    fim: float
    intermediates: FimIntermediates | None
    M: int
    M0: int
    b_low: float
    gamma: float
    theta: float
    N: int
    d: float
    crlb_deg2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "crlb_deg2", self.crlb_rad2 * RAD2_TO_DEG2)

    def summary(self) -> str:
        return (f"M={self.M} M0={self.M0} b={self.b_low} gamma={self.gamma:g} "
                f"theta={math.degrees(self.theta):g}deg N={self.N} d={self.d:g}\n"
                f"FIM per snapshot = {self.fim:.6e}\n"
                f"CRLB = {self.crlb_rad2:.6e} rad^2 = {self.crlb_deg2:.6e} deg^2 "
                f"(std {math.sqrt(self.crlb_deg2):.4e} deg)")


def _check(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> None:
    config.check(geometry)
    scene.theta  # single source only
    if not scene.snr_linear > 0:
        raise ValueError("the bound needs gamma > 0")


def _low_res_weight(config: MixedAdcConfig, gamma: float) -> float:
    return config.alpha / (config.beta * gamma + 1.0)


def fim_intermediates(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig,
                      self_check: bool = False) -> FimIntermediates:
    """Gain/noise matrices and the weighted sums ``xi``, ``mu``, ``nu``.

    With ``self_check`` the scalar ``xi`` is compared against the quadratic
    form ``a^H T^H Q^{-1} T a`` built from explicit matrices.
    """
    _check(geometry, scene, config)
    g = scene.snr_linear
    t, q = gain_and_noise(config, g)
    dm = geometry.element_positions
    w = np.ones(geometry.M)
    w[config.M0:] = _low_res_weight(config, g)
    xi, mu, nu = float(w.sum()), float(w @ dm), float(w @ dm**2)
    T, Q = np.diag(t), np.diag(q)
    if self_check:
        ta = T @ steering_vector(geometry, scene.theta)
        xi_mat = float(np.real(ta.conj() @ np.linalg.solve(Q, ta)))
        if abs(xi_mat - xi) > 1e-10 * max(1.0, abs(xi)):
            raise AssertionError(f"xi mismatch: scalar {xi} vs matrix {xi_mat}")
    return FimIntermediates(T, Q, xi, mu, nu)


def fim_components(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> tuple[float, float, float]:
    """``(F_a, F_b, F_c)`` from their closed forms; ``F = gamma^2 (F_a + 2F_b + F_c)``.

    ``F_a = F_c = -4 pi^2 cos^2 mu^2 / (gamma xi + 1)^2`` and
    ``F_b = 4 pi^2 xi cos^2 (nu - gamma mu^2 / (gamma xi + 1)) / (gamma xi + 1)``.
    """
    it = fim_intermediates(geometry, scene, config)
    g, c2 = scene.snr_linear, math.cos(scene.theta) ** 2
    den = g * it.xi + 1.0
    fa = -4 * math.pi**2 * c2 * it.mu**2 / den**2
    fb = 4 * math.pi**2 * it.xi * c2 * (it.nu - g * it.mu**2 / den) / den
    return fa, fb, fa


def fim_quadratic_forms(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> tuple[complex, float, complex]:
    """``(F_a, F_b, F_c)`` from explicit quadratic forms with ``R^{-1}``."""
    _check(geometry, scene, config)
    R = theoretical_covariance(geometry, scene, config).data
    t, _ = gain_and_noise(config, scene.snr_linear)
    u = t * steering_vector(geometry, scene.theta)
    v = t * steering_derivative(geometry, scene.theta)
    Ru, Rv = np.linalg.solve(R, u), np.linalg.solve(R, v)
    uv = u.conj() @ Rv
    vu = v.conj() @ Ru
    fb = (u.conj() @ Ru) * (v.conj() @ Rv)
    return uv**2, float(fb.real), vu**2


def fim(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig, rtol: float = 1e-9) -> float:
    """Per-snapshot Fisher information for the source direction.

    Evaluated both from the component terms and from the assembled closed
    form; the two must agree to ``rtol``.
    """
    it = fim_intermediates(geometry, scene, config)
    det = it.xi * it.nu - it.mu**2
    if not det > 0:
        raise DegenerateGeometryError(f"xi*nu - mu^2 = {det} is not positive")
    g, c2 = scene.snr_linear, math.cos(scene.theta) ** 2
    assembled = 8 * math.pi**2 * g**2 * c2 * det / (g * it.xi + 1.0)
    fa, fb, fc = fim_components(geometry, scene, config)
    from_components = g**2 * (fa + 2 * fb + fc)
    if abs(from_components - assembled) > rtol * abs(assembled):
        raise ArithmeticError(f"component FIM {from_components} != assembled FIM {assembled}")
    return assembled


def _report(crlb_rad2: float, fim_value: float, it, geometry, scene, config) -> CrlbReport:
    return CrlbReport(crlb_rad2, fim_value, it, geometry.M, config.M0, config.b_low,
                      scene.snr_linear, scene.theta, scene.num_snapshots, geometry.d)


def crlb_appendix(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> CrlbReport:
    """``CRLB = 1 / (N F)`` in radians squared (reference implementation)."""
    F = fim(geometry, scene, config)
    it = fim_intermediates(geometry, scene, config)
    return _report(1.0 / (scene.num_snapshots * F), F, it, geometry, scene, config)


def _uniform_spacing(geometry: ArrayGeometry) -> float:
    pos = np.asarray(geometry.element_positions, dtype=float)
    d = pos[1] - pos[0]
    if pos[0] != 0.0 or not np.allclose(np.diff(pos), d, rtol=1e-12, atol=0.0):
        raise ValueError("closed form needs uniform positions d_m = (m-1) d")
    return float(d)


def _closed_form_terms(geometry, config, gamma):
    M, M0 = geometry.M, config.M0
    alpha, beta = config.alpha, config.beta
    if config.M1 == 0:
        alpha, beta = 1.0, 0.0
    A = beta * M0 * (gamma + 1) + alpha * M
    J0 = beta * M0 * (M0 - 1) * (gamma + 1)
    J = alpha * M * (M - 1)
    return alpha, beta, A, J0, J


def crlb_closed_form(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> CrlbReport:
    """Bound for ``d_m = (m-1) d`` with the position sums written out.

    With ``c = beta*gamma + 1``, ``A = beta*M0*(gamma+1) + alpha*M``,
    ``J0 = beta*M0*(M0-1)*(gamma+1)`` and ``J = alpha*M*(M-1)``::

        CRLB = 3 c (gamma*A + c)
               / (2 N pi^2 gamma^2 cos^2(theta) d^2 [2 A (J0(2M0-1) + J(2M-1)) - 3 (J0+J)^2])
    """
    _check(geometry, scene, config)
    d = _uniform_spacing(geometry)
    g, N, M, M0 = scene.snr_linear, scene.num_snapshots, geometry.M, config.M0
    alpha, beta, A, J0, J = _closed_form_terms(geometry, config, g)
    c = beta * g + 1
    num = 3 * c * (g * A + c)
    den = (2 * N * math.pi**2 * g**2 * math.cos(scene.theta) ** 2 * d**2
           * (2 * A * (J0 * (2 * M0 - 1) + J * (2 * M - 1)) - 3 * (J0 + J) ** 2))
    crlb = num / den
    return _report(crlb, 1.0 / (N * crlb), None, geometry, scene, config)


def crlb_closed_form_flat(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig,
                          wavelength: float = 1.0) -> float:
    """Closed form with its brackets grouped flat, kept for comparison.

    ``3 lam^2 c A + c^2`` over ``4 N pi^2 gamma cos^2 d^2 A K - 3 (J0+J)^2``.
    This grouping mixes terms of different physical dimension and does not
    reproduce :func:`crlb_appendix`; :func:`crlb_closed_form` is the
    consistent grouping.
    """
    _check(geometry, scene, config)
    d = _uniform_spacing(geometry) * wavelength
    g, N, M, M0 = scene.snr_linear, scene.num_snapshots, geometry.M, config.M0
    alpha, beta, A, J0, J = _closed_form_terms(geometry, config, g)
    c = beta * g + 1
    K = J0 * (2 * M0 - 1) + J * (2 * M - 1)
    num = 3 * wavelength**2 * c * A + c**2
    den = 4 * N * math.pi**2 * g * math.cos(scene.theta) ** 2 * d**2 * A * K - 3 * (J0 + J) ** 2
    return num / den


def fim_numeric(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig, h: float = 1e-6) -> float:
    """``Tr{R^-1 dR R^-1 dR}`` with ``dR`` from central differences of the model covariance."""
    if not 1e-7 <= h <= 1e-4:
        raise ValueError("h must lie in [1e-7, 1e-4]")
    th = scene.theta
    R = theoretical_covariance(geometry, scene, config).data
    dR = (theoretical_covariance(geometry, scene, config, th + h).data
          - theoretical_covariance(geometry, scene, config, th - h).data) / (2 * h)
    X = np.linalg.solve(R, dR)
    return float(np.real(np.trace(X @ X)))


@dataclass(frozen=True)
class PerfLoss:
    ratio: float
    ratio_formula: float

    @property
    def db(self) -> float:
        return 10 * math.log10(self.ratio)


def perf_loss_formula(kappa: float, M: int, beta: float, gamma: float) -> float:
    """Finite-``M`` loss factor as a function of ``kappa`` (may be fractional).

    With ``g = beta*(gamma+1)``, ``alpha = 1 - beta`` and ``e = 1/M``::

        eta = [gamma (g+alpha)(g kappa+alpha) + (beta gamma+1)^2 e] / (gamma + e)
              * [2(1-e)(2-e) - 3(1-e)^2]
              / (2(g kappa+alpha)[g kappa(kappa-e)(2kappa-e) + alpha(1-e)(2-e)]
                 - 3[g kappa(kappa-e) + alpha(1-e)]^2)
    """
    if kappa == 1.0 or beta == 0.0:
        return 1.0
    alpha, g, e = 1.0 - beta, beta * (gamma + 1.0), 1.0 / M
    gk = g * kappa + alpha
    head = (gamma * (g + alpha) * gk + (beta * gamma + 1.0) ** 2 * e) / (gamma + e)
    ref = 2 * (1 - e) * (2 - e) - 3 * (1 - e) ** 2
    den = (2 * gk * (g * kappa * (kappa - e) * (2 * kappa - e) + alpha * (1 - e) * (2 - e))
           - 3 * (g * kappa * (kappa - e) + alpha * (1 - e)) ** 2)
    return head * ref / den


def perf_loss(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig) -> PerfLoss:
    """Mixed-ADC bound over the all-high-resolution bound, by quotient and by formula."""
    full = MixedAdcConfig.high_resolution(geometry.M)
    if config.M1 == 0 or config.beta == 0.0:
        return PerfLoss(1.0, 1.0)
    ratio = crlb_appendix(geometry, scene, config).crlb_rad2 / crlb_appendix(geometry, scene, full).crlb_rad2
    formula = perf_loss_formula(config.kappa, geometry.M, config.beta, scene.snr_linear)
    return PerfLoss(ratio, formula)


def perf_loss_limit(kappa: float, beta: float, gamma: float) -> float:
    """Large-array limit ``(g+a)(gk+a) / (4(gk+a)(gk^3+a) - 3(gk^2+a)^2)``."""
    alpha, g = 1.0 - beta, beta * (gamma + 1.0)
    num = (g + alpha) * (g * kappa + alpha)
    den = 4 * (g * kappa + alpha) * (g * kappa**3 + alpha) - 3 * (g * kappa**2 + alpha) ** 2
    return num / den


def perf_loss_asymptotic(config: MixedAdcConfig, scene: SourceScene) -> float:
    """Loss factor as ``M -> inf`` at the split ratio and bit depth of ``config``."""
    return perf_loss_limit(config.kappa, config.beta, scene.snr_linear)


SWEEP_COLUMNS = ["kappa", "b", "gamma_dB", "M", "N", "theta_deg", "crlb_deg2", "eta_pl_dB"]


def write_sweep_csv(path, rows) -> None:
    """Write CRLB sweep rows (dicts keyed by :data:`SWEEP_COLUMNS`)."""
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r[k]) for k in SWEEP_COLUMNS})


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if v != math.inf else "inf"
    return v
