"""
Receiver power model and the DOA energy-efficiency factor
``eta_EE = CRLB_deg^(-1/2) / P_total`` in 1/degree/W.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .array_model import ArrayGeometry, SourceScene
from .crlb import crlb_appendix
from .quantizer import MixedAdcConfig

MW = 1e-3


@dataclass(frozen=True)
class PowerModel:
    """Per-chain RF front-end powers (W) and ADC technology parameters.

    Defaults are the classic massive-MIMO values: synthesizer 50 mW, LNA 20 mW,
    mixer 30.3 mW, filters 2.5 mW, IF amplifier 3 mW, AGC 2 mW, 3 V supply,
    0.5 um CMOS, 1 MHz flicker corner, 20 MHz bandwidth and 12-bit
    high-resolution converters.
    """

    P_syc: float = 50.0 * MW
    P_LNA: float = 20.0 * MW
    P_mix: float = 30.3 * MW
    P_fil: float = 2.5 * MW
    P_IFA: float = 3.0 * MW
    P_AGC: float = 2.0 * MW
    V_dd: float = 3.0
    L_min: float = 0.5e-6
    f_cor: float = 1e6
    B: float = 20e6
    b_high: int = 12

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"power model field {k} must be positive, got {v}")
        if self.b_high < 6:
            raise ValueError("high-resolution ADCs need b_high >= 6")


@dataclass(frozen=True)
class EnergyReport:
    p_breakdown: dict[str, float]
    crlb_deg2: float | None = None
    pure_low_resolution: bool = False
    """Set when no high-resolution chain is present; accuracy is then usually unacceptable."""
    p_total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_total", math.fsum(self.p_breakdown.values()))

    @property
    def ee(self) -> float:
        if self.crlb_deg2 is None:
            raise ValueError("report carries no CRLB")
        return self.crlb_deg2**-0.5 / self.p_total


def adc_power(model: PowerModel, b) -> float:
    """Power of one Nyquist-rate CMOS ADC with ``b`` bits, in watts.

    ``3 V_dd^2 L_min (2B + f_cor) / 10^(-0.1525 b + 4.838)``.
    """
    if b <= 0:
        raise ValueError(f"bit depth must be positive, got {b}")
    return 3 * model.V_dd**2 * model.L_min * (2 * model.B + model.f_cor) / 10 ** (-0.1525 * b + 4.838)


def agc_flag(b) -> int:
    """Whether a ``b``-bit chain needs AGC: one-bit converters only see the sign."""
    return 0 if b == 1 else 1


def total_power(model: PowerModel, config: MixedAdcConfig, geometry: ArrayGeometry) -> EnergyReport:
    """Itemized receiver power for the mixed-ADC split."""
    config.check(geometry)
    M, M0, M1 = geometry.M, config.M0, config.M1
    rho = agc_flag(config.b_low) if M1 else 0
    parts = {
        "synthesizer": model.P_syc,
        "lna": M * model.P_LNA,
        "mixer": M * model.P_mix,
        "filter": M * model.P_fil,
        "ifa": M * model.P_IFA,
        "agc_high": M0 * model.P_AGC,
        "agc_low": rho * M1 * model.P_AGC,
        "adc_high": M0 * adc_power(model, model.b_high),
        "adc_low": M1 * adc_power(model, config.b_low) if M1 else 0.0,
    }
    return EnergyReport(parts)


def energy_efficiency(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig,
                      model: PowerModel | None = None) -> EnergyReport:
    """Power report plus the bound (degrees squared) that sets ``ee``."""
    model = PowerModel() if model is None else model
    crlb = crlb_appendix(geometry, scene, config).crlb_deg2
    return EnergyReport(total_power(model, config, geometry).p_breakdown, crlb, config.M0 == 0)


def ee_curve(geometry: ArrayGeometry, scene: SourceScene, kappa: float, b_range: Iterable[int],
             model: PowerModel | None = None) -> dict[int, EnergyReport]:
    return {b: energy_efficiency(geometry, scene, MixedAdcConfig.from_kappa(geometry.M, kappa, b), model)
            for b in b_range}


def optimal_bits(geometry: ArrayGeometry, scene: SourceScene, model: PowerModel | None, kappa: float,
                 b_range: Iterable[int]) -> int:
    """Low-resolution bit depth maximizing ``ee``; ties go to fewer bits."""
    bits = sorted(set(b_range))
    if not bits:
        raise ValueError("empty bit range")
    curve = ee_curve(geometry, scene, kappa, bits, model)
    return max(bits, key=lambda b: (curve[b].ee, -b))


EE_COLUMNS = ["kappa", "b", "p_total_W", "crlb_deg2", "ee_per_deg_per_W"]


def write_ee_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=EE_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(r[k]) if isinstance(r[k], float) else r[k] for k in EE_COLUMNS})
