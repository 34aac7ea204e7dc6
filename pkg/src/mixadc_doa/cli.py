"""
Command-line front end.

Configuration comes from an optional TOML file (``--config``) whose keys are
the option names below with underscores; command-line flags override it.
Angles are given in degrees and SNRs in dB.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import harness
from .array_model import ArrayGeometry, SourceScene
from .covariance import sample_covariance
from .crlb import SWEEP_COLUMNS, crlb_appendix, crlb_closed_form, perf_loss, write_sweep_csv
from .energy import PowerModel, energy_efficiency, optimal_bits, write_ee_csv
from .estimators import PeakSearchError, decompose, default_grid, find_peaks, music_spectrum, write_spectrum_csv
from .quantizer import MixedAdcConfig

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
OUTPUT_ENV = "MIXADC_DOA_OUTPUT_DIR"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


def _opt(default, help, unit=""):
    return field(default=default, metadata={"help": help, "unit": unit})


def _list(default, help, unit=""):
    return field(default_factory=lambda: list(default), metadata={"help": help, "unit": unit})


@dataclass
class RunConfig:
    num_elements: int = _opt(128, "array elements M")
    num_snapshots: int = _opt(32, "snapshots N")
    spacing_wavelengths: float = _opt(0.5, "element spacing", "wavelengths")
    gamma_db: float = _opt(0.0, "per-source SNR", "dB")
    theta_deg: list = _list([30.0], "source directions", "degrees")
    kappa: float = _opt(0.25, "fraction of high-resolution chains, in [0, 1]")
    bits_low: int = _opt(2, "low-resolution ADC bits")
    bits_high: int = _opt(12, "high-resolution ADC bits (>= 6)")
    kappa_list: list = _list([0.0, 0.125, 0.25, 0.5, 0.75, 0.9, 1.0], "kappa sweep for perf-loss")
    bits_list: list = _list([1, 2, 3, 4, 5, 6, 7, 8], "low-resolution bit sweep for perf-loss/energy")
    trials: int = _opt(harness.DESK_TRIALS, "Monte Carlo trials")
    seed: int = _opt(20240601, "base seed; trial i uses seed XOR i")
    quantization: str = _opt("aqnm", "low-resolution path: aqnm or true-quantizer")
    grid_step_deg: float = _opt(0.05, "MUSIC grid step", "degrees")
    workers: int = _opt(os.cpu_count() or 1, "worker processes for Monte Carlo")
    output_dir: str = _opt("", f"output directory; empty means ${OUTPUT_ENV} or the working directory")
    paper_scale: bool = _opt(False, "use paper-scale trial counts (8000) for reproduce")
    p_syc_mw: float = _opt(50.0, "frequency synthesizer power", "mW")
    p_lna_mw: float = _opt(20.0, "LNA power per chain", "mW")
    p_mix_mw: float = _opt(30.3, "mixer power per chain", "mW")
    p_fil_mw: float = _opt(2.5, "active filter power per chain", "mW")
    p_ifa_mw: float = _opt(3.0, "IF amplifier power per chain", "mW")
    p_agc_mw: float = _opt(2.0, "AGC power per chain", "mW")
    vdd_v: float = _opt(3.0, "ADC supply voltage", "V")
    l_min_um: float = _opt(0.5, "CMOS minimum channel length", "um")
    f_cor_hz: float = _opt(1e6, "1/f noise corner frequency", "Hz")
    bandwidth_hz: float = _opt(20e6, "signal bandwidth", "Hz")

    # derived objects, all units converted once here
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.num_elements, self.spacing_wavelengths)

    def scene(self) -> SourceScene:
        return SourceScene(tuple(math.radians(t) for t in self.theta_deg), harness.db_to_linear(self.gamma_db),
                           self.num_snapshots)

    def adc(self, bits=None, kappa=None) -> MixedAdcConfig:
        return MixedAdcConfig.from_kappa(self.num_elements, self.kappa if kappa is None else kappa,
                                         self.bits_low if bits is None else bits)

    def power_model(self) -> PowerModel:
        mw = 1e-3
        return PowerModel(self.p_syc_mw * mw, self.p_lna_mw * mw, self.p_mix_mw * mw, self.p_fil_mw * mw,
                          self.p_ifa_mw * mw, self.p_agc_mw * mw, self.vdd_v, self.l_min_um * 1e-6,
                          self.f_cor_hz, self.bandwidth_hz, self.bits_high)


FIELDS = {f.name: f for f in fields(RunConfig)}


def _default(f):
    return f.default_factory() if f.default_factory is not MISSING else f.default


def _coerce(key: str, value):
    kind = type(_default(FIELDS[key]))
    if kind is list:
        seq = value if isinstance(value, (list, tuple)) else [value]
        elem = int if key == "bits_list" else float
        try:
            return [_scalar(elem, v) for v in seq]
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a list of {elem.__name__}") from None
    try:
        return _scalar(kind, value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {value!r}") from None


def _scalar(kind, v):
    if kind is bool:
        if isinstance(v, bool):
            return v
        raise TypeError
    if kind is int:
        if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
            raise TypeError
        return int(v)
    if kind is float:
        if isinstance(v, bool):
            raise TypeError
        return float(v)
    if not isinstance(v, str):
        raise TypeError
    return v


def validate(cfg: RunConfig) -> RunConfig:
    def need(ok, key, text):
        if not ok:
            raise ConfigError(key, f"violates {text}")

    need(cfg.num_elements >= 2, "num_elements", "num_elements >= 2")
    need(cfg.num_snapshots >= 1, "num_snapshots", "num_snapshots >= 1")
    need(cfg.spacing_wavelengths > 0, "spacing_wavelengths", "spacing_wavelengths > 0")
    need(math.isfinite(cfg.gamma_db), "gamma_db", "gamma_db finite")
    need(len(cfg.theta_deg) >= 1, "theta_deg", "at least one source")
    need(all(abs(t) < 90 for t in cfg.theta_deg), "theta_deg", "|theta| < 90 deg")
    need(len(set(cfg.theta_deg)) == len(cfg.theta_deg), "theta_deg", "distinct source directions")
    need(0.0 <= cfg.kappa <= 1.0, "kappa", "kappa ∈ [0,1]")
    need(all(0.0 <= k <= 1.0 for k in cfg.kappa_list), "kappa_list", "kappa ∈ [0,1]")
    need(cfg.bits_low >= 1, "bits_low", "bits_low >= 1")
    need(all(b >= 1 for b in cfg.bits_list), "bits_list", "bits >= 1")
    need(cfg.bits_high >= 6, "bits_high", "bits_high >= 6")
    need(cfg.trials >= 1, "trials", "trials >= 1")
    need(cfg.workers >= 1, "workers", "workers >= 1")
    need(cfg.grid_step_deg > 0, "grid_step_deg", "grid_step_deg > 0")
    need(cfg.quantization in ("aqnm", "true-quantizer"), "quantization", "quantization ∈ {aqnm, true-quantizer}")
    for key in ("p_syc_mw", "p_lna_mw", "p_mix_mw", "p_fil_mw", "p_ifa_mw", "p_agc_mw", "vdd_v", "l_min_um",
                "f_cor_hz", "bandwidth_hz"):
        need(getattr(cfg, key) > 0, key, f"{key} > 0")
    return cfg


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a validated config from an optional TOML file and flag overrides."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"invalid TOML: {exc}") from None
        for key, v in data.items():
            if key not in FIELDS:
                raise ConfigError(key, "unknown key")
            values[key] = _coerce(key, v)
    for key, v in (overrides or {}).items():
        if v is None:
            continue
        if key not in FIELDS:
            raise ConfigError(key, "unknown key")
        values[key] = _coerce(key, v)
    return validate(RunConfig(**values))


def _flag_help(f) -> str:
    unit = f.metadata.get("unit")
    return f"{f.metadata['help']}" + (f" [{unit}]" if unit else "") + f" (default: {_default(f)})"


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration (file keys use underscores)")
    g.add_argument("--config", metavar="PATH", help="TOML configuration file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "paper_scale":
            g.add_argument(flag, action="store_true", default=None, help=_flag_help(f))
        elif f.default_factory is not MISSING:
            g.add_argument(flag, nargs="+", default=None, metavar="X", help=_flag_help(f))
        else:
            g.add_argument(flag, default=None, metavar="X", help=_flag_help(f))
    return p


def _parse_flag_values(ns) -> dict:
    """Convert raw flag strings to the field types; unset flags are omitted."""
    out = {}
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is None:
            continue
        kind = type(_default(f))
        try:
            if isinstance(v, list):
                v = [int(x) if f.name == "bits_list" else float(x) for x in v]
            elif kind in (int, float):
                v = kind(v)
        except ValueError:
            raise ConfigError(f.name, f"expected {kind.__name__}, got {v!r}") from None
        out[f.name] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    p = argparse.ArgumentParser(prog="mixadc-doa", description="DOA estimation with mixed-resolution ADC arrays.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("crlb", parents=[parent], help="bound for one configuration")
    c.add_argument("--csv", metavar="PATH", help="append a CSV row to PATH")
    sub.add_parser("perf-loss", parents=[parent], help="loss factor sweep over kappa_list x bits_list")
    sub.add_parser("energy", parents=[parent], help="energy-efficiency sweep over bits_list at kappa")
    sub.add_parser("spectrum", parents=[parent], help="MUSIC spectrum of one realization")
    sub.add_parser("simulate", parents=[parent], help="Monte Carlo root-MUSIC RMSE vs bound")
    r = sub.add_parser("reproduce", parents=[parent], help="figure data and plot script")
    r.add_argument("figure", choices=["fig2", "fig3", "fig4", "rmse"])
    return p


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir or os.environ.get(OUTPUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_crlb(cfg: RunConfig, args) -> None:
    geometry, scene, adc = cfg.geometry(), cfg.scene(), cfg.adc()
    rep = crlb_appendix(geometry, scene, adc)
    closed = crlb_closed_form(geometry, scene, adc)
    pl = perf_loss(geometry, scene, adc)
    print(rep.summary())
    print(f"closed form check: {closed.crlb_rad2:.6e} rad^2 (rel. diff {closed.crlb_rad2 / rep.crlb_rad2 - 1:.1e})")
    print(f"performance loss = {pl.ratio:.6f} ({pl.db:.4f} dB)")
    if args.csv:
        path = Path(args.csv)
        row = dict(kappa=adc.kappa, b=cfg.bits_low, gamma_dB=cfg.gamma_db, M=geometry.M, N=scene.num_snapshots,
                   theta_deg=cfg.theta_deg[0], crlb_deg2=rep.crlb_deg2, eta_pl_dB=pl.db)
        new = not path.exists()
        with open(path, "a") as f:
            if new:
                f.write(",".join(SWEEP_COLUMNS) + "\n")
            f.write(",".join(repr(float(row[k])) if isinstance(row[k], float) else str(row[k])
                             for k in SWEEP_COLUMNS) + "\n")


def cmd_perf_loss(cfg: RunConfig, args) -> None:
    spec = harness.ExperimentSpec("fig2-perf-loss", kappas=tuple(cfg.kappa_list), bits=tuple(cfg.bits_list),
                                  gammas_db=(cfg.gamma_db,), M=cfg.num_elements, N=cfg.num_snapshots,
                                  thetas_deg=(cfg.theta_deg[0],), d=cfg.spacing_wavelengths, trials=1)
    res = harness.run(spec)
    path = _out_dir(cfg) / "perf_loss.csv"
    write_sweep_csv(path, res.rows)
    for row in res.rows:
        print(f"kappa={row['kappa']:<6g} b={row['b']:<2} eta_pl={row['eta_pl_dB']:8.4f} dB")
    print(f"wrote {path}")


def cmd_energy(cfg: RunConfig, args) -> None:
    geometry, scene, model = cfg.geometry(), cfg.scene(), cfg.power_model()
    rows = []
    for b in cfg.bits_list:
        rep = energy_efficiency(geometry, scene, cfg.adc(bits=b), model)
        rows.append(dict(kappa=cfg.adc().kappa, b=b, p_total_W=rep.p_total, crlb_deg2=rep.crlb_deg2,
                         ee_per_deg_per_W=rep.ee))
        print(f"b={b:<2} P_total={rep.p_total:9.4f} W  EE={rep.ee:.5f} 1/deg/W")
    best = optimal_bits(geometry, scene, model, cfg.kappa, cfg.bits_list)
    path = _out_dir(cfg) / "energy.csv"
    write_ee_csv(path, rows)
    print(f"optimal low-resolution bits: {best}")
    print(f"wrote {path}")


def cmd_spectrum(cfg: RunConfig, args) -> None:
    geometry, scene, adc = cfg.geometry(), cfg.scene(), cfg.adc()
    y = harness.observe(geometry, scene, adc, cfg.seed, cfg.quantization)
    dec = decompose(sample_covariance(y), scene.num_sources)
    grid = default_grid(cfg.grid_step_deg)
    spec = music_spectrum(dec, geometry, grid)
    path = _out_dir(cfg) / "spectrum.csv"
    write_spectrum_csv(path, grid, spec)
    est = find_peaks(spec, grid, scene.num_sources)
    print("peaks (deg): " + " ".join(f"{a:.3f}" for a in est.angles_deg))
    print(f"wrote {path}")


def cmd_simulate(cfg: RunConfig, args) -> None:
    spec = harness.ExperimentSpec("rmse-vs-crlb", kappas=(cfg.kappa,), bits=(cfg.bits_low,),
                                  gammas_db=(cfg.gamma_db,), M=cfg.num_elements, N=cfg.num_snapshots,
                                  thetas_deg=tuple(cfg.theta_deg), d=cfg.spacing_wavelengths, trials=cfg.trials,
                                  base_seed=cfg.seed, quantization=cfg.quantization, workers=cfg.workers)
    res = harness.run(spec)
    path = _out_dir(cfg) / "simulate.csv"
    res.write_csv(path)
    for row in res.rows:
        print(f"theta={row['theta_deg']:g} rmse={row['rmse_deg']:.5f} deg  sqrt(CRLB)={math.sqrt(row['crlb_deg2']):.5f}"
              f" deg  ({row['rmse_over_crlb_dB']:+.3f} dB)  failures={row['failures']}")
    print(f"wrote {path}")


def cmd_reproduce(cfg: RunConfig, args) -> None:
    trials = None if cfg.paper_scale else cfg.trials
    paths = harness.reproduce_figure(args.figure, _out_dir(cfg), trials=trials, paper_scale=cfg.paper_scale,
                                     workers=cfg.workers)
    for p in paths:
        print(f"wrote {p}")


COMMANDS = {"crlb": cmd_crlb, "perf-loss": cmd_perf_loss, "energy": cmd_energy, "spectrum": cmd_spectrum,
            "simulate": cmd_simulate, "reproduce": cmd_reproduce}


def _fail(kind: str, message: str, key: str | None = None) -> None:
    key_part = f" key={key}" if key else ""
    print(f"error kind={kind}{key_part} message={message!r}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, _parse_flag_values(args))
    except ConfigError as exc:
        _fail("config", exc.message, exc.key)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args)
    except (ValueError, TypeError) as exc:
        _fail("config", str(exc))
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError, PeakSearchError) as exc:
        _fail("numerical", str(exc))
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
