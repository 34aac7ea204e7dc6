"""
Monte Carlo runner and figure recipes.

Experiments
-----------
``fig2-perf-loss``
    Loss factor versus ``kappa`` for several bit depths and SNRs (closed form).
``fig3-spectrum``
    MUSIC spectra of a two-source scene for several low-resolution bit depths.
    ``thetas_deg`` lists the simultaneous sources.
``fig4-ee``
    Energy efficiency versus low-resolution bit depth (closed form).
``rmse-vs-crlb``
    Root-MUSIC RMSE against the bound; ``thetas_deg`` is swept, one source
    per scene.

Trial ``i`` of every grid point uses seed ``base_seed ^ i``, so grid points
share random numbers and differences between them are not masked by
independent sampling noise.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.optimize import linear_sum_assignment

from .array_model import ArrayGeometry, SourceScene, steering_matrix, synthesize_snapshots
from .covariance import sample_covariance
from .crlb import SWEEP_COLUMNS, crlb_appendix, perf_loss, perf_loss_formula
from .energy import EE_COLUMNS, PowerModel, energy_efficiency
from .estimators import PeakSearchError, decompose, default_grid, find_peaks, root_music
from .quantizer import MixedAdcConfig, aqnm_observe, distortion_factor, mixed_true_observe

Experiment = Literal["fig2-perf-loss", "fig3-spectrum", "fig4-ee", "rmse-vs-crlb"]
EXPERIMENTS = ("fig2-perf-loss", "fig3-spectrum", "fig4-ee", "rmse-vs-crlb")

PAPER_TRIALS = 8000
DESK_TRIALS = 500


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: Experiment
    kappas: tuple[float, ...] = (0.25,)
    bits: tuple[float, ...] = (2,)
    gammas_db: tuple[float, ...] = (0.0,)
    M: int = 128
    N: int = 32
    thetas_deg: tuple[float, ...] = (30.0,)
    d: float = 0.5
    trials: int = DESK_TRIALS
    base_seed: int = 20240601
    quantization: Literal["aqnm", "true-quantizer"] = "aqnm"
    grid_step_deg: float = 0.05
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not (self.kappas and self.bits and self.gammas_db and self.thetas_deg):
            raise ValueError("parameter grid must be non-empty")
        if self.experiment == "fig3-spectrum" and len(self.thetas_deg) < 2:
            raise ValueError("fig3-spectrum needs at least two sources")
        if self.quantization not in ("aqnm", "true-quantizer"):
            raise ValueError(f"unknown quantization path {self.quantization!r}")


@dataclass
class TrialRecord:
    seed: int
    params: dict
    estimates_deg: tuple[float, ...] = ()
    sq_errors_deg2: tuple[float, ...] = ()
    wall_time: float = 0.0
    failed: bool = False
    error: str = ""
    peak_values: tuple[float, ...] = ()
    spectrum: np.ndarray | None = field(default=None, repr=False)

    @property
    def sq_error_deg2(self) -> float:
        return float(np.mean(self.sq_errors_deg2))


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict]
    columns: list[str]
    records: list[TrialRecord] = field(default_factory=list)
    grid_deg: np.ndarray | None = None
    mean_spectra: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.records)

    def write_csv(self, path) -> None:
        write_rows(path, self.columns, self.rows)


def write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})


def observe(geometry: ArrayGeometry, scene: SourceScene, config: MixedAdcConfig, seed: int, path: str) -> np.ndarray:
    """Draw one snapshot block and pass it through the mixed-ADC front end.

    The true quantizer is only tabulated up to 5 bits; deeper converters use
    the AQNM path on either setting.
    """
    x = synthesize_snapshots(geometry, scene, seed)
    if path == "true-quantizer" and config.b_low <= 5:
        return mixed_true_observe(x, geometry, scene, config).data
    return aqnm_observe(x, geometry, scene, config, (seed, 1)).data


def match_errors(estimates: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Signed errors after nearest-truth assignment of estimates."""
    cost = np.abs(estimates[:, None] - truth[None, :])
    r, c = linear_sum_assignment(cost)
    err = np.empty(truth.size)
    err[c] = estimates[r] - truth[c]
    return err


@lru_cache(maxsize=8)
def _grid_and_manifold(M: int, d: float, step: float):
    grid = default_grid(step)
    return grid, steering_matrix(ArrayGeometry(M, d), grid)


def _trial(job) -> TrialRecord:
    kind, params, seed, path, step = job
    t0 = time.perf_counter()
    geometry = ArrayGeometry(params["M"], params["d"])
    truth = np.array(params["thetas_deg"], dtype=float)
    scene = SourceScene(tuple(np.deg2rad(truth)), db_to_linear(params["gamma_dB"]), params["N"])
    config = MixedAdcConfig.from_kappa(params["M"], params["kappa"], params["b"])
    rec = TrialRecord(seed, params)
    try:
        y = observe(geometry, scene, config, seed, path)
        dec = decompose(sample_covariance(y), scene.num_sources)
        if kind == "fig3-spectrum":
            grid, A = _grid_and_manifold(params["M"], params["d"], step)
            v = dec.noise_basis.conj().T @ A
            spec = 1.0 / np.maximum(np.sum(v.real**2 + v.imag**2, axis=0), np.finfo(float).tiny)
            est = find_peaks(spec, grid, scene.num_sources).angles
            rec.spectrum = spec
            win = np.deg2rad(1.0)
            rec.peak_values = tuple(float(spec[np.abs(grid - t) <= win].max()) for t in scene.angles)
        else:
            est = root_music(dec, geometry, scene.num_sources).angles
        est_deg = np.rad2deg(est)
        err = match_errors(est_deg, truth)
        rec.estimates_deg = tuple(float(e) for e in est_deg)
        rec.sq_errors_deg2 = tuple(float(e) ** 2 for e in err)
    except (PeakSearchError, np.linalg.LinAlgError, ValueError) as exc:
        rec.failed = True
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t0
    return rec


def _map(jobs, workers: int):
    if workers <= 1:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _grid_points(spec: ExperimentSpec):
    thetas = [tuple(spec.thetas_deg)] if spec.experiment == "fig3-spectrum" else [(t,) for t in spec.thetas_deg]
    for g in spec.gammas_db:
        for k in spec.kappas:
            for b in spec.bits:
                for th in thetas:
                    yield dict(kappa=float(k), b=b, gamma_dB=float(g), M=spec.M, N=spec.N,
                               d=spec.d, thetas_deg=th)


def _monte_carlo(spec: ExperimentSpec):
    points = list(_grid_points(spec))
    jobs = [(spec.experiment, p, spec.base_seed ^ i, spec.quantization, spec.grid_step_deg)
            for p in points for i in range(spec.trials)]
    records = _map(jobs, spec.workers)
    groups = [records[j * spec.trials:(j + 1) * spec.trials] for j in range(len(points))]
    return points, groups, records


def _fig2(spec: ExperimentSpec) -> ExperimentResult:
    rows = []
    theta = spec.thetas_deg[0]
    geometry = ArrayGeometry(spec.M, spec.d)
    for g in spec.gammas_db:
        scene = SourceScene.single(math.radians(theta), db_to_linear(g), spec.N)
        ref = crlb_appendix(geometry, scene, MixedAdcConfig.high_resolution(spec.M)).crlb_deg2
        for b in spec.bits:
            for k in spec.kappas:
                eta = perf_loss_formula(float(k), spec.M, distortion_factor(b), scene.snr_linear)
                rows.append(dict(kappa=float(k), b=b, gamma_dB=float(g), M=spec.M, N=spec.N,
                                 theta_deg=float(theta), crlb_deg2=ref * eta, eta_pl_dB=10 * math.log10(eta)))
    return ExperimentResult(spec, rows, list(SWEEP_COLUMNS))


def _fig4(spec: ExperimentSpec) -> ExperimentResult:
    rows = []
    geometry = ArrayGeometry(spec.M, spec.d)
    scene = SourceScene.single(math.radians(spec.thetas_deg[0]), db_to_linear(spec.gammas_db[0]), spec.N)
    model = PowerModel()
    for k in spec.kappas:
        for b in spec.bits:
            rep = energy_efficiency(geometry, scene, MixedAdcConfig.from_kappa(spec.M, k, b), model)
            rows.append(dict(kappa=float(k), b=b, p_total_W=rep.p_total, crlb_deg2=rep.crlb_deg2,
                             ee_per_deg_per_W=rep.ee))
    return ExperimentResult(spec, rows, list(EE_COLUMNS))


FIG3_COLUMNS = ["kappa", "b", "gamma_dB", "M", "N", "thetas_deg", "trials", "failures",
                "success_rate_1deg", "rmse_deg", "peak_dB", "mean_spectrum_peaks_deg"]

RMSE_COLUMNS = ["kappa", "b", "gamma_dB", "M", "N", "theta_deg", "quantization", "trials", "failures",
                "rmse_deg", "bias_deg", "crlb_deg2", "rmse_over_crlb_dB", "eta_pl_dB", "ee_per_deg_per_W"]


def _fig3(spec: ExperimentSpec) -> ExperimentResult:
    points, groups, records = _monte_carlo(spec)
    grid = default_grid(spec.grid_step_deg)
    rows, spectra = [], {}
    for p, recs in zip(points, groups):
        ok = [r for r in recs if not r.failed]
        errs = np.array([r.sq_errors_deg2 for r in ok]).reshape(len(ok), -1)
        success = np.all(errs <= 1.0, axis=1).mean() if ok else 0.0
        peaks = np.array([r.peak_values for r in ok]).reshape(len(ok), -1)
        spectra[p["b"]] = mean = np.mean([r.spectrum for r in ok], axis=0) if ok else None
        try:
            mean_peaks = np.rad2deg(find_peaks(mean, grid, len(p["thetas_deg"])).angles) if ok else []
        except PeakSearchError:
            mean_peaks = []
        rows.append(dict(kappa=p["kappa"], b=p["b"], gamma_dB=p["gamma_dB"], M=p["M"], N=p["N"],
                         thetas_deg=" ".join(f"{t:g}" for t in p["thetas_deg"]), trials=len(recs),
                         failures=len(recs) - len(ok), success_rate_1deg=float(success),
                         rmse_deg=float(np.sqrt(errs.mean())) if ok else math.nan,
                         peak_dB=" ".join(f"{10 * math.log10(v):.4f}" for v in np.mean(peaks, axis=0)),
                         mean_spectrum_peaks_deg=" ".join(f"{t:.3f}" for t in mean_peaks)))
    for r in records:
        r.spectrum = None
    return ExperimentResult(spec, rows, FIG3_COLUMNS, records, np.rad2deg(grid), spectra)


def _rmse(spec: ExperimentSpec) -> ExperimentResult:
    points, groups, records = _monte_carlo(spec)
    rows = []
    for p, recs in zip(points, groups):
        ok = [r for r in recs if not r.failed]
        theta = p["thetas_deg"][0]
        geometry = ArrayGeometry(p["M"], p["d"])
        scene = SourceScene.single(math.radians(theta), db_to_linear(p["gamma_dB"]), p["N"])
        config = MixedAdcConfig.from_kappa(p["M"], p["kappa"], p["b"])
        crlb = crlb_appendix(geometry, scene, config).crlb_deg2
        mse = float(np.mean([r.sq_error_deg2 for r in ok])) if ok else math.nan
        bias = float(np.mean([r.estimates_deg[0] - theta for r in ok])) if ok else math.nan
        rows.append(dict(kappa=p["kappa"], b=p["b"], gamma_dB=p["gamma_dB"], M=p["M"], N=p["N"],
                         theta_deg=float(theta), quantization=spec.quantization, trials=len(recs),
                         failures=len(recs) - len(ok), rmse_deg=math.sqrt(mse), bias_deg=bias,
                         crlb_deg2=crlb, rmse_over_crlb_dB=10 * math.log10(mse / crlb),
                         eta_pl_dB=perf_loss(geometry, scene, config).db,
                         ee_per_deg_per_W=energy_efficiency(geometry, scene, config).ee))
    return ExperimentResult(spec, rows, RMSE_COLUMNS, records)


def run(spec: ExperimentSpec) -> ExperimentResult:
    """Execute an experiment; output depends only on ``spec``."""
    return {"fig2-perf-loss": _fig2, "fig3-spectrum": _fig3, "fig4-ee": _fig4, "rmse-vs-crlb": _rmse}[
        spec.experiment](spec)


def figure_spec(figure: str, trials: int | None = None, paper_scale: bool = False, **overrides) -> ExperimentSpec:
    """Default recipe for a figure id (``fig2``, ``fig3``, ``fig4`` or ``rmse``)."""
    trials = trials if trials is not None else (PAPER_TRIALS if paper_scale else DESK_TRIALS)
    if figure == "fig2":
        spec = ExperimentSpec("fig2-perf-loss", kappas=tuple(np.round(np.linspace(0, 1, 21), 10)),
                              bits=(1, 2, 3, 4), gammas_db=(0.0, 10.0), trials=1)
    elif figure == "fig3":
        # 32 elements as in the spectrum figure; the text's 128 is reachable via M=128
        spec = ExperimentSpec("fig3-spectrum", kappas=(0.25,), bits=(1, 2, 12), gammas_db=(10.0,),
                              M=32, N=32, thetas_deg=(-45.0, 30.0), trials=trials)
    elif figure == "fig4":
        spec = ExperimentSpec("fig4-ee", kappas=(0.125, 0.25, 0.5), bits=tuple(range(1, 13)),
                              gammas_db=(0.0,), trials=1)
    elif figure == "rmse":
        spec = ExperimentSpec("rmse-vs-crlb", kappas=(1.0, 0.25), bits=(1, 2, 3, 4), gammas_db=(0.0, 10.0),
                              M=128 if paper_scale else 32, N=32, thetas_deg=(30.0,), trials=trials)
    else:
        raise ValueError(f"unknown figure id {figure!r}; expected one of fig2, fig3, fig4, rmse")
    return replace(spec, **overrides)


PLOT_SCRIPTS = {
    "fig2": '''import csv, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("fig2_perf_loss.csv")))
for g in sorted({r["gamma_dB"] for r in rows}, key=float):
    for b in sorted({r["b"] for r in rows}, key=int):
        pts = [(float(r["kappa"]), float(r["eta_pl_dB"])) for r in rows if r["b"] == b and r["gamma_dB"] == g]
        plt.plot(*zip(*pts), marker="o", ms=3, label=f"b={b}, SNR={float(g):g} dB")
plt.axhline(1.0, color="k", lw=0.5, ls="--")
plt.xlabel("kappa = M0/M")
plt.ylabel("performance loss (dB)")
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "fig2.png", dpi=150)
''',
    "fig3": '''import csv, glob, sys
import matplotlib.pyplot as plt

for path in sorted(glob.glob("fig3_spectrum_b*.csv")):
    rows = list(csv.DictReader(open(path)))
    plt.plot([float(r["angle_deg"]) for r in rows], [float(r["S_dB"]) for r in rows],
             label=path[len("fig3_spectrum_"):-4])
plt.xlabel("angle (deg)")
plt.ylabel("MUSIC spectrum (dB)")
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "fig3.png", dpi=150)
''',
    "fig4": '''import csv, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("fig4_ee.csv")))
for k in sorted({r["kappa"] for r in rows}, key=float):
    pts = [(int(r["b"]), float(r["ee_per_deg_per_W"])) for r in rows if r["kappa"] == k]
    plt.plot(*zip(*pts), marker="o", label=f"kappa={float(k):g}")
plt.xlabel("low-resolution bits")
plt.ylabel("energy efficiency (1/deg/W)")
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "fig4.png", dpi=150)
''',
    "rmse": '''import csv, math, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("rmse_vs_crlb.csv")))
for k in sorted({r["kappa"] for r in rows}, key=float):
    for g in sorted({r["gamma_dB"] for r in rows}, key=float):
        sel = [r for r in rows if r["kappa"] == k and r["gamma_dB"] == g]
        b = [int(r["b"]) for r in sel]
        plt.semilogy(b, [float(r["rmse_deg"]) for r in sel], "o-", label=f"RMSE kappa={k} SNR={g}")
        plt.semilogy(b, [math.sqrt(float(r["crlb_deg2"])) for r in sel], "k--", lw=0.7)
plt.xlabel("low-resolution bits")
plt.ylabel("RMSE (deg)")
plt.legend(fontsize=7)
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "rmse.png", dpi=150)
''',
}

FIGURE_FILES = {"fig2": "fig2_perf_loss.csv", "fig3": "fig3_summary.csv", "fig4": "fig4_ee.csv",
                "rmse": "rmse_vs_crlb.csv"}


def reproduce_figure(figure: str, output_dir=None, trials: int | None = None, paper_scale: bool = False,
                     workers: int = 1, **overrides) -> list[Path]:
    """Write the data CSVs and a matplotlib script for one figure; returns the paths."""
    spec = figure_spec(figure, trials, paper_scale, workers=workers, **overrides)
    out = Path(output_dir if output_dir is not None else os.environ.get("MIXADC_DOA_OUTPUT_DIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    result = run(spec)
    paths = [out / FIGURE_FILES[figure]]
    result.write_csv(paths[0])
    if figure == "fig3":
        for b, spec_mean in result.mean_spectra.items():
            if spec_mean is None:
                continue
            p = out / f"fig3_spectrum_b{b}.csv"
            write_rows(p, ["angle_deg", "S_dB"],
                       [{"angle_deg": float(a), "S_dB": float(s)}
                        for a, s in zip(result.grid_deg, 10 * np.log10(spec_mean))])
            paths.append(p)
    script = out / f"plot_{figure}.py"
    script.write_text(PLOT_SCRIPTS[figure])
    paths.append(script)
    return paths
