"""Seeded data generation, noise, Monte-Carlo sweeps, and image metrics.

Every trial draws its randomness from a stream derived as
SeedSequence([master_seed, trial, ratio_index, snr_index]), so results
are independent of execution order and of the number of worker
processes, and a fixed master seed reproduces every byte of output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from time import perf_counter

import numpy as np

from . import imaging
from .algebra import Octonion, sign_unit
from .baseline import RealPrInstance, gd_solve, lanczos_init
from .imaging import SpectralImage
from .linalg import ConjRowOp, OctMatrix, OctVector
from .solver import DivergenceError, OwfConfig, distance, owf_solve, phase_align

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "CellAggregate",
    "SweepResult",
    "gen_signal",
    "gen_sensing",
    "gen_unit_octonion",
    "measure",
    "add_noise",
    "success_sweep",
    "convergence_trace",
    "psnr",
    "ambiguity_probe",
    "image_reconstruction",
    "write_trials_csv",
    "write_aggregates_csv",
]

DEFAULT_COMPONENT_STD = 1.0 / math.sqrt(8.0)


@dataclass
class ExperimentConfig:
    """Sweep layout: which cells to run and how to solve each trial.

    ``ratios`` are sampling complexities m/n; ``snr_db`` is None for a
    noiseless sweep, otherwise a list of SNR levels in dB (math.inf
    means no noise).  When ``early_stop`` is set, each trial stops once
    the distance to the planted signal reaches success_tol instead of
    burning the remaining iterations; the success verdict is unchanged.
    """

    n: int = 30
    ratios: tuple = (20,)
    trials: int = 50
    seed: int = 0
    snr_db: tuple | None = None
    solver: OwfConfig = field(default_factory=OwfConfig)
    success_tol: float = 1e-5
    early_stop: bool = True

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.ratios or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be positive")


@dataclass
class TrialRecord:
    seed: int
    n: int
    m: int
    ratio: float
    snr_db: float
    trial: int
    iterations: int
    final_distance: float
    success: bool
    wall_ms: float


@dataclass
class CellAggregate:
    ratio: float
    snr_db: float
    n: int
    m: int
    trials: int
    success_rate: float
    mean_distance: float
    median_distance: float
    mean_iterations: float


@dataclass
class SweepResult:
    records: list
    aggregates: list


def _trial_rng(master: int, trial: int, ratio_idx: int, snr_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master, trial, ratio_idx, snr_idx]))


def gen_signal(n: int, rng: np.random.Generator) -> OctVector:
    """Unit-norm signal: i.i.d. standard normal coefficients, then one
    global normalization."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = rng.standard_normal((n, 8))
    return OctVector(c / np.linalg.norm(c))


def gen_sensing(
    m: int,
    n: int,
    rng: np.random.Generator,
    component_std: float = DEFAULT_COMPONENT_STD,
) -> OctMatrix:
    """Octonion Gaussian sensing matrix.

    Each of the 8 coefficients of each entry is N(0, component_std^2);
    the default std 1/sqrt(8) gives entries unit expected squared norm.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return OctMatrix(rng.standard_normal((m, n, 8)) * component_std)


def gen_unit_octonion(rng: np.random.Generator) -> Octonion:
    return sign_unit(Octonion(rng.standard_normal(8)))


def measure(A: OctMatrix, x: OctVector) -> np.ndarray:
    """Intensities |a_l^* x|^2 (rows enter conjugated)."""
    if A.cols != len(x):
        raise ValueError(f"dimension mismatch: {A.rows}x{A.cols} with signal {len(x)}")
    return ConjRowOp(A).intensities(x.coeffs.reshape(-1))


def add_noise(y: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian noise at the requested measurement SNR.

    Per-sample variance ||y||^2 10^(-SNR/10) / m, so the realized
    10 log10(||y||^2/||w||^2) matches snr_db in expectation.  Negative
    noisy entries are clamped to zero.  snr_db = math.inf returns the
    input unchanged.
    """
    y = np.asarray(y, dtype=np.float64)
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    sigma = math.sqrt(float(y @ y) * 10.0 ** (-snr_db / 10.0) / y.size)
    return np.clip(y + rng.standard_normal(y.size) * sigma, 0.0, None)


def _run_trial(cfg: ExperimentConfig, ratio_idx: int, snr_idx: int, trial: int,
               timing: bool) -> TrialRecord:
    ratio = cfg.ratios[ratio_idx]
    snr = math.inf if cfg.snr_db is None else cfg.snr_db[snr_idx]
    n = cfg.n
    m = int(round(ratio * n))
    rng = _trial_rng(cfg.seed, trial, ratio_idx, snr_idx)
    x = gen_signal(n, rng)
    A = gen_sensing(m, n, rng)
    y = add_noise(measure(A, x), snr, rng)
    solver = cfg.solver
    if cfg.early_stop and solver.stop_tol == 0.0:
        solver = replace(solver, stop_tol=cfg.success_tol, stop_metric="distance")
    t0 = perf_counter()
    try:
        rep = owf_solve(A, y, solver, truth=x)
        d = rep.final_distance
        iters = rep.iterations
    except DivergenceError:
        d = math.inf
        iters = solver.max_iters
    wall_ms = (perf_counter() - t0) * 1e3 if timing else 0.0
    return TrialRecord(
        seed=cfg.seed, n=n, m=m, ratio=float(ratio), snr_db=float(snr), trial=trial,
        iterations=iters, final_distance=float(d), success=bool(d <= cfg.success_tol),
        wall_ms=wall_ms,
    )


def _run_trial_packed(args) -> TrialRecord:
    return _run_trial(*args)


def success_sweep(cfg: ExperimentConfig, jobs: int = 1, timing: bool = False) -> SweepResult:
    """Run every (ratio, snr, trial) cell and aggregate success rates.

    Trials are independent; with jobs > 1 they run in worker processes,
    and results are reduced in index order so the outcome is identical
    for any job count.  Solver failures (divergence) count as
    unsuccessful trials with infinite distance.
    """
    snrs = (math.inf,) if cfg.snr_db is None else tuple(cfg.snr_db)
    tasks = [
        (cfg, ri, si, t, timing)
        for ri in range(len(cfg.ratios))
        for si in range(len(snrs))
        for t in range(cfg.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial_packed, tasks, chunksize=1))
    else:
        records = [_run_trial(*t) for t in tasks]

    aggregates = []
    per_cell = cfg.trials
    pos = 0
    for ri in range(len(cfg.ratios)):
        for si in range(len(snrs)):
            cell = records[pos : pos + per_cell]
            pos += per_cell
            dists = np.array([r.final_distance for r in cell])
            aggregates.append(
                CellAggregate(
                    ratio=float(cfg.ratios[ri]),
                    snr_db=float(snrs[si]),
                    n=cfg.n,
                    m=cell[0].m,
                    trials=per_cell,
                    success_rate=float(np.mean([r.success for r in cell])),
                    mean_distance=float(dists.mean()),
                    median_distance=float(np.median(dists)),
                    mean_iterations=float(np.mean([r.iterations for r in cell])),
                )
            )
    return SweepResult(records=records, aggregates=aggregates)


def convergence_trace(
    n: int = 30,
    ratio: float = 20,
    iters: int = 2000,
    seed: int = 0,
    solver: OwfConfig | None = None,
):
    """Single seeded instance solved with per-iteration distance tracing.

    Returns (report, truth); the report's traces include the initial
    point, so they hold iters + 1 entries when no early stop fires.
    """
    m = int(round(ratio * n))
    rng = _trial_rng(seed, 0, 0, 0)
    x = gen_signal(n, rng)
    A = gen_sensing(m, n, rng)
    y = measure(A, x)
    cfg = replace(solver or OwfConfig(), max_iters=iters)
    return owf_solve(A, y, cfg, truth=x), x


def psnr(ref: SpectralImage, rec: SpectralImage, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio 10 log10(peak^2 / MSE) over all samples.

    Identical images return math.inf.
    """
    if ref.bands.shape != rec.bands.shape:
        raise ValueError(f"shape mismatch: {ref.bands.shape} vs {rec.bands.shape}")
    mse = float(np.mean((ref.bands - rec.bands) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ambiguity_probe(
    n: int = 30, ratio: float = 20, pairs: int = 20, seed: int = 0
) -> dict:
    """Measure how far right-phase scaling moves the intensities.

    For seeded (x, z) pairs reports max_l | |a_l^*(x z)|^2 - |a_l^* x|^2 |.
    The deviation is exactly zero at n = 1 and generically nonzero for
    n > 1; this is a diagnostic report, not an assertion.
    """
    m = int(round(ratio * n))
    devs = []
    for k in range(pairs):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xAB, k]))
        x = gen_signal(n, rng)
        A = gen_sensing(m, n, rng)
        z = gen_unit_octonion(rng)
        dev = float(np.abs(measure(A, x.right_scale(z)) - measure(A, x)).max())
        devs.append(dev)
    return {
        "n": n,
        "m": m,
        "pairs": pairs,
        "seed": seed,
        "deviations": devs,
        "max_deviation": max(devs),
    }


def image_reconstruction(
    img: SpectralImage,
    ratio: float = 20,
    iters: int = 2000,
    seed: int = 0,
    method: str = "owf",
    step_scale: float | None = None,
) -> tuple[SpectralImage, dict]:
    """Recover an image from fresh intensity measurements of it.

    method "owf" packs the bands into octonions and runs the octonion
    solver; "gd" concatenates the bands into one long real vector and
    runs the real baseline with Lanczos initialization.  The recovered
    image is aligned to the reference (right phase or sign) before the
    PSNR is computed, since intensities cannot see that factor.
    """
    n = img.n_pixels
    m = int(round(ratio * n))
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x147]))
    report = {
        "method": method,
        "n": n,
        "m": m,
        "ratio": float(ratio),
        "iters": iters,
        "seed": seed,
    }
    if method == "owf":
        x = imaging.pack(img)
        A = gen_sensing(m, n, rng)
        y = measure(A, x)
        cfg = OwfConfig(max_iters=iters)
        if step_scale is not None:
            cfg = replace(cfg, step_scale=step_scale)
        rep = owf_solve(A, y, cfg, truth=x)
        est = rep.estimate
        try:
            g = phase_align(x, est)
        except ValueError:
            g = Octonion.unit(0)
        aligned = est.right_scale(g.conjugate())
        rec = imaging.unpack(aligned, img.width, img.height, img.wavelengths_nm)
        report["final_distance"] = rep.final_distance
        report["final_objective"] = float(rep.objective_trace[-1])
    elif method == "gd":
        xr = img.bands.reshape(-1)
        inst = RealPrInstance.from_signal(xr, m, rng)
        v = gd_solve(inst, iters=iters, step=0.2 if step_scale is None else step_scale)
        if np.linalg.norm(-v - xr) < np.linalg.norm(v - xr):
            v = -v
        rec = SpectralImage(
            width=img.width,
            height=img.height,
            bands=v.reshape(8, img.height, img.width),
            wavelengths_nm=img.wavelengths_nm,
        )
        nrm = np.linalg.norm(xr)
        report["final_distance"] = float(np.linalg.norm(v - xr) / nrm) if nrm else math.inf
        report["final_objective"] = float(((inst.A @ v) ** 2 - inst.y) @ ((inst.A @ v) ** 2 - inst.y))
    else:
        raise ValueError(f"unknown method {method!r}")
    report["psnr_db"] = psnr(img, rec)
    return rec, report


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trials_csv(path, records) -> None:
    """One row per trial: seed,n,m,snr_db,iters,final_distance,success,wall_ms."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("seed,n,m,snr_db,iters,final_distance,success,wall_ms\n")
        for r in records:
            row = [r.seed, r.n, r.m, r.snr_db, r.iterations, r.final_distance,
                   r.success, r.wall_ms]
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_aggregates_csv(path, aggregates) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(
            "ratio,snr_db,n,m,trials,success_rate,mean_distance,"
            "median_distance,mean_iterations\n"
        )
        for a in aggregates:
            row = [a.ratio, a.snr_db, a.n, a.m, a.trials, a.success_rate,
                   a.mean_distance, a.median_distance, a.mean_iterations]
            f.write(",".join(_fmt(v) for v in row) + "\n")
