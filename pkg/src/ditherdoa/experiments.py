"""Monte-Carlo experiment runner.

Five named studies compare the quantization schemes on subspace and DOA
estimation tasks at desk scale (minutes, not hours):

* ``adversarial``      -- periodic deterministic signals; direct rounding
  saturates while the dithered schemes keep improving with the bit budget.
* ``eigendep_rect``    -- rectangular dithering under the shrinking-eigenvalue
  scaling zeta = n^(-beta); the error curves flip direction at beta = 1/2.
* ``eigendep_tri``     -- triangular dithering on planar circle data; the
  error tracks 1/sigma_r of the signal matrix for every bit depth.
* ``wellsep_doa``      -- ESPRIT with well-separated sources; matching
  distance decays like 1/sqrt(bits) for dithered schemes only.
* ``phase_transition`` -- super-resolution success/failure sweep over
  (separation, bit budget) with fitted phase-boundary slopes.

Comparisons across quantizers are aligned by total stored bits, never by the
raw sample count: a 2-bit scheme gets twice the measurements of a 4-bit
scheme at the same budget. Every random draw derives from (seed, substream),
so results are reproducible and trial loops can be split across workers
without changing any number.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from ._version import __version__
from .covariance import prefix_covariances, rect_covariance, tri_covariance
from .doa import AngleSet, esprit, matching_distance, vandermonde
from .exceptions import ConfigError, ConvergenceError, RankDeficientError
from .quantizers import QuantizerSpec, bits_used, direct_round, rect_quantize_pair, tri_quantize
from .rng import (
    ROLE_DATA,
    ROLE_DITHER_A,
    ROLE_DITHER_B,
    ROLE_NOISE,
    haar_orthonormal,
    sample_complex_uniform,
    sample_uniform,
    setup_stream,
    standard_normal,
    trial_stream,
)
from .subspace import leading_eigenspace, sin_theta_dist

EXPERIMENTS = ("adversarial", "eigendep_rect", "eigendep_tri", "wellsep_doa", "phase_transition")

#: scores assigned to failed trials, matching the trivial ceilings of the
#: error metrics (sin-theta distance <= 1, matching distance <= 1/2)
FAILED_DIST = 1.0
FAILED_MD = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment run.

    ``sample_grid`` holds the snapshot counts for the finest scheme in
    ``quantizers`` (the one storing the most bits per scalar); coarser
    schemes get proportionally more snapshots at the same bit budget.
    """

    experiment: str
    p: int
    s: int
    noise_nu: float
    lam: float
    field: str
    quantizers: tuple[str, ...]
    sample_grid: tuple[int, ...]
    trials: int = 100
    seed: int = 1
    betas: tuple[float, ...] = ()
    epsilons: tuple[float, ...] = ()
    bit_grid: tuple[int, ...] = ()
    success_threshold: float = 0.95
    success_factor: float = 0.25
    #: constant in the shrinking-eigenvalue scaling zeta = zeta_scale * n^(-beta)
    zeta_scale: float = 3.0
    workers: int = 1
    noise_kind: str = "uniform"

    def specs(self) -> list[QuantizerSpec]:
        return [QuantizerSpec.from_token(t, self.lam, self.field) for t in self.quantizers]

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS and self.experiment != "custom":
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trial count must be >= 1")
        if self.p < 2 or not 1 <= self.s < self.p:
            raise ConfigError(f"need p >= 2 and 1 <= s < p, got p={self.p}, s={self.s}")
        if self.noise_nu < 0:
            raise ConfigError("noise level must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        specs = self.specs()
        if not specs:
            raise ConfigError("at least one quantizer is required")
        if self.experiment == "eigendep_rect":
            if not self.betas:
                raise ConfigError("eigendep_rect needs a non-empty beta grid")
        if self.experiment == "phase_transition":
            if not self.epsilons or not self.bit_grid:
                raise ConfigError("phase_transition needs epsilon and bit grids")
            if not 0 < self.success_threshold <= 1:
                raise ConfigError("success threshold must lie in (0, 1]")
            for b in self.bit_grid:
                for spec in specs:
                    if b % (spec.bits_per_scalar * self.p):
                        raise ConfigError(
                            f"bit budget {b} is not a whole number of snapshots "
                            f"for {spec.label()}"
                        )
        elif not self.sample_grid or list(self.sample_grid) != sorted(set(self.sample_grid)):
            raise ConfigError("sample grid must be non-empty, increasing and duplicate-free")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    quantizer: str
    n: int
    bits: int
    median: float
    quantile25: float
    quantile75: float
    success_frac: float | None
    failures: int
    seed: int


@dataclass
class ResultTable:
    """Aggregated medians/quartiles per (series, grid point) plus metadata."""

    rows: list[ResultRow]
    metadata: dict = field(default_factory=dict)


def _logspaced_ints(lo: int, hi: int, count: int) -> tuple[int, ...]:
    vals = np.unique(np.round(np.geomspace(lo, hi, count)).astype(int))
    return tuple(int(v) for v in vals)


def preset(name: str) -> ExperimentConfig:
    """Desk-scale defaults for the five named experiments.

    Deviations from the full-scale studies (trial counts, largest sample
    sizes) are stamped into the result metadata by :func:`run_experiment`.
    """
    if name == "adversarial":
        return ExperimentConfig(
            experiment="adversarial", p=32, s=8, noise_nu=0.01, lam=2.0, field="real",
            quantizers=("rect", "tri:2", "tri:4", "round:2", "round:4"),
            sample_grid=tuple(64 * 2**k for k in range(11)),  # n for the 4-bit schemes
        )
    if name == "eigendep_rect":
        # data spreads over p coordinates (entry std well below 1), so the
        # dither range sits near 1; the zeta_scale constant realizes the
        # "zeta of order n^(-beta)" scaling at desk-scale sample counts
        return ExperimentConfig(
            experiment="eigendep_rect", p=20, s=15, noise_nu=0.0, lam=1.0, field="real",
            quantizers=("rect",),
            sample_grid=_logspaced_ints(100, 50_000, 10),
            betas=(3 / 8, 7 / 16, 1 / 2, 9 / 16, 5 / 8),
        )
    if name == "eigendep_tri":
        return ExperimentConfig(
            experiment="eigendep_tri", p=8, s=2, noise_nu=0.01, lam=2.0, field="real",
            quantizers=("tri:2", "tri:4", "tri:6", "tri:8"),
            sample_grid=_logspaced_ints(1_000, 100_000, 12),
        )
    if name == "wellsep_doa":
        # the snapshots satisfy ||y||_inf <= 1 + nu per part, so lam = 2
        # already dominates the data range; at desk-scale bit budgets it
        # keeps the one-bit estimator inside its 1/sqrt(B) regime
        return ExperimentConfig(
            experiment="wellsep_doa", p=32, s=4, noise_nu=0.01, lam=2.0, field="complex",
            quantizers=("rect", "tri:2", "tri:4", "round:2", "round:4"),
            sample_grid=tuple(512 * 2**k for k in range(6)),  # n for the 8-bit schemes
        )
    if name == "phase_transition":
        p = 32
        return ExperimentConfig(
            experiment="phase_transition", p=p, s=3, noise_nu=0.01, lam=5.0, field="complex",
            quantizers=("rect", "tri:2"),
            sample_grid=(),
            epsilons=tuple(float(e) for e in np.geomspace(1 / (32 * p), 1 / p, 8)),
            bit_grid=tuple(int(4 * p * n) for n in _logspaced_ints(128, 32768, 10)),
        )
    raise ConfigError(f"unknown preset {name!r}; expected one of {EXPERIMENTS}")


# ---------------------------------------------------------------------------
# bit-budget alignment


def _bit_budgets(cfg: ExperimentConfig) -> list[int]:
    """Common bit budgets: the sample grid interpreted through the finest scheme."""
    specs = cfg.specs()
    finest = max(s.bits_per_scalar for s in specs)
    budgets = [finest * cfg.p * n for n in cfg.sample_grid]
    for b in budgets:
        for s in specs:
            if b % (s.bits_per_scalar * cfg.p):
                raise ConfigError(
                    f"bit budget {b} does not divide into snapshots for {s.label()}"
                )
    return budgets


def _snapshots_for(spec: QuantizerSpec, budgets: list[int], p: int) -> list[int]:
    return [b // (spec.bits_per_scalar * p) for b in budgets]


# ---------------------------------------------------------------------------
# per-trial work, one function per experiment
#
# Each returns {(series, n, bits): (value, failed, success_or_None)}.
# Streams derive from (seed, trial) only, so any partition of the trial loop
# over workers reproduces identical numbers.


def _quantize_columns(y, spec, stream_a, stream_b):
    """Quantize an analog column batch under one scheme, returning (q, q_dot)."""
    if spec.scheme == "rect":
        pair = rect_quantize_pair(y, spec.lam, stream_a, stream_b)
        return pair.q, pair.q_dot
    if spec.scheme == "tri":
        q = tri_quantize(y, spec.mu, stream_a, stream_b, bits=spec.bits)
        return q, None
    return direct_round(y, spec.lam, spec.bits), None


def _prefix_subspace_errors(y, spec, ns, budgets, s, truth_basis, stream_a, stream_b):
    """Sin-theta errors of the quantized subspace estimate at every prefix."""
    q, q_dot = _quantize_columns(y[:, : ns[-1]], spec, stream_a, stream_b)
    lam = spec.lam if spec.scheme == "rect" else None
    out = {}
    for (n, bits), est in zip(
        zip(ns, budgets), prefix_covariances(q, ns, lam=lam, columns_dot=q_dot, spec=spec)
    ):
        try:
            u_hat = leading_eigenspace(est, s)
            val, failed = sin_theta_dist(u_hat.basis, truth_basis), False
        except ConvergenceError:
            val, failed = FAILED_DIST, True
        out[(spec.label(), n, bits)] = (val, failed, None)
    return out


def _adversarial_trial(cfg: ExperimentConfig, trial: int) -> dict:
    budgets = _bit_budgets(cfg)
    u = haar_orthonormal(setup_stream(cfg.seed), cfg.p, cfg.s, "real")
    specs = cfg.specs()
    n_max = max(_snapshots_for(s, budgets, cfg.p)[-1] for s in specs)
    idx = np.arange(n_max) % cfg.s
    x = u[:, idx]
    noise = trial_stream(cfg.seed, trial, ROLE_NOISE)
    e = sample_uniform(noise, -cfg.noise_nu, cfg.noise_nu, cfg.p * n_max).reshape(cfg.p, n_max)
    y = x + e
    stream_a = trial_stream(cfg.seed, trial, ROLE_DITHER_A)
    stream_b = trial_stream(cfg.seed, trial, ROLE_DITHER_B)
    out = {}
    for spec in specs:
        ns = _snapshots_for(spec, budgets, cfg.p)
        out.update(_prefix_subspace_errors(y, spec, ns, budgets, cfg.s, u, stream_a, stream_b))
    return out


def _eigendep_rect_trial(cfg: ExperimentConfig, trial: int) -> dict:
    r = cfg.s
    rot = haar_orthonormal(setup_stream(cfg.seed), cfg.p, cfg.p, "real")
    u_true = rot[:, :r]
    data = trial_stream(cfg.seed, trial, ROLE_DATA)
    stream_a = trial_stream(cfg.seed, trial, ROLE_DITHER_A)
    stream_b = trial_stream(cfg.seed, trial, ROLE_DITHER_B)
    spec = cfg.specs()[0]
    out = {}
    for beta in cfg.betas:
        series = f"rect-beta{beta:g}"
        for n in cfg.sample_grid:
            zeta = min(0.999, cfg.zeta_scale * float(n) ** (-beta))
            g = standard_normal(data, r * n).reshape(r, n)
            g[1:, :] *= math.sqrt(zeta)
            y = u_true @ g
            pair = rect_quantize_pair(y, cfg.lam, stream_a, stream_b)
            est = rect_covariance(pair, cfg.lam, spec)
            try:
                u_hat = leading_eigenspace(est, r)
                val, failed = sin_theta_dist(u_hat.basis, u_true), False
            except ConvergenceError:
                val, failed = FAILED_DIST, True
            out[(series, n, bits_used(spec, n, cfg.p))] = (val, failed, None)
    return out


def _circle_signals(p: int, n: int) -> np.ndarray:
    """n equally spaced samples of eight rotations of the planar unit circle."""
    phase = 16.0 * np.pi * np.arange(n) / n
    x = np.zeros((p, n))
    x[0, :] = np.cos(phase)
    x[1, :] = np.sin(phase)
    return x


def _eigendep_tri_trial(cfg: ExperimentConfig, trial: int) -> dict:
    r = cfg.s
    u_true = np.eye(cfg.p)[:, :r]
    noise = trial_stream(cfg.seed, trial, ROLE_NOISE)
    stream_a = trial_stream(cfg.seed, trial, ROLE_DITHER_A)
    stream_b = trial_stream(cfg.seed, trial, ROLE_DITHER_B)
    out = {}
    for n in cfg.sample_grid:
        x = _circle_signals(cfg.p, n)
        e = sample_uniform(noise, -cfg.noise_nu, cfg.noise_nu, cfg.p * n).reshape(cfg.p, n)
        y = x + e
        for spec in cfg.specs():
            q = tri_quantize(y, spec.mu, stream_a, stream_b, bits=spec.bits)
            est = tri_covariance(q, spec)
            try:
                u_hat = leading_eigenspace(est, r)
                val, failed = sin_theta_dist(u_hat.basis, u_true), False
            except ConvergenceError:
                val, failed = FAILED_DIST, True
            out[(spec.label(), n, bits_used(spec, n, cfg.p))] = (val, failed, None)
    return out


def _wellsep_thetas(cfg: ExperimentConfig) -> AngleSet:
    """theta_k = 4k/p + tau_k with a fixed uniform perturbation, Delta >= 2/p."""
    tau = sample_uniform(setup_stream(cfg.seed), -1 / cfg.p, 1 / cfg.p, cfg.s)
    return AngleSet(4.0 * np.arange(1, cfg.s + 1) / cfg.p + tau)


def _prefix_md_errors(y, spec, ns, budgets, s, truth, stream_a, stream_b):
    """Matching-distance errors of quantized ESPRIT at every prefix."""
    q, q_dot = _quantize_columns(y[:, : ns[-1]], spec, stream_a, stream_b)
    lam = spec.lam if spec.scheme == "rect" else None
    out = {}
    for (n, bits), est in zip(
        zip(ns, budgets), prefix_covariances(q, ns, lam=lam, columns_dot=q_dot, spec=spec)
    ):
        try:
            u_hat = leading_eigenspace(est, s)
            md, _ = matching_distance(truth, esprit(u_hat))
            val, failed = md, False
        except (ConvergenceError, RankDeficientError, ValueError):
            val, failed = FAILED_MD, True
        out[(spec.label(), n, bits)] = (val, failed, None)
    return out


def _wellsep_doa_trial(cfg: ExperimentConfig, trial: int) -> dict:
    budgets = _bit_budgets(cfg)
    thetas = _wellsep_thetas(cfg)
    phi = vandermonde(thetas, cfg.p)
    specs = cfg.specs()
    n_max = max(_snapshots_for(s, budgets, cfg.p)[-1] for s in specs)
    amps = np.eye(cfg.s)[:, np.arange(n_max) % cfg.s]
    noise = trial_stream(cfg.seed, trial, ROLE_NOISE)
    e = sample_complex_uniform(noise, -cfg.noise_nu, cfg.noise_nu, cfg.p * n_max)
    y = phi @ amps + e.reshape(cfg.p, n_max)
    stream_a = trial_stream(cfg.seed, trial, ROLE_DITHER_A)
    stream_b = trial_stream(cfg.seed, trial, ROLE_DITHER_B)
    out = {}
    for spec in specs:
        ns = _snapshots_for(spec, budgets, cfg.p)
        out.update(_prefix_md_errors(y, spec, ns, budgets, cfg.s, thetas, stream_a, stream_b))
    return out


def _phase_transition_trial(cfg: ExperimentConfig, trial: int) -> dict:
    specs = cfg.specs()
    ns = {s.label(): [b // (s.bits_per_scalar * cfg.p) for b in cfg.bit_grid] for s in specs}
    n_max = max(max(v) for v in ns.values())
    amps = sample_complex_uniform(setup_stream(cfg.seed), -1, 1, cfg.s * n_max).reshape(
        cfg.s, n_max
    )
    noise = trial_stream(cfg.seed, trial, ROLE_NOISE)
    stream_a = trial_stream(cfg.seed, trial, ROLE_DITHER_A)
    stream_b = trial_stream(cfg.seed, trial, ROLE_DITHER_B)
    out = {}
    for eps in cfg.epsilons:
        thetas = AngleSet(np.array([0.0, eps, 0.5]))
        phi = vandermonde(thetas, cfg.p)
        e = sample_complex_uniform(noise, -cfg.noise_nu, cfg.noise_nu, cfg.p * n_max)
        y = phi @ amps + e.reshape(cfg.p, n_max)
        for spec in specs:
            grid = ns[spec.label()]
            q, q_dot = _quantize_columns(y[:, : grid[-1]], spec, stream_a, stream_b)
            lam = spec.lam if spec.scheme == "rect" else None
            series = f"{spec.label()}|eps={eps:.10g}"
            for (n, bits), est in zip(
                zip(grid, cfg.bit_grid),
                prefix_covariances(q, grid, lam=lam, columns_dot=q_dot, spec=spec),
            ):
                try:
                    u_hat = leading_eigenspace(est, cfg.s)
                    md, _ = matching_distance(thetas, esprit(u_hat))
                    failed = False
                except (ConvergenceError, RankDeficientError, ValueError):
                    md, failed = FAILED_MD, True
                success = md <= cfg.success_factor * eps
                out[(series, n, bits)] = (md, failed, success)
    return out


_TRIAL_FNS: dict[str, Callable] = {
    "adversarial": _adversarial_trial,
    "eigendep_rect": _eigendep_rect_trial,
    "eigendep_tri": _eigendep_tri_trial,
    "wellsep_doa": _wellsep_doa_trial,
    "phase_transition": _phase_transition_trial,
}


def _trial_worker(args):
    name, cfg, trial = args
    return trial, _TRIAL_FNS[name](cfg, trial)


# ---------------------------------------------------------------------------
# aggregation


def _collect(cfg: ExperimentConfig) -> dict:
    """Run all trials (optionally on worker processes) and group by row key."""
    name = cfg.experiment
    jobs = [(name, cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = dict(pool.map(_trial_worker, jobs, chunksize=1))
    else:
        results = dict(map(_trial_worker, jobs))
    cells: dict = {}
    for t in range(cfg.trials):  # fixed trial order => deterministic reduction
        for key, cell in results[t].items():
            cells.setdefault(key, []).append(cell)
    return cells


def _aggregate(cfg: ExperimentConfig, cells: dict) -> list[ResultRow]:
    rows = []
    for (series, n, bits) in sorted(cells, key=lambda k: (k[0], k[2], k[1])):
        vals = np.array([c[0] for c in cells[(series, n, bits)]])
        failures = sum(1 for c in cells[(series, n, bits)] if c[1])
        succ = [c[2] for c in cells[(series, n, bits)]]
        frac = None if succ[0] is None else float(np.mean([bool(x) for x in succ]))
        rows.append(
            ResultRow(
                experiment=cfg.experiment,
                quantizer=series,
                n=n,
                bits=bits,
                median=float(np.median(vals)),
                quantile25=float(np.quantile(vals, 0.25)),
                quantile75=float(np.quantile(vals, 0.75)),
                success_frac=frac,
                failures=failures,
                seed=cfg.seed,
            )
        )
    return rows


def fit_loglog_slope(xs, ys) -> tuple[float, float]:
    """Ordinary least squares of log(y) on log(x); returns (slope, intercept)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ValueError(f"need at least two matched points, got {xs.size} and {ys.size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def _phase_metadata(cfg: ExperimentConfig, rows: list[ResultRow]) -> dict:
    """Per-quantizer phase boundary: minimal usually-successful budget per eps."""
    info: dict = {}
    for spec in cfg.specs():
        label = spec.label()
        eps_ok, boundary = [], []
        for eps in cfg.epsilons:
            series = f"{label}|eps={eps:.10g}"
            by_bits = sorted(
                (r.bits, r.success_frac) for r in rows if r.quantizer == series
            )
            minimal = next(
                (b for b, frac in by_bits if frac is not None and frac >= cfg.success_threshold),
                None,
            )
            if minimal is not None:
                eps_ok.append(eps)
                boundary.append(minimal)
        entry = {"eps": eps_ok, "min_usually_successful_bits": boundary}
        if len(boundary) >= 2:
            slope, intercept = fit_loglog_slope([1.0 / e for e in eps_ok], boundary)
            entry["slope"] = slope
            entry["intercept"] = intercept
        info[label] = entry
    return info


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Validate, run, and aggregate one experiment into a result table."""
    cfg.validate()
    if cfg.experiment not in _TRIAL_FNS:
        raise ConfigError(f"experiment {cfg.experiment!r} has no registered runner")
    cells = _collect(cfg)
    rows = _aggregate(cfg, cells)
    meta = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "version": __version__,
        "config": asdict(cfg),
        "deviations": "desk-scale presets: reduced trial counts and sample grids",
    }
    if cfg.experiment == "eigendep_tri":
        meta["sigma_r"] = {str(n): math.sqrt(n / 2.0) for n in cfg.sample_grid}
    if cfg.experiment == "phase_transition":
        meta["phase"] = _phase_metadata(cfg, rows)
    return ResultTable(rows=rows, metadata=meta)


def run_adversarial(cfg: ExperimentConfig | None = None, **overrides) -> ResultTable:
    return run_experiment(replace(cfg or preset("adversarial"), **overrides))


def run_eigendep_rect(cfg: ExperimentConfig | None = None, **overrides) -> ResultTable:
    return run_experiment(replace(cfg or preset("eigendep_rect"), **overrides))


def run_eigendep_tri(cfg: ExperimentConfig | None = None, **overrides) -> ResultTable:
    return run_experiment(replace(cfg or preset("eigendep_tri"), **overrides))


def run_wellsep_doa(cfg: ExperimentConfig | None = None, **overrides) -> ResultTable:
    return run_experiment(replace(cfg or preset("wellsep_doa"), **overrides))


def run_phase_transition(cfg: ExperimentConfig | None = None, **overrides) -> ResultTable:
    return run_experiment(replace(cfg or preset("phase_transition"), **overrides))
