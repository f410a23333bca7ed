"""Spectral-estimation model and solver.

The model: s point sources at distinct torus locations theta in [0, 1),
observed through the p x s Vandermonde matrix of their first p Fourier
samples, Phi[j, l] = exp(-2 pi i j theta_l). Each snapshot is
y_k = Phi a_k + e_k for an amplitude vector a_k and entrywise noise e_k.

The solver is multi-snapshot ESPRIT: from an orthonormal basis U of the
estimated signal subspace, drop the last (first) row to get U0 (U1), form
the shift-invariance operator pinv(U0) @ U1, and read the angles off its
eigenvalue arguments.

Angle errors are measured with the wrap-around distance on the torus and
the matching distance (best permutation alignment of two angle sets).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import RankDeficientError, ShapeError
from .linalg import pinv, small_eig
from .quantizers import QuantizerSpec, SnapshotBatch
from .rng import RngStream, sample_complex_uniform, standard_normal
from .subspace import SubspaceEstimate, subspace_from_quantized

MAX_SOURCES_FOR_MATCHING = 9

#: below this smallest singular value of U0, ESPRIT is abandoned
ESPRIT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class AngleSet:
    """s distinct source locations on the torus, reduced to [0, 1)."""

    thetas: np.ndarray

    def __post_init__(self):
        t = np.mod(np.asarray(self.thetas, dtype=float).ravel(), 1.0)
        if t.size < 1:
            raise ValueError("angle set must be non-empty")
        if t.size > 1:
            srt = np.sort(t)
            gaps = np.diff(np.concatenate([srt, [srt[0] + 1.0]]))
            if np.min(gaps) <= 0.0:
                raise ValueError("angles must be pairwise distinct on the torus")
        object.__setattr__(self, "thetas", t)

    @property
    def s(self) -> int:
        return self.thetas.size


@dataclass(frozen=True)
class DOAResult:
    """ESPRIT output plus matching diagnostics against a known truth."""

    estimated: AngleSet
    md_to_truth: float | None = None
    per_angle_assignment: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.md_to_truth is not None and not 0.0 <= self.md_to_truth <= 0.5:
            raise ValueError(f"matching distance must lie in [0, 1/2], got {self.md_to_truth}")


def vandermonde(thetas: AngleSet | np.ndarray, p: int) -> np.ndarray:
    """The p x s matrix Phi with entries exp(-2 pi i j theta_l), j = 0..p-1."""
    t = thetas.thetas if isinstance(thetas, AngleSet) else np.asarray(thetas, dtype=float)
    if p < t.size:
        raise ShapeError(f"need at least as many sensors as sources: p={p}, s={t.size}")
    j = np.arange(p).reshape(-1, 1)
    return np.exp(-2j * np.pi * j * t.reshape(1, -1))


def gen_snapshots(
    thetas: AngleSet | np.ndarray,
    p: int,
    amplitudes: np.ndarray,
    noise_nu: float,
    noise_stream: RngStream | None = None,
    noise_kind: str = "uniform",
) -> SnapshotBatch:
    """Analog snapshots y_k = Phi a_k + e_k, columns of a p x n batch.

    Noise entries are complex with independent real/imaginary parts:
    uniform on [-nu, nu] per part (the default used by the experiment
    presets) or Gaussian with standard deviation nu per part.
    """
    amplitudes = np.atleast_2d(np.asarray(amplitudes))
    phi = vandermonde(thetas, p)
    if amplitudes.shape[0] != phi.shape[1]:
        raise ShapeError(
            f"amplitudes must be s x n with s={phi.shape[1]}, got {amplitudes.shape}"
        )
    n = amplitudes.shape[1]
    y = phi @ amplitudes.astype(np.complex128)
    if noise_nu < 0:
        raise ValueError(f"noise level must be non-negative, got {noise_nu}")
    if noise_nu > 0:
        if noise_stream is None:
            raise ValueError("a noise stream is required when noise_nu > 0")
        if noise_kind == "uniform":
            e = sample_complex_uniform(noise_stream, -noise_nu, noise_nu, p * n)
        elif noise_kind == "gaussian":
            g = standard_normal(noise_stream, 2 * p * n)
            e = noise_nu * (g[: p * n] + 1j * g[p * n :])
        else:
            raise ValueError(f"noise_kind must be 'uniform' or 'gaussian', got {noise_kind!r}")
        y = y + e.reshape(p, n)
    return SnapshotBatch(y, "complex", None)


def esprit(u_hat: SubspaceEstimate | np.ndarray) -> AngleSet:
    """Extract source angles from a signal-subspace basis.

    Eigenvalues lam of pinv(U0) @ U1 map to theta = -arg(lam) / (2 pi) with
    arg taken in [0, 2 pi), reduced to [0, 1) and returned in increasing
    order. The eigenvalues are not projected onto the unit circle; only
    their arguments matter.
    """
    u = u_hat.basis if isinstance(u_hat, SubspaceEstimate) else np.asarray(u_hat)
    p, s = u.shape
    if p < s + 1:
        raise ShapeError(f"ESPRIT needs p >= s + 1 rows, got {p} x {s}")
    u0, u1 = u[:-1, :], u[1:, :]
    smin = np.linalg.svd(u0, compute_uv=False)[-1]
    if smin <= ESPRIT_RANK_TOL:
        raise RankDeficientError(
            f"upper subspace block is rank deficient (sigma_min = {smin:.3e})"
        )
    lam = small_eig(pinv(u0) @ u1)
    arg = np.angle(lam)
    arg = np.where(arg < 0, arg + 2 * np.pi, arg)  # arg in [0, 2 pi)
    thetas = np.mod(-arg / (2 * np.pi), 1.0)
    return AngleSet(np.sort(thetas))


def wrap_dist(x) -> np.ndarray | float:
    """Torus distance |x|_T: distance to the nearest integer, in [0, 1/2]."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x - np.round(x))
    return float(d) if d.ndim == 0 else d


def matching_distance(a: AngleSet | np.ndarray, b: AngleSet | np.ndarray):
    """Best-permutation max wrap distance between two equal-size angle sets.

    Returns ``(md, perm)`` where ``perm[k]`` is the index in ``b`` assigned
    to ``a[k]``. Exhaustive search over permutations; s is capped at
    MAX_SOURCES_FOR_MATCHING.
    """
    ta = a.thetas if isinstance(a, AngleSet) else np.asarray(a, dtype=float)
    tb = b.thetas if isinstance(b, AngleSet) else np.asarray(b, dtype=float)
    if ta.size != tb.size:
        raise ShapeError(f"angle sets must have equal size, got {ta.size} and {tb.size}")
    if ta.size > MAX_SOURCES_FOR_MATCHING:
        raise ValueError(
            f"matching distance is exhaustive over permutations; s <= "
            f"{MAX_SOURCES_FOR_MATCHING} required, got {ta.size}"
        )
    dist = wrap_dist(ta.reshape(-1, 1) - tb.reshape(1, -1))
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(ta.size)):
        m = max(dist[k, perm[k]] for k in range(ta.size))
        if m < best:
            best, best_perm = m, perm
    return float(best), best_perm


def min_separation(thetas: AngleSet | np.ndarray) -> float:
    """Smallest pairwise wrap distance; 1/2 by convention for one source."""
    t = thetas.thetas if isinstance(thetas, AngleSet) else np.asarray(thetas, dtype=float)
    if t.size < 2:
        warnings.warn("minimum separation of a single source is 1/2 by convention")
        return 0.5
    srt = np.sort(np.mod(t, 1.0))
    gaps = np.diff(np.concatenate([srt, [srt[0] + 1.0]]))
    return float(np.min(np.minimum(gaps, 1.0 - gaps)))


def esprit_from_quantized(
    batch: SnapshotBatch,
    spec: QuantizerSpec | None,
    s: int,
    truth: AngleSet | np.ndarray | None = None,
) -> DOAResult:
    """Quantized covariance -> leading eigenspace -> ESPRIT, end to end.

    Rank-deficiency and eigensolver failures propagate; harness code
    catches them and records the trial as a failure.
    """
    u_hat = subspace_from_quantized(batch, spec, s)
    est = esprit(u_hat)
    if truth is None:
        return DOAResult(est)
    md, perm = matching_distance(truth, est)
    return DOAResult(est, md_to_truth=md, per_angle_assignment=perm)
