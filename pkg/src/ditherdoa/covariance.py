"""Covariance estimators from quantized and analog snapshots.

* :func:`rect_covariance` -- the two-dither one-bit estimator: the
  symmetrized cross-product (lam^2/n) sum q_k q_dot_k*, which is unbiased
  for E[y y*] when the dither range dominates the data range. It may be
  indefinite; downstream code only needs its leading eigenvectors.
* :func:`tri_covariance` -- (1/n) sum q_k q_k* from triangularly dithered
  samples; PSD by construction. In expectation it is the clean covariance
  shifted by sigma^2 I, which leaves eigenspaces untouched. With the
  per-part noise-variance convention used throughout this package
  (nu^2 = variance of each real part), the diagonal shift is
  c_F * (mu^2 + nu^2).
* :func:`sample_covariance` -- the analog baseline (1/n) Y Y*.

Accumulation is a single streaming pass over snapshot columns, so batches
may be partial-summed and merged (the harness exploits this to read off
estimates at every prefix of a sample stream).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ShapeError
from .quantizers import QuantizedPair, QuantizerSpec, SnapshotBatch


@dataclass(frozen=True)
class CovarianceEstimate:
    """A p x p Hermitian covariance estimate plus its provenance.

    The matrix is symmetrized exactly on construction. Triangular and
    analog estimates are PSD up to roundoff; rectangular estimates may be
    indefinite.
    """

    matrix: np.ndarray
    scheme: QuantizerSpec | None
    n_samples: int

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


class OuterProductAccumulator:
    """Running sum of outer products q_k q_dot_k* over snapshot columns.

    Associative: partial accumulators over disjoint column ranges merge to
    the same result as one pass (up to float reassociation).
    """

    def __init__(self, p: int, complex_field: bool = True):
        dtype = np.complex128 if complex_field else np.float64
        self.sum = np.zeros((p, p), dtype=dtype)
        self.count = 0

    def update(self, x: np.ndarray, x_dot: np.ndarray | None = None) -> None:
        """Add the outer products of the columns of x (against x_dot if given)."""
        if x.ndim != 2 or x.shape[0] != self.sum.shape[0]:
            raise ShapeError(f"expected {self.sum.shape[0]} x n chunk, got {x.shape}")
        other = x if x_dot is None else x_dot
        if other.shape != x.shape:
            raise ShapeError(f"chunk shapes differ: {x.shape} vs {other.shape}")
        self.sum += x @ other.conj().T
        self.count += x.shape[1]

    def merge(self, other: "OuterProductAccumulator") -> None:
        if other.sum.shape != self.sum.shape:
            raise ShapeError("cannot merge accumulators of different dimension")
        self.sum += other.sum
        self.count += other.count


def _columns(x: np.ndarray) -> np.ndarray:
    """View a single snapshot vector as one column; leave p x n batches alone."""
    x = np.asarray(x)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def _as_pair_batch(pairs) -> QuantizedPair:
    if isinstance(pairs, QuantizedPair):
        return QuantizedPair(_columns(pairs.q), _columns(pairs.q_dot))
    if isinstance(pairs, SnapshotBatch):
        if pairs.data_dot is None:
            raise ShapeError("batch has no second sign pattern; not a rectangular batch")
        return QuantizedPair(pairs.data, pairs.data_dot)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty batch: need at least one quantized pair")
    q = np.concatenate([_columns(p.q) for p in pairs], axis=1)
    q_dot = np.concatenate([_columns(p.q_dot) for p in pairs], axis=1)
    return QuantizedPair(q, q_dot)


def rect_covariance(pairs, lam: float, spec: QuantizerSpec | None = None) -> CovarianceEstimate:
    """Symmetrized two-dither estimator (lam^2 / n) sum q_k q_dot_k*.

    ``pairs`` is a :class:`QuantizedPair` holding p x n sign patterns (or a
    rectangular :class:`SnapshotBatch`). No eigenvalue clipping is applied;
    the result may be indefinite.
    """
    if lam <= 0:
        raise ValueError(f"dither range must be positive, got {lam}")
    batch = _as_pair_batch(pairs)
    q, q_dot = batch.q, batch.q_dot
    n = q.shape[1]
    if n < 1:
        raise ValueError("empty batch: need at least one quantized pair")
    raw = (lam**2 / n) * (q @ q_dot.conj().T)
    if spec is None:
        field = "complex" if np.iscomplexobj(q) else "real"
        spec = QuantizerSpec("rect", lam, field)
    return CovarianceEstimate(_hermitize(raw), spec, n)


def tri_covariance(q_batch, spec: QuantizerSpec | None = None) -> CovarianceEstimate:
    """PSD estimator (1/n) sum q_k q_k* from triangularly dithered snapshots."""
    if isinstance(q_batch, SnapshotBatch):
        if spec is None:
            spec = q_batch.scheme
        q_batch = q_batch.data
    q = _columns(q_batch)
    n = q.shape[1]
    if n < 1:
        raise ValueError("empty batch: need at least one snapshot")
    raw = (q @ q.conj().T) / n
    return CovarianceEstimate(_hermitize(raw), spec, n)


def sample_covariance(y) -> CovarianceEstimate:
    """Analog sample covariance (1/n) Y Y*."""
    if isinstance(y, SnapshotBatch):
        y = y.data
    y = _columns(y)
    n = y.shape[1]
    if n < 1:
        raise ValueError("empty batch: need at least one snapshot")
    raw = (y @ y.conj().T) / n
    return CovarianceEstimate(_hermitize(raw), None, n)


def prefix_covariances(
    columns: np.ndarray,
    ns: Sequence[int],
    lam: float | None = None,
    columns_dot: np.ndarray | None = None,
    spec: QuantizerSpec | None = None,
) -> Iterable[CovarianceEstimate]:
    """Estimates over the first n columns for every n in the sorted grid ``ns``.

    One streaming pass: each estimate reuses the accumulated outer-product
    sum of the previous prefix. With ``lam`` set the rectangular scaling
    lam^2/n is used (``columns_dot`` required); otherwise the 1/n scaling.
    """
    acc = OuterProductAccumulator(columns.shape[0], np.iscomplexobj(columns))
    prev = 0
    for n in ns:
        if not prev < n <= columns.shape[1]:
            raise ValueError(f"prefix grid must be increasing and within n={columns.shape[1]}")
        chunk_dot = None if columns_dot is None else columns_dot[:, prev:n]
        acc.update(columns[:, prev:n], chunk_dot)
        prev = n
        scale = (lam**2 if lam is not None else 1.0) / n
        yield CovarianceEstimate(_hermitize(scale * acc.sum), spec, n)
