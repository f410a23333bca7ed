"""Leading-eigenspace extraction and the sin-theta subspace distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceEstimate, rect_covariance, sample_covariance, tri_covariance
from .exceptions import NotOrthonormalError, ShapeError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix, hermitian_eig
from .quantizers import QuantizerSpec, SnapshotBatch


@dataclass(frozen=True)
class SubspaceEstimate:
    """Orthonormal basis of an estimated s-dimensional leading eigenspace.

    ``degenerate`` flags a (near-)tie between the s-th and (s+1)-th
    eigenvalue, in which case the span is not uniquely defined and callers
    should not compare specific bases.
    """

    basis: np.ndarray
    selecting_eigenvalues: np.ndarray
    degenerate: bool = False

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @property
    def s(self) -> int:
        return self.basis.shape[1]


def leading_eigenspace(
    est: CovarianceEstimate | np.ndarray, s: int, tol: Tolerances = DEFAULT_TOL
) -> SubspaceEstimate:
    """Eigenvectors of the s largest eigenvalues of a covariance estimate."""
    matrix = est.matrix if isinstance(est, CovarianceEstimate) else np.asarray(est)
    p = matrix.shape[0]
    if not 1 <= s <= p:
        raise ShapeError(f"need 1 <= s <= p={p}, got s={s}")
    eig = hermitian_eig(matrix, tol)
    scale = max(abs(eig.eigenvalues[0]), abs(eig.eigenvalues[-1]), 1e-300)
    degenerate = s < p and (eig.eigenvalues[s - 1] - eig.eigenvalues[s]) <= tol.tie_rtol * scale
    return SubspaceEstimate(
        basis=eig.eigenvectors[:, :s],
        selecting_eigenvalues=eig.eigenvalues[:s],
        degenerate=degenerate,
    )


def _check_basis(u: np.ndarray, name: str, tol: Tolerances) -> np.ndarray:
    u = as_matrix(u, name)
    gram = u.conj().T @ u
    if np.max(np.abs(gram - np.eye(u.shape[1]))) > tol.orthonormal_tol:
        raise NotOrthonormalError(f"{name} does not have orthonormal columns")
    return u


def sin_theta_dist(u, v, tol: Tolerances = DEFAULT_TOL) -> float:
    """Sine of the largest principal angle between two subspaces.

    Computed as the largest singular value of (I - U U*) V = V - U (U* V),
    which equals sqrt(1 - sigma_min^2(U* V)) and the operator norm of
    U U* - V V* for orthonormal U, V of equal shape. The complement form
    keeps the O(p s^2) cost of the small-product formula but stays
    accurate near zero distance, where the cosine form loses half the
    floating-point digits.
    """
    if isinstance(u, SubspaceEstimate):
        u = u.basis
    if isinstance(v, SubspaceEstimate):
        v = v.basis
    u = _check_basis(u, "U", tol)
    v = _check_basis(v, "V", tol)
    if u.shape != v.shape:
        raise ShapeError(f"subspace bases must share a shape, got {u.shape} vs {v.shape}")
    # evaluate both orientations: equal in exact arithmetic, and the max
    # makes the symmetry dist(U, V) == dist(V, U) hold exactly in floats
    s_uv = np.linalg.svd(v - u @ (u.conj().T @ v), compute_uv=False)[0]
    s_vu = np.linalg.svd(u - v @ (v.conj().T @ u), compute_uv=False)[0]
    return float(min(1.0, max(0.0, s_uv, s_vu)))


def subspace_from_quantized(batch: SnapshotBatch, spec: QuantizerSpec | None, s: int) -> SubspaceEstimate:
    """Covariance estimation followed by leading-eigenspace extraction.

    ``batch`` must already be quantized under ``spec`` (or analog when
    ``spec`` is None). Direct-rounded batches use the plain sample
    covariance of the rounded data, i.e. its leading left singular space.
    """
    if (batch.scheme is None) != (spec is None) or (
        spec is not None and batch.scheme is not None and batch.scheme != spec
    ):
        raise ValueError("batch scheme does not match the requested quantizer spec")
    if spec is None:
        est = sample_covariance(batch)
    elif spec.scheme == "rect":
        est = rect_covariance(batch, spec.lam, spec)
    elif spec.scheme == "tri":
        est = tri_covariance(batch, spec)
    else:
        est = sample_covariance(batch)
    return leading_eigenspace(est, s)
