"""Dense complex linear algebra kernel.

Hermitian eigendecomposition, thin SVD, Moore-Penrose pseudoinverse and a
small general eigensolver, wrapped with the validation, ordering and phase
conventions the rest of the package relies on:

* eigenvalues are always returned in non-increasing order;
* eigenvectors are phase-fixed so that the largest-modulus entry of each
  column is real and positive (deterministic up to eigenvalue ties);
* near-Hermitian inputs are symmetrized as (A + A*)/2 before decomposition.

The heavy lifting is delegated to LAPACK via numpy.linalg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, NonFiniteError, ShapeError

#: Largest dimension accepted by :func:`small_eig`; ESPRIT only ever feeds it
#: s x s matrices with s well below this.
SMALL_EIG_MAX_DIM = 64


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used across the kernel, overridable in one place."""

    #: relative cutoff below which pinv treats singular values as zero
    pinv_rcond: float = 1e-12
    #: relative tolerance for detecting eigenvalue ties (degenerate subspaces)
    tie_rtol: float = 1e-12
    #: orthonormality tolerance for subspace-distance inputs
    orthonormal_tol: float = 1e-8


DEFAULT_TOL = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D ndarray and reject empty or non-finite input."""
    arr = np.asarray(a)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return arr


def _require_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")


def _fix_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real positive."""
    idx = np.argmax(np.abs(v), axis=0)
    lead = v[idx, np.arange(v.shape[1])]
    mod = np.abs(lead)
    # zero columns cannot occur for orthonormal output; guard anyway
    phase = np.where(mod > 0, lead / np.where(mod > 0, mod, 1.0), 1.0)
    return v * np.conj(phase)[np.newaxis, :]


@dataclass(frozen=True)
class HermitianEig:
    """Full spectrum of a Hermitian matrix, eigenvalues non-increasing.

    Column ``j`` of ``eigenvectors`` pairs with ``eigenvalues[j]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SVDResult:
    """Thin SVD ``A = U diag(s) V*`` with singular values non-increasing."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def hermitian_eig(a, tol: Tolerances = DEFAULT_TOL) -> HermitianEig:
    """Eigendecomposition of a (near-)Hermitian matrix.

    The input is symmetrized as (A + A*)/2 first, so slightly asymmetric
    estimates from floating-point accumulation are accepted.
    """
    a = as_matrix(a, "A")
    _require_square(a, "A")
    sym = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(sym)
    order = np.argsort(w)[::-1]
    return HermitianEig(eigenvalues=w[order], eigenvectors=_fix_phases(v[:, order]))


def svd(a, tol: Tolerances = DEFAULT_TOL) -> SVDResult:
    """Thin singular value decomposition."""
    a = as_matrix(a, "A")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SVDResult(U=u, singular_values=s, V=vh.conj().T)


def pinv(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``tol.pinv_rcond`` times the largest are treated
    as exact zeros.
    """
    res = svd(a, tol)
    s = res.singular_values
    cutoff = tol.pinv_rcond * (s[0] if s.size else 0.0)
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (res.V * inv[np.newaxis, :]) @ res.U.conj().T


def small_eig(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of a small general (non-Hermitian) square matrix.

    Intended for the s x s shift-invariance operator in ESPRIT; dimensions
    above ``SMALL_EIG_MAX_DIM`` are rejected. A failed QR iteration is
    surfaced as :class:`ConvergenceError` so harness code can record the
    trial as a failure.
    """
    a = as_matrix(a, "A")
    _require_square(a, "A")
    if a.shape[0] > SMALL_EIG_MAX_DIM:
        raise ShapeError(
            f"small_eig accepts dimension <= {SMALL_EIG_MAX_DIM}, got {a.shape[0]}"
        )
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # iteration cap inside LAPACK
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
