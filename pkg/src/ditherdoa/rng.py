"""Seeded, reproducible random sources.

Every stochastic ingredient (data, noise, dithers, Haar bases) draws from an
:class:`RngStream`, a counter-based Philox generator keyed by
``(seed, substream_id)``. Identical keys reproduce identical sequences on any
platform and thread schedule; distinct substreams are statistically
independent, so per-trial streams are O(1) to derive and trial loops can be
partitioned across workers freely.

Substream policy
----------------
``substream_id = trial_index * 4 + role`` with roles

* ``ROLE_DATA = 0``   -- signal/amplitude draws
* ``ROLE_NOISE = 1``  -- measurement noise
* ``ROLE_DITHER_A = 2`` -- first dither (or the real-part dither)
* ``ROLE_DITHER_B = 3`` -- second dither (or the imaginary-part dither)

Experiment-level one-time draws (a fixed Haar basis, a fixed angle set) use
substreams at ``SETUP_SUBSTREAM_BASE + k``, far above any trial index.

Gaussian variates are produced by Box-Muller on the stream's own uniform
output. Complex standard Gaussians use the circular convention
``E[z z*] = I`` (real and imaginary parts each have variance 1/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ShapeError
from .linalg import hermitian_eig

ROLE_DATA = 0
ROLE_NOISE = 1
ROLE_DITHER_A = 2
ROLE_DITHER_B = 3

SETUP_SUBSTREAM_BASE = 1 << 62


@dataclass
class RngStream:
    """A single reproducible random stream, owned by one trial/role."""

    seed: int
    substream_id: int
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        key = np.array([self.seed, self.substream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform01(self, count: int) -> np.ndarray:
        """Raw uniforms on [0, 1); the primitive everything else builds on."""
        return self._gen.random(int(count))


def trial_stream(seed: int, trial_index: int, role: int) -> RngStream:
    """Stream for one (trial, role) pair under the documented policy."""
    return RngStream(seed, trial_index * 4 + role)


def setup_stream(seed: int, k: int = 0) -> RngStream:
    """Stream for experiment-level draws made once, outside the trial loop."""
    return RngStream(seed, SETUP_SUBSTREAM_BASE + k)


def sample_uniform(stream: RngStream, a: float, b: float, count: int) -> np.ndarray:
    """i.i.d. uniforms on [a, b]."""
    if not a < b:
        raise ValueError(f"empty range: need a < b, got [{a}, {b}]")
    u = stream.uniform01(count)
    u *= b - a
    u += a
    return u


def sample_triangular(stream: RngStream, mu: float, count: int) -> np.ndarray:
    """Triangular dither draws: the sum of two independent U(-mu, mu).

    Computed as 2 mu (u1 + u2 - 1), the same sum with fewer passes.
    """
    if mu <= 0:
        raise ValueError(f"resolution must be positive, got {mu}")
    u = stream.uniform01(2 * count)
    out = u[:count]
    out += u[count:]
    out -= 1.0
    out *= 2.0 * mu
    return out


def sample_complex_uniform(stream: RngStream, a: float, b: float, count: int) -> np.ndarray:
    """Complex draws with independent real and imaginary parts, each U[a, b]."""
    if not a < b:
        raise ValueError(f"empty range: need a < b, got [{a}, {b}]")
    u = a + (b - a) * stream.uniform01(2 * count)
    return u[:count] + 1j * u[count:]


def standard_normal(stream: RngStream, count: int) -> np.ndarray:
    """Standard normals via Box-Muller on the stream's uniform output."""
    pairs = (count + 1) // 2
    u = stream.uniform01(2 * pairs)
    r = u[:pairs]
    # radius sqrt(-2 log(1 - u)): 1 - u lies in (0, 1], keeping the log finite
    r *= -1.0
    np.log1p(r, out=r)
    r *= -2.0
    np.sqrt(r, out=r)
    ang = u[pairs:]
    ang *= 2.0 * np.pi
    cos = np.cos(ang)
    sin = np.sin(ang, out=ang)
    cos *= r
    sin *= r
    return np.concatenate([cos, sin])[:count]


def standard_complex_normal(stream: RngStream, count: int) -> np.ndarray:
    """Circularly symmetric standard complex normals, E|z|^2 = 1."""
    g = standard_normal(stream, 2 * count)
    return (g[:count] + 1j * g[count:]) / np.sqrt(2.0)


def sample_complex_gaussian(stream: RngStream, covariance, count: int) -> np.ndarray:
    """Columns z = Sigma^{1/2} g with g standard complex Gaussian.

    The circular convention E[z z*] = Sigma is used. Eigenvalues of the
    covariance in (-1e-10 * lambda_1, 0) are clipped to zero with a warning;
    anything more negative is rejected.
    """
    eig = hermitian_eig(covariance)
    w = eig.eigenvalues
    lam1 = max(w[0], 0.0)
    if w[-1] < -1e-10 * lam1:
        raise ValueError(
            f"covariance is not PSD: smallest eigenvalue {w[-1]:.3e} "
            f"below tolerance {-1e-10 * lam1:.3e}"
        )
    if w[-1] < 0:
        warnings.warn("clipping slightly negative covariance eigenvalues to zero")
    # flush numerically-zero eigenvalues: sqrt would otherwise turn O(eps)
    # noise into O(sqrt(eps)) leakage outside range(Sigma)
    w = np.where(w > 1e-14 * lam1, w, 0.0)
    p = eig.eigenvectors.shape[0]
    g = standard_complex_normal(stream, p * count).reshape(p, count)
    root = eig.eigenvectors * np.sqrt(w)[np.newaxis, :]
    return root @ (eig.eigenvectors.conj().T @ g)


def haar_orthonormal(stream: RngStream, p: int, s: int, field: str = "complex") -> np.ndarray:
    """A Haar-distributed p x s matrix with orthonormal columns.

    QR of a Gaussian matrix with the R-diagonal phase correction, which makes
    the distribution invariant under fixed unitary left-multiplication.
    """
    if not 1 <= s <= p:
        raise ShapeError(f"need p >= s >= 1, got p={p}, s={s}")
    if field == "complex":
        g = standard_complex_normal(stream, p * s).reshape(p, s)
    elif field == "real":
        g = standard_normal(stream, p * s).reshape(p, s)
    else:
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * phase[np.newaxis, :]
