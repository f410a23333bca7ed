"""Memoryless scalar quantizers and their bit accounting.

Three schemes are implemented, all applied entrywise (per real/imaginary
part in the complex case):

* ``rect``  -- one-bit sign quantizer with a uniform dither on [-lam, lam],
  applied twice with independent dithers to produce the pair (q, q_dot);
* ``tri``   -- infinite-range uniform quantizer of resolution mu with a
  triangular dither (sum of two independent U(-mu, mu)); the b-bit variant
  picks mu = lam / (2^b - 2) and saturates at the extreme alphabet cells;
* ``round`` -- plain b-bit rounding of [-lam, lam] with no dither, the
  baseline scheme.

Sign convention: sign(0) = +1 (note this differs from numpy.sign).
Bit accounting uses c_F = 1 for real data and c_F = 2 for complex data,
the squared modulus of the sign output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteError, ShapeError
from .rng import RngStream, sample_triangular, sample_uniform

SCHEMES = ("rect", "tri", "round")


def field_factor(field: str) -> int:
    """c_F: 1 for the real field, 2 for the complex field."""
    if field == "real":
        return 1
    if field == "complex":
        return 2
    raise ValueError(f"field must be 'real' or 'complex', got {field!r}")


@dataclass(frozen=True)
class QuantizerSpec:
    """Description of one quantization scheme plus its bit accounting.

    ``bits`` is per real part: a complex quantizer with bits=2 stores
    2 bits for the real and 2 for the imaginary part of every entry.
    """

    scheme: str
    lam: float
    field: str = "real"
    bits: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.lam <= 0:
            raise ValueError(f"range lam must be positive, got {self.lam}")
        field_factor(self.field)
        if self.scheme == "tri":
            if self.bits is None or self.bits < 2:
                raise ValueError("triangular dithering needs bits >= 2")
        elif self.scheme == "round":
            if self.bits is None or self.bits < 1:
                raise ValueError("direct rounding needs bits >= 1")
        elif self.bits is not None:
            raise ValueError("rectangular dithering takes no bits parameter")

    @property
    def mu(self) -> float:
        """Resolution of the b-bit triangular quantizer."""
        if self.scheme != "tri":
            raise ValueError("mu is only defined for the triangular scheme")
        return bbit_resolution(self.lam, self.bits)

    @property
    def bits_per_scalar(self) -> int:
        """Stored bits per (possibly complex) input entry."""
        c = field_factor(self.field)
        if self.scheme == "rect":
            return 2 * c  # a pair of sign bits per part
        return c * self.bits

    def label(self) -> str:
        """Short identifier used in result tables: rect, tri-b2, round-b4."""
        if self.scheme == "rect":
            return "rect"
        return f"{self.scheme}-b{self.bits}"

    @classmethod
    def from_token(cls, token: str, lam: float, field: str) -> "QuantizerSpec":
        """Parse the config-file token grammar: ``rect``, ``tri:B``, ``round:B``."""
        name, _, b = token.strip().partition(":")
        if name == "rect":
            if b:
                raise ValueError(f"rect takes no bit count, got {token!r}")
            return cls("rect", lam, field)
        if name in ("tri", "round"):
            if not b:
                raise ValueError(f"{name} needs a bit count, e.g. {name}:2")
            return cls(name, lam, field, bits=int(b))
        raise ValueError(f"unknown quantizer token {token!r}")

    def to_token(self) -> str:
        if self.scheme == "rect":
            return "rect"
        return f"{self.scheme}:{self.bits}"


@dataclass(frozen=True)
class QuantizedPair:
    """The two one-bit snapshots (q, q_dot) produced by rectangular dithering.

    Both arrays are p x n with entries in {+-1} (real) or {+-1+-i} (complex).
    """

    q: np.ndarray
    q_dot: np.ndarray

    def __post_init__(self):
        if self.q.shape != self.q_dot.shape:
            raise ShapeError(
                f"pair members must share a shape, got {self.q.shape} vs {self.q_dot.shape}"
            )


@dataclass(frozen=True)
class SnapshotBatch:
    """n length-p observation vectors (columns), analog or quantized.

    ``scheme`` is None for analog data. For rectangular-quantized batches
    ``data`` holds q and ``data_dot`` holds the second sign pattern q_dot.
    """

    data: np.ndarray
    field: str
    scheme: QuantizerSpec | None = None
    data_dot: np.ndarray | None = None
    seed_info: str = ""

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ShapeError(f"snapshot data must be p x n, got shape {self.data.shape}")
        field_factor(self.field)
        if self.scheme is not None and self.scheme.scheme == "rect" and self.data_dot is None:
            raise ShapeError("rectangular batches need the second sign pattern data_dot")

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


def _check_finite(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return x


def _fast_sign(x: np.ndarray) -> np.ndarray:
    # sign(0) = +1; inputs already validated by the caller
    out = np.copysign(1.0, x)
    out[x == 0] = 1.0  # copysign sends -0.0 to -1, the convention wants +1
    return out


def sign_real(x) -> np.ndarray:
    """Entrywise sign with sign(0) = +1; output in {+-1}."""
    x = _check_finite(x, "x")
    if np.iscomplexobj(x):
        raise ValueError("sign_real expects real input; use sign_complex")
    return _fast_sign(x)


def sign_complex(z) -> np.ndarray:
    """Per-part sign: sign(Re) + i sign(Im); output in {+-1 +- i}."""
    z = _check_finite(z, "z")
    return sign_real(np.real(z)) + 1j * sign_real(np.imag(z))


def rect_quantize_pair(
    y, lam: float, dither_stream_a: RngStream, dither_stream_b: RngStream
) -> QuantizedPair:
    """One-bit quantization with two fresh independent uniform dithers.

    Returns q = sign(y + tau) and q_dot = sign(y + tau_dot) with tau and
    tau_dot drawn i.i.d. from U(-lam, lam) per part.
    """
    if lam <= 0:
        raise ValueError(f"dither range must be positive, got {lam}")
    y = _check_finite(np.asarray(y), "y")
    if np.iscomplexobj(y):
        def one(stream):
            u = sample_uniform(stream, -lam, lam, 2 * y.size)
            re = u[: y.size].reshape(y.shape)
            im = u[y.size :].reshape(y.shape)
            re += np.real(y)
            im += np.imag(y)
            return _fast_sign(re) + 1j * _fast_sign(im)

        return QuantizedPair(q=one(dither_stream_a), q_dot=one(dither_stream_b))

    def one(stream):
        tau = sample_uniform(stream, -lam, lam, y.size).reshape(y.shape)
        tau += y
        return _fast_sign(tau)

    return QuantizedPair(q=one(dither_stream_a), q_dot=one(dither_stream_b))


def uniform_quantize(x, mu: float) -> np.ndarray:
    """Infinite-range uniform quantizer onto the odd grid {..., -mu, mu, 3mu, ...}.

    Maps [2k*mu, (2k+2)*mu) to (2k+1)*mu, so the error never exceeds mu.
    """
    if mu <= 0:
        raise ValueError(f"resolution must be positive, got {mu}")
    x = _check_finite(x, "x")
    q = np.asarray(x, dtype=float) / (2.0 * mu)
    np.floor(q, out=q)
    q += 0.5
    q *= 2.0 * mu
    return q


def bbit_resolution(lam: float, bits: int) -> float:
    """Resolution mu = lam / (2^b - 2) making the triangular quantizer b-bit.

    With this mu, inputs in (-lam - 2mu, lam + 2mu) land on exactly 2^b
    alphabet points; b = 2 is the smallest allowable choice.
    """
    if bits is None or bits < 2:
        raise ValueError(f"triangular quantizer needs bits >= 2, got {bits}")
    if lam <= 0:
        raise ValueError(f"range lam must be positive, got {lam}")
    return lam / (2**bits - 2)


def tri_quantize(
    y,
    mu: float,
    dither_stream_a: RngStream,
    dither_stream_b: RngStream | None = None,
    bits: int | None = None,
) -> np.ndarray:
    """Uniform quantization after adding a fresh triangular dither.

    Complex inputs get independent dithers on the real part (stream a) and
    imaginary part (stream b). When ``bits`` is given the output saturates
    at the extreme alphabet cells +-(2^b - 1) mu, mimicking a finite-range
    converter.
    """
    if mu <= 0:
        raise ValueError(f"resolution must be positive, got {mu}")
    y = _check_finite(np.asarray(y), "y")

    def clamp(q):
        if bits is None:
            return q
        top = (2**bits - 1) * mu
        return np.clip(q, -top, top, out=q)

    def one_part(part, stream):
        tau = sample_triangular(stream, mu, part.size).reshape(part.shape)
        tau += part
        return clamp(uniform_quantize(tau, mu))

    if np.iscomplexobj(y):
        if dither_stream_b is None:
            raise ValueError("complex triangular quantization needs two dither streams")
        re = one_part(np.real(y), dither_stream_a)
        im = one_part(np.imag(y), dither_stream_b)
        return re + 1j * im
    return one_part(y, dither_stream_a)


def direct_round(x, lam: float, bits: int) -> np.ndarray:
    """b-bit direct rounding of [-lam, lam]; the undithered baseline.

    Inputs beyond the range are clamped to the nearest endpoint first
    (a saturating converter). The rounding error is at most lam / 2^b
    inside the range, and the endpoint +lam maps to lam - lam / 2^b.
    """
    if bits is None or bits < 1:
        raise ValueError(f"direct rounding needs bits >= 1, got {bits}")
    if lam <= 0:
        raise ValueError(f"range lam must be positive, got {lam}")
    x = _check_finite(np.asarray(x), "x")
    if np.iscomplexobj(x):
        return direct_round(np.real(x), lam, bits) + 1j * direct_round(np.imag(x), lam, bits)
    step = lam / 2**bits
    clamped = np.clip(x, -lam, lam)
    out = uniform_quantize(clamped, step)
    return np.where(clamped == lam, lam - step, out)


def bits_used(spec: QuantizerSpec, n: int, p: int) -> int:
    """Total stored bits for n quantized snapshots in F^p."""
    if n < 1 or p < 1:
        raise ValueError(f"need n, p >= 1, got n={n}, p={p}")
    return spec.bits_per_scalar * p * n


def quantize_batch(
    batch: SnapshotBatch,
    spec: QuantizerSpec,
    dither_stream_a: RngStream | None = None,
    dither_stream_b: RngStream | None = None,
) -> SnapshotBatch:
    """Quantize an analog snapshot batch under one scheme.

    Dither streams are required for the dithered schemes and unused for
    direct rounding.
    """
    if batch.scheme is not None:
        raise ValueError("batch is already quantized")
    if batch.field != spec.field:
        raise ShapeError(f"batch field {batch.field!r} does not match spec {spec.field!r}")
    y = batch.data
    if spec.scheme == "rect":
        pair = rect_quantize_pair(y, spec.lam, dither_stream_a, dither_stream_b)
        return SnapshotBatch(pair.q, batch.field, spec, data_dot=pair.q_dot,
                             seed_info=batch.seed_info)
    if spec.scheme == "tri":
        q = tri_quantize(y, spec.mu, dither_stream_a, dither_stream_b, bits=spec.bits)
        return SnapshotBatch(q, batch.field, spec, seed_info=batch.seed_info)
    q = direct_round(y, spec.lam, spec.bits)
    return SnapshotBatch(q, batch.field, spec, seed_info=batch.seed_info)
