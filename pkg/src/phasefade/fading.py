"""Clarke Rayleigh fading: Bessel-J0 autocorrelation, Toeplitz covariance and sample paths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import NotPositiveDefiniteError, SymMatrix

DEFAULT_LAG0_BIAS = 1e-6

_SERIES_MAX = 8.0
_MILLER_MAX = 30.0


def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * abs(total) and abs(term) < 1e-18:
            return total


def _j0_miller(x: float) -> float:
    # Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
    # J_0 + 2 * sum_m J_{2m} = 1.
    n = 2 * int((x + 20.0 + 4.0 * math.sqrt(x)) / 2.0)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    for k in range(n, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    norm += j_cur
    return j_cur / norm


def _j0_hankel(x: float) -> float:
    p, q = 1.0, 0.0
    term = 1.0
    eightx = 8.0 * x
    prev = math.inf
    for k in range(1, 60):
        term *= -((2 * k - 1) ** 2) / (k * eightx)
        if abs(term) > prev:
            break
        prev = abs(term)
        # odd k feed Q with alternating sign, even k feed P
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
        if abs(term) < 1e-18:
            break
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def _j0_scalar(x: float) -> float:
    x = abs(x)
    if x <= _SERIES_MAX:
        return _j0_series(x)
    if x <= _MILLER_MAX:
        return _j0_miller(x)
    return _j0_hankel(x)


def bessel_j0(x):
    """Zero-order Bessel function of the first kind.

    Power series up to |x| = 8, Miller's backward recurrence up to 30 and the
    Hankel asymptotic expansion beyond. Negative arguments use evenness.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j0 needs finite arguments")
    if arr.ndim == 0:
        return _j0_scalar(float(arr))
    flat = np.abs(arr).ravel()
    uniq, inverse = np.unique(flat, return_inverse=True)
    values = np.array([_j0_scalar(u) for u in uniq])
    return values[inverse].reshape(arr.shape)


@dataclass(frozen=True)
class ClarkeParams:
    fd: float  # maximum Doppler frequency [Hz]
    bw: float  # symbol rate [Hz]

    def __post_init__(self):
        if not self.fd >= 0:
            raise ValueError("fd must be non-negative")
        if not self.bw > 0:
            raise ValueError("bw must be positive")

    @classmethod
    def from_normalized(cls, normalized_doppler: float) -> ClarkeParams:
        return cls(fd=normalized_doppler, bw=1.0)

    @property
    def normalized_doppler(self) -> float:
        return self.fd / self.bw


@dataclass(frozen=True)
class ChannelPath:
    h: np.ndarray  # complex, length K
    seed: int | None

    @property
    def hr(self) -> np.ndarray:
        return self.h.real

    @property
    def hi(self) -> np.ndarray:
        return self.h.imag


def clarke_autocorrelation(lag, params: ClarkeParams):
    """Per-component autocorrelation 0.5 * J0(2*pi*fd/bw*|lag|)."""
    lag = np.abs(np.asarray(lag, dtype=float))
    out = 0.5 * np.asarray(bessel_j0(2.0 * np.pi * params.normalized_doppler * lag))
    return out.item() if out.ndim == 0 else out


def correlation_matrix(K: int, params: ClarkeParams,
                       lag0_bias: float = DEFAULT_LAG0_BIAS) -> SymMatrix:
    """K x K Toeplitz covariance of one quadrature component, lag-zero biased.

    Raises NotPositiveDefiniteError when the bias is too small for Cholesky
    to succeed.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if lag0_bias < 0:
        raise ValueError("lag0_bias must be non-negative")
    column = np.asarray(clarke_autocorrelation(np.arange(K), params), dtype=float).reshape(K)
    column[0] += lag0_bias
    idx = np.arange(K)
    R = SymMatrix(column[np.abs(idx[:, None] - idx[None, :])], check=False)
    try:
        R.cholesky()
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(
            f"channel correlation matrix is not positive definite with lag0_bias={lag0_bias:g}; "
            "increase the bias", exc.min_eigenvalue) from None
    return R


def clarke_sample_path(K: int, params: ClarkeParams, lag0_bias: float = DEFAULT_LAG0_BIAS,
                       seed: int | None = None, n_paths: int | None = None):
    """Correlated Rayleigh channel realization(s) by Cholesky coloring.

    Returns one ChannelPath, or a (n_paths, K) complex array when ``n_paths``
    is given (ensemble draws for moment checks).
    """
    L = correlation_matrix(K, params, lag0_bias).cholesky()
    rng = np.random.default_rng(seed)
    shape = (1 if n_paths is None else n_paths, K)
    white_r = rng.standard_normal(shape)
    white_i = rng.standard_normal(shape)
    h = white_r @ L.T + 1j * (white_i @ L.T)
    if n_paths is None:
        return ChannelPath(h[0], seed)
    return h
