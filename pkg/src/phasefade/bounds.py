"""Bayesian information matrices and per-symbol MBCRB error variances.

Two estimation problems are covered, each with its own prior:

* phase noise: Wiener random walk started from a first-symbol variance
  ``sigma2_theta1`` (default pi^2/3, the variance of a uniform phase);
* channel fading: real and imaginary Clarke components, each with the
  Toeplitz covariance R built in :mod:`phasefade.fading`.

In both cases the data part of the information is (2 Es / sigma_w^2) I for a
constant-modulus alphabet, independent of the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SymMatrix

DEFAULT_SIGMA2_THETA1 = math.pi**2 / 3.0


class DegeneratePriorError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorVarianceProfile:
    variances: np.ndarray  # per-symbol lower bounds, k = 1..K
    bound: str  # "phase" or "channel"

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or not np.all(v > 0):
            raise ValueError("error variances must be finite and positive")
        v.setflags(write=False)
        object.__setattr__(self, "variances", v)

    def __len__(self):
        return len(self.variances)

    def to_csv(self) -> str:
        lines = ["k,sigma2_eps"]
        lines += [f"{k},{v:.10e}" for k, v in enumerate(self.variances, start=1)]
        return "\n".join(lines) + "\n"


def wiener_prior_covariance(K: int, sigma2_theta1: float = DEFAULT_SIGMA2_THETA1,
                            sigma2_zeta: float = 0.0) -> SymMatrix:
    """Prior covariance [C]_{m,n} = sigma2_theta1 + (min(m, n) - 1) * sigma2_zeta."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not sigma2_theta1 > 0:
        raise ValueError("sigma2_theta1 must be positive")
    if sigma2_zeta < 0:
        raise ValueError("sigma2_zeta must be non-negative")
    if sigma2_zeta == 0 and K > 1:
        raise DegeneratePriorError(
            "sigma2_zeta = 0 makes the random-walk prior rank one; "
            "with no phase noise the error variance is simply zero")
    idx = np.arange(K)
    C = sigma2_theta1 + np.minimum.outer(idx, idx) * sigma2_zeta
    return SymMatrix(C, check=False)


def bim_phase(snr_awgn: float, C: SymMatrix) -> SymMatrix:
    """B_PN = 2 snr I + C^-1."""
    if not snr_awgn >= 0:
        raise ValueError("snr_awgn must be non-negative")
    B = C.inverse().array + 2.0 * snr_awgn * np.eye(C.n)
    return SymMatrix(B, check=False)


def pn_error_variances(B: SymMatrix) -> ErrorVarianceProfile:
    return ErrorVarianceProfile(B.inverse_diagonal(), "phase")


def bim_channel(snr_awgn: float, R: SymMatrix) -> SymMatrix:
    """2K x 2K block-diagonal information for the stacked [h_r; h_i]."""
    if not snr_awgn >= 0:
        raise ValueError("snr_awgn must be non-negative")
    K = R.n
    block = R.inverse().array + 2.0 * snr_awgn * np.eye(K)
    B = np.zeros((2 * K, 2 * K))
    B[:K, :K] = block
    B[K:, K:] = block
    return SymMatrix(B, check=False)


def ch_error_variances(B_ch: SymMatrix) -> ErrorVarianceProfile:
    """Complex-channel error variance per symbol: real plus imaginary component."""
    if B_ch.n % 2:
        raise ValueError("channel information matrix must have even dimension")
    K = B_ch.n // 2
    diag = B_ch.inverse_diagonal()
    return ErrorVarianceProfile(diag[:K] + diag[K:], "channel")


def phase_bound(K: int, snr_awgn: float, sigma2_zeta: float,
                sigma2_theta1: float = DEFAULT_SIGMA2_THETA1) -> ErrorVarianceProfile:
    C = wiener_prior_covariance(K, sigma2_theta1, sigma2_zeta)
    return pn_error_variances(bim_phase(snr_awgn, C))


def channel_bound(snr_awgn: float, R: SymMatrix) -> ErrorVarianceProfile:
    return ch_error_variances(bim_channel(snr_awgn, R))
