"""Wiener phase noise: Lorentzian spectrum, parameter conversions, floors and sample paths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import LinkScenario, OscillatorSpec, TechnologyParams

# Numerator constant of the technology floor on the innovation variance [J].
FLOOR_CONSTANT = 19.496e-21


@dataclass(frozen=True)
class WienerProcessParams:
    kappa: float  # Lorentzian parameter [Hz]
    f3db: float  # 3-dB single-sided bandwidth [Hz]
    sigma2_zeta: float  # per-symbol innovation variance [rad^2]
    bw: float

    @classmethod
    def from_kappa(cls, kappa: float, bw: float) -> WienerProcessParams:
        f3db = kappa * math.pi
        return cls(kappa, f3db, innovation_variance(f3db, bw), bw)

    @classmethod
    def from_f3db(cls, f3db: float, bw: float) -> WienerProcessParams:
        return cls(f3db / math.pi, f3db, innovation_variance(f3db, bw), bw)

    @classmethod
    def from_sigma2_zeta(cls, sigma2_zeta: float, bw: float) -> WienerProcessParams:
        f3db = sigma2_zeta * bw / (4 * math.pi)
        return cls(f3db / math.pi, f3db, sigma2_zeta, bw)


@dataclass(frozen=True)
class PhasePath:
    theta: np.ndarray
    innovations: np.ndarray  # the K-1 Gaussian steps between consecutive samples
    sigma2_zeta: float
    seed: int | None


def lorentzian_ssb(kappa, f_offset):
    """SSB spectrum kappa / ((kappa*pi)^2 + f^2) of Wiener phase noise, linear 1/Hz."""
    kappa = np.asarray(kappa, dtype=float)
    f = np.asarray(f_offset, dtype=float)
    out = kappa / ((kappa * np.pi) ** 2 + f**2)
    return out.item() if out.ndim == 0 else out


def kappa_from_ssb_point(level_dbc_hz: float, f_offset: float) -> float:
    """Invert the Lorentzian through one measured SSB point.

    Solves L*pi^2*kappa^2 - kappa + L*f^2 = 0 for the smaller root, which is
    the branch with kappa*pi < f (the measurement lies beyond the 3-dB corner).
    """
    if f_offset <= 0:
        raise ValueError("offset frequency must be positive")
    level = 10.0 ** (level_dbc_hz / 10.0)
    a = level * math.pi**2
    c = level * f_offset**2
    disc = 1.0 - 4.0 * a * c
    if not disc > 0:
        raise ValueError(
            f"{level_dbc_hz} dBc/Hz at {f_offset} Hz is not reachable by a Lorentzian "
            f"spectrum (discriminant {disc:.3g} <= 0)"
        )
    # 2c / (1 + sqrt(disc)) is the small root without cancellation
    return 2.0 * c / (1.0 + math.sqrt(disc))


def innovation_variance(f3db: float, bw: float) -> float:
    """Per-symbol innovation variance 4*pi*f3dB/BW of the sampled Wiener phase."""
    if f3db < 0:
        raise ValueError("f3db must be non-negative")
    if bw <= 0:
        raise ValueError("bw must be positive")
    return 4.0 * math.pi * f3db / bw


def technology_floor_variance(tech: TechnologyParams, f0, bw):
    """Smallest innovation variance attainable with ``tech`` at carrier f0 and rate bw.

    Broadcasts over array-valued ``f0``/``bw``.
    """
    f0 = np.asarray(f0, dtype=float)
    bw = np.asarray(bw, dtype=float)
    if np.any(f0 <= 0) or np.any(bw <= 0):
        raise ValueError("f0 and bw must be positive")
    scale = math.pi**2 * FLOOR_CONSTANT / (tech.i_cd * tech.v_cd * tech.q0**2)
    out = scale * f0**2 / bw
    return out.item() if out.ndim == 0 else out


def resolve_innovation_variance(osc: OscillatorSpec, scenario: LinkScenario) -> float:
    """Innovation variance implied by an oscillator description in a given link."""
    kind = osc.kind
    if kind == "sigma2_zeta":
        return float(osc.sigma2_zeta)
    if kind == "f3db":
        return innovation_variance(osc.f3db, scenario.bw)
    if kind == "ssb":
        kappa = kappa_from_ssb_point(osc.ssb_dbc_hz, osc.ssb_offset_hz)
        return innovation_variance(kappa * math.pi, scenario.bw)
    return technology_floor_variance(osc.technology, scenario.f0, scenario.bw)


def wiener_sample_path(K: int, sigma2_zeta: float, theta1: float | None = None,
                       seed: int | None = None) -> PhasePath:
    """Draw one discrete Wiener phase trajectory of length K.

    Uses numpy's PCG64 generator, so a given seed reproduces the path bit for
    bit. ``theta1`` defaults to a uniform draw on [0, 2*pi).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if sigma2_zeta < 0:
        raise ValueError("sigma2_zeta must be non-negative")
    rng = np.random.default_rng(seed)
    if theta1 is None:
        theta1 = rng.uniform(0.0, 2.0 * np.pi)
    steps = rng.standard_normal(K - 1) * math.sqrt(sigma2_zeta)
    theta = np.empty(K)
    theta[0] = theta1
    np.cumsum(steps, out=theta[1:])
    theta[1:] += theta1
    return PhasePath(theta, steps, sigma2_zeta, seed)
