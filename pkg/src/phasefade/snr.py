"""Post-compensation SNR, block averages and the frequency/bandwidth sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import bounds, fading, oscillator
from .csvio import render_csv
from .scenario import KMH_TO_MPS, LinkScenario, OscillatorSpec, TechnologyParams


def to_db(x):
    return 10.0 * np.log10(x)


def snr_after_pn_compensation(es, sigma2_w, sigma2_eps):
    """Es / (2 Es (1 - exp(-sigma2_eps/2)) + sigma_w^2), elementwise."""
    es = np.asarray(es, dtype=float)
    sigma2_eps = np.asarray(sigma2_eps, dtype=float)
    if np.any(sigma2_eps < 0) or np.any(np.asarray(sigma2_w) <= 0):
        raise ValueError("need sigma2_eps >= 0 and sigma2_w > 0")
    out = es / (-2.0 * es * np.expm1(-0.5 * sigma2_eps) + sigma2_w)
    return out.item() if out.ndim == 0 else out


def snr_after_ch_compensation(es, sigma2_w, sigma2_eps):
    """Es / (sigma2_eps (Es + sigma_w^2) + sigma_w^2), elementwise."""
    es = np.asarray(es, dtype=float)
    sigma2_eps = np.asarray(sigma2_eps, dtype=float)
    if np.any(sigma2_eps < 0) or np.any(np.asarray(sigma2_w) <= 0):
        raise ValueError("need sigma2_eps >= 0 and sigma2_w > 0")
    out = es / (sigma2_eps * (es + sigma2_w) + sigma2_w)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class SnrProfile:
    """Per-symbol SNR over one block and its average.

    The block average is the arithmetic mean of the linear per-symbol values;
    ``average_db_of_db`` is the dB-domain mean, kept for comparison.
    """

    per_symbol: np.ndarray
    impairment: str  # "phase" or "channel"
    scenario: LinkScenario
    error_variances: np.ndarray = field(repr=False)

    @property
    def average(self) -> float:
        return float(np.mean(self.per_symbol))

    @property
    def average_db(self) -> float:
        return float(to_db(self.average))

    @property
    def average_db_of_db(self) -> float:
        return float(np.mean(to_db(self.per_symbol)))

    def to_csv(self) -> str:
        rows = [(k, v, to_db(s), s) for k, (v, s) in
                enumerate(zip(self.error_variances, self.per_symbol), start=1)]
        return render_csv(["k", "sigma2_eps", "snr_db", "snr_linear"], rows,
                          {"impairment": self.impairment,
                           "average_snr_db": f"{self.average_db:.6f}",
                           "scenario": self.scenario.to_dict()})


def block_snr_phase(scenario: LinkScenario, osc: OscillatorSpec | None = None, *,
                    sigma2_zeta: float | None = None,
                    sigma2_theta1: float = bounds.DEFAULT_SIGMA2_THETA1) -> SnrProfile:
    """Per-symbol SNR after phase-noise compensation by an MBCRB-achieving estimator.

    The innovation variance comes from ``sigma2_zeta`` if given, else from
    ``osc`` (or the scenario's own oscillator) resolved against the link.
    """
    if sigma2_zeta is None:
        osc = osc if osc is not None else scenario.oscillator
        if osc is None:
            raise ValueError("no oscillator given for the phase-noise scenario")
        sigma2_zeta = oscillator.resolve_innovation_variance(osc, scenario)
    prof = bounds.phase_bound(scenario.block_len, scenario.snr_awgn, sigma2_zeta, sigma2_theta1)
    snr = snr_after_pn_compensation(scenario.es, scenario.sigma2_w, prof.variances)
    return SnrProfile(np.atleast_1d(snr), "phase", scenario, prof.variances)


def block_snr_channel(scenario: LinkScenario, *, lag0_bias: float = fading.DEFAULT_LAG0_BIAS,
                      normalized_doppler: float | None = None) -> SnrProfile:
    """Per-symbol SNR after channel compensation by an MBCRB-achieving estimator."""
    if normalized_doppler is None:
        params = fading.ClarkeParams(scenario.doppler, scenario.bw)
    else:
        params = fading.ClarkeParams.from_normalized(normalized_doppler)
    R = fading.correlation_matrix(scenario.block_len, params, lag0_bias)
    prof = bounds.channel_bound(scenario.snr_awgn, R)
    snr = snr_after_ch_compensation(scenario.es, scenario.sigma2_w, prof.variances)
    return SnrProfile(np.atleast_1d(snr), "channel", scenario, prof.variances)


@dataclass(frozen=True)
class BandwidthRule:
    """Symbol rate as a function of the carrier: fixed, or a fraction of f0."""

    kind: str  # "fixed" | "proportional"
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "proportional"):
            raise ValueError(f"unknown bandwidth rule {self.kind!r}")
        if not self.value > 0:
            raise ValueError("bandwidth rule value must be positive")

    @classmethod
    def fixed(cls, bw: float) -> BandwidthRule:
        return cls("fixed", bw)

    @classmethod
    def proportional(cls, ratio: float) -> BandwidthRule:
        return cls("proportional", ratio)

    def __call__(self, f0: float) -> float:
        return self.value if self.kind == "fixed" else self.value * f0

    @property
    def label(self) -> str:
        return f"bw={self.value:g}Hz" if self.kind == "fixed" else f"bw={self.value:g}*f0"


@dataclass
class SweepResult:
    """One independent-variable grid and the series evaluated on it.

    Failed grid points hold NaN in every series and a message in ``errors``.
    """

    variable: str
    grid: np.ndarray
    series: dict[str, np.ndarray]
    descriptor: dict[str, Any] = field(default_factory=dict)
    errors: list[str | None] = field(default_factory=list)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if not self.errors:
            self.errors = [None] * len(self.grid)

    @property
    def ok(self) -> bool:
        return all(e is None for e in self.errors)

    def column(self, name: str) -> np.ndarray:
        return self.series[name]

    def rows(self):
        names = list(self.series)
        for i, x in enumerate(self.grid):
            yield [x] + [float(self.series[n][i]) for n in names] + [self.errors[i] or ""]

    def to_csv(self, meta: dict[str, Any] | None = None) -> str:
        header = {**self.descriptor, **(meta or {})}
        return render_csv([self.variable, *self.series, "error"], self.rows(), header)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("sweep grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("sweep grid must be strictly increasing")
    return grid


def _evaluate(fn: Callable[[float], dict[str, float]], grid: np.ndarray, names: Sequence[str],
              workers: int | None) -> tuple[dict[str, np.ndarray], list[str | None]]:
    def safe(x):
        try:
            return fn(x), None
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(safe, grid))
    else:
        results = [safe(x) for x in grid]

    series = {n: np.full(len(grid), np.nan) for n in names}
    errors: list[str | None] = []
    for i, (values, err) in enumerate(results):
        errors.append(err)
        if values is not None:
            for n in names:
                series[n][i] = values[n]
    return series, errors


def sweep_f0(template: LinkScenario, f0_grid, bw_rule: BandwidthRule, impairment: str, *,
             tech: TechnologyParams | None = None, osc: OscillatorSpec | None = None,
             velocity: float | None = None, workers: int | None = None,
             lag0_bias: float = fading.DEFAULT_LAG0_BIAS) -> SweepResult:
    """Evaluate one series over a carrier-frequency grid.

    ``impairment`` selects the quantity: ``"floor"`` gives the technology
    floor of the innovation variance, ``"phase"`` the block-average SNR after
    phase-noise compensation (oscillator from ``tech`` or ``osc``) and
    ``"channel"`` the block-average SNR after fading compensation at
    ``velocity`` m/s (defaults to the template's).
    """
    grid = _check_grid(f0_grid)
    if impairment not in ("floor", "phase", "channel"):
        raise ValueError(f"unknown impairment {impairment!r}")
    if impairment == "floor" and tech is None:
        raise ValueError("floor sweep needs a technology")
    if impairment == "phase":
        if tech is not None and osc is not None:
            raise ValueError("give either tech or osc, not both")
        if tech is not None:
            osc = OscillatorSpec.from_technology(tech)
        osc = osc or template.oscillator
        if osc is None:
            raise ValueError("phase sweep needs a technology or oscillator")
    v = template.velocity if velocity is None else velocity

    def point(f0):
        bw = bw_rule(f0)
        if impairment == "floor":
            return {"sigma2_zeta": oscillator.technology_floor_variance(tech, f0, bw)}
        scen = template.replace(f0=f0, bw=bw, velocity=v)
        if impairment == "phase":
            return {"avg_snr_db": block_snr_phase(scen, osc).average_db}
        return {"avg_snr_db": block_snr_channel(scen, lag0_bias=lag0_bias).average_db}

    name = "sigma2_zeta" if impairment == "floor" else "avg_snr_db"
    series, errors = _evaluate(point, grid, [name], workers)
    descriptor: dict[str, Any] = {"impairment": impairment, "bw_rule": bw_rule.label,
                                  "K": template.block_len,
                                  "es_over_sigma2w_db": f"{template.snr_awgn_db:.6g}"}
    if tech is not None:
        descriptor["technology"] = tech.name
    elif osc is not None:
        descriptor["oscillator"] = osc.to_dict()
    if impairment == "channel":
        descriptor["v_kmh"] = f"{v / KMH_TO_MPS:.6g}"
        descriptor["lag0_bias"] = lag0_bias
    return SweepResult("f0_hz", grid, series, descriptor, errors)


def sweep_matched_bandwidths(grid, scenario: LinkScenario, *, workers: int | None = None,
                             lag0_bias: float = fading.DEFAULT_LAG0_BIAS) -> SweepResult:
    """Both block SNRs with f3dB = fD, swept over the common normalized value x = fD/BW.

    Phase: sigma2_zeta = 4*pi*x. Channel: normalized Doppler x.
    """
    grid = _check_grid(grid)
    if np.any(grid <= 0) or np.any(grid >= 0.5):
        raise ValueError("normalized frequencies must lie in (0, 0.5)")

    def point(x):
        pn = block_snr_phase(scenario, sigma2_zeta=oscillator.innovation_variance(x, 1.0))
        ch = block_snr_channel(scenario, normalized_doppler=x, lag0_bias=lag0_bias)
        return {"snr_pn_db": pn.average_db, "snr_ch_db": ch.average_db,
                "gap_db": ch.average_db - pn.average_db}

    series, errors = _evaluate(point, grid, ["snr_pn_db", "snr_ch_db", "gap_db"], workers)
    descriptor = {"K": scenario.block_len, "es_over_sigma2w_db": f"{scenario.snr_awgn_db:.6g}",
                  "lag0_bias": lag0_bias}
    return SweepResult("normalized_bw", grid, series, descriptor, errors)


def sweep_equal_error(grid, es: float, sigma2_w: float) -> SweepResult:
    """Per-symbol SNR of both compensations at identical error variances."""
    grid = _check_grid(grid)
    if np.any(grid <= 0):
        raise ValueError("error variances must be positive")
    pn = np.atleast_1d(snr_after_pn_compensation(es, sigma2_w, grid))
    ch = np.atleast_1d(snr_after_ch_compensation(es, sigma2_w, grid))
    descriptor = {"es": es, "sigma2_w": sigma2_w,
                  "es_over_sigma2w_db": f"{10 * math.log10(es / sigma2_w):.6g}"}
    return SweepResult("sigma2_eps", grid, {"snr_pn_db": to_db(pn), "snr_ch_db": to_db(ch)},
                       descriptor)
