"""Independent validators for the analytic bounds.

Every Monte-Carlo comparison uses a 3-sigma rule against a reported standard
error. Trials are split into fixed-size chunks, each driven by its own child
of ``SeedSequence(seed)``; chunk statistics are merged in chunk order, so a
report depends only on (seed, trials), never on the number of workers.

The closed forms here deliberately avoid :mod:`phasefade.bounds` for the
quantity under test.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from . import bounds, fading, oscillator
from .csvio import render_csv
from .linalg import SymMatrix
from .scenario import LinkScenario, OscillatorSpec

CHUNK = 5000
QPSK = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True)
class McReport:
    label: str
    estimate: float
    std_error: float
    trials: int
    target: float
    passed: bool
    rule: str = "|estimate - target| <= 3 SE"


def _two_sided(label, mean, se, trials, target) -> McReport:
    return McReport(label, float(mean), float(se), trials, float(target),
                    bool(abs(mean - target) <= 3.0 * se))


def _moments(sampler: Callable[[np.random.Generator, int], np.ndarray], trials: int,
             seed: int, workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of the columns of ``sampler`` output over ``trials`` rows."""
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    n_chunks = math.ceil(trials / CHUNK)
    sizes = [CHUNK] * (n_chunks - 1) + [trials - CHUNK * (n_chunks - 1)]
    children = np.random.SeedSequence(seed).spawn(n_chunks)

    def run(i):
        x = np.asarray(sampler(np.random.default_rng(children[i]), sizes[i]), dtype=float)
        x = x.reshape(sizes[i], -1)
        mean = x.mean(axis=0)
        return sizes[i], mean, ((x - mean) ** 2).sum(axis=0)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(i) for i in range(n_chunks)]

    # Chan et al. pairwise merge of (count, mean, M2)
    n, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        total = n + nb
        delta = mb - mean
        mean = mean + delta * (nb / total)
        m2 = m2 + m2b + delta**2 * (n * nb / total)
        n = total
    se = np.sqrt(m2 / (n - 1) / n)
    return mean, se


def _check_constant_modulus(alphabet) -> np.ndarray:
    alphabet = np.asarray(alphabet, dtype=complex)
    power = np.abs(alphabet) ** 2
    if alphabet.size == 0 or not np.allclose(power, power[0], rtol=1e-12, atol=0):
        raise ValueError("the modified FIM oracle needs a constant-modulus alphabet")
    return alphabet / np.sqrt(power[0])


def mc_modified_fim_phase(scenario: LinkScenario, trials: int = 100_000, seed: int = 0, *,
                          alphabet=QPSK, workers: int | None = None) -> list[McReport]:
    """Monte-Carlo modified Fisher information of the phase vector.

    Diagonal entries average the analytic negative second derivative
    2 Re(y* e^{j theta} s) / sigma_w^2 of the log-likelihood; neighbouring
    off-diagonal entries average products of scores, which must vanish.
    Phases are drawn uniformly and independently per symbol.
    """
    unit = _check_constant_modulus(alphabet)
    K = scenario.block_len
    amp = math.sqrt(scenario.es)
    s2w = scenario.sigma2_w

    def sample(rng, n):
        theta = rng.uniform(0.0, 2 * np.pi, (n, K))
        s = amp * unit[rng.integers(0, unit.size, (n, K))]
        w = math.sqrt(s2w / 2) * (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K)))
        y = np.exp(1j * theta) * s + w
        z = np.conj(y) * np.exp(1j * theta) * s
        curvature = 2.0 * z.real / s2w
        score = -2.0 * z.imag / s2w
        return np.hstack([curvature, score[:, :-1] * score[:, 1:]])

    mean, se = _moments(sample, trials, seed, workers)
    target = 2.0 * scenario.es / s2w
    reports = [_two_sided(f"F[{k + 1},{k + 1}]", mean[k], se[k], trials, target) for k in range(K)]
    reports += [_two_sided(f"F[{k + 1},{k + 2}]", mean[K + k], se[K + k], trials, 0.0)
                for k in range(K - 1)]
    return reports


def lmmse_error_closed_form(R: SymMatrix, snr_awgn: float) -> np.ndarray:
    """Per-symbol complex-channel LMMSE error variance 2 diag(r R (R + r I)^-1), r = 1/(2 snr)."""
    r = 0.5 / snr_awgn
    R = np.asarray(R, dtype=float)
    K = R.shape[0]
    err = r * linalg.solve(R + r * np.eye(K), R, assume_a="pos")
    return 2.0 * np.diag(err)


@dataclass(frozen=True)
class LmmseCheck:
    closed_form: np.ndarray
    bound: np.ndarray
    max_rel_diff: float
    reports: list[McReport]
    tolerance: float = 1e-10

    @property
    def closed_form_passed(self) -> bool:
        return self.max_rel_diff < self.tolerance

    @property
    def passed(self) -> bool:
        return self.closed_form_passed and all(r.passed for r in self.reports)


def lmmse_channel_error(R: SymMatrix, snr_awgn: float, trials: int = 10_000, seed: int = 0, *,
                        workers: int | None = None) -> LmmseCheck:
    """Compare the channel MBCRB with the exact and the simulated LMMSE error.

    Known unit-modulus QPSK pilots; the estimator de-rotates y_k by s_k and
    applies the Wiener filter R (R + r I)^-1 to each quadrature component.
    """
    if not snr_awgn > 0:
        raise ValueError("snr_awgn must be positive")
    R_arr = np.asarray(R, dtype=float)
    K = R_arr.shape[0]
    closed = lmmse_error_closed_form(R_arr, snr_awgn)
    bound = bounds.ch_error_variances(bounds.bim_channel(snr_awgn, SymMatrix(R_arr))).variances
    rel = float(np.max(np.abs(closed - bound) / bound))

    r = 0.5 / snr_awgn
    L = linalg.cholesky(R_arr, lower=True)
    W = linalg.solve(R_arr + r * np.eye(K), R_arr, assume_a="pos").T
    # Es = 1 without loss of generality: only snr_awgn enters
    sigma_w = math.sqrt(1.0 / snr_awgn)

    def sample(rng, n):
        h = (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K))) @ L.T
        s = QPSK[rng.integers(0, 4, (n, K))]
        w = sigma_w / math.sqrt(2) * (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K)))
        z = (h * s + w) * np.conj(s)
        h_hat = z @ W.T
        return np.abs(h_hat - h) ** 2

    mean, se = _moments(sample, trials, seed, workers)
    reports = [_two_sided(f"mse[{k + 1}]", mean[k], se[k], trials, bound[k]) for k in range(K)]
    return LmmseCheck(closed, bound, rel, reports)


def rts_smoother_variances(K: int, q: float, r: float, p0: float):
    """Scalar Kalman gains and smoothed variances for a random walk seen in white noise.

    Returns (filter gains, smoother gains, smoothed variances).
    """
    gains = np.empty(K)
    p_filt = np.empty(K)
    p_pred = np.empty(K)
    p = p0
    for k in range(K):
        if k:
            p = p_filt[k - 1] + q
        p_pred[k] = p
        gains[k] = p / (p + r)
        p_filt[k] = (1.0 - gains[k]) * p
    back = np.zeros(K)
    p_smooth = p_filt.copy()
    for k in range(K - 2, -1, -1):
        back[k] = p_filt[k] / p_pred[k + 1]
        p_smooth[k] = p_filt[k] + back[k] ** 2 * (p_smooth[k + 1] - p_pred[k + 1])
    return gains, back, p_smooth


def smoother_phase_mse(scenario: LinkScenario, osc: OscillatorSpec | None = None,
                       trials: int = 10_000, seed: int = 0, *, sigma2_zeta: float | None = None,
                       sigma2_theta1: float = bounds.DEFAULT_SIGMA2_THETA1,
                       tightness: float = 1.5, workers: int | None = None) -> list[McReport]:
    """Empirical per-symbol MSE of a fixed-interval smoother against the phase MBCRB.

    Received samples follow the full nonlinear model with a uniform first
    phase and known QPSK symbols. The smoother runs on unwrapped phase
    measurements, treating them as the phase plus white noise of variance
    sigma_w^2 / (2 Es). Symbol k passes when its MSE is at least the bound
    minus 3 SE and at most ``tightness`` times the bound.
    """
    if sigma2_zeta is None:
        osc = osc if osc is not None else scenario.oscillator
        if osc is None:
            raise ValueError("no oscillator given")
        sigma2_zeta = oscillator.resolve_innovation_variance(osc, scenario)
    if not sigma2_zeta > 0:
        raise ValueError("sigma2_zeta must be positive")
    K = scenario.block_len
    es, s2w = scenario.es, scenario.sigma2_w
    r = s2w / (2.0 * es)
    gains, back, _ = rts_smoother_variances(K, sigma2_zeta, r, sigma2_theta1)
    amp = math.sqrt(es)
    step = math.sqrt(sigma2_zeta)

    def sample(rng, n):
        theta = rng.uniform(0.0, 2 * np.pi, (n, 1)) + np.concatenate(
            [np.zeros((n, 1)), np.cumsum(step * rng.standard_normal((n, K - 1)), axis=1)], axis=1)
        s = amp * QPSK[rng.integers(0, 4, (n, K))]
        w = math.sqrt(s2w / 2) * (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K)))
        y = np.exp(1j * theta) * s + w
        z = np.unwrap(np.angle(y * np.conj(s)), axis=1)
        z += np.where(z[:, :1] < 0, 2 * np.pi, 0.0)  # align with the [0, 2pi) prior
        m = np.empty((n, K))
        pred = np.full(n, np.pi)
        for k in range(K):
            m[:, k] = pred + gains[k] * (z[:, k] - pred)
            pred = m[:, k]
        for k in range(K - 2, -1, -1):
            m[:, k] += back[k] * (m[:, k + 1] - m[:, k])
        err = np.angle(np.exp(1j * (m - theta)))
        return err**2

    mean, se = _moments(sample, trials, seed, workers)
    bound = bounds.phase_bound(K, scenario.snr_awgn, sigma2_zeta, sigma2_theta1).variances
    reports = []
    for k in range(K):
        ok = mean[k] >= bound[k] - 3 * se[k] and mean[k] <= tightness * bound[k]
        reports.append(McReport(f"mse[{k + 1}]", float(mean[k]), float(se[k]), trials,
                                float(bound[k]), bool(ok),
                                f"bound - 3 SE <= estimate <= {tightness:g} bound"))
    return reports


def mc_phase_error_power(sigma2_eps: float, trials: int = 1_000_000, seed: int = 0, *,
                         workers: int | None = None) -> McReport:
    """E[2 (1 - cos eps)] for eps ~ N(0, sigma2_eps) against 2 (1 - exp(-sigma2_eps / 2))."""
    if sigma2_eps < 0:
        raise ValueError("sigma2_eps must be non-negative")
    sd = math.sqrt(sigma2_eps)

    def sample(rng, n):
        return 2.0 * (1.0 - np.cos(sd * rng.standard_normal(n)))

    mean, se = _moments(sample, trials, seed, workers)
    target = -2.0 * math.expm1(-0.5 * sigma2_eps)
    return _two_sided(f"phase_error_power[{sigma2_eps:g}]", mean[0], se[0], trials, target)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    reports: list[McReport]
    extra_passed: bool = True
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.extra_passed and all(r.passed for r in self.reports)


def reference_scenario() -> LinkScenario:
    """IEEE 802.15.3c-like link: 60 GHz, 2.16 GHz, -95 dBc/Hz at 1 MHz, 20 dB, K = 100."""
    return LinkScenario.from_db(100, 20.0, 60e9, 2.16e9, 0.5,
                                OscillatorSpec.from_ssb(-95.0, 1e6))


def run_suite(seed: int = 0, trials_scale: float = 1.0, workers: int | None = None
              ) -> list[SuiteResult]:
    """Run every oracle at its default size (scaled by ``trials_scale``)."""
    ss = np.random.SeedSequence(seed)
    seeds = [int(c.generate_state(1)[0]) for c in ss.spawn(4)]
    scale = lambda n: max(2, int(round(n * trials_scale)))  # noqa: E731

    ref = reference_scenario()
    out = []

    fim = mc_modified_fim_phase(ref.replace(block_len=4), scale(100_000), seeds[0], workers=workers)
    out.append(SuiteResult("modified FIM (phase), K=4", fim))

    R = fading.correlation_matrix(20, fading.ClarkeParams.from_normalized(0.01))
    lm = lmmse_channel_error(R, ref.snr_awgn, scale(10_000), seeds[1], workers=workers)
    out.append(SuiteResult("LMMSE channel error, K=20, fD/BW=0.01", lm.reports,
                           lm.closed_form_passed,
                           f"closed form vs bound: max rel diff {lm.max_rel_diff:.2e}"))

    sm = smoother_phase_mse(ref, trials=scale(10_000), seed=seeds[2], workers=workers)
    out.append(SuiteResult("smoother phase MSE, K=100", sm))

    powers = [mc_phase_error_power(v, scale(1_000_000), seeds[3] + i, workers=workers)
              for i, v in enumerate((0.0, 0.01, 0.25, 1.0))]
    out.append(SuiteResult("phase error power", powers))
    return out


def suite_summary(results: list[SuiteResult]) -> str:
    lines = []
    for res in results:
        n_fail = sum(not r.passed for r in res.reports)
        status = "PASS" if res.passed else "FAIL"
        lines.append(f"[{status}] {res.name}: {len(res.reports) - n_fail}/{len(res.reports)} "
                     f"entries within contract" + (f"; {res.detail}" if res.detail else ""))
        for r in res.reports:
            if not r.passed:
                lines.append(f"    {r.label}: estimate {r.estimate:.6g} +/- {r.std_error:.2g}, "
                             f"target {r.target:.6g} ({r.rule})")
    return "\n".join(lines)


def suite_csv(results: list[SuiteResult], meta: dict | None = None) -> str:
    rows = [(res.name, r.label, r.estimate, r.std_error, r.trials, r.target, r.passed)
            for res in results for r in res.reports]
    return render_csv(["oracle", "entry", "estimate", "std_error", "trials", "target", "passed"],
                      rows, meta)
