import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasefade.csvio import read_csv
from phasefade.scenario import LinkScenario, OscillatorSpec, builtin_technology
from phasefade.snr import (
    BandwidthRule,
    block_snr_channel,
    block_snr_phase,
    snr_after_ch_compensation,
    snr_after_pn_compensation,
    sweep_equal_error,
    sweep_f0,
    sweep_matched_bandwidths,
    to_db,
)

TABLE_LINK = LinkScenario.from_db(100, 20.0, 60e9, 2.16e9, 0.5, OscillatorSpec.from_ssb(-95, 1e6))


class TestFormulas:
    def test_perfect_phase_estimate(self):
        assert snr_after_pn_compensation(1.0, 0.01, 0.0) == pytest.approx(100.0, rel=1e-15)

    def test_perfect_channel_estimate(self):
        assert snr_after_ch_compensation(1.0, 0.01, 0.0) == pytest.approx(100.0, rel=1e-15)

    def test_phase_example(self):
        # 30-digit mpmath: 1 / (2 (1 - exp(-5e-5)) + 0.01)
        v = snr_after_pn_compensation(1.0, 0.01, 1e-4)
        assert v == pytest.approx(99.009925497097859, rel=1e-13)
        assert snr_after_pn_compensation(1.0, 0.01, 1e-4 * 10) < v

    def test_channel_example(self):
        # 1 / (1e-4 * 1.01 + 0.01)
        assert snr_after_ch_compensation(1.0, 0.01, 1e-4) == pytest.approx(
            1 / (1.01e-4 + 0.01), rel=1e-15)

    def test_db_examples(self):
        assert to_db(snr_after_pn_compensation(1.0, 0.01, 0.01)) == pytest.approx(
            16.99512307, abs=1e-8)
        assert to_db(snr_after_ch_compensation(1.0, 0.01, 0.01)) == pytest.approx(
            16.96803943, abs=1e-8)

    def test_phase_saturates(self):
        # large phase errors: signal power averages to zero, SNR -> Es/(2 Es + sigma_w^2)
        assert snr_after_pn_compensation(1.0, 0.01, 1e3) == pytest.approx(1 / 2.01, rel=1e-12)

    def test_vectorized(self):
        out = snr_after_pn_compensation(1.0, 0.01, np.array([0.0, 1e-3]))
        assert out.shape == (2,)

    @pytest.mark.parametrize("fn", [snr_after_pn_compensation, snr_after_ch_compensation])
    def test_rejects_bad_inputs(self, fn):
        with pytest.raises(ValueError):
            fn(1.0, 0.01, -1e-3)
        with pytest.raises(ValueError):
            fn(1.0, 0.0, 1e-3)

    @given(st.floats(1e-8, 1e2), st.floats(-20, 40))
    def test_equal_variance_dominance(self, s2, snr_db):
        sigma2_w = 10 ** (-snr_db / 10)
        assert snr_after_ch_compensation(1.0, sigma2_w, s2) < snr_after_pn_compensation(1.0, sigma2_w, s2)

    @given(st.floats(0, 1e2), st.floats(-20, 40))
    def test_never_above_awgn(self, s2, snr_db):
        sigma2_w = 10 ** (-snr_db / 10)
        ceiling = 1.0 / sigma2_w
        assert snr_after_pn_compensation(1.0, sigma2_w, s2) <= ceiling * (1 + 1e-15)
        assert snr_after_ch_compensation(1.0, sigma2_w, s2) <= ceiling * (1 + 1e-15)


class TestBlockSnr:
    def test_phase_profile(self):
        prof = block_snr_phase(TABLE_LINK)
        assert prof.per_symbol.shape == (100,)
        assert np.all(prof.per_symbol < 100.0)
        assert prof.average_db == pytest.approx(19.9524, abs=5e-4)
        # edges are worse than the middle
        assert prof.per_symbol[0] < prof.per_symbol[50]

    def test_channel_profile(self):
        prof = block_snr_channel(TABLE_LINK)
        assert prof.average_db == pytest.approx(19.9555, abs=5e-4)

    def test_channel_profile_is_mirror_symmetric(self):
        s = TABLE_LINK.replace(velocity=30.0)
        prof = block_snr_channel(s)
        np.testing.assert_allclose(prof.per_symbol, prof.per_symbol[::-1], rtol=1e-10)

    def test_linear_average_not_below_db_average(self):
        prof = block_snr_phase(TABLE_LINK.replace(block_len=20))
        assert prof.average_db >= prof.average_db_of_db  # Jensen

    def test_explicit_sigma2_zeta(self):
        a = block_snr_phase(TABLE_LINK.replace(oscillator=None), sigma2_zeta=1e-3)
        b = block_snr_phase(TABLE_LINK, OscillatorSpec(sigma2_zeta=1e-3))
        np.testing.assert_array_equal(a.per_symbol, b.per_symbol)

    def test_missing_oscillator(self):
        with pytest.raises(ValueError):
            block_snr_phase(TABLE_LINK.replace(oscillator=None))

    def test_single_symbol(self):
        s = TABLE_LINK.replace(block_len=1)
        prof = block_snr_phase(s, sigma2_zeta=0.0)
        # only the prior and one observation: variance 1/(2 snr + 3/pi^2)
        var = 1 / (200 + 3 / math.pi**2)
        assert prof.per_symbol[0] == pytest.approx(snr_after_pn_compensation(1.0, 0.01, var), rel=1e-13)

    def test_profile_csv(self):
        meta, rows = read_csv(block_snr_channel(TABLE_LINK.replace(block_len=5)).to_csv())
        assert meta["impairment"] == "channel"
        assert list(rows[0]) == ["k", "sigma2_eps", "snr_db", "snr_linear"]
        assert len(rows) == 5


class TestBandwidthRule:
    def test_fixed(self):
        assert BandwidthRule.fixed(1e6)(5e9) == 1e6

    def test_proportional(self):
        assert BandwidthRule.proportional(1e-3)(5e9) == 5e6

    def test_invalid(self):
        with pytest.raises(ValueError):
            BandwidthRule("sliding", 1.0)
        with pytest.raises(ValueError):
            BandwidthRule.fixed(0.0)


class TestSweepF0:
    template = LinkScenario.from_db(100, 20.0, 1e9, 1e6)
    grid = np.logspace(9, 11, 5)

    def test_floor_series(self):
        res = sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), "floor",
                       tech=builtin_technology("Si CMOS"))
        assert res.ok
        slope = np.diff(to_db(res.column("sigma2_zeta"))) / np.diff(np.log10(self.grid))
        np.testing.assert_allclose(slope, 20.0, atol=1e-9)

    def test_phase_series_decreases(self):
        res = sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), "phase",
                       tech=builtin_technology("Si CMOS"))
        assert np.all(np.diff(res.column("avg_snr_db")) < 0)

    def test_channel_series_proportional_is_flat(self):
        res = sweep_f0(self.template.replace(velocity=10.0), self.grid,
                       BandwidthRule.proportional(1e-3), "channel")
        assert np.ptp(res.column("avg_snr_db")) < 1e-9

    def test_workers_preserve_order(self):
        kw = dict(tech=builtin_technology("GaN HEMT"))
        a = sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), "phase", **kw)
        b = sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), "phase", workers=4, **kw)
        np.testing.assert_array_equal(a.column("avg_snr_db"), b.column("avg_snr_db"))

    def test_failed_point_is_flagged(self):
        # no bias and a static channel: R is singular at every point
        res = sweep_f0(self.template, self.grid[:2], BandwidthRule.fixed(1e6), "channel",
                       lag0_bias=0.0)
        assert not res.ok
        assert np.all(np.isnan(res.column("avg_snr_db")))
        assert all("NotPositiveDefinite" in e for e in res.errors)

    @pytest.mark.parametrize("kwargs", [
        dict(impairment="noise"),
        dict(impairment="floor"),
        dict(impairment="phase"),
        dict(impairment="phase", tech=builtin_technology("Si CMOS"), osc=OscillatorSpec(f3db=1.0)),
    ])
    def test_invalid_requests(self, kwargs):
        with pytest.raises(ValueError):
            sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), **kwargs)

    @pytest.mark.parametrize("grid", [[], [2e9, 1e9]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            sweep_f0(self.template, grid, BandwidthRule.fixed(1e6), "floor",
                     tech=builtin_technology("Si CMOS"))

    def test_csv(self):
        res = sweep_f0(self.template, self.grid, BandwidthRule.fixed(1e6), "floor",
                       tech=builtin_technology("Si CMOS"))
        meta, rows = read_csv(res.to_csv())
        assert list(rows[0]) == ["f0_hz", "sigma2_zeta", "error"]
        assert float(rows[-1]["f0_hz"]) == pytest.approx(1e11)
        assert meta["technology"] == "Si CMOS"
        assert meta["bw_rule"] == "bw=1e+06Hz"


class TestMatched:
    def test_ordering_and_growth(self):
        grid = np.logspace(-6, -2, 9)
        res = sweep_matched_bandwidths(grid, LinkScenario.from_db(100, 20.0, 1e9, 1e6))
        assert res.ok
        assert np.all(res.column("gap_db") > 0)
        assert np.all(np.diff(res.column("gap_db")) > 0)

    def test_domain(self):
        with pytest.raises(ValueError):
            sweep_matched_bandwidths([0.1, 0.6], LinkScenario.from_db(10, 20.0, 1e9, 1e6))


def test_equal_error_sweep():
    grid = np.logspace(-6, 1, 15)
    res = sweep_equal_error(grid, 1.0, 0.01)
    assert np.all(res.column("snr_ch_db") < res.column("snr_pn_db"))
    assert res.column("snr_pn_db")[0] == pytest.approx(20.0, abs=1e-3)
