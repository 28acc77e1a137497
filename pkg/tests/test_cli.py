import subprocess
import sys

import numpy as np
import pytest

from phasefade.cli import UsageError, main, parse_range, table2_rows
from phasefade.csvio import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParseRange:
    def test_log_default(self):
        g = parse_range("1e9:100e9")
        assert len(g) == 21 and g[0] == 1e9 and g[-1] == 100e9
        np.testing.assert_allclose(np.diff(np.log10(g)), 0.1)

    def test_points(self):
        assert len(parse_range("1:10:4")) == 4

    def test_list_and_single(self):
        assert parse_range("1,2,5").tolist() == [1, 2, 5]
        assert parse_range("3e9").tolist() == [3e9]

    @pytest.mark.parametrize("text", ["", "a:b", "10:1", "0:1", "1:2:3:4", "1:2:0"])
    def test_bad(self, text):
        with pytest.raises(UsageError):
            parse_range(text)


def test_tech_floor(capsys):
    code, out, _ = run(capsys, "tech-floor", "--f0", "1e9:1e11:3")
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["command"] == "tech-floor"
    assert meta["units"].startswith("f0 Hz")
    cols = list(rows[0])
    assert cols == ["f0_hz", "sigma2_zeta[Si CMOS|bw=1e+06Hz]", "sigma2_zeta[Si CMOS|bw=0.001*f0]",
                    "sigma2_zeta[GaN HEMT|bw=1e+06Hz]", "sigma2_zeta[GaN HEMT|bw=0.001*f0]"]
    si = [float(r[cols[1]]) for r in rows]
    assert si[1] / si[0] == pytest.approx(100.0, rel=1e-8)


def test_version_header(capsys):
    from phasefade import __version__
    _, out, _ = run(capsys, "tech-floor", "--f0", "1e9")
    assert out.splitlines()[0] == f"# phasefade {__version__}"


def test_unknown_technology(capsys):
    code, out, err = run(capsys, "tech-floor", "--tech", "Unobtainium")
    assert code == 2 and out == ""
    assert "Unobtainium" in err


def test_empty_technology_list(capsys):
    code, _, err = run(capsys, "tech-floor", "--tech", " , ")
    assert code == 2 and "empty" in err


def test_bad_grid_is_usage_error(capsys):
    code, _, _ = run(capsys, "snr-pn", "--f0", "nope")
    assert code == 2


def test_snr_pn(capsys):
    code, out, _ = run(capsys, "snr-pn", "--f0", "1e9:1e11:3", "--tech", "Si CMOS", "--bw-fixed", "1e6")
    assert code == 0
    _, rows = read_csv(out)
    col = "avg_snr_db[Si CMOS|bw=1e+06Hz]"
    vals = [float(r[col]) for r in rows]
    assert vals[0] > vals[1] > vals[2]


def test_snr_pn_from_scenario(tmp_path, capsys):
    cfg = tmp_path / "link.yaml"
    cfg.write_text("K: 50\nes_over_sigma2w_db: 20\nf0_hz: 60e9\nbw_hz: 2.16e9\n"
                   "oscillator:\n  f3db_hz: 1000\n")
    code, out, _ = run(capsys, "snr-pn", "--scenario", str(cfg), "--f0", "1e9:1e10:2",
                       "--bw-fixed", "1e6")
    assert code == 0
    _, rows = read_csv(out)
    assert list(rows[0])[1] == "avg_snr_db[f3db|bw=1e+06Hz]"


def test_bad_scenario(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("K: 0\nes_over_sigma2w_db: 20\nf0_hz: 1e9\nbw_hz: 1e6\n")
    code, _, err = run(capsys, "snr-pn", "--scenario", str(cfg))
    assert code == 2 and "K" in err
    code, _, _ = run(capsys, "snr-pn", "--scenario", str(tmp_path / "missing.yaml"))
    assert code == 2


def test_snr_ch(capsys):
    code, out, _ = run(capsys, "snr-ch", "--f0", "1e9:1e11:3")
    assert code == 0
    _, rows = read_csv(out)
    slow = [float(r["avg_snr_db[v=1km/h|bw=1e+06Hz]"]) for r in rows]
    fast = [float(r["avg_snr_db[v=50km/h|bw=1e+06Hz]"]) for r in rows]
    assert all(f < s for s, f in zip(slow, fast))


def test_snr_ch_singular_point_exits_numerical(capsys):
    code, out, err = run(capsys, "snr-ch", "--f0", "1e9,2e9", "--velocity", "0", "--lag0-bias", "0",
                         "--bw-fixed", "1e6")
    assert code == 3
    assert "nan" in out and "error:" in err


def test_table2(capsys):
    code, out, _ = run(capsys, "table2")
    assert code == 0
    _, rows = read_csv(out)
    assert [r["standard"] for r in rows] == ["IEEE 802.15.3c", "IEEE 802.11b"]
    for r in rows:
        assert abs(float(r["snr_ch_db"]) - 19.956) < 0.01


def test_table2_to_file_prints_summary(tmp_path, capsys):
    dest = tmp_path / "t2.csv"
    code, out, _ = run(capsys, "table2", "--out", str(dest))
    assert code == 0 and "SNR_PN" in out
    assert read_csv(dest.read_text())[1][0]["standard"] == "IEEE 802.15.3c"


def test_table2_higher_snr_raises_both():
    lo = table2_rows(20.0)
    hi = table2_rows(30.0)
    for a, b in zip(lo, hi):
        assert b[3] > a[3] and b[4] > a[4]


def test_matched(capsys):
    code, out, _ = run(capsys, "matched", "--grid", "1e-6:1e-2:5")
    assert code == 0
    _, rows = read_csv(out)
    assert all(float(r["gap_db"]) > 0 for r in rows)


def test_matched_out_of_domain(capsys):
    code, _, err = run(capsys, "matched", "--grid", "0.1,0.7")
    assert code == 3 and "0.5" in err


def test_equal_error(capsys):
    code, out, _ = run(capsys, "equal-error", "--grid", "1e-4:1:5")
    assert code == 0
    _, rows = read_csv(out)
    assert all(float(r["snr_ch_db"]) < float(r["snr_pn_db"]) for r in rows)


def test_paths_phase_is_seeded(capsys):
    _, a, _ = run(capsys, "paths", "phase", "--K", "20", "--sigma2-zeta", "1e-3", "--seed", "5")
    _, b, _ = run(capsys, "paths", "phase", "--K", "20", "--sigma2-zeta", "1e-3", "--seed", "5")
    assert a == b
    assert len(read_csv(a)[1]) == 20


def test_paths_phase_needs_variance(capsys):
    code, _, _ = run(capsys, "paths", "phase")
    assert code == 2


def test_paths_channel(capsys):
    code, out, _ = run(capsys, "paths", "channel", "--K", "10", "--seed", "1")
    assert code == 0
    assert list(read_csv(out)[1][0]) == ["index", "h_real", "h_imag"]


def test_validate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, out, _ = run(capsys, "validate", "--seed", "7", "--trials", "0.1", "--out", str(a))
    assert code == 0 and out.rstrip().endswith("oracle suite: PASS")
    run(capsys, "validate", "--seed", "7", "--trials", "0.1", "--out", str(b), "--workers", "2")
    # only the recorded workers argument may differ
    strip = lambda p: [ln for ln in p.read_text().splitlines() if not ln.startswith("# arguments")]  # noqa: E731
    assert strip(a) == strip(b)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "phasefade", "--version"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "phasefade" in proc.stdout


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
