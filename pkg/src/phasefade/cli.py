"""Command-line driver: SNR tables, sweeps, sample paths and the oracle suite.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure,
4 oracle validation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, fading, oracle, oscillator, snr
from .csvio import render_csv
from .linalg import NotPositiveDefiniteError
from .scenario import (
    KMH_TO_MPS,
    ConfigError,
    LinkScenario,
    OscillatorSpec,
    builtin_technology,
    load_scenario,
)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

TABLE2 = (
    # standard, f0, bw, SSB level at 1 MHz offset
    ("IEEE 802.15.3c", 60e9, 2.16e9, -95.0),
    ("IEEE 802.11b", 2.4e9, 0.02e9, -115.0),
)


class UsageError(Exception):
    pass


def parse_range(text: str, *, points: int = 21, log: bool = True) -> np.ndarray:
    """``start:stop[:points]`` (log-spaced by default), a comma list, or one value."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = float(parts[0]), float(parts[1])
            n = int(parts[2]) if len(parts) == 3 else points
            if n < 1 or stop < start or (n > 1 and stop == start):
                raise ValueError
            if n == 1:
                return np.array([start])
            if log:
                if start <= 0:
                    raise ValueError
                grid = np.geomspace(start, stop, n)
                grid[0], grid[-1] = start, stop
                return grid
            return np.linspace(start, stop, n)
        values = np.array([float(v) for v in text.split(",") if v.strip()])
        if values.size == 0:
            raise ValueError
        return values
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop[:points], a list, or a value") from None


def parse_list(text: str | None) -> list[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def _floats(text: str | None, what: str) -> list[float]:
    try:
        return [float(t) for t in parse_list(text)]
    except ValueError:
        raise UsageError(f"bad {what} list {text!r}") from None


def _bw_rules(args, default_both: bool = True) -> list[snr.BandwidthRule]:
    fixed = _floats(args.bw_fixed, "--bw-fixed")
    prop = _floats(args.bw_prop, "--bw-prop")
    if not fixed and not prop and default_both:
        fixed, prop = [1e6], [1e-3]
    try:
        rules = [snr.BandwidthRule.fixed(b) for b in fixed]
        rules += [snr.BandwidthRule.proportional(p) for p in prop]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not rules:
        raise UsageError("no bandwidth rule given")
    return rules


def _technologies(args):
    names = parse_list(args.tech)
    if not names:
        raise UsageError("empty technology list")
    try:
        return [builtin_technology(n) for n in names]
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _template(args, *, default_f0=10e9, default_bw=1e6) -> LinkScenario:
    if getattr(args, "scenario", None):
        try:
            text = Path(args.scenario).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read scenario: {exc}") from None
        scen = load_scenario(text)
    else:
        scen = LinkScenario.from_db(args.K, 20.0, default_f0, default_bw)
    if getattr(args, "es_over_n0", None) is not None:
        scen = scen.replace(es=1.0, sigma2_w=10.0 ** (-args.es_over_n0 / 10.0))
    if getattr(args, "K", None) is not None and args.K != scen.block_len:
        scen = scen.replace(block_len=args.K)
    return scen


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def _meta(args, **extra) -> dict:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and v is not None}
    return {"command": args.command, "arguments": resolved, **extra}


def _merge(sweeps: list[tuple[str, snr.SweepResult]], column: str) -> tuple[list[str], list[list]]:
    grid = sweeps[0][1].grid
    names = [f"{column}[{label}]" for label, _ in sweeps]
    rows = []
    for i, x in enumerate(grid):
        rows.append([x] + [float(s.series[column][i]) for _, s in sweeps])
    return names, rows


def _sweep_status(sweeps) -> int:
    failed = [(label, s.grid[i], err) for label, s in sweeps
              for i, err in enumerate(s.errors) if err]
    for label, x, err in failed:
        print(f"error: {label} at {x:g}: {err}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else 0


def cmd_tech_floor(args) -> int:
    techs = _technologies(args)
    grid = parse_range(args.f0)
    template = LinkScenario.from_db(1, 20.0, grid[0], 1e6)
    sweeps = []
    for tech in techs:
        for rule in _bw_rules(args):
            res = snr.sweep_f0(template, grid, rule, "floor", tech=tech)
            sweeps.append((f"{tech.name}|{rule.label}", res))
    names, rows = _merge(sweeps, "sigma2_zeta")
    _emit(render_csv(["f0_hz", *names], rows, _meta(args, units="f0 Hz, sigma2_zeta rad^2")),
          args.out)
    return _sweep_status(sweeps)


def cmd_snr_pn(args) -> int:
    template = _template(args)
    grid = parse_range(args.f0)
    sweeps = []
    if args.scenario and not args.tech and template.oscillator is not None:
        sources = [(template.oscillator.kind, {"osc": template.oscillator})]
    else:
        args.tech = args.tech or "Si CMOS,GaN HEMT"
        sources = [(t.name, {"tech": t}) for t in _technologies(args)]
    for label, source in sources:
        for rule in _bw_rules(args):
            res = snr.sweep_f0(template, grid, rule, "phase", workers=args.workers, **source)
            sweeps.append((f"{label}|{rule.label}", res))
    names, rows = _merge(sweeps, "avg_snr_db")
    _emit(render_csv(["f0_hz", *names], rows,
                     _meta(args, scenario=template.to_dict(), units="f0 Hz, SNR dB")), args.out)
    return _sweep_status(sweeps)


def cmd_snr_ch(args) -> int:
    template = _template(args)
    grid = parse_range(args.f0)
    velocities = _floats(args.velocity, "--velocity") if args.velocity else [1.0, 50.0]
    if any(v < 0 for v in velocities):
        raise UsageError("velocities must be non-negative")
    sweeps = []
    for v in velocities:
        for rule in _bw_rules(args):
            res = snr.sweep_f0(template, grid, rule, "channel", velocity=v * KMH_TO_MPS,
                               workers=args.workers, lag0_bias=args.lag0_bias)
            sweeps.append((f"v={v:g}km/h|{rule.label}", res))
    names, rows = _merge(sweeps, "avg_snr_db")
    _emit(render_csv(["f0_hz", *names], rows,
                     _meta(args, scenario=template.to_dict(), units="f0 Hz, SNR dB")), args.out)
    return _sweep_status(sweeps)


def table2_rows(es_over_n0_db: float = 20.0, K: int = 100, v_kmh: float = 0.5,
                lag0_bias: float = fading.DEFAULT_LAG0_BIAS) -> list[list]:
    rows = []
    for name, f0, bw, level in TABLE2:
        scen = LinkScenario.from_db(K, es_over_n0_db, f0, bw, v_kmh,
                                    OscillatorSpec.from_ssb(level, 1e6))
        ch = snr.block_snr_channel(scen, lag0_bias=lag0_bias).average_db
        pn = snr.block_snr_phase(scen).average_db
        rows.append([name, f0, bw, ch, pn])
    return rows


def cmd_table2(args) -> int:
    rows = table2_rows(args.es_over_n0, args.K, args.velocity_kmh, args.lag0_bias)
    text = render_csv(["standard", "f0_hz", "bw_hz", "snr_ch_db", "snr_pn_db"], rows,
                      _meta(args, oscillator="SSB level at 1 MHz offset: 802.15.3c -95 dBc/Hz, "
                                             "802.11b -115 dBc/Hz"))
    _emit(text, args.out)
    if args.out not in (None, "-"):
        for name, f0, bw, ch, pn in rows:
            print(f"{name:16s} f0={f0 / 1e9:g} GHz  BW={bw / 1e9:g} GHz  "
                  f"SNR_CH={ch:.3f} dB  SNR_PN={pn:.3f} dB")
    return 0


def cmd_matched(args) -> int:
    template = _template(args)
    grid = parse_range(args.grid)
    res = snr.sweep_matched_bandwidths(grid, template, workers=args.workers,
                                       lag0_bias=args.lag0_bias)
    _emit(res.to_csv(_meta(args, units="normalized fD/BW = f3dB/BW, SNR dB")), args.out)
    return _sweep_status([("matched", res)])


def cmd_equal_error(args) -> int:
    grid = parse_range(args.grid)
    res = snr.sweep_equal_error(grid, 1.0, 10.0 ** (-args.es_over_n0 / 10.0))
    _emit(res.to_csv(_meta(args, units="sigma2_eps (rad^2 or channel power), SNR dB")), args.out)
    return 0


def cmd_paths(args) -> int:
    template = _template(args)
    K = template.block_len
    if args.which == "phase":
        if args.sigma2_zeta is not None:
            s2z = args.sigma2_zeta
        elif template.oscillator is not None:
            s2z = oscillator.resolve_innovation_variance(template.oscillator, template)
        else:
            raise UsageError("phase paths need --sigma2-zeta or a scenario with an oscillator")
        path = oscillator.wiener_sample_path(K, s2z, seed=args.seed)
        rows = [(i, t) for i, t in enumerate(path.theta, start=1)]
        text = render_csv(["index", "theta_rad"], rows,
                          _meta(args, sigma2_zeta=s2z, scenario=template.to_dict()))
    else:
        params = fading.ClarkeParams(template.doppler, template.bw)
        path = fading.clarke_sample_path(K, params, args.lag0_bias, seed=args.seed)
        rows = [(i, h.real, h.imag) for i, h in enumerate(path.h, start=1)]
        text = render_csv(["index", "h_real", "h_imag"], rows,
                          _meta(args, fd_hz=params.fd, scenario=template.to_dict()))
    _emit(text, args.out)
    return 0


def cmd_validate(args) -> int:
    results = oracle.run_suite(seed=args.seed, trials_scale=args.trials, workers=args.workers)
    summary = oracle.suite_summary(results)
    if args.out:
        _emit(oracle.suite_csv(results, _meta(args)), args.out)
    print(summary)
    ok = all(r.passed for r in results)
    print("oracle suite: " + ("PASS" if ok else "FAIL"))
    return 0 if ok else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phasefade", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, *, scenario=True, workers=True):
        sp.add_argument("--out", "-o", help="output CSV path (default: stdout)")
        if scenario:
            sp.add_argument("--scenario", help="YAML scenario file")
            sp.add_argument("--es-over-n0", type=float, dest="es_over_n0",
                            help="Es/sigma_w^2 in dB (overrides the scenario)")
            sp.add_argument("--K", type=int, default=None, help="block length (default 100)")
        if workers:
            sp.add_argument("--workers", type=int, default=None, help="threads for sweep points")

    def bw(sp):
        sp.add_argument("--bw-fixed", help="comma list of fixed bandwidths [Hz]")
        sp.add_argument("--bw-prop", help="comma list of bandwidth/f0 ratios")

    sp = sub.add_parser("tech-floor", help="technology floor of the innovation variance vs f0")
    common(sp, scenario=False, workers=False)
    sp.add_argument("--tech", default="Si CMOS,GaN HEMT", help="comma list of technologies")
    sp.add_argument("--f0", default="1e9:100e9", help="carrier grid start:stop[:points]")
    bw(sp)
    sp.set_defaults(func=cmd_tech_floor)

    sp = sub.add_parser("snr-pn", help="block SNR after phase-noise compensation vs f0")
    common(sp)
    sp.add_argument("--tech", default=None, help="comma list of technologies (floor oscillators)")
    sp.add_argument("--f0", default="1e9:100e9")
    bw(sp)
    sp.set_defaults(func=cmd_snr_pn)

    sp = sub.add_parser("snr-ch", help="block SNR after fading compensation vs f0")
    common(sp)
    sp.add_argument("--velocity", default=None, help="comma list of velocities [km/h]")
    sp.add_argument("--f0", default="1e9:100e9")
    sp.add_argument("--lag0-bias", type=float, default=fading.DEFAULT_LAG0_BIAS)
    bw(sp)
    sp.set_defaults(func=cmd_snr_ch)

    sp = sub.add_parser("table2", help="SNR comparison for IEEE 802.15.3c and 802.11b")
    sp.add_argument("--out", "-o")
    sp.add_argument("--es-over-n0", type=float, default=20.0, dest="es_over_n0")
    sp.add_argument("--K", type=int, default=100)
    sp.add_argument("--velocity", type=float, default=0.5, dest="velocity_kmh",
                    help="relative velocity [km/h]")
    sp.add_argument("--lag0-bias", type=float, default=fading.DEFAULT_LAG0_BIAS)
    sp.set_defaults(func=cmd_table2)

    sp = sub.add_parser("matched", help="both SNRs with f3dB = fD over a normalized grid")
    common(sp)
    sp.add_argument("--grid", default="1e-6:1e-2:21", help="fD/BW = f3dB/BW values in (0, 0.5)")
    sp.add_argument("--lag0-bias", type=float, default=fading.DEFAULT_LAG0_BIAS)
    sp.set_defaults(func=cmd_matched)

    sp = sub.add_parser("equal-error", help="both SNR formulas at equal error variance")
    sp.add_argument("--out", "-o")
    sp.add_argument("--es-over-n0", type=float, default=20.0, dest="es_over_n0")
    sp.add_argument("--grid", default="1e-6:1e1:36", help="error variances")
    sp.set_defaults(func=cmd_equal_error)

    sp = sub.add_parser("paths", help="dump one phase or channel sample path")
    common(sp, workers=False)
    sp.add_argument("which", choices=("phase", "channel"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sigma2-zeta", type=float, default=None, dest="sigma2_zeta")
    sp.add_argument("--lag0-bias", type=float, default=fading.DEFAULT_LAG0_BIAS)
    sp.set_defaults(func=cmd_paths)

    sp = sub.add_parser("validate", help="run the Monte-Carlo oracle suite")
    sp.add_argument("--out", "-o", help="per-entry report CSV")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=float, default=1.0,
                    help="multiplier on every oracle's default trial count")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "K", None) is None and args.command not in ("table2",):
        if hasattr(args, "K") and not getattr(args, "scenario", None):
            args.K = 100
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"phasefade {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotPositiveDefiniteError, np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        print(f"phasefade {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
