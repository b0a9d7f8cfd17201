"""Command line front end.

Exit codes: 0 success, 2 usage error, 3 data or format error, 4 nothing
valid to compute on. Result CSVs go to ``-o`` (stdout by default), summaries
and diagnostics to stderr. Files are written atomically.
"""

from __future__ import annotations

import argparse
import io
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config, drift, spectral, svg, swing, synth, waveform
from .core import DataFormatError, EmptyStatisticsError, GridPulseError, UniformSeries
from .ingest import ISO8601_UTC, format_timestamps, read_inertia_file, read_series_file, series_to_text

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_EMPTY = 0, 2, 3, 4
WINDOWS = {"hour": 3600, "day": 86400, "week": 604800}


def atomic_write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(writer, *args) -> str:
    buf = io.StringIO()
    writer(*args, buf)
    return buf.getvalue()


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _window(text: str) -> int:
    if text in WINDOWS:
        return WINDOWS[text]
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected hour, day, week or seconds, got {text!r}") from None


def _offset(text: str) -> int:
    m = re.fullmatch(r"([+-])(\d{2}):(\d{2})", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected an offset like +01:00, got {text!r}")
    sign = 1 if m.group(1) == "+" else -1
    return sign * (int(m.group(2)) * 3600 + int(m.group(3)) * 60)


def _read_amplitudes(path: str) -> UniformSeries:
    return read_series_file(path, dt=3600)


# --- subcommands -------------------------------------------------------------


def cmd_spectrum(args) -> int:
    series = read_series_file(args.input, dt=args.dt)
    spec = spectral.spectrum(series, args.window)
    atomic_write(args.output, _render(spectral.write_spectrum_csv, spec))
    peaks = spectral.detect_peaks(
        spec, args.period, args.harmonics, args.exclusion, args.min_prominence, args.neighborhood
    )
    if args.peaks:
        rows = ["harmonic,frequency_hz,bin,magnitude,background,prominence\n"]
        rows += [
            f"{p.harmonic_index},{p.frequency_hz!r},{p.bin},{p.magnitude!r},{p.background!r},{p.prominence!r}\n"
            for p in peaks
        ]
        atomic_write(args.peaks, "".join(rows))
    _note(f"{spec.windows_averaged} windows of {spec.window_s} s averaged")
    for p in peaks:
        _note(
            f"peak: period {p.period_s:g} s harmonic {p.harmonic_index} "
            f"({p.frequency_hz:.6g} Hz) prominence {p.prominence:.4g}"
        )
    if not peaks:
        _note(f"no harmonic of {args.period:g} s above prominence {args.min_prominence:g}")
    if args.svg:
        f = spec.frequencies[1:]
        plot = svg.line_plot([svg.Line(f, spec.magnitudes[1:])], "Averaged amplitude spectrum",
                             "frequency [Hz]", "magnitude", logx=True, logy=True)
        atomic_write(args.svg, plot)
    return EXIT_OK


def cmd_waveform(args) -> int:
    series = read_series_file(args.input, dt=args.dt)
    w = waveform.mean_waveform(series, args.period, args.window, args.method)
    atomic_write(args.output, _render(waveform.write_waveform_csv, w))
    _note(f"amplitude {waveform.amplitude(w):.6g} over {int(w.counts[0])} periods")
    if args.svg:
        plot = svg.line_plot([svg.Line(w.offsets(), w.bins)], f"Mean waveform ({args.window} s windows)",
                             "second of period", "value")
        atomic_write(args.svg, plot)
    return EXIT_OK


def cmd_amplitudes(args) -> int:
    series = read_series_file(args.input, dt=args.dt)
    amps = waveform.windowed_amplitudes(series, args.period, args.window)
    atomic_write(args.output, series_to_text(amps.amplitudes))
    _note(f"{int(amps.amplitudes.valid.sum())} of {len(amps.amplitudes)} windows valid")
    return EXIT_OK


def cmd_profile(args) -> int:
    amps = _read_amplitudes(args.input)
    prof = waveform.profile(amps, args.granularity)
    if args.display_offset:
        prof = prof.relabel(args.display_offset)
    atomic_write(args.output, _render(waveform.write_profile_csv, prof))
    if args.svg:
        slots = np.arange(prof.mean.size, dtype=float)
        plot = svg.line_plot([svg.Line(slots, prof.mean, band=prof.std)], f"{args.granularity} profile",
                             "hour", "amplitude")
        atomic_write(args.svg, plot)
    return EXIT_OK


def _trend_csv(means: UniformSeries, stds: UniformSeries) -> str:
    stamps = format_timestamps(means, ISO8601_UTC)
    rows = ["timestamp,mean,std\n"]
    for t, m, mok, s, sok in zip(stamps, means.values.tolist(), means.valid.tolist(),
                                 stds.values.tolist(), stds.valid.tolist()):
        rows.append(f"{t},{repr(m) if mok else ''},{repr(s) if sok else ''}\n")
    return "".join(rows)


def cmd_trend(args) -> int:
    amps = _read_amplitudes(args.input)
    means, stds = waveform.weekly_trend(amps)
    if not means.valid.any():
        raise EmptyStatisticsError("no valid amplitude")
    atomic_write(args.output, _trend_csv(means, stds))
    if args.svg:
        weeks = np.arange(len(means), dtype=float)
        plot = svg.line_plot([svg.Line(weeks, means.masked_values(), band=stds.masked_values())],
                             "Weekly mean amplitude", "week", "amplitude")
        atomic_write(args.svg, plot)
    return EXIT_OK


def cmd_power(args) -> int:
    amps = _read_amplitudes(args.amplitudes)
    inertia = read_inertia_file(args.inertia)
    a = waveform.AmplitudeSeries(amps.dt, amps, args.period)
    power = swing.power_amplitudes(a, inertia, args.fref, args.period)
    if not args.standardize:
        atomic_write(args.output, series_to_text(power.amplitudes))
        return EXIT_OK
    # both share the hourly grid of the amplitudes, hence the same weeks
    p_week = waveform.standardize(waveform.weekly_trend(power)[0])
    f_week = waveform.standardize(waveform.weekly_trend(amps)[0])
    stamps = format_timestamps(p_week, ISO8601_UTC)
    rows = ["timestamp,power,frequency\n"]
    for k, t in enumerate(stamps):
        pv = repr(float(p_week.values[k])) if p_week.valid[k] else ""
        fv = repr(float(f_week.values[k])) if f_week.valid[k] else ""
        rows.append(f"{t},{pv},{fv}\n")
    atomic_write(args.output, "".join(rows))
    return EXIT_OK


def cmd_simulate(args) -> int:
    path = Path(args.scenario)
    sc = config.scenario(config.load_toml(path), path.parent)
    demand = swing.fleet_demand(sc.fleet, sc.start, sc.duration, sc.dt)
    freq = swing.simulate(sc.grid, swing.imbalance_from_demand(demand, sc.balance), sc.dt_out)
    out = Path(args.output_dir)
    atomic_write(str(out / "frequency.csv"), series_to_text(freq))
    atomic_write(str(out / "demand.csv"), series_to_text(demand))
    _note(f"simulated {len(freq)} samples, {len(sc.fleet.devices)} devices")
    return EXIT_OK


def cmd_drift(args) -> int:
    series = read_series_file(args.input, dt=args.dt)
    tr = drift.track(series, args.period, args.window, falling=args.falling)
    atomic_write(args.output, _render(drift.write_track_csv, tr))
    summary = (
        f"drift_rate_s_per_day={tr.drift_rate_s_per_day:.6g} "
        f"residual_rms_s={tr.residual_rms:.6g} windows={tr.step_phase_s.size}"
    )
    if tr.irregular:
        summary += " irregular=yes"
    print(summary, file=sys.stderr if args.output == "-" else sys.stdout)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = config.synth_spec(config.load_toml(args.spec))
    atomic_write(args.output, series_to_text(synth.generate(spec)))
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridpulse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        return sp

    def out(sp):
        sp.add_argument("-o", "--output", default="-", help="output CSV (default: stdout)")

    s = add("spectrum", cmd_spectrum, "averaged DFT spectrum and peak report")
    s.add_argument("input")
    s.add_argument("--dt", default="1", help="sample interval of the input in seconds")
    s.add_argument("--window", type=int, default=spectral.DEFAULT_WINDOW_S)
    s.add_argument("--period", type=float, default=60.0)
    s.add_argument("--harmonics", type=int, default=5)
    s.add_argument("--exclusion", type=int, default=2)
    s.add_argument("--neighborhood", type=int, default=50)
    s.add_argument("--min-prominence", type=float, default=3.0)
    s.add_argument("--peaks", help="write the peak report as CSV")
    s.add_argument("--svg")
    out(s)

    s = add("waveform", cmd_waveform, "mean folded waveform")
    s.add_argument("input")
    s.add_argument("--dt", default="1")
    s.add_argument("--period", type=int, default=60)
    s.add_argument("--window", type=_window, default=3600, help="hour, day, week or seconds")
    s.add_argument("--method", choices=("fold", "harmonic"), default="fold")
    s.add_argument("--svg")
    out(s)

    s = add("amplitudes", cmd_amplitudes, "hourly pattern amplitudes")
    s.add_argument("input")
    s.add_argument("--dt", default="1")
    s.add_argument("--period", type=int, default=60)
    s.add_argument("--window", type=_window, default=3600)
    out(s)

    s = add("profile", cmd_profile, "daily or weekly amplitude profile")
    s.add_argument("input")
    s.add_argument("--granularity", choices=(waveform.DAILY, waveform.WEEKLY), default=waveform.DAILY)
    s.add_argument("--display-offset", type=_offset, default=0)
    s.add_argument("--svg")
    out(s)

    s = add("trend", cmd_trend, "weekly mean and std of amplitudes")
    s.add_argument("input")
    s.add_argument("--svg")
    out(s)

    s = add("power", cmd_power, "power amplitudes from frequency amplitudes and inertia")
    s.add_argument("amplitudes")
    s.add_argument("inertia")
    s.add_argument("--fref", type=float, default=50.0)
    s.add_argument("--period", type=int, default=60)
    s.add_argument("--standardize", action="store_true",
                   help="write standardized weekly means of power and frequency amplitudes")
    out(s)

    s = add("simulate", cmd_simulate, "simulate a device fleet on the swing equation")
    s.add_argument("scenario")
    s.add_argument("-o", "--output-dir", default=".", help="directory for frequency.csv and demand.csv")

    s = add("drift", cmd_drift, "track the step phase and fit its drift")
    s.add_argument("input")
    s.add_argument("--dt", default="1")
    s.add_argument("--period", type=int, default=60)
    s.add_argument("--window", type=_window, default=86400)
    s.add_argument("--falling", action="store_true", help="track the steepest drop instead of rise")
    out(s)

    s = add("synth", cmd_synth, "generate a synthetic series")
    s.add_argument("spec")
    out(s)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except EmptyStatisticsError as exc:
        _note(f"gridpulse {args.command}: {exc}")
        return EXIT_EMPTY
    except (DataFormatError, swing.SimulationError, OSError, UnicodeDecodeError) as exc:
        _note(f"gridpulse {args.command}: {exc}")
        return EXIT_DATA
    except (GridPulseError, ValueError) as exc:
        _note(f"gridpulse {args.command}: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
