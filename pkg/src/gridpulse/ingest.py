"""CSV reading and writing for frequency, power and inertia series.

Canonical format: UTF-8, header ``timestamp,value``, one row per sample.
Timestamps are either ``YYYY-MM-DDTHH:MM:SS[.fff]Z`` (UTC) or decimal epoch
seconds. Missing samples are absent rows, an empty value field or ``NaN``.
Values are written in shortest round-trip form, so ``parse(write(s))``
reproduces ``s`` bit for bit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from datetime import datetime, timezone
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

from .core import DataFormatError, Unit, UniformSeries, as_fraction

ISO8601_UTC = "iso8601_utc"
EPOCH_SECONDS = "epoch_seconds"
GJ_EXPONENT = 9  # joules = gigajoules * 10**9


@dataclass(frozen=True)
class CsvFormatSpec:
    timestamp_style: str = ISO8601_UTC
    value_column: str = "value"
    missing_tokens: frozenset = field(default_factory=lambda: frozenset({"", "NaN", "nan"}))
    expected_dt: Fraction = Fraction(1)

    def __post_init__(self):
        if self.timestamp_style not in (ISO8601_UTC, EPOCH_SECONDS):
            raise ValueError(f"unknown timestamp style {self.timestamp_style!r}")
        dt = as_fraction(self.expected_dt)
        if dt <= 0:
            raise ValueError("expected_dt must be positive")
        object.__setattr__(self, "expected_dt", dt)
        object.__setattr__(self, "missing_tokens", frozenset(self.missing_tokens))


def _parse_iso(text: str) -> Fraction:
    if not text.endswith("Z"):
        raise ValueError("missing trailing 'Z'")
    body = text[:-1]
    whole, _, frac = body.partition(".")
    stamp = datetime.strptime(whole, "%Y-%m-%dT%H:%M:%S").replace(tzinfo=timezone.utc)
    seconds = Fraction(int(stamp.timestamp()))
    if frac:
        if not frac.isdigit():
            raise ValueError("bad fractional seconds")
        seconds += Fraction(int(frac), 10 ** len(frac))
    return seconds


def _timestamps_iso(texts: list[str]) -> list[Fraction] | np.ndarray:
    if texts and all(len(t) == 20 and t[-1] == "Z" for t in texts):
        try:
            # fast path for whole seconds; datetime64 rejects anything malformed
            arr = np.array([t[:-1] for t in texts], dtype="datetime64[s]")
            if all(t[10] == "T" for t in texts):
                return arr.astype(np.int64)
        except ValueError:
            pass
    return [_parse_iso(t) for t in texts]


def _timestamps_epoch(texts: list[str]) -> list[Fraction] | np.ndarray:
    try:
        return np.array([int(t) for t in texts], dtype=np.int64)
    except (ValueError, OverflowError):
        return [Fraction(t.strip()) for t in texts]


def _read_rows(stream: IO[str], spec: CsvFormatSpec) -> tuple[list[str], list[str]]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty input: header row missing") from None
    header = [h.strip() for h in header]
    try:
        ti = header.index("timestamp")
        vi = header.index(spec.value_column)
    except ValueError:
        raise DataFormatError(
            f"header must contain 'timestamp' and {spec.value_column!r}, got {header}"
        ) from None
    stamps, values = [], []
    width = max(ti, vi) + 1
    for row in reader:
        if not row:
            continue
        if len(row) < width:
            raise DataFormatError(f"row {len(stamps) + 1}: expected {width} fields, got {len(row)}")
        stamps.append(row[ti].strip())
        values.append(row[vi].strip())
    return stamps, values


def parse_series_csv(
    stream: IO[str],
    spec: CsvFormatSpec | None = None,
    unit: Unit | str = Unit.HERTZ,
    convert=float,
) -> UniformSeries:
    """Read a CSV series onto its sample grid.

    The first data row fixes ``start_epoch``. Rows must be strictly
    increasing in time and lie on the ``spec.expected_dt`` grid. Row numbers
    in error messages count data rows from 1. ``convert`` turns a value field
    into a float and may raise ``ValueError``.
    """
    spec = spec or CsvFormatSpec()
    texts, raw_values = _read_rows(stream, spec)
    dt = spec.expected_dt
    if not texts:
        return UniformSeries(0, dt, np.empty(0), np.empty(0, dtype=bool), unit)

    parse = _timestamps_iso if spec.timestamp_style == ISO8601_UTC else _timestamps_epoch
    try:
        stamps = parse(texts)
    except (ValueError, ZeroDivisionError) as exc:
        bad = _first_bad_timestamp(texts, spec.timestamp_style)
        raise DataFormatError(f"row {bad}: unparsable timestamp {texts[bad - 1]!r}") from exc

    if isinstance(stamps, np.ndarray) and dt.denominator == 1:
        start = Fraction(int(stamps[0]))
        offs = stamps - stamps[0]
        off_grid = np.flatnonzero(offs % dt.numerator)
        if off_grid.size:
            r = int(off_grid[0])
            raise DataFormatError(f"row {r + 1}: timestamp {texts[r]!r} is not on the {dt} s grid")
        index = offs // dt.numerator
    else:
        start = Fraction(stamps[0])
        index = np.empty(len(texts), dtype=np.int64)
        for r, t in enumerate(stamps):
            k = (Fraction(t) - start) / dt
            if k.denominator != 1:
                raise DataFormatError(
                    f"row {r + 1}: timestamp {texts[r]!r} is not on the {dt} s grid"
                )
            index[r] = int(k)

    steps = np.diff(index)
    if steps.size and steps.min() <= 0:
        r = int(np.flatnonzero(steps <= 0)[0]) + 1
        kind = "duplicate" if steps[r - 1] == 0 else "out-of-order"
        raise DataFormatError(f"row {r + 1}: {kind} timestamp {texts[r]!r}")

    n = int(index[-1]) + 1
    values = np.full(n, np.nan)
    valid = np.zeros(n, dtype=bool)
    missing = spec.missing_tokens
    parsed = np.empty(len(raw_values))
    ok = np.ones(len(raw_values), dtype=bool)
    for r, text in enumerate(raw_values):
        if text in missing:
            ok[r] = False
            parsed[r] = np.nan
            continue
        try:
            parsed[r] = convert(text)
        except ValueError:
            raise DataFormatError(f"row {r + 1}: unparsable number {text!r}") from None
    values[index] = parsed
    valid[index] = ok & np.isfinite(parsed)
    return UniformSeries(start, dt, values, valid, unit)


def _first_bad_timestamp(texts: list[str], style: str) -> int:
    for r, t in enumerate(texts, start=1):
        try:
            _parse_iso(t) if style == ISO8601_UTC else Fraction(t)
        except (ValueError, ZeroDivisionError):
            return r
    return 1


def _decimal_digits(den: int) -> int:
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValueError("sample times have no finite decimal representation")
    return max(twos, fives)


def format_timestamps(series: UniformSeries, style: str) -> list[str]:
    """Render every sample time exactly, with only as many decimals as needed."""
    n = len(series)
    den = math.lcm(series.start_epoch.denominator, series.dt.denominator)
    digits = _decimal_digits(den)
    unit = 10**digits
    ticks = int(series.start_epoch * unit) + int(series.dt * unit) * np.arange(n, dtype=np.int64)
    if style == EPOCH_SECONDS:
        # sign and magnitude, so -0.5 s reads "-0.5" rather than floor and remainder
        whole, frac = np.divmod(np.abs(ticks), unit)
        heads = [("-" if t < 0 else "") + str(w) for t, w in zip(ticks.tolist(), whole.tolist())]
    else:
        whole, frac = np.divmod(ticks, unit)
        heads = np.datetime_as_string(whole.astype("datetime64[s]"), unit="s").tolist()
    tail = "Z" if style == ISO8601_UTC else ""
    if digits == 0:
        return [h + tail for h in heads]
    fracs = [("." + str(f).rjust(digits, "0").rstrip("0")) if f else "" for f in frac.tolist()]
    return [h + f + tail for h, f in zip(heads, fracs)]


def format_values(values: Iterable[float], valid: Iterable[bool]) -> list[str]:
    return [repr(float(v)) if ok else "" for v, ok in zip(values, valid)]


def write_series_csv(series: UniformSeries, stream: IO[str], spec: CsvFormatSpec | None = None) -> None:
    """Write ``series`` with one row per sample; invalid samples get an empty value."""
    spec = spec or CsvFormatSpec()
    _write_rows(series, stream, spec, format_values(series.values, series.valid.tolist()))


def _write_rows(series: UniformSeries, stream: IO[str], spec: CsvFormatSpec, texts: list[str]) -> None:
    stamps = format_timestamps(series, spec.timestamp_style)
    stream.write(f"timestamp,{spec.value_column}\n")
    stream.write("".join(f"{t},{v}\n" for t, v in zip(stamps, texts)))


def _gj_to_joules(text: str) -> float:
    # shift the decimal point exactly, then round once
    try:
        return float(Decimal(text).scaleb(GJ_EXPONENT))
    except InvalidOperation:
        raise ValueError(text) from None


def parse_inertia_csv(stream: IO[str], spec: CsvFormatSpec | None = None) -> UniformSeries:
    """Hourly rotational energy; the file holds GJ (= GVAs), the result joules."""
    spec = spec or CsvFormatSpec(expected_dt=3600)
    if spec.expected_dt != 3600:
        raise ValueError("inertia data must be hourly")
    return parse_series_csv(stream, spec, Unit.JOULE, convert=_gj_to_joules)


def _joules_to_gj(joules: float) -> str:
    return format(Decimal(repr(joules)).scaleb(-GJ_EXPONENT).normalize(), "f")


def write_inertia_csv(series: UniformSeries, stream: IO[str], spec: CsvFormatSpec | None = None) -> None:
    spec = spec or CsvFormatSpec(expected_dt=3600)
    texts = [_joules_to_gj(float(v)) if ok else "" for v, ok in zip(series.values, series.valid)]
    _write_rows(series, stream, spec, texts)


def sniff_style(first_timestamp: str) -> str:
    return ISO8601_UTC if "T" in first_timestamp else EPOCH_SECONDS


def _read_file(path, dt, value_column: str) -> tuple[io.StringIO, CsvFormatSpec]:
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    style = sniff_style(lines[1].split(",")[0]) if len(lines) > 1 else ISO8601_UTC
    return io.StringIO(text), CsvFormatSpec(style, value_column, expected_dt=as_fraction(dt))


def read_series_file(path, dt=1, unit: Unit | str = Unit.HERTZ, value_column: str = "value") -> UniformSeries:
    """Read a series file, detecting the timestamp style from the first data row."""
    stream, spec = _read_file(path, dt, value_column)
    return parse_series_csv(stream, spec, unit)


def read_inertia_file(path, value_column: str = "value") -> UniformSeries:
    stream, spec = _read_file(path, 3600, value_column)
    return parse_inertia_csv(stream, spec)


def series_to_text(series: UniformSeries, spec: CsvFormatSpec | None = None) -> str:
    buf = io.StringIO()
    write_series_csv(series, buf, spec)
    return buf.getvalue()
