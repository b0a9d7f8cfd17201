"""TOML scenario and synthetic-signal files.

Both share a ``[run]`` table::

    [run]
    start = "2024-03-04T00:00:00Z"   # or epoch seconds
    duration = 86400                 # s
    dt = 0.1                         # s

A synth file adds ``base``/``unit`` to ``[run]`` and ``[[components]]``
tables with a ``kind`` of ``sinusoid``, ``pulse_train``, ``white_noise`` or
``gap``. A scenario adds ``[grid]`` (``e_rot`` in J or ``e_rot_csv`` with
hourly GJ, ``damping``, ``f_ref``, ``f0``), run keys ``dt_out``, ``seed``,
``noise_std``, ``balance``, and ``[[devices]]`` groups with ``count``,
``power``, ``width``, ``period``, ``phase``, ``policy``, ``drift_rate`` and
an optional ``seed``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import DataFormatError, Unit, as_fraction
from .ingest import _parse_iso, parse_inertia_csv
from .swing import DeviceFleet, GridParams, PulseDevice
from .synth import SynthSpec, component_from_dict

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class Scenario:
    grid: GridParams
    fleet: DeviceFleet
    start: Fraction
    duration: Fraction
    dt: Fraction
    dt_out: Fraction
    balance: bool = True


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def parse_time(value) -> Fraction:
    if isinstance(value, str):
        return _parse_iso(value.strip())
    return as_fraction(value)


def _unknown(table: dict, allowed: set, where: str) -> None:
    extra = set(table) - allowed
    if extra:
        raise DataFormatError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _run_table(doc: dict, extra: set) -> dict:
    run = doc.get("run")
    if not isinstance(run, dict):
        raise DataFormatError("missing [run] table")
    _unknown(run, {"start", "duration", "dt"} | extra, "[run]")
    if "duration" not in run:
        raise DataFormatError("[run] needs 'duration'")
    return run


def synth_spec(doc: dict) -> SynthSpec:
    run = _run_table(doc, {"base", "unit"})
    _unknown(doc, {"run", "components"}, "synth file")
    comps = tuple(component_from_dict(c) for c in doc.get("components", []))
    return SynthSpec(
        duration_s=run["duration"],
        dt=run.get("dt", 1),
        base=float(run.get("base", 50.0)),
        start_epoch=parse_time(run.get("start", 0)),
        unit=Unit(run.get("unit", "hertz")),
        components=comps,
    )


_DEVICE_KEYS = {"count", "power", "width", "period", "phase", "policy", "drift_rate", "seed"}


def scenario(doc: dict, base_dir: Path | None = None) -> Scenario:
    run = _run_table(doc, {"dt_out", "seed", "noise_std", "balance"})
    _unknown(doc, {"run", "grid", "devices"}, "scenario file")
    g = doc.get("grid", {})
    _unknown(g, {"e_rot", "e_rot_csv", "damping", "f_ref", "f0"}, "[grid]")
    if ("e_rot" in g) == ("e_rot_csv" in g):
        raise DataFormatError("[grid] needs exactly one of 'e_rot' and 'e_rot_csv'")
    if "e_rot_csv" in g:
        path = Path(g["e_rot_csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        with open(path, newline="", encoding="utf-8") as fh:
            e_rot = parse_inertia_csv(fh)
    else:
        e_rot = float(g["e_rot"])
    grid = GridParams(
        e_rot=e_rot,
        damping_d=float(g.get("damping", 0.0)),
        f_ref=float(g.get("f_ref", 50.0)),
        f0=None if "f0" not in g else float(g["f0"]),
    )
    devices = []
    for i, group in enumerate(doc.get("devices", [])):
        _unknown(group, _DEVICE_KEYS, f"device group {i}")
        try:
            dev = PulseDevice(
                pulse_power=float(group["power"]),
                pulse_width=group["width"],
                period_s=group.get("period", 60),
                phase=group.get("phase", 0.0),
                policy=group.get("policy", "fixed"),
                drift_rate=float(group.get("drift_rate", 0.0)),
                seed=group.get("seed"),
            )
        except KeyError as exc:
            raise DataFormatError(f"device group {i} needs {exc.args[0]!r}") from None
        devices.extend([dev] * int(group.get("count", 1)))
    fleet = DeviceFleet(
        devices,
        noise_std=float(run.get("noise_std", 0.0)),
        master_seed=int(run.get("seed", 0)),
    )
    return Scenario(
        grid=grid,
        fleet=fleet,
        start=parse_time(run.get("start", 0)),
        duration=as_fraction(run["duration"]),
        dt=as_fraction(run.get("dt", Fraction(1, 10))),
        dt_out=as_fraction(run.get("dt_out", 1)),
        balance=bool(run.get("balance", True)),
    )
