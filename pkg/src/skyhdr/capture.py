"""Bracket planning, capture scheduling and the station loop.

The camera is an abstraction with a single ``capture(shutter_s)`` method;
aperture and ISO are fixed station metadata.  The bundled implementation
is :class:`SyntheticCamera`, which renders a ground-truth radiance scene
through a power-law response and doubles as the verification oracle for
the whole pipeline.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from . import imgio
from .core import RadianceMap, RasterImage8, shutter_time_for_ev

DEFAULT_EV_OFFSETS = (-3.0, -1.0, 1.0)

#: Fixed station epoch used when a schedule does not name a start time,
#: keeping unattended runs reproducible.
DEFAULT_START_TIME = datetime(2015, 3, 1, 6, 0, 0)

MANIFEST_NAME = "captures.log"


@dataclass(frozen=True)
class BracketPlan:
    """Base shutter time plus the EV offsets of one bracket burst."""

    base_shutter_s: float
    ev_offsets: tuple[float, ...] = DEFAULT_EV_OFFSETS
    aperture: str = "smallest available"

    def __post_init__(self) -> None:
        if not (self.base_shutter_s > 0) or not math.isfinite(self.base_shutter_s):
            raise ValueError(f"base shutter time must be positive, got {self.base_shutter_s}")
        offsets = tuple(float(o) for o in self.ev_offsets)
        if not offsets:
            raise ValueError("bracket needs at least one EV offset")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("EV offsets must be sorted ascending")
        object.__setattr__(self, "ev_offsets", offsets)


def plan_bracket(plan: BracketPlan) -> list[float]:
    """Shutter times for the bracket, ascending with the offsets."""
    return [shutter_time_for_ev(plan.base_shutter_s, ev) for ev in plan.ev_offsets]


@dataclass(frozen=True)
class CaptureSchedule:
    """Periodic trigger description: start, interval and total duration."""

    start_time: datetime
    interval_s: float
    duration_s: float = 0.0

    def __post_init__(self) -> None:
        if not (self.interval_s > 0) or not math.isfinite(self.interval_s):
            raise ValueError(f"interval must be positive, got {self.interval_s}")
        if self.duration_s < 0 or not math.isfinite(self.duration_s):
            raise ValueError(f"duration must be non-negative, got {self.duration_s}")


def schedule_triggers(schedule: CaptureSchedule) -> list[datetime]:
    """Trigger timestamps: start + k * interval, computed without drift."""
    count = int(math.floor(schedule.duration_s / schedule.interval_s)) + 1
    return [schedule.start_time + timedelta(seconds=k * schedule.interval_s)
            for k in range(count)]


# ---------------------------------------------------------------------------
# Synthetic camera


@dataclass(frozen=True)
class SyntheticCameraConfig:
    """Ground-truth scene plus the power-law response of the fake sensor."""

    scene: RadianceMap
    true_gamma: float = 2.2
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.true_gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.true_gamma}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise sigma must be non-negative, got {self.noise_sigma}")


def synth_capture(config: SyntheticCameraConfig, shutter_s: float) -> RasterImage8:
    """Render one exposure: Z = clip(round(255 * (E * dt)^(1/gamma)) + noise).

    Noise, when enabled, is drawn from a generator keyed on both the
    configured seed and the shutter time, so every exposure is reproducible
    yet distinct.
    """
    if not (shutter_s > 0):
        raise ValueError(f"shutter time must be positive, got {shutter_s}")
    e_true = np.exp(config.scene.data.astype(np.float64))
    signal = np.rint(255.0 * (e_true * shutter_s) ** (1.0 / config.true_gamma))
    if config.noise_sigma > 0:
        key = int(np.float64(shutter_s).view(np.uint64))
        rng = np.random.default_rng([config.seed, key])
        signal = signal + np.rint(rng.normal(0.0, config.noise_sigma, signal.shape))
    return RasterImage8(np.clip(signal, 0, 255).astype(np.uint8))


class SyntheticCamera:
    """Camera front for :func:`synth_capture`."""

    def __init__(self, config: SyntheticCameraConfig) -> None:
        self.config = config

    def capture(self, shutter_s: float) -> RasterImage8:
        return synth_capture(self.config, shutter_s)


# ---------------------------------------------------------------------------
# Station loop


class DirectorySink:
    """Stores bracket images and an append-only manifest in one directory."""

    def __init__(self, root) -> None:
        self.root = os.fspath(root)
        os.makedirs(self.root, exist_ok=True)

    def write_image(self, name: str, img: RasterImage8) -> None:
        imgio.write_ldr(img, os.path.join(self.root, name))

    def append_manifest(self, line: str) -> None:
        with open(os.path.join(self.root, MANIFEST_NAME), "a", encoding="ascii") as f:
            f.write(line + "\n")


@dataclass(frozen=True)
class BracketRecord:
    """Outcome of one trigger: what was shot and where it went."""

    trigger_time: datetime
    shutter_times: tuple[float, ...]
    filenames: tuple[str, ...]
    ok: bool
    error: str = ""


def _timestamp(moment: datetime) -> str:
    """Compact ISO 8601, filename-safe: 20150301T060000[.ffffff]."""
    stamp = moment.strftime("%Y%m%dT%H%M%S")
    if moment.microsecond:
        stamp += f".{moment.microsecond:06d}".rstrip("0")
    return stamp


def manifest_line(trigger: datetime, shutters: list[float], names: list[str]) -> str:
    return (
        _timestamp(trigger) + ";"
        + ",".join(f"{t:.9g}" for t in shutters) + ";"
        + ",".join(names)
    )


def run_station(schedule: CaptureSchedule, plan: BracketPlan, camera, sink) -> list[BracketRecord]:
    """Run the capture loop: one full bracket per trigger.

    A sink failure abandons the current bracket, is recorded in the returned
    log, and the loop moves on to the next trigger; successful brackets get
    one manifest entry each.
    """
    shutters = plan_bracket(plan)
    records = []
    for trigger in schedule_triggers(schedule):
        stamp = _timestamp(trigger)
        names = [f"{stamp}_ev{ev:+g}.ppm" for ev in plan.ev_offsets]
        try:
            for name, shutter in zip(names, shutters):
                sink.write_image(name, camera.capture(shutter))
            sink.append_manifest(manifest_line(trigger, shutters, names))
        except (OSError, imgio.ImageFormatError) as exc:
            records.append(BracketRecord(trigger, tuple(shutters), tuple(names),
                                         ok=False, error=str(exc)))
            continue
        records.append(BracketRecord(trigger, tuple(shutters), tuple(names), ok=True))
    return records


# ---------------------------------------------------------------------------
# Station configuration file: flat key=value lines.


def load_station_config(path) -> tuple[CaptureSchedule, BracketPlan]:
    """Parse a station config file.

    Recognized keys: interval_s, duration_s, base_shutter_s, ev_offsets
    (comma-separated stops) and the optional start_time (ISO 8601, defaults
    to the fixed station epoch).  Blank lines and '#' comments are skipped.
    """
    entries: dict[str, str] = {}
    with open(os.fspath(path), "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()

    required = {"interval_s", "duration_s", "base_shutter_s", "ev_offsets"}
    missing = required - entries.keys()
    if missing:
        raise ValueError(f"station config missing keys: {', '.join(sorted(missing))}")
    unknown = entries.keys() - required - {"start_time"}
    if unknown:
        raise ValueError(f"station config has unknown keys: {', '.join(sorted(unknown))}")

    try:
        interval = float(entries["interval_s"])
        duration = float(entries["duration_s"])
        base = float(entries["base_shutter_s"])
        offsets = tuple(float(v) for v in entries["ev_offsets"].split(","))
    except ValueError as exc:
        raise ValueError(f"station config has a malformed numeric value: {exc}") from None
    start = DEFAULT_START_TIME
    if "start_time" in entries:
        try:
            start = datetime.fromisoformat(entries["start_time"])
        except ValueError:
            raise ValueError(f"malformed start_time {entries['start_time']!r}") from None

    schedule = CaptureSchedule(start_time=start, interval_s=interval, duration_s=duration)
    plan = BracketPlan(base_shutter_s=base, ev_offsets=offsets)
    return schedule, plan
