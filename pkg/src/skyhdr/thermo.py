"""Hysteresis thermostat, first-order thermal plant and trace analysis.

The plant is a lumped first-order model integrated by forward Euler:

    dT/dt = k_env * (T_ambient(t) - T) + q_solar_peak * solar(t) - q_cool * u(t)

where u is the cooler state from the two-threshold controller (sealed
model) or permanently off (ventilated model).  Default calibrations are
illustrative: they make the ventilated box peak near 38 C on the default
tropical day (25..33 C ambient) while the sealed box rides one slow
cooling cycle inside the 32..37 C hysteresis band, which also keeps its
day-long total variation below the ventilated one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SEALED = "sealed"
VENTILATED = "ventilated"

_SECONDS_PER_DAY = 86400.0
_TRACE_HEADER = "t_s,temp_c,cooler_on"


@dataclass(frozen=True)
class Thresholds:
    """Cooler switch-on/switch-off temperatures and the rated limit."""

    t_on: float = 37.0
    t_off: float = 32.0
    t_max: float = 40.0

    def __post_init__(self) -> None:
        if not (self.t_off < self.t_on < self.t_max):
            raise ValueError(
                f"need t_off < t_on < t_max, got {self.t_off}/{self.t_on}/{self.t_max}"
            )


@dataclass(frozen=True)
class PlantConfig:
    """Thermal plant coefficients and driving profiles."""

    model: str
    k_env: float
    q_solar_peak: float
    q_cool: float
    ambient_profile: Callable[[float], float]
    solar_profile: Callable[[float], float]
    dt: float = 1.0

    def __post_init__(self) -> None:
        if self.model not in (SEALED, VENTILATED):
            raise ValueError(f"model must be '{SEALED}' or '{VENTILATED}', got {self.model!r}")
        if not (self.k_env > 0):
            raise ValueError(f"ambient coupling must be positive, got {self.k_env}")
        if self.q_cool < 0:
            raise ValueError(f"cooling rate must be non-negative, got {self.q_cool}")
        if self.model == VENTILATED and self.q_cool != 0:
            raise ValueError("the ventilated model has no cooler; q_cool must be 0")
        if not (self.dt > 0):
            raise ValueError(f"integration step must be positive, got {self.dt}")


class ThermoTrace:
    """Uniformly sampled (time, temperature, cooler state) series."""

    def __init__(self, times_s, temps_c, cooler_on) -> None:
        t = np.asarray(times_s, dtype=np.float64)
        temp = np.asarray(temps_c, dtype=np.float64)
        on = np.asarray(cooler_on, dtype=bool)
        if t.ndim != 1 or t.shape != temp.shape or t.shape != on.shape:
            raise ValueError("trace arrays must be 1-d and equally long")
        if t.size == 0:
            raise ValueError("trace is empty")
        if t.size > 1:
            steps = np.diff(t)
            if (steps <= 0).any():
                raise ValueError("trace timestamps must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-9):
                raise ValueError("trace timestamps must be uniformly spaced")
        for arr in (t, temp):
            arr.setflags(write=False)
        on.setflags(write=False)
        self.times_s = t
        self.temps_c = temp
        self.cooler_on = on

    def __len__(self) -> int:
        return self.times_s.size


@dataclass(frozen=True)
class TraceSummary:
    max_c: float
    min_c: float
    total_variation_c: float
    duty_fraction: float


def controller_step(state: bool, temp: float, thresholds: Thresholds) -> bool:
    """Two-threshold hysteresis: on at t_on and above, off below t_off."""
    if not state:
        return temp >= thresholds.t_on
    return not temp < thresholds.t_off


def simulate(plant: PlantConfig, thresholds: Thresholds, duration_s: float) -> ThermoTrace:
    """Forward-Euler run of the plant under the hysteresis controller.

    The controller is evaluated once per step against the current sample;
    the trace records every sample from t = 0 to t = duration inclusive.
    """
    n_steps = round(duration_s / plant.dt)
    if n_steps < 0 or abs(n_steps * plant.dt - duration_s) > 1e-9 * max(1.0, duration_s):
        raise ValueError(f"duration {duration_s} is not a multiple of dt {plant.dt}")

    temp = float(plant.ambient_profile(0.0))
    if not math.isfinite(temp):
        raise ValueError("ambient profile produced a non-finite value at t = 0")
    cooled = plant.model == SEALED
    on = False

    times = np.empty(n_steps + 1)
    temps = np.empty(n_steps + 1)
    states = np.empty(n_steps + 1, dtype=bool)
    for k in range(n_steps + 1):
        t = k * plant.dt
        on = controller_step(on, temp, thresholds) if cooled else False
        times[k] = t
        temps[k] = temp
        states[k] = on
        if k == n_steps:
            break
        ambient = float(plant.ambient_profile(t))
        solar = float(plant.solar_profile(t))
        if not (math.isfinite(ambient) and math.isfinite(solar)):
            raise ValueError(f"non-finite profile value at t = {t}")
        rate = plant.k_env * (ambient - temp) + plant.q_solar_peak * solar
        if on:
            rate -= plant.q_cool
        temp += plant.dt * rate
    return ThermoTrace(times, temps, states)


def analyze_trace(trace: ThermoTrace) -> TraceSummary:
    """Extremes, total variation and cooler duty fraction of a trace."""
    temps = trace.temps_c
    variation = float(np.abs(np.diff(temps)).sum()) if len(trace) > 1 else 0.0
    duty = float(trace.cooler_on.sum()) / len(trace)
    return TraceSummary(float(temps.max()), float(temps.min()), variation, duty)


def format_summary(summary: TraceSummary) -> str:
    """Single-line record used by the command-line tools."""
    return (
        f"max={summary.max_c:.3f} min={summary.min_c:.3f} "
        f"variation={summary.total_variation_c:.3f} duty={summary.duty_fraction:.6f}"
    )


# ---------------------------------------------------------------------------
# Default tropical day profiles and per-model calibrations.


def day_ambient(t: float) -> float:
    """Sinusoidal ambient: 25 C low (03:00) to 33 C high (15:00)."""
    return 29.0 + 4.0 * math.sin(2.0 * math.pi * (t - 32400.0) / _SECONDS_PER_DAY)


def day_solar(t: float) -> float:
    """Squared half-sine solar factor: sunrise 06:00, peak noon, sunset 18:00."""
    s = math.sin(2.0 * math.pi * (t - 21600.0) / _SECONDS_PER_DAY)
    return max(0.0, s) ** 2


def sealed_default(dt: float = 1.0) -> PlantConfig:
    return PlantConfig(
        model=SEALED,
        k_env=1.0 / 600.0,
        q_solar_peak=0.011,
        q_cool=0.0024,
        ambient_profile=day_ambient,
        solar_profile=day_solar,
        dt=dt,
    )


def ventilated_default(dt: float = 1.0) -> PlantConfig:
    return PlantConfig(
        model=VENTILATED,
        k_env=1.0 / 300.0,
        q_solar_peak=0.025,
        q_cool=0.0,
        ambient_profile=day_ambient,
        solar_profile=day_solar,
        dt=dt,
    )


# ---------------------------------------------------------------------------
# Trace persistence: CSV with header "t_s,temp_c,cooler_on".


def write_trace(trace: ThermoTrace, path) -> None:
    lines = [_TRACE_HEADER + "\n"]
    for t, temp, on in zip(trace.times_s, trace.temps_c, trace.cooler_on):
        lines.append(f"{t:g},{temp:.3f},{int(on)}\n")
    with open(path, "w", encoding="ascii") as f:
        f.writelines(lines)


def read_trace(path) -> ThermoTrace:
    """Read a trace CSV; measured station logs use the same layout."""
    with open(path, "r", encoding="ascii") as f:
        rows = f.read().splitlines()
    if not rows or rows[0] != _TRACE_HEADER:
        raise ValueError(f"expected header {_TRACE_HEADER!r}")
    times, temps, states = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {i}: expected 3 fields, got {row!r}")
        try:
            times.append(float(parts[0]))
            temps.append(float(parts[1]))
            flag = int(parts[2])
        except ValueError:
            raise ValueError(f"line {i}: malformed value in {row!r}") from None
        if flag not in (0, 1):
            raise ValueError(f"line {i}: cooler_on must be 0 or 1, got {flag}")
        states.append(bool(flag))
    return ThermoTrace(times, temps, states)
