"""Fuel and emission post-processing of trajectory samples.

Fuel uses vehicle specific power mapped to a normalized fuel rate:
positive power burns 1.71 * VSP^0.42 times the idle rate, negative
power coasts at the idle rate (1), and exactly zero power maps to 0,
the limit of the positive branch. Per-distance fuel is
3600 * mean rate / mean speed with the speed in km/h, so the figure
reads as grams-equivalent per km. Emission rates are quadratic fits in
speed and acceleration, clipped at zero, with a separate coefficient
row for decelerations below -0.5 m/s^2 where the fit has one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ring import TrajectoryLog

POLLUTANTS = ("co2", "nox", "voc", "pm")

# f1, f2 (per v), f3 (per v^2), f4 (per a), f5 (per a^2), f6 (per v*a)
# one row for a >= -0.5 m/s^2, one for stronger braking where the fit splits
_COEFFS = {
    "co2": (
        (5.53e-01, 1.61e-01, -2.89e-03, 2.66e-01, 5.11e-01, 1.83e-01),
        (5.53e-01, 1.61e-01, -2.89e-03, 2.66e-01, 5.11e-01, 1.83e-01),
    ),
    "nox": (
        (6.19e-04, 8.00e-05, -4.03e-06, -4.13e-04, 3.80e-04, 1.77e-04),
        (2.17e-04, 0.0, 0.0, 0.0, 0.0, 0.0),
    ),
    "voc": (
        (4.47e-03, 7.32e-07, -2.87e-08, -3.41e-06, 4.94e-06, 1.66e-06),
        (2.63e-03, 0.0, 0.0, 0.0, 0.0, 0.0),
    ),
    "pm": (
        (0.0, 1.57e-05, -9.21e-07, 0.0, 3.75e-05, 1.89e-05),
        (0.0, 1.57e-05, -9.21e-07, 0.0, 3.75e-05, 1.89e-05),
    ),
}

BRAKE_SPLIT = -0.5  # m/s^2; the boundary itself belongs to the upper row


@dataclass(frozen=True)
class FuelResult:
    mean_nfr: float
    nff: float          # per-km normalized fuel, nan when the fleet never moves
    mean_speed: float   # m/s
    stalled: bool


def vsp(v, a):
    """Vehicle specific power per unit mass, W/kg; v in m/s, a in m/s^2."""
    v = np.asarray(v, dtype=float)
    return v * (1.1 * np.asarray(a, dtype=float) + 0.132) + 0.000302 * v ** 3


def nfr(power):
    """Normalized fuel rate as a function of VSP."""
    power = np.asarray(power, dtype=float)
    burning = 1.71 * np.power(np.maximum(power, 0.0), 0.42)
    return np.where(power > 0.0, burning, np.where(power < 0.0, 1.0, 0.0))


def emission_rate(v, a, pollutant: str):
    """Instantaneous emission rate, g/s."""
    if pollutant not in _COEFFS:
        raise ValueError(f"unknown pollutant {pollutant!r}, have {POLLUTANTS}")
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    upper, lower = _COEFFS[pollutant]
    rate_u = _poly(v, a, upper)
    rate_l = _poly(v, a, lower)
    return np.maximum(np.where(a >= BRAKE_SPLIT, rate_u, rate_l), 0.0)


def _poly(v, a, f):
    return f[0] + f[1] * v + f[2] * v ** 2 + f[3] * a + f[4] * a ** 2 + f[5] * v * a


def fleet_fuel(log: TrajectoryLog) -> FuelResult:
    """Fleet-mean normalized fuel rate and per-km fuel over the sampled window."""
    if log.v.size == 0:
        raise ValueError("log holds no samples")
    mean_nfr = float(np.mean(nfr(vsp(log.v, log.a))))
    mean_speed = float(np.mean(log.v))
    if mean_speed == 0.0:
        return FuelResult(mean_nfr, math.nan, 0.0, stalled=True)
    nff = 3600.0 * mean_nfr / (3.6 * mean_speed)  # denominator in km/h
    return FuelResult(mean_nfr, nff, mean_speed, stalled=False)


def fleet_emissions(log: TrajectoryLog) -> dict[str, float]:
    """Per-pollutant grams per vehicle-km over the sampled window."""
    if log.v.size == 0:
        raise ValueError("log holds no samples")
    mean_speed = float(np.mean(log.v))
    out = {}
    for pol in POLLUTANTS:
        mean_rate = float(np.mean(emission_rate(log.v, log.a, pol)))
        # g/s over m/s: scale to g/km
        out[pol] = math.nan if mean_speed == 0.0 else 1000.0 * mean_rate / mean_speed
    return out


def equilibrium_curves(v_grid) -> list[dict[str, float]]:
    """Steady-speed footprint table: one row per speed at zero acceleration."""
    v_arr = np.asarray(v_grid, dtype=float)
    if v_arr.size == 0:
        raise ValueError("empty speed grid")
    if np.any(v_arr <= 0.0):
        raise ValueError("equilibrium curves need strictly positive speeds")
    rows = []
    for v in v_arr:
        rate = float(nfr(vsp(v, 0.0)))
        row = {"v_mps": float(v), "nfr": rate,
               "nff_g_per_km": 3600.0 * rate / (3.6 * v)}
        for pol in POLLUTANTS:
            row[f"{pol}_g_per_km"] = 1000.0 * float(emission_rate(v, 0.0, pol)) / v
        rows.append(row)
    return rows
