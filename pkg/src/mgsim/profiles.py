"""Hourly load and PV production profiles.

A profile is always one non-leap year at hourly resolution (8760 samples, kW).
Profiles come either from a one-column CSV file or from one of five built-in
synthetic presets, addressed as ``synth:climate-1`` .. ``synth:climate-5``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DegenerateProfileError, DomainError, LengthError, ParseError

HOURS_PER_YEAR = 8760
KINDS = ("load", "pv")
SYNTH_PREFIX = "synth:"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    values: np.ndarray
    kind: str
    step: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.step != 1.0:
            raise DomainError("profiles are hourly; step must be 1.0")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size != HOURS_PER_YEAR:
            raise LengthError(f"expected {HOURS_PER_YEAR} samples, got {values.size}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("profile samples must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return HOURS_PER_YEAR

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    @property
    def peak(self) -> float:
        return float(self.values.max())

    def to_dict(self):
        return {"values": self.values.tolist(), "step": self.step, "kind": self.kind}

    @classmethod
    def from_dict(cls, d):
        return cls(values=np.asarray(d["values"], dtype=float), kind=d["kind"], step=d.get("step", 1.0))


@dataclass(frozen=True)
class ProfileStats:
    peak: float
    mean: float
    energy: float


def profile_stats(ts: TimeSeries) -> ProfileStats:
    mean = float(ts.values.mean())
    return ProfileStats(peak=ts.peak, mean=mean, energy=mean * HOURS_PER_YEAR)


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        return None


def load_profile_csv(path, kind: str) -> TimeSeries:
    """Read a one-column CSV of hourly kW values.

    A non-numeric first row is treated as a header. Row numbers reported in
    :class:`ParseError` are 1-based file line numbers.
    """
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 1:
                raise ParseError(f"expected one value, got {len(row)} columns", row=lineno)
            v = _parse_float(row[0].strip())
            if v is None:
                if lineno == 1:
                    continue
                raise ParseError(f"non-numeric value {row[0]!r}", row=lineno)
            if not math.isfinite(v) or v < 0:
                raise ParseError(f"invalid power value {v!r}", row=lineno)
            values.append(v)
    if len(values) != HOURS_PER_YEAR:
        raise LengthError(f"{path}: expected {HOURS_PER_YEAR} rows, got {len(values)}")
    return TimeSeries(np.array(values), kind=kind)


def write_profile_csv(ts: TimeSeries, path, header: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"{ts.kind}_kw\n")
        fh.writelines(f"{v!r}\n" for v in ts.values.tolist())


def scale_to_peak(ts: TimeSeries, peak: float) -> TimeSeries:
    if not peak > 0:
        raise DomainError("peak must be positive")
    current = ts.values.max()
    if current <= 0:
        raise DegenerateProfileError("cannot scale an all-zero profile")
    return TimeSeries(ts.values * (peak / current), kind=ts.kind)


# Parameter sets for the synthetic stand-ins of the five climate zones.
# Load: two diurnal humps, weekend factor, seasonal swing (phase = day of the
# seasonal maximum). PV: daylight window [sunrise, sunset), seasonal swing,
# cloudiness (mean daily clear-sky fraction).
@dataclass(frozen=True)
class ClimatePreset:
    name: str
    morning_hour: float
    evening_hour: float
    morning_amp: float
    evening_amp: float
    base: float
    weekend: float
    load_season_amp: float
    load_season_day: int
    sunrise: int
    sunset: int
    pv_season_amp: float
    clear_sky: float
    noise: float = 0.08
    cloud_noise: float = 0.15


PRESETS = {
    p.name: p
    for p in (
        ClimatePreset("climate-1", 8.0, 19.0, 0.35, 0.55, 0.45, 0.80, 0.30, 200, 6, 20, 0.25, 0.85),
        ClimatePreset("climate-2", 7.5, 18.5, 0.45, 0.60, 0.40, 0.75, 0.20, 190, 6, 19, 0.35, 0.75),
        ClimatePreset("climate-3", 9.0, 20.0, 0.30, 0.50, 0.55, 0.90, 0.35, 15, 7, 19, 0.45, 0.60),
        ClimatePreset("climate-4", 8.5, 18.0, 0.50, 0.40, 0.35, 0.70, 0.15, 210, 5, 20, 0.20, 0.90),
        ClimatePreset("climate-5", 7.0, 19.5, 0.40, 0.65, 0.50, 0.85, 0.40, 350, 7, 18, 0.55, 0.55),
    )
}


def _load_shape(rng, p: ClimatePreset):
    hours = np.arange(HOURS_PER_YEAR)
    hod = hours % 24
    day = hours // 24
    diurnal = (
        p.base
        + p.morning_amp * np.exp(-0.5 * ((hod - p.morning_hour) / 2.0) ** 2)
        + p.evening_amp * np.exp(-0.5 * ((hod - p.evening_hour) / 2.5) ** 2)
    )
    weekly = np.where(day % 7 >= 5, p.weekend, 1.0)
    seasonal = 1.0 + p.load_season_amp * np.cos(2 * np.pi * (day - p.load_season_day) / 365.0)
    noise = rng.lognormal(mean=0.0, sigma=p.noise, size=HOURS_PER_YEAR)
    return diurnal * weekly * seasonal * noise


def _pv_shape(rng, p: ClimatePreset):
    hours = np.arange(HOURS_PER_YEAR)
    hod = hours % 24
    day = hours // 24
    width = p.sunset - p.sunrise
    phase = (hod + 0.5 - p.sunrise) / width
    daylight = (hod >= p.sunrise) & (hod < p.sunset)
    bell = np.where(daylight, np.sin(np.pi * np.clip(phase, 0.0, 1.0)) ** 1.5, 0.0)
    seasonal = 1.0 + p.pv_season_amp * np.cos(2 * np.pi * (day - 172) / 365.0)
    a = 4.0 * p.clear_sky
    b = 4.0 * (1.0 - p.clear_sky)
    daily_sky = rng.beta(a, b, size=365)[day]
    hourly = rng.lognormal(mean=0.0, sigma=p.cloud_noise, size=HOURS_PER_YEAR)
    return np.where(daylight, bell * seasonal * (0.2 + 0.8 * daily_sky) * hourly, 0.0)


def synth_profile(rng: np.random.Generator, kind: str, peak: float, preset: str = "climate-1") -> TimeSeries:
    """Synthetic year-long profile of the given kind, normalized so its maximum is ``peak``."""
    if not peak > 0:
        raise DomainError("peak must be positive")
    if kind not in KINDS:
        raise DomainError(f"unknown profile kind {kind!r}")
    try:
        p = PRESETS[preset]
    except KeyError:
        raise DomainError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    raw = _load_shape(rng, p) if kind == "load" else _pv_shape(rng, p)
    return TimeSeries(raw / raw.max() * peak, kind=kind)


def daylight_window(preset: str) -> tuple[int, int]:
    p = PRESETS[preset]
    return p.sunrise, p.sunset


@lru_cache(maxsize=None)
def _preset_profile(preset: str, kind: str) -> TimeSeries:
    # Each preset behaves like a bundled data file: one fixed series per kind.
    index = sorted(PRESETS).index(preset)
    rng = np.random.default_rng([20200901, index, KINDS.index(kind)])
    return synth_profile(rng, kind, 1.0, preset)


def resolve_profile(source: str, kind: str) -> TimeSeries:
    """Load a profile from a CSV path, or a ``synth:<preset>`` name."""
    if isinstance(source, str) and source.startswith(SYNTH_PREFIX):
        name = source[len(SYNTH_PREFIX):]
        if name not in PRESETS:
            raise DomainError(f"unknown synthetic preset {name!r}")
        return _preset_profile(name, kind)
    return load_profile_csv(Path(source), kind)


DEFAULT_SOURCES = tuple(SYNTH_PREFIX + name for name in sorted(PRESETS))
