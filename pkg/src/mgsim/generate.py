"""Seeded generation of microgrid fleets, including the pymgrid10 / pymgrid25 presets."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BatterySpec, GensetSpec, GridSpec, MicrogridConfig, Tariff, architecture_label
from .errors import DomainError
from .profiles import DEFAULT_SOURCES, HOURS_PER_YEAR, resolve_profile, scale_to_peak

LOAD_PEAK_RANGE = (100.0, 10000.0)
PV_PENETRATION_RANGE = (0.3, 2.0)
BATTERY_HOURS_RANGE = (3.0, 5.0)
GRID_MARGIN = 1.1
OUTAGES_PER_WEEK = 2.0
OUTAGE_MEAN_HOURS = 4.0

TARIFF_REGIONS = ("california", "france")
# (off-peak, on-peak) $/kWh and the on-peak hour window [start, end)
TARIFF_DEFAULTS = {
    "california": (0.12, 0.30, (16, 21)),
    "france": (0.15, 0.20, (7, 22)),
}
EXPORT_RATIO = 0.5
GRID_KINDS = ("none", "strong", "weak")


@dataclass(frozen=True)
class Architecture:
    has_genset: bool
    grid_kind: str

    def __post_init__(self):
        if self.grid_kind not in GRID_KINDS:
            raise DomainError(f"unknown grid kind {self.grid_kind!r}")
        if self.grid_kind in ("none", "weak") and not self.has_genset:
            raise DomainError(f"grid kind {self.grid_kind!r} requires a genset")

    @property
    def label(self):
        return architecture_label(self.has_genset, self.grid_kind)


VALID_ARCHITECTURES = (
    Architecture(True, "none"),
    Architecture(True, "strong"),
    Architecture(False, "strong"),
    Architecture(True, "weak"),
)
GENSET_ONLY, GRID_GENSET, GRID_ONLY, WEAK_GRID = VALID_ARCHITECTURES


def size_battery(mean_load: float, rng: np.random.Generator) -> BatterySpec:
    if not mean_load > 0:
        raise DomainError("mean load must be positive")
    hours = rng.uniform(*BATTERY_HOURS_RANGE)
    capacity = hours * mean_load
    return BatterySpec(capacity=capacity, power_charge_max=capacity / 4, power_discharge_max=capacity / 4)


def make_tariff(region: str, rng: Optional[np.random.Generator] = None, jitter: float = 0.0) -> Tariff:
    """Two-band time-of-use tariff. ``jitter`` > 0 scales both bands by a common random factor."""
    try:
        off, on, (start, end) = TARIFF_DEFAULTS[region]
    except KeyError:
        raise DomainError(f"unknown tariff region {region!r}") from None
    if jitter > 0:
        if rng is None:
            raise DomainError("jitter requires an rng")
        f = 1.0 + rng.uniform(-jitter, jitter)
        off, on = off * f, on * f
    imp = [on if start <= h < end else off for h in range(24)]
    return Tariff(import_price=imp, export_price=[EXPORT_RATIO * p for p in imp])


def make_outage_schedule(rng: np.random.Generator, mean_outages_per_week: float = OUTAGES_PER_WEEK,
                         mean_duration: float = OUTAGE_MEAN_HOURS) -> np.ndarray:
    """Hourly outage flags: Bernoulli outage starts, geometric durations."""
    if not (mean_outages_per_week > 0 and mean_duration > 0):
        raise DomainError("outage rate and duration must be positive")
    p_start = min(1.0, mean_outages_per_week / 168.0)
    p_end = min(1.0, 1.0 / mean_duration)
    starts = rng.random(HOURS_PER_YEAR) < p_start
    out = np.zeros(HOURS_PER_YEAR, dtype=bool)
    t = 0
    while t < HOURS_PER_YEAR:
        if starts[t]:
            length = int(rng.geometric(p_end))
            out[t:t + length] = True
            t += length
        else:
            t += 1
    return out


def generate_microgrid(rng: np.random.Generator, arch: Optional[Architecture] = None,
                       load_sources: Sequence[str] = DEFAULT_SOURCES,
                       pv_sources: Sequence[str] = DEFAULT_SOURCES) -> MicrogridConfig:
    lo, hi = LOAD_PEAK_RANGE
    load_peak = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    load = scale_to_peak(resolve_profile(load_sources[rng.integers(len(load_sources))], "load"), load_peak)
    if arch is None:
        arch = VALID_ARCHITECTURES[rng.integers(len(VALID_ARCHITECTURES))]
    penetration = rng.uniform(*PV_PENETRATION_RANGE)
    pv = scale_to_peak(resolve_profile(pv_sources[rng.integers(len(pv_sources))], "pv"), penetration * load_peak)
    battery = size_battery(float(load.values.mean()), rng)
    genset = GensetSpec(rated_power=float(math.ceil(load_peak))) if arch.has_genset else None
    grid = None
    if arch.grid_kind != "none":
        tariff = make_tariff(TARIFF_REGIONS[rng.integers(len(TARIFF_REGIONS))], rng)
        weak = arch.grid_kind == "weak"
        outage = make_outage_schedule(rng) if weak else None
        grid = GridSpec(
            power_import_max=GRID_MARGIN * load_peak,
            power_export_max=GRID_MARGIN * load_peak,
            tariff=tariff, weak=weak, outage=outage,
        )
    return MicrogridConfig(load=load, pv=pv, battery=battery, genset=genset, grid=grid)


PRESET_SIZES = {"pymgrid10": 10, "pymgrid25": 25}
PYMGRID25_MIX = ((GENSET_ONLY, 4), (GRID_GENSET, 3), (GRID_ONLY, 9), (WEAK_GRID, 9))


@dataclass
class ScenarioSet:
    seed: int
    microgrids: list
    preset_name: Optional[str] = None

    def to_dict(self):
        return {
            "seed": self.seed,
            "preset_name": self.preset_name,
            "microgrids": [mg.to_dict() for mg in self.microgrids],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_dict(cls, d):
        return cls(seed=d["seed"], preset_name=d.get("preset_name"),
                   microgrids=[MicrogridConfig.from_dict(m) for m in d["microgrids"]])

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def architectures(self):
        return [mg.architecture for mg in self.microgrids]


def build_scenario_set(preset: str, count: Optional[int] = None, seed: int = 0,
                       load_sources: Sequence[str] = DEFAULT_SOURCES,
                       pv_sources: Sequence[str] = DEFAULT_SOURCES) -> ScenarioSet:
    rng = np.random.default_rng(seed)
    if preset in PRESET_SIZES:
        size = PRESET_SIZES[preset]
        if count is not None and count != size:
            raise DomainError(f"preset {preset} has exactly {size} microgrids, not {count}")
        if preset == "pymgrid10":
            archs = [GENSET_ONLY] * size
        else:
            archs = [arch for arch, n in PYMGRID25_MIX for _ in range(n)]
            archs = [archs[i] for i in rng.permutation(len(archs))]
    elif preset == "random":
        if count is None or count < 1:
            raise DomainError("the random preset needs a positive count")
        archs = [None] * count
    else:
        raise DomainError(f"unknown preset {preset!r}")
    mgs = [generate_microgrid(rng, arch, load_sources, pv_sources) for arch in archs]
    return ScenarioSet(seed=seed, microgrids=mgs, preset_name=preset)


def architecture_space_size(n_load: int = 5, n_pv: int = 5, n_tariffs: int = 2,
                            grid_kinds: Sequence[str] = GRID_KINDS,
                            genset_options: Sequence[bool] = (False, True),
                            penetration_levels: int = 1) -> int:
    """Number of distinct discrete microgrid designs the generator can emit.

    Counts load profile x PV profile x (tariff, grid kind, genset) triples that
    form a valid architecture. Tariffs only multiply grid-connected designs:

        n_load * n_pv * penetration_levels * sum over valid (genset, grid) of
        (n_tariffs if grid != none else 1)

    With the defaults that is 5 * 5 * (1 + 2*2 + 2) = 175.
    """
    per_profile = 0
    for kind in grid_kinds:
        for has_genset in genset_options:
            try:
                Architecture(bool(has_genset), kind)
            except DomainError:
                continue
            per_profile += n_tariffs if kind != "none" else 1
    return n_load * n_pv * per_profile * penetration_levels
