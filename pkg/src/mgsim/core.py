"""Microgrid configuration types and the step/reset simulator."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import DomainError, EpisodeOverError, SimultaneousChargeError, SplitError
from .profiles import HOURS_PER_YEAR, TimeSeries

DEFAULT_LOSS_LOAD_PRICE = 10.0
DEFAULT_CURTAIL_PRICE = 0.0


@dataclass(frozen=True)
class BatterySpec:
    capacity: float
    power_charge_max: float
    power_discharge_max: float
    efficiency: float = 0.9
    soc_min: float = 0.1
    soc_max: float = 1.0
    soc_init: float = 0.5

    def __post_init__(self):
        if not self.capacity > 0:
            raise DomainError("battery capacity must be positive")
        if not (self.power_charge_max > 0 and self.power_discharge_max > 0):
            raise DomainError("battery power limits must be positive")
        if not 0 < self.efficiency <= 1:
            raise DomainError("battery efficiency must lie in (0, 1]")
        if not 0 <= self.soc_min < self.soc_max <= 1:
            raise DomainError("need 0 <= soc_min < soc_max <= 1")
        if not self.soc_min <= self.soc_init <= self.soc_max:
            raise DomainError("soc_init must lie within [soc_min, soc_max]")


@dataclass(frozen=True)
class GensetSpec:
    rated_power: float
    fuel_price: float = 0.25
    min_loading: float = 0.05

    def __post_init__(self):
        if not self.rated_power > 0:
            raise DomainError("genset rated power must be positive")
        if self.fuel_price < 0:
            raise DomainError("fuel price must be nonnegative")
        if not 0 <= self.min_loading < 1:
            raise DomainError("min_loading must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class Tariff:
    import_price: tuple
    export_price: tuple

    def __post_init__(self):
        imp = tuple(float(v) for v in self.import_price)
        exp = tuple(float(v) for v in self.export_price)
        if len(imp) != 24 or len(exp) != 24:
            raise DomainError("tariffs need 24 hourly prices")
        if min(imp) < 0 or min(exp) < 0:
            raise DomainError("prices must be nonnegative")
        if any(e > i for e, i in zip(exp, imp)):
            raise DomainError("export price may not exceed import price")
        object.__setattr__(self, "import_price", imp)
        object.__setattr__(self, "export_price", exp)

    def __eq__(self, other):
        return isinstance(other, Tariff) and self.import_price == other.import_price and self.export_price == other.export_price


@dataclass(frozen=True, eq=False)
class GridSpec:
    power_import_max: float
    power_export_max: float
    tariff: Tariff
    weak: bool = False
    outage: np.ndarray = None

    def __post_init__(self):
        if not (self.power_import_max > 0 and self.power_export_max > 0):
            raise DomainError("grid power limits must be positive")
        outage = np.zeros(HOURS_PER_YEAR, dtype=bool) if self.outage is None else np.array(self.outage, dtype=bool)
        if outage.shape != (HOURS_PER_YEAR,):
            raise DomainError(f"outage schedule needs {HOURS_PER_YEAR} entries")
        if not self.weak and outage.any():
            raise DomainError("only weak grids may have outages")
        outage.setflags(write=False)
        object.__setattr__(self, "outage", outage)

    def __eq__(self, other):
        return (
            isinstance(other, GridSpec)
            and self.power_import_max == other.power_import_max
            and self.power_export_max == other.power_export_max
            and self.tariff == other.tariff
            and self.weak == other.weak
            and np.array_equal(self.outage, other.outage)
        )


@dataclass(frozen=True)
class MicrogridConfig:
    load: TimeSeries
    pv: TimeSeries
    battery: BatterySpec
    genset: Optional[GensetSpec] = None
    grid: Optional[GridSpec] = None
    loss_load_price: float = DEFAULT_LOSS_LOAD_PRICE
    pv_curtail_price: float = DEFAULT_CURTAIL_PRICE

    def __post_init__(self):
        if self.load.kind != "load" or self.pv.kind != "pv":
            raise DomainError("load and pv series must have matching kinds")
        if self.grid is not None and self.grid.weak and self.genset is None:
            raise DomainError("a weak grid requires a backup genset")
        if self.loss_load_price < 0 or self.pv_curtail_price < 0:
            raise DomainError("penalty prices must be nonnegative")

    @property
    def architecture(self) -> str:
        return architecture_label(self.genset is not None, grid_kind(self))

    def to_dict(self):
        grid = None
        if self.grid is not None:
            grid = {
                "power_import_max": self.grid.power_import_max,
                "power_export_max": self.grid.power_export_max,
                "tariff": {
                    "import_price": list(self.grid.tariff.import_price),
                    "export_price": list(self.grid.tariff.export_price),
                },
                "weak": self.grid.weak,
                "outage": self.grid.outage.tolist(),
            }
        return {
            "load": self.load.to_dict(),
            "pv": self.pv.to_dict(),
            "battery": asdict(self.battery),
            "genset": None if self.genset is None else asdict(self.genset),
            "grid": grid,
            "loss_load_price": self.loss_load_price,
            "pv_curtail_price": self.pv_curtail_price,
        }

    @classmethod
    def from_dict(cls, d):
        grid = d.get("grid")
        if grid is not None:
            grid = GridSpec(
                power_import_max=grid["power_import_max"],
                power_export_max=grid["power_export_max"],
                tariff=Tariff(**grid["tariff"]),
                weak=bool(grid["weak"]),
                outage=np.asarray(grid["outage"], dtype=bool),
            )
        genset = d.get("genset")
        return cls(
            load=TimeSeries.from_dict(d["load"]),
            pv=TimeSeries.from_dict(d["pv"]),
            battery=BatterySpec(**d["battery"]),
            genset=None if genset is None else GensetSpec(**genset),
            grid=grid,
            loss_load_price=d.get("loss_load_price", DEFAULT_LOSS_LOAD_PRICE),
            pv_curtail_price=d.get("pv_curtail_price", DEFAULT_CURTAIL_PRICE),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MicrogridConfig":
        return cls.from_dict(json.loads(text))


def grid_kind(config: MicrogridConfig) -> str:
    if config.grid is None:
        return "none"
    return "weak" if config.grid.weak else "strong"


ARCHITECTURE_GROUPS = ("genset-only", "grid-only", "grid+genset", "weak-grid")


def architecture_label(has_genset: bool, kind: str) -> str:
    if kind == "weak":
        return "weak-grid"
    if kind == "strong":
        return "grid+genset" if has_genset else "grid-only"
    return "genset-only" if has_genset else "battery-only"


@dataclass(slots=True)
class ControlAction:
    pv_to_load: float = 0.0
    battery_charge: float = 0.0
    battery_discharge: float = 0.0
    grid_import: float = 0.0
    grid_export: float = 0.0
    genset_power: float = 0.0
    load_shed: float = 0.0
    pv_curtailed: float = 0.0

    def as_tuple(self):
        return (
            float(self.pv_to_load), float(self.battery_charge), float(self.battery_discharge),
            float(self.grid_import), float(self.grid_export), float(self.genset_power),
            float(self.load_shed), float(self.pv_curtailed),
        )

    @classmethod
    def from_tuple(cls, t):
        return cls(*t)

    @classmethod
    def coerce(cls, action):
        """Accept a ControlAction, a control dictionary, or an 8-sequence."""
        if isinstance(action, cls):
            return action
        if isinstance(action, dict):
            unknown = set(action) - set(K.ACTION_FIELDS)
            if unknown:
                raise DomainError(f"unknown control fields {sorted(unknown)}")
            return cls(**action)
        return cls(*action)


@dataclass(frozen=True)
class CostBreakdown:
    fuel: float = 0.0
    imports: float = 0.0
    export_credit: float = 0.0
    loss_load: float = 0.0
    curtail: float = 0.0

    @property
    def total(self) -> float:
        return self.fuel + self.imports - self.export_credit + self.loss_load + self.curtail

    def to_dict(self):
        return {
            "fuel": self.fuel, "import": self.imports, "export_credit": self.export_credit,
            "loss_load": self.loss_load, "curtail": self.curtail, "total": self.total,
        }


@dataclass(frozen=True)
class Observation:
    load_now: float
    pv_now: float
    soc_fraction: float
    hour_of_day: int
    grid_up: bool
    import_price_now: float
    export_price_now: float
    capacities: dict = field(repr=False)
    step_index: int = 0


@dataclass(frozen=True)
class StepRecord:
    observation: Observation
    cost: CostBreakdown
    violations: list
    done: bool
    action: ControlAction


@dataclass(frozen=True)
class MicrogridState:
    step_index: int
    soc: float
    done: bool
    split_boundary: Optional[int]
    phase: str
    cumulative_cost: float


def battery_step(spec: BatterySpec, soc: float, charge: float, discharge: float, dt: float = 1.0) -> float:
    """State of charge (kWh) after one step of charging or discharging."""
    if charge < 0 or discharge < 0:
        raise DomainError("battery powers must be nonnegative")
    if charge > 0 and discharge > 0:
        raise SimultaneousChargeError("cannot charge and discharge in the same step")
    return soc + spec.efficiency * charge * dt - (discharge / spec.efficiency) * dt


def pack_params(config: MicrogridConfig, dt: float = 1.0) -> np.ndarray:
    b = config.battery
    P = np.zeros(K.N_PARAMS)
    P[K.CAP] = b.capacity
    P[K.PCH] = b.power_charge_max
    P[K.PDIS] = b.power_discharge_max
    P[K.EFF] = b.efficiency
    P[K.SOC_LO] = b.soc_min * b.capacity
    P[K.SOC_HI] = b.soc_max * b.capacity
    if config.genset is not None:
        P[K.HAS_GEN] = 1.0
        P[K.GEN_RATED] = config.genset.rated_power
        P[K.GEN_MIN] = config.genset.min_loading
        P[K.FUEL] = config.genset.fuel_price
    if config.grid is not None:
        P[K.HAS_GRID] = 1.0
        P[K.IMP_MAX] = config.grid.power_import_max
        P[K.EXP_MAX] = config.grid.power_export_max
    P[K.SHED_PRICE] = config.loss_load_price
    P[K.CURT_PRICE] = config.pv_curtail_price
    P[K.DT] = dt
    return P


def violation_tags(mask: int) -> list:
    return [tag for bit, tag in K.VIOLATION_TAGS if mask & bit]


class Microgrid:
    """One simulated microgrid.

    ``horizon`` truncates the simulated year to its first ``horizon`` hours.
    After :meth:`train_test_split`, ``reset()`` starts the training phase and
    ``reset(testing=True)`` the testing phase.
    """

    def __init__(self, config: MicrogridConfig, horizon: Optional[int] = None):
        self.config = config
        self.horizon = HOURS_PER_YEAR if horizon is None else int(horizon)
        if not 1 <= self.horizon <= HOURS_PER_YEAR:
            raise DomainError(f"horizon must lie in [1, {HOURS_PER_YEAR}]")
        n = self.horizon
        hours = np.arange(n) % 24
        self.load = np.ascontiguousarray(config.load.values[:n], dtype=float)
        self.pv = np.ascontiguousarray(config.pv.values[:n], dtype=float)
        if config.grid is not None:
            self.grid_up = np.ascontiguousarray(~config.grid.outage[:n], dtype=np.uint8)
            self.import_price = np.asarray(config.grid.tariff.import_price, dtype=float)[hours]
            self.export_price = np.asarray(config.grid.tariff.export_price, dtype=float)[hours]
        else:
            self.grid_up = np.zeros(n, dtype=np.uint8)
            self.import_price = np.zeros(n)
            self.export_price = np.zeros(n)
        self.params = pack_params(config)
        self.load_peak = float(config.load.values.max())
        self.pv_peak = float(config.pv.values.max())
        b = config.battery
        self.capacities = {
            "battery_capacity": b.capacity,
            "battery_charge_max": b.power_charge_max,
            "battery_discharge_max": b.power_discharge_max,
            "soc_min": b.soc_min,
            "soc_max": b.soc_max,
            "genset_rated": 0.0 if config.genset is None else config.genset.rated_power,
            "grid_import_max": 0.0 if config.grid is None else config.grid.power_import_max,
            "grid_export_max": 0.0 if config.grid is None else config.grid.power_export_max,
        }
        # python-float copies for fast scalar access in run()
        self._load_l = self.load.tolist()
        self._pv_l = self.pv.tolist()
        self._up_l = self.grid_up.tolist()
        self._pimp_l = self.import_price.tolist()
        self._pexp_l = self.export_price.tolist()
        self.split_boundary = None
        self.reset()

    # -- phases --------------------------------------------------------------
    def phase_bounds(self, phase: str):
        if phase == "full":
            return 0, self.horizon
        if self.split_boundary is None:
            raise SplitError(f"phase {phase!r} requires train_test_split()")
        if phase == "train":
            return 0, self.split_boundary
        if phase == "test":
            return self.split_boundary, self.horizon
        raise DomainError(f"unknown phase {phase!r}")

    def train_test_split(self, train_fraction: float = 0.67):
        if not 0 < train_fraction < 1:
            raise DomainError("train_fraction must lie in (0, 1)")
        if self._t != self._start and not self.done:
            raise SplitError("cannot split in the middle of an episode")
        boundary = math.floor(train_fraction * self.horizon)
        if not 0 < boundary < self.horizon:
            raise DomainError("split leaves an empty phase")
        self.split_boundary = boundary
        return boundary, self.horizon - boundary

    def reset(self, testing: bool = False, phase: Optional[str] = None) -> Observation:
        if phase is None:
            if testing:
                phase = "test"
            else:
                phase = "full" if self.split_boundary is None else "train"
        self._start, self._end = self.phase_bounds(phase)
        self.phase = phase
        self._t = self._start
        self._soc = self.config.battery.soc_init * self.config.battery.capacity
        self.cumulative_cost = 0.0
        self.log = []
        return self.observation()

    # -- inspection ----------------------------------------------------------
    @property
    def done(self) -> bool:
        return self._t >= self._end

    @property
    def step_index(self) -> int:
        return self._t

    @property
    def soc(self) -> float:
        return self._soc

    @property
    def phase_end(self) -> int:
        return self._end

    @property
    def state(self) -> MicrogridState:
        return MicrogridState(self._t, self._soc, self.done, self.split_boundary, self.phase, self.cumulative_cost)

    def restore(self, step_index: int, soc: float, cumulative_cost: float = 0.0):
        """Jump to an arbitrary step and SOC inside the active phase (used by tests and solvers)."""
        if not self._start <= step_index <= self._end:
            raise DomainError("step index outside the active phase")
        self._t = int(step_index)
        self._soc = float(soc)
        self.cumulative_cost = float(cumulative_cost)

    def observation(self) -> Observation:
        t = min(self._t, self._end - 1)
        return Observation(
            load_now=self._load_l[t],
            pv_now=self._pv_l[t],
            soc_fraction=self._soc / self.config.battery.capacity,
            hour_of_day=t % 24,
            grid_up=bool(self._up_l[t]),
            import_price_now=self._pimp_l[t],
            export_price_now=self._pexp_l[t],
            capacities=self.capacities,
            step_index=self._t,
        )

    # -- dynamics ------------------------------------------------------------
    def check_action(self, action) -> list:
        t = min(self._t, self._end - 1)
        a = ControlAction.coerce(action).as_tuple()
        mask = K.check(self.params, a, self._load_l[t], self._pv_l[t], self._soc, self._up_l[t])
        return violation_tags(mask)

    def step_cost(self, action, hour_of_day: int) -> CostBreakdown:
        a = ControlAction.coerce(action).as_tuple()
        if self.config.grid is not None:
            pimp = self.config.grid.tariff.import_price[hour_of_day]
            pexp = self.config.grid.tariff.export_price[hour_of_day]
        else:
            pimp = pexp = 0.0
        return CostBreakdown(*K.step_costs(self.params, a, pimp, pexp))

    def run(self, action) -> StepRecord:
        if self.done:
            raise EpisodeOverError("episode is over; call reset()")
        t = self._t
        a = ControlAction.coerce(action).as_tuple()
        mask, applied, soc2, fuel, imp_c, exp_c, shed_c, curt_c = K.apply(
            self.params, a, self._load_l[t], self._pv_l[t], self._soc, self._up_l[t],
            self._pimp_l[t], self._pexp_l[t],
        )
        cost = CostBreakdown(fuel, imp_c, exp_c, shed_c, curt_c)
        self._soc = soc2
        self.cumulative_cost += cost.total
        self._t = t + 1
        rec = StepRecord(
            observation=self.observation(),
            cost=cost,
            violations=violation_tags(mask) if mask else [],
            done=self._t >= self._end,
            action=ControlAction(*applied),
        )
        self.log.append(rec)
        return rec

    def __repr__(self):
        return f"Microgrid({self.config.architecture}, load_peak={self.load_peak:.1f} kW, horizon={self.horizon})"

