"""mgsim: generate, simulate and benchmark fleets of microgrids for tertiary (dispatch) control."""
from ._kernels import BACKEND
from .core import (
    BatterySpec, ControlAction, CostBreakdown, GensetSpec, GridSpec, Microgrid, MicrogridConfig,
    Observation, StepRecord, Tariff, battery_step,
)
from .generate import Architecture, ScenarioSet, build_scenario_set, generate_microgrid
from .lp import LinearProgram, LPSolution, feasibility_check, solve
from .profiles import TimeSeries, load_profile_csv, scale_to_peak, synth_profile

__version__ = "0.1.0"
