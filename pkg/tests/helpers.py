"""Small hand-built microgrids for unit tests."""
import numpy as np

from mgsim.core import BatterySpec, GensetSpec, GridSpec, MicrogridConfig, Tariff
from mgsim.profiles import HOURS_PER_YEAR, TimeSeries


def series(values, kind):
    """Tile ``values`` (scalar or sequence) over a full year."""
    v = np.atleast_1d(np.asarray(values, dtype=float))
    return TimeSeries(np.resize(v, HOURS_PER_YEAR), kind=kind)


def flat_tariff(import_price=0.2, export_price=0.1, by_hour=None):
    if by_hour is not None:
        imp = [float(p) for p in by_hour]
        return Tariff(imp, [export_price * p / import_price for p in imp])
    return Tariff([import_price] * 24, [export_price] * 24)


def make_config(load=100.0, pv=0.0, capacity=100.0, p_charge=50.0, p_discharge=50.0, efficiency=0.9,
                soc_min=0.1, soc_max=1.0, soc_init=0.5, genset=None, fuel_price=0.25, min_loading=0.05,
                grid=None, tariff=None, outage=None, import_max=None, export_max=None,
                loss_load_price=10.0, pv_curtail_price=0.0):
    """``genset`` is a rated power or None; ``grid`` is None, "strong" or "weak"."""
    battery = BatterySpec(capacity, p_charge, p_discharge, efficiency, soc_min, soc_max, soc_init)
    gs = None if genset is None else GensetSpec(float(genset), fuel_price, min_loading)
    gr = None
    if grid is not None:
        peak = float(np.max(load))
        gr = GridSpec(
            power_import_max=import_max if import_max is not None else 1.1 * max(peak, 1.0),
            power_export_max=export_max if export_max is not None else 1.1 * max(peak, 1.0),
            tariff=tariff if tariff is not None else flat_tariff(),
            weak=grid == "weak",
            outage=outage,
        )
    return MicrogridConfig(series(load, "load"), series(pv, "pv"), battery, gs, gr, loss_load_price, pv_curtail_price)
