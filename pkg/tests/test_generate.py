import collections
import json

import numpy as np
import pytest

from mgsim.core import MicrogridConfig
from mgsim.errors import DomainError
from mgsim.generate import (
    BATTERY_HOURS_RANGE,
    GENSET_ONLY,
    LOAD_PEAK_RANGE,
    PV_PENETRATION_RANGE,
    VALID_ARCHITECTURES,
    Architecture,
    ScenarioSet,
    architecture_space_size,
    build_scenario_set,
    generate_microgrid,
    make_outage_schedule,
    make_tariff,
    size_battery,
)


def test_architecture_rules():
    with pytest.raises(DomainError):
        Architecture(False, "none")
    with pytest.raises(DomainError):
        Architecture(False, "weak")
    with pytest.raises(DomainError):
        Architecture(True, "satellite")
    assert len(VALID_ARCHITECTURES) == 4


def test_forced_genset_only():
    cfg = generate_microgrid(np.random.default_rng(0), GENSET_ONLY)
    assert cfg.grid is None
    assert cfg.genset.rated_power >= cfg.load.peak


def test_grid_limit_above_peak():
    rng = np.random.default_rng(4)
    for _ in range(30):
        cfg = generate_microgrid(rng)
        if cfg.grid is not None:
            assert cfg.grid.power_import_max > cfg.load.peak
            assert cfg.grid.power_import_max == pytest.approx(1.1 * cfg.load.peak)
        if cfg.genset is not None:
            assert cfg.genset.rated_power == np.ceil(cfg.load.peak)


def test_generation_deterministic():
    a = generate_microgrid(np.random.default_rng(11)).to_json()
    b = generate_microgrid(np.random.default_rng(11)).to_json()
    assert a == b


def test_size_battery_formula():
    class FixedRng:
        def uniform(self, lo, hi):
            return 4.0

    b = size_battery(1000.0, FixedRng())
    assert b.capacity == 4000.0
    assert b.power_charge_max == b.power_discharge_max == 1000.0


def test_size_battery_range():
    rng = np.random.default_rng(0)
    caps = np.array([size_battery(1000.0, rng).capacity for _ in range(10000)])
    assert caps.min() >= 3000.0 and caps.max() <= 5000.0


def test_size_battery_rejects_zero():
    with pytest.raises(DomainError):
        size_battery(0.0, np.random.default_rng(0))


def test_sampled_ranges_over_many_draws():
    rng = np.random.default_rng(1)
    peaks, pens, hours = [], [], []
    for _ in range(10000):
        # replicate the first draws of generate_microgrid without building profiles
        lo, hi = LOAD_PEAK_RANGE
        peaks.append(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        pens.append(rng.uniform(*PV_PENETRATION_RANGE))
        hours.append(rng.uniform(*BATTERY_HOURS_RANGE))
    assert LOAD_PEAK_RANGE[0] <= min(peaks) and max(peaks) <= LOAD_PEAK_RANGE[1]
    assert PV_PENETRATION_RANGE[0] <= min(pens) and max(pens) <= PV_PENETRATION_RANGE[1]
    assert BATTERY_HOURS_RANGE[0] <= min(hours) and max(hours) <= BATTERY_HOURS_RANGE[1]


def test_generated_ranges():
    rng = np.random.default_rng(2)
    for _ in range(40):
        cfg = generate_microgrid(rng)
        peak = cfg.load.peak
        assert LOAD_PEAK_RANGE[0] <= peak <= LOAD_PEAK_RANGE[1]
        pen = cfg.pv.peak / peak
        assert PV_PENETRATION_RANGE[0] - 1e-9 <= pen <= PV_PENETRATION_RANGE[1] + 1e-9
        h = cfg.battery.capacity / cfg.load.values.mean()
        assert BATTERY_HOURS_RANGE[0] - 1e-9 <= h <= BATTERY_HOURS_RANGE[1] + 1e-9


def test_tariff_california():
    t = make_tariff("california", np.random.default_rng(0))
    assert t.import_price[18] > t.import_price[3]
    assert t.import_price[16] == 0.30 and t.import_price[21] == 0.12


def test_tariff_export_below_import():
    for region in ("california", "france"):
        t = make_tariff(region)
        assert all(e <= i for e, i in zip(t.export_price, t.import_price))
        assert all(e == 0.5 * i for e, i in zip(t.export_price, t.import_price))


def test_tariff_france_two_bands():
    t = make_tariff("france")
    assert len(set(t.import_price)) == 2
    with pytest.raises(DomainError):
        make_tariff("mars")


def test_outage_degenerate_rate():
    assert not make_outage_schedule(np.random.default_rng(0), 1e-9, 4.0).any()


def test_outage_expected_hours():
    hours = make_outage_schedule(np.random.default_rng(0)).sum()
    assert 416 * 0.7 <= hours <= 416 * 1.3


def test_outage_deterministic_and_validated():
    a = make_outage_schedule(np.random.default_rng(3))
    b = make_outage_schedule(np.random.default_rng(3))
    assert np.array_equal(a, b)
    with pytest.raises(DomainError):
        make_outage_schedule(np.random.default_rng(0), 0.0, 4.0)
    with pytest.raises(DomainError):
        make_outage_schedule(np.random.default_rng(0), 2.0, -1.0)


def test_pymgrid25_mix():
    ss = build_scenario_set("pymgrid25", 25, seed=0)
    hist = collections.Counter(ss.architectures())
    assert hist == {"genset-only": 4, "grid+genset": 3, "grid-only": 9, "weak-grid": 9}


def test_pymgrid25_order_depends_on_seed():
    a = build_scenario_set("pymgrid25", seed=0).architectures()
    b = build_scenario_set("pymgrid25", seed=1).architectures()
    assert sorted(a) == sorted(b) and a != b


def test_pymgrid10_all_genset_only():
    ss = build_scenario_set("pymgrid10", 10, seed=5)
    assert all(m.grid is None and m.genset is not None for m in ss.microgrids)


def test_preset_count_mismatch():
    with pytest.raises(DomainError):
        build_scenario_set("pymgrid10", 25)
    with pytest.raises(DomainError):
        build_scenario_set("random")
    with pytest.raises(DomainError):
        build_scenario_set("pymgrid99")


def test_random_preset_count():
    assert len(build_scenario_set("random", 7, seed=1).microgrids) == 7


def test_weak_grids_have_genset(pymgrid25):
    for m in pymgrid25.microgrids:
        if m.grid is not None and m.grid.weak:
            assert m.genset is not None and m.grid.outage.any()
        if m.grid is not None and not m.grid.weak:
            assert not m.grid.outage.any()


def test_scenario_set_round_trip(tmp_path):
    ss = build_scenario_set("pymgrid25", seed=2)
    path = tmp_path / "s.json"
    ss.save(path)
    back = ScenarioSet.load(path)
    assert back.seed == 2 and back.preset_name == "pymgrid25"
    assert back.to_json() == ss.to_json()
    assert all(isinstance(m, MicrogridConfig) for m in back.microgrids)
    assert json.loads(path.read_text())["seed"] == 2


def test_regeneration_bitwise():
    assert build_scenario_set("pymgrid25", seed=9).to_json() == build_scenario_set("pymgrid25", seed=9).to_json()


def test_architecture_space_size():
    assert architecture_space_size() == 175
    assert architecture_space_size(penetration_levels=4) > 600
    assert architecture_space_size(n_load=0) == 0


def test_architecture_space_without_tariffs():
    full = architecture_space_size()
    one = architecture_space_size(n_tariffs=1)
    grid_connected = 5 * 5 * (2 * 2 + 2)
    assert full - one == grid_connected // 2
