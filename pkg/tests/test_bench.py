import csv
import io
import json

import pytest

from mgsim.bench import (
    BenchmarkConfig, displayed_values, footed_integers, microgrid_seed, render_report, report_rows,
    run_benchmark,
)
from mgsim.controllers import EvalReport
from mgsim.errors import ConfigError, DomainError

# reference MPC group totals in k$, with the pymgrid25 group sizes
REFERENCE_GROUPS = {"genset-only": (4, 78_890), "grid-only": (9, 73_352), "grid+genset": (3, 57_322),
                    "weak-grid": (9, 81_522)}


def reference_report(controller="mpc"):
    costs, archs = [], []
    for arch, (n, total_k) in REFERENCE_GROUPS.items():
        costs += [total_k * 1000.0 / n] * n
        archs += [arch] * n
    return EvalReport(controller, 0, costs, archs)


def table_cells(text):
    """(group label, metric label) -> list of cell strings from a rendered table."""
    out, group = {}, None
    for line in text.splitlines()[2:]:
        if line.startswith("-") or line.startswith("test-phase"):
            continue
        parts = [p for p in line.split("  ") if p.strip()]
        if "Mean cost" in line:
            group = parts[0].strip()
            out[(group, "mean")] = [p.strip() for p in parts[2:]]
        else:
            out[(group, "total")] = [p.strip() for p in parts[1:]]
    return out


@pytest.fixture(scope="module")
def small_reports():
    cfg = BenchmarkConfig(seed=0, controllers=("rbc", "mpc"), days=6, horizon=12)
    return run_benchmark(cfg)


def test_report_shape(small_reports):
    rows = list(csv.reader(io.StringIO(render_report(small_reports, "csv"))))
    assert rows[0] == ["controller", "group", "count", "metric", "cost_kusd"]
    assert len(rows) - 1 == 5 * 2 * 2
    assert {r[1] for r in rows[1:]} == {"All", "genset-only", "grid-only", "grid+genset", "weak-grid"}
    assert [r.controller for r in small_reports] == ["rbc", "mpc"]


def test_config_errors():
    with pytest.raises(ConfigError):
        BenchmarkConfig(controllers=()).validate()
    with pytest.raises(ConfigError):
        BenchmarkConfig(controllers=("rbc", "dqn")).validate()
    with pytest.raises(ConfigError):
        BenchmarkConfig(train_frac=1.0).validate()
    with pytest.raises(ConfigError):
        BenchmarkConfig(preset="pymgrid99").validate()
    with pytest.raises(ConfigError):
        run_benchmark(BenchmarkConfig(controllers=()))


def test_empty_reports_rejected():
    for fmt in ("csv", "json", "table"):
        with pytest.raises(DomainError):
            render_report([], fmt)
    with pytest.raises(DomainError):
        render_report([reference_report()], "xml")


def test_reference_cross_footing():
    text = render_report([reference_report()], "table")
    cells = table_cells(text)
    assert cells[("All", "total")] == ["291,086"]
    assert cells[("All", "mean")] == ["11,643"]
    parts = [int(cells[(g, "total")][0].replace(",", ""))
             for g in ("Genset only", "Grid only", "Grid + Genset", "Weak grid")]
    assert parts == [78_890, 73_352, 57_322, 81_522]
    assert sum(parts) == 291_086


def test_single_microgrid_mean_equals_total():
    rep = EvalReport("rbc", 0, [12_345_678.0], ["grid-only"])
    shown = displayed_values(rep)
    assert shown[("grid-only", "mean")] == shown[("grid-only", "total")] == 12_346
    cells = table_cells(render_report([rep], "table"))
    assert cells[("Grid only", "mean")] == cells[("Grid only", "total")]


def test_footing_restores_the_rounded_total():
    vals = [0.4, 0.4, 0.4, 0.4, 0.4]
    assert footed_integers(vals, sum(vals)) == [1, 1, 0, 0, 0]
    assert footed_integers([1.6, 2.6], 4.2) == [2, 2]
    rep = EvalReport("q", 0, [400.0] * 5, ["genset-only", "grid-only", "grid+genset", "weak-grid", "weak-grid"])
    shown = displayed_values(rep)
    assert sum(shown[(g, "total")] for g in rep.groups() if g != "All") == shown[("All", "total")] == 2


def test_csv_and_json_agree(small_reports):
    rows = list(csv.DictReader(io.StringIO(render_report(small_reports, "csv"))))
    doc = json.loads(render_report(small_reports, "json"))
    by_group = {g["group"]: g for g in doc["groups"]}
    for r in rows:
        entry = by_group[r["group"]]["controllers"][r["controller"]]
        assert float(r["cost_kusd"]) == entry[f"{r['metric']}_kusd"]
        assert int(r["count"]) == by_group[r["group"]]["count"]
    assert doc["unit"] == "k$" and doc["phase"] == "test"
    assert len(doc["microgrids"]) == 25


def test_mean_times_count_is_total(small_reports):
    rows = report_rows(small_reports)
    means = {(c, g): (n, v) for c, g, n, m, v in rows if m == "mean"}
    for c, g, n, m, v in rows:
        if m == "total":
            assert means[(c, g)][1] * n == pytest.approx(v, rel=1e-12)


def test_table_marks_best_learner():
    a = reference_report("rbc")
    b = EvalReport("q", 0, [c * 2 for c in a.costs], a.architectures)
    text = render_report([b, reference_report("mpc"), a], "table")
    header = text.splitlines()[0]
    assert header.index("MPC") < header.index("Rule-based") < header.index("Q-learning")
    cells = table_cells(text)
    assert cells[("All", "total")][1].endswith("*")
    assert not cells[("All", "total")][0].endswith("*")
    assert "*" not in render_report([a, reference_report("mpc")], "table")


def test_training_seeds_are_per_microgrid():
    seeds = {microgrid_seed(0, i) for i in range(25)}
    assert len(seeds) == 25
    assert microgrid_seed(0, 3) == microgrid_seed(0, 3) != microgrid_seed(1, 3)
