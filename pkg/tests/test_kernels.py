import os
import subprocess
import sys

import numpy as np
import pytest

from mgsim import Microgrid
from mgsim import _kernels as K
from mgsim._kernels import backends

BACKENDS = backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled backend not built")


def _flat(v):
    if isinstance(v, (tuple, list)):
        return [x for item in v for x in _flat(item)]
    return [float(v)]


def _bits(v):
    return np.array(_flat(v)).tobytes()


@pytest.fixture(scope="module")
def grids(pymgrid25):
    return [Microgrid(c, horizon=48) for c in pymgrid25.microgrids]


def _cases(grids, n=400, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        mg = grids[int(rng.integers(len(grids)))]
        P = mg.params
        load = float(rng.random() * 1.2 * mg.load_peak)
        pv = float(rng.random() * 1.2 * mg.pv_peak) if rng.random() < 0.8 else 0.0
        soc = float(P[K.SOC_LO] + rng.random() * (P[K.SOC_HI] - P[K.SOC_LO]))
        up = bool(rng.random() < 0.8)
        pimp, pexp = float(rng.random() * 0.4), float(rng.random() * 0.1)
        scale = max(load, pv, 1.0)
        a = tuple(float(v) for v in rng.random(8) * scale * (rng.random(8) < 0.6))
        yield P, load, pv, soc, up, pimp, pexp, a, int(rng.integers(K.N_TEMPLATES))


@needs_cython
def test_expand_apply_check_bitwise(grids):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for P, load, pv, soc, up, pimp, pexp, _, tpl in _cases(grids):
        ap = py.expand(P, tpl, load, pv, soc, up, pimp, pexp)
        ac = cy.expand(P, tpl, load, pv, soc, up, pimp, pexp)
        assert _bits(ap) == _bits(ac)
        assert py.check(P, ap, load, pv, soc, up) == cy.check(P, ac, load, pv, soc, up) == 0
        assert _bits(py.apply(P, ap, load, pv, soc, up, pimp, pexp)) == \
            _bits(cy.apply(P, ac, load, pv, soc, up, pimp, pexp))


@needs_cython
def test_repair_and_settle_bitwise(grids):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for P, load, pv, soc, up, pimp, pexp, a, _ in _cases(grids, seed=1):
        assert py.check(P, a, load, pv, soc, up) == cy.check(P, a, load, pv, soc, up)
        rp = py.repair(P, a, load, pv, soc, up)
        rc = cy.repair(P, a, load, pv, soc, up)
        assert _bits(rp) == _bits(rc)
        assert py.check(P, rp, load, pv, soc, up) == 0
        sp = py.settle_genset(P, rp, load, pv, soc, up, pimp, pexp)
        sc = cy.settle_genset(P, rc, load, pv, soc, up, pimp, pexp)
        assert _bits(sp) == _bits(sc)


@needs_cython
def test_q_episode_bitwise(grids):
    mg = Microgrid(grids[5].config, horizon=24 * 30)
    n = mg.horizon
    tables = {}
    for name in ("python", "cython"):
        mod = BACKENDS[name]
        Q = np.zeros((2400, K.N_TEMPLATES))
        N = np.zeros((2400, K.N_TEMPLATES), dtype=np.int64)
        r = np.random.default_rng(2)
        rets = []
        for _ in range(3):
            u, ra = r.random(n), r.integers(0, K.N_TEMPLATES, n, dtype=np.int64)
            rets.append(mod.q_episode(Q, N, mg.params, mg.load, mg.pv, mg.grid_up, mg.import_price,
                                      mg.export_price, 0, n, 0.5 * mg.params[K.CAP], 0.4, u, ra, 0.1, 0.95,
                                      -mg.pv_peak, mg.load_peak, 10, 10, mg.load_peak))
        tables[name] = (Q, N, rets)
    (Qp, Np, rp), (Qc, Nc, rc) = tables["python"], tables["cython"]
    assert Qp.tobytes() == Qc.tobytes()
    assert np.array_equal(Np, Nc)
    assert _bits(rp) == _bits(rc)
    assert Np.sum() == 3 * n


@needs_cython
def test_pivot_bitwise():
    rng = np.random.default_rng(3)
    m, n = 30, 80
    T0 = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.3)
    T0[np.arange(m), np.arange(m)] = 1.0 + rng.random(m)
    d0 = rng.normal(size=n)
    out = []
    for name in ("python", "cython"):
        T, d = T0.copy(), d0.copy()
        for k in range(m):
            BACKENDS[name].pivot(T, d, k, k)
        out.append((T, d))
    assert out[0][0].tobytes() == out[1][0].tobytes()
    assert out[0][1].tobytes() == out[1][1].tobytes()
    # after pivoting on the diagonal the leading block is the identity
    assert np.allclose(out[0][0][:, :m], np.eye(m))


def test_pure_fallback_selected_by_environment():
    env = dict(os.environ, MGSIM_PURE="1")
    code = ("from mgsim import _kernels as K, Microgrid, build_scenario_set;"
            "from mgsim.controllers import RuleBasedController, evaluate_controller;"
            "mg = Microgrid(build_scenario_set('pymgrid10', seed=0).microgrids[0], horizon=96);"
            "print(K.BACKEND, repr(evaluate_controller(RuleBasedController(), mg, 'full')))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, cost = out.stdout.split()
    assert backend == "python"

    from mgsim import build_scenario_set
    from mgsim.controllers import RuleBasedController, evaluate_controller
    mg = Microgrid(build_scenario_set("pymgrid10", seed=0).microgrids[0], horizon=96)
    assert repr(evaluate_controller(RuleBasedController(), mg, "full")) == cost
