"""Model predictive control over a linear dispatch model solved by :mod:`mgsim.lp`.

Each step ``t`` of the window owns nine LP columns, in this order::

    pv_to_load, charge, discharge, import, export, genset, shed, curtail, soc_next

and three equality rows: the load balance, the PV balance, and the SOC
recursion ``soc_next = soc + eff*charge*dt - discharge*dt/eff``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import _kernels as K
from ..core import ControlAction, Microgrid
from ..errors import HorizonError
from ..lp import LinearProgram, solve
from .base import Controller, params_of

VARS = ("ptl", "ch", "dis", "imp", "exp", "gen", "shed", "curt", "soc")
NV = len(VARS)
PTL, CH, DIS, IMP, EXP, GEN, SHED, CURT, SOC = range(NV)
MAX_TABLEAU_BYTES = 2 * 1024**3


@dataclass(frozen=True)
class Forecast:
    load: np.ndarray
    pv: np.ndarray
    import_price: np.ndarray
    export_price: np.ndarray
    grid_up: np.ndarray

    def __post_init__(self):
        n = len(self.load)
        if any(len(s) != n for s in (self.pv, self.import_price, self.export_price, self.grid_up)):
            raise HorizonError("forecast sequences must share one length")

    def __len__(self):
        return len(self.load)


def perfect_forecast(mg: Microgrid, start: int, length: int) -> Forecast:
    sl = slice(start, start + length)
    return Forecast(mg.load[sl], mg.pv[sl], mg.import_price[sl], mg.export_price[sl], mg.grid_up[sl])


def mpc_build(params, soc: float, forecast: Forecast, horizon: int) -> LinearProgram:
    """Linear program for dispatching the next ``horizon`` steps from state ``soc`` (kWh)."""
    if not 1 <= horizon <= len(forecast):
        raise HorizonError(f"horizon {horizon} outside [1, {len(forecast)}]")
    P = params_of(params)
    H = horizon
    dt, eff = P[K.DT], P[K.EFF]
    n = NV * H
    c = np.zeros(n)
    A = np.zeros((3 * H, n))
    b = np.zeros(3 * H)
    lo = np.zeros(n)
    hi = np.zeros(n)
    for t in range(H):
        o = NV * t
        load, pv = float(forecast.load[t]), float(forecast.pv[t])
        up = P[K.HAS_GRID] > 0 and bool(forecast.grid_up[t])
        c[o + IMP] = dt * forecast.import_price[t]
        c[o + EXP] = -dt * forecast.export_price[t]
        c[o + GEN] = dt * P[K.FUEL]
        c[o + SHED] = dt * P[K.SHED_PRICE]
        c[o + CURT] = dt * P[K.CURT_PRICE]
        hi[o + PTL] = min(load, pv)
        hi[o + CH] = P[K.PCH]
        hi[o + DIS] = P[K.PDIS]
        hi[o + IMP] = P[K.IMP_MAX] if up else 0.0
        hi[o + EXP] = P[K.EXP_MAX] if up else 0.0
        hi[o + GEN] = P[K.GEN_RATED] if P[K.HAS_GEN] > 0 else 0.0
        hi[o + SHED] = load
        hi[o + CURT] = pv
        lo[o + SOC] = P[K.SOC_LO]
        hi[o + SOC] = P[K.SOC_HI]
        r = 3 * t
        A[r, [o + PTL, o + DIS, o + IMP, o + GEN, o + SHED]] = 1.0
        b[r] = load
        A[r + 1, [o + PTL, o + CH, o + EXP, o + CURT]] = 1.0
        b[r + 1] = pv
        A[r + 2, o + SOC] = 1.0
        A[r + 2, o + CH] = -eff * dt
        A[r + 2, o + DIS] = dt / eff
        if t == 0:
            b[r + 2] = soc
        else:
            A[r + 2, o - NV + SOC] = -1.0
    names = [f"{v}_{t}" for t in range(H) for v in VARS]
    return LinearProgram(c, A, ["="] * (3 * H), b, lo, hi, names)


def _finish_action(P, a, load, pv, soc, up, pimp, pexp):
    a = tuple(0.0 if v < 1e-9 else float(v) for v in a)
    if a[CH] > 0.0 and a[DIS] > 0.0:
        a = K.repair(P, a, load, pv, soc, up)
    a = K.settle_genset(P, a, load, pv, soc, up, pimp, pexp)
    if K.check(P, a, load, pv, soc, up):
        a = K.repair(P, a, load, pv, soc, up)
    return a


class MPCController(Controller):
    """Receding-horizon MPC with a perfect forecast.

    ``horizon=None`` plans to the end of the active phase. In that mode the
    plan is reused while the realized SOC tracks it, since the tail of an
    optimal plan is optimal for the remaining problem; any deviation (for
    instance from genset rounding) triggers a re-solve.
    """

    def __init__(self, horizon: Optional[int] = 24, on_lp: Optional[Callable] = None):
        self.horizon = horizon
        self.name = "mpc" if horizon is not None else "mpc-full"
        self.on_lp = on_lp
        self.solves = 0
        self._plan = None

    def prepare(self, mg: Microgrid) -> None:
        self._plan = None

    def _solve(self, mg: Microgrid, t: int, H: int):
        n_rows, n_cols = 3 * H, 4 * NV * H
        if n_rows * n_cols * 8 > MAX_TABLEAU_BYTES:
            raise HorizonError(f"horizon {H} is too long for the dense LP solver")
        lp = mpc_build(mg, mg.soc, perfect_forecast(mg, t, H), H)
        if self.on_lp is not None:
            self.on_lp(mg, t, lp)
        sol = solve(lp)
        self.solves += 1
        if sol.status != "optimal":
            raise RuntimeError(f"MPC program is {sol.status} at step {t}")
        return sol.x.reshape(H, NV)

    def decide(self, mg: Microgrid) -> ControlAction:
        t = mg.step_index
        remaining = mg.phase_end - t
        H = remaining if self.horizon is None else min(self.horizon, remaining)
        P = mg.params
        row = None
        if self.horizon is None and self._plan is not None:
            start, x, soc_start = self._plan
            k = t - start
            if 0 <= k < len(x) and abs(soc_start[k] - mg.soc) <= 1e-7 * P[K.CAP]:
                row = x[k]
        if row is None:
            x = self._solve(mg, t, H)
            soc_start = np.concatenate([[mg.soc], x[:-1, SOC]])
            self._plan = (t, x, soc_start)
            row = x[0]
        a = _finish_action(P, row[:SOC], mg._load_l[t], mg._pv_l[t], mg.soc, mg._up_l[t],
                           mg._pimp_l[t], mg._pexp_l[t])
        return ControlAction(*a)


def mpc_decide(mg: Microgrid, horizon: Optional[int] = 24) -> ControlAction:
    """One-shot MPC decision at the microgrid's current step."""
    return MPCController(horizon).decide(mg)


def lp_dump_hook(step: int, directory, stem: str = "lp"):
    """``on_lp`` callback that writes the program built at ``step`` to ``directory``."""
    from ..lp import lp_to_text

    def hook(mg, t, lp):
        if t == step:
            path = os.path.join(directory, f"{stem}_step{t}.txt")
            with open(path, "w") as fh:
                fh.write(lp_to_text(lp))

    return hook
