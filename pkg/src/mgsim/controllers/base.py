from __future__ import annotations

import numpy as np

from .. import _kernels as K
from ..core import ControlAction, Microgrid, MicrogridConfig, Observation, pack_params


def params_of(source) -> np.ndarray:
    if isinstance(source, Microgrid):
        return source.params
    if isinstance(source, MicrogridConfig):
        return pack_params(source)
    return np.asarray(source, dtype=float)


def expand_template(template: int, obs: Observation, params, soc: float | None = None) -> ControlAction:
    """Concrete action for a discrete template at the given observation."""
    P = params_of(params)
    if soc is None:
        soc = obs.soc_fraction * P[K.CAP]
    a = K.expand(P, int(template), obs.load_now, obs.pv_now, soc, int(obs.grid_up),
                 obs.import_price_now, obs.export_price_now)
    return ControlAction(*a)


class Controller:
    """Decides one ControlAction per step. ``prepare`` runs once per episode."""

    name = "controller"

    def prepare(self, mg: Microgrid) -> None:
        pass

    def decide(self, mg: Microgrid) -> ControlAction:
        raise NotImplementedError
