"""Rule-based dispatch.

Deficit (load above PV) is served by battery, then grid, then genset, then
shedding. Surplus PV charges the battery, then is exported, then curtailed.
This is the ``battery-priority`` action template.
"""
from ..core import ControlAction, Microgrid, Observation
from .base import Controller, expand_template

RBC_TEMPLATE = 0


def rbc_decide(obs: Observation, config, soc: float | None = None) -> ControlAction:
    return expand_template(RBC_TEMPLATE, obs, config, soc)


class RuleBasedController(Controller):
    name = "rbc"

    def decide(self, mg: Microgrid) -> ControlAction:
        return rbc_decide(mg.observation(), mg, mg.soc)
