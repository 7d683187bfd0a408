"""Hot kernels with a compiled backend and a pure-Python fallback.

The Cython extension ``_fast`` is used when it was built; set ``MGSIM_PURE=1``
to force the pure-Python implementation. :data:`BACKEND` names the active one.
"""
import importlib
import os

from . import _pure
from .layout import *  # noqa: F401,F403


def _load_compiled():
    if os.environ.get("MGSIM_PURE", "") in ("1", "true", "yes"):
        return None
    try:
        return importlib.import_module(__name__ + "._fast")
    except ImportError:
        return None


_fast = _load_compiled()

BACKEND = "cython" if _fast is not None else "python"
_impl = _fast if _fast is not None else _pure

battery_room = _impl.battery_room
check = _impl.check
step_costs = _impl.step_costs
total_cost = _impl.total_cost
repair = _impl.repair
settle_genset = _impl.settle_genset
expand = _impl.expand
apply = _impl.apply
state_index = _impl.state_index
q_episode = _impl.q_episode
pivot = _impl.pivot


def backends():
    """Mapping of available backend name to kernel module."""
    out = {"python": _pure}
    if _fast is not None:
        out["cython"] = _fast
    return out
