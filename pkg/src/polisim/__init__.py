"""polisim: deterministic agent-based simulator of a metropolitan economy."""

from .params import CityConfig, ConfigError, ExogenousSeries, RunConfig, SimParams
from .simulation import build_state, run_simulation, step_month
from .state import IntegrityError, SimState, check_conservation

__version__ = "0.1.0"

__all__ = [
    "CityConfig", "ConfigError", "ExogenousSeries", "RunConfig", "SimParams",
    "SimState", "IntegrityError", "check_conservation",
    "build_state", "run_simulation", "step_month", "__version__",
]
