"""Short-time stagnation-birth analysis for heat-coupled planar flow."""

from ._core import (
    ConfigError,
    Scenario,
    __version__,
    assumption_residuals,
    closed_form_event,
    locate_separation,
    scenario_from_text,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "__version__",
    "assumption_residuals",
    "closed_form_event",
    "locate_separation",
    "scenario_from_text",
]
