"""Event-driven simulation and verification of spin systems on Z^d."""

from spinsys.errors import ConfigError, HypothesisViolation, InvariantViolation
from spinsys.lattice import Box, sites_in, complement_in
from spinsys.configurations import Configuration, indicator, q_weight

__all__ = [
    "Box",
    "ConfigError",
    "Configuration",
    "HypothesisViolation",
    "InvariantViolation",
    "complement_in",
    "indicator",
    "q_weight",
    "sites_in",
]

__version__ = "0.1.0"
