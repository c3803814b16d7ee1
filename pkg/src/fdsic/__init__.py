"""
fdsic
=====

Digital self-interference cancellation workbench for full-duplex radios:
transmit waveform generation, a nonlinear time-varying SI path, eight
cancellers behind one step interface, and a scenario harness that compares
them on a shared stream.
"""
from .errors import (
    ConfigurationError,
    DegenerateDistributionError,
    DegenerateInputError,
    FramingError,
    InsufficientDataError,
    NumericFault,
    SICError,
)
from .harness import ScenarioConfig, load_config, run_scenario, write_outputs

__all__ = [
    "ConfigurationError",
    "DegenerateDistributionError",
    "DegenerateInputError",
    "FramingError",
    "InsufficientDataError",
    "NumericFault",
    "SICError",
    "ScenarioConfig",
    "load_config",
    "run_scenario",
    "write_outputs",
]
