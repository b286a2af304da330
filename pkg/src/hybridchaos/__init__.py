"""Configurable 4D hybrid chaotic map with analysis tooling.

Four coupled piecewise update rules on the unit 4-cube, each mixing a
classical 1D base map (tent/sine/logistic) with user-supplied coupling
and transfer expressions, reduced mod 1. Includes Lyapunov spectrum
estimation, bifurcation scans, cobweb data, histograms with a
chi-square uniformity statistic, and coordinate-pair scatters, plus a
CSV-emitting CLI.
"""

__version__ = "0.1.0"

from .analysis import (
    BifurcationData,
    BifurcationSkip,
    ChiSquareResult,
    Classification,
    CobwebData,
    DegenerateJacobianError,
    Histogram,
    LyapunovResult,
    ScanFailedError,
    TooFewSamplesError,
    bifurcation_scan,
    chi_square_uniformity,
    classify,
    cobweb,
    histogram,
    lyapunov_spectrum,
    scatter_pairs,
    staircase,
)
from .expr import (
    ExprSyntaxError,
    UnboundVariableError,
    evaluate,
    free_variables,
    parse,
    unparse,
)
from .maps import BaseMap, NonFiniteError, eval_base_map, mod1
from .system import (
    ConfigError,
    CouplingMode,
    NonFiniteStateError,
    PRESET_NAMES,
    PartSpec,
    State4,
    SystemConfig,
    Trajectory,
    config_from_dict,
    config_hash,
    config_to_dict,
    generate,
    load_config,
    load_preset,
    step,
)

__all__ = [
    "__version__",
    "BaseMap",
    "NonFiniteError",
    "eval_base_map",
    "mod1",
    "ExprSyntaxError",
    "UnboundVariableError",
    "parse",
    "evaluate",
    "unparse",
    "free_variables",
    "ConfigError",
    "NonFiniteStateError",
    "CouplingMode",
    "State4",
    "PartSpec",
    "SystemConfig",
    "Trajectory",
    "PRESET_NAMES",
    "load_preset",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "step",
    "generate",
    "LyapunovResult",
    "Classification",
    "Histogram",
    "ChiSquareResult",
    "BifurcationData",
    "BifurcationSkip",
    "CobwebData",
    "DegenerateJacobianError",
    "ScanFailedError",
    "TooFewSamplesError",
    "lyapunov_spectrum",
    "classify",
    "bifurcation_scan",
    "cobweb",
    "staircase",
    "histogram",
    "chi_square_uniformity",
    "scatter_pairs",
]
