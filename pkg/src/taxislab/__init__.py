"""taxislab: finite-volume simulation and structural analysis of
chemotaxis-haptotaxis systems with indirect signal production."""

from .grid import Grid, InitialData, State, StripeSpec, init_scenario
from .model import (CafParams, ConfigurationError, GoGrowParams, HypothesisBudget,
                    Kinetics, ModelParams, check_hypotheses, finite_diff_partials,
                    make_caf, make_go_or_grow, verify_witness)
from .solver import (RunSummary, SolverConfig, StepReport, detect_blowup,
                     implicit_diffusion, simulate, step, taxis_divergence)

__all__ = [
    "Grid", "InitialData", "State", "StripeSpec", "init_scenario",
    "CafParams", "ConfigurationError", "GoGrowParams", "HypothesisBudget",
    "Kinetics", "ModelParams", "check_hypotheses", "finite_diff_partials",
    "make_caf", "make_go_or_grow", "verify_witness",
    "RunSummary", "SolverConfig", "StepReport", "detect_blowup",
    "implicit_diffusion", "simulate", "step", "taxis_divergence",
]

__version__ = "0.1.0"
