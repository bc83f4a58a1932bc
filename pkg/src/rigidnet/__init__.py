"""Rigid Walrasian equilibria of levered production networks.

Levered Cobb-Douglas production networks under informational rigidity:
validation and Leontief objects (:mod:`rigidnet.economy`), shock and
signal models with exact/analytic/Monte-Carlo expectations
(:mod:`rigidnet.shocks`), the endogenous cost-of-debt fixed point
(:mod:`rigidnet.debt`), the closed-form equilibrium and its realizations
(:mod:`rigidnet.equilibrium`), default classification
(:mod:`rigidnet.defaults`), simulation campaigns
(:mod:`rigidnet.montecarlo`) and the bundled line/cycle experiments
(:mod:`rigidnet.scenarios`).
"""

__version__ = "0.1.0"

from .economy import (
    Economy,
    LeontiefData,
    Relations,
    economy_from_arrays,
    leontief,
    suppliers_customers,
    validate_economy,
)
from .shocks import (
    ExpectationEngine,
    ExpOfLinear,
    ShockModel,
    SignalModel,
    conditional_expectation,
    expected_exp_rho,
    normalized_shocks,
    total_shock,
)
from .debt import DebtProfile, debt_profile, solve_zeta, solve_zeta_all
from .equilibrium import (
    Equilibrium,
    Realization,
    hulten_diagnostics,
    leverage_comparative_statics,
    maximal_equilibrium,
    realize,
    welfare_bound_check,
)
from .defaults import (
    classify_defaults_single_shock,
    cycle_default_condition,
    exact_default_predicate,
    line_thresholds,
    tilted_moments,
)
from .montecarlo import SimulationReport, compare_leverage, run_campaign
from .pipeline import full_information_solution, solve_cells
from .scenarios import make_cycle, make_line, reproduce

__all__ = [
    "Economy",
    "LeontiefData",
    "Relations",
    "economy_from_arrays",
    "leontief",
    "suppliers_customers",
    "validate_economy",
    "ExpectationEngine",
    "ExpOfLinear",
    "ShockModel",
    "SignalModel",
    "conditional_expectation",
    "expected_exp_rho",
    "normalized_shocks",
    "total_shock",
    "DebtProfile",
    "debt_profile",
    "solve_zeta",
    "solve_zeta_all",
    "Equilibrium",
    "Realization",
    "hulten_diagnostics",
    "leverage_comparative_statics",
    "maximal_equilibrium",
    "realize",
    "welfare_bound_check",
    "classify_defaults_single_shock",
    "cycle_default_condition",
    "exact_default_predicate",
    "line_thresholds",
    "tilted_moments",
    "SimulationReport",
    "compare_leverage",
    "run_campaign",
    "full_information_solution",
    "solve_cells",
    "make_cycle",
    "make_line",
    "reproduce",
]
