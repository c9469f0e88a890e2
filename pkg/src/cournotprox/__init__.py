"""Splitting proximal point solver for nonconvex Nash-Cournot market models.

The library models an n-firm market with affine inverse demand and a
smooth, possibly nonconvex, production cost; solves its stationarity
problem by a splitting proximal iteration with guaranteed per-step
descent; and ships the verification instruments (gap sampling, global
certification, fixed-point residuals, bound checks) used to certify the
output.
"""

from .costs import AffineCost, CostDomainError, CostModel, ExpCost, LogCost, fd_gradient_check
from .diagnostics import (
    GapEstimate,
    brute_force_stationary_points,
    fixed_point_residual,
    gamma_lower_bound,
    gap_sample,
    global_equilibrium_check,
)
from .experiments import (
    ExampleFamily,
    ExperimentConfig,
    X0Policy,
    affine_market,
    exp_cost_market,
    generate_instance,
    initial_point,
    log_cost_market,
    run_experiment,
    verify_run,
)
from .model import (
    Direction,
    MarketInstance,
    apply_B,
    apply_Btilde,
    apply_Q,
    dphi_directional,
    grad_gamma,
    lipschitz_gamma,
    phi_bifunction,
    potential_gamma,
    psi_bifunction,
)
from .solver import (
    ConfigurationError,
    IterationTrace,
    SolveResult,
    SolveStatus,
    SolverConfig,
    StepPolicy,
    bound_rhs,
    delta_k,
    eps_certificate,
    gradient_mapping,
    line_search_c,
    prox_model_value,
    solve,
)
from .subqp import BoxQP, SubproblemError, box_pg_solve, classical_equilibrium, prox_step

__version__ = "0.1.0"
