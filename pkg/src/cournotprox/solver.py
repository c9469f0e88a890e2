"""Splitting proximal iteration for the nonconvex market model.

Each step keeps the own-output quadratic exact, linearizes the smooth
cost around the current iterate, adds proximal damping, and solves the
resulting separable box QP in closed form. With the damping parameter c
at or below 1/L_gamma (L_gamma = cost curvature bound + coupling norm)
the merit potential drops by at least (c/2)*||G_c||^2 per step, which
yields an O(1/(k+1)) bound on the best scaled squared step and an
explicit stationarity certificate at termination.

A solver run is single-threaded and deterministic given (instance,
config, x0); concurrent runs may share immutable instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import diagnostics
from .model import apply_Btilde, lipschitz_gamma, potential_gamma
from .subqp import SubproblemError, box_pg_solve, prox_step, prox_subproblem

__all__ = [
    "ConfigurationError",
    "StepPolicy",
    "SolveStatus",
    "SolverConfig",
    "IterationTrace",
    "SolveResult",
    "gradient_mapping",
    "prox_model_value",
    "line_search_c",
    "solve",
    "delta_k",
    "bound_rhs",
    "eps_certificate",
]


class ConfigurationError(ValueError):
    """Solver configuration inconsistent in itself or with the instance."""


class StepPolicy(Enum):
    FIXED = "fixed"
    LINE_SEARCH = "linesearch"


class SolveStatus(Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    SUBPROBLEM_FAILURE = "SubproblemFailure"


@dataclass
class SolverConfig:
    """Damping-parameter policy, tolerances and iteration caps.

    Under FIXED the damping parameter is ``c_fixed`` (default 1/L_gamma,
    or 1.0 when L_gamma is zero) and must satisfy c*L_gamma <= 1, which
    guarantees per-step descent. Under LINE_SEARCH each iteration starts
    one tentative expansion above the previously accepted value, clipped
    to [c_lo, c_hi], and shrinks by ``tau_c`` until the sufficient-
    decrease test holds; c_lo <= 1/L_gamma is required so the search
    always terminates (defaults: 0.1/L_gamma and 10/L_gamma, or 0.1 and
    10.0 when L_gamma is zero).

    Termination compares the step norm (Euclidean by default, see
    ``step_norm_ord``) against ``eps``. Full iterates are kept in the
    trace only for n <= 100 unless ``record_iterates`` says otherwise.
    ``gamma_lb`` overrides the potential lower bound used for the
    per-iteration bound column; by default it is computed from a
    coordinate-wise grid scan when the box is bounded.
    """

    step_policy: StepPolicy = StepPolicy.FIXED
    eps: float = 1e-3
    max_iter: int = 100_000
    c_fixed: Optional[float] = None
    c_lo: Optional[float] = None
    c_hi: Optional[float] = None
    tau_c: float = 0.5
    subproblem_tol: float = 1e-10
    use_pg_subproblem: bool = False
    subproblem_max_iter: int = 10_000
    step_norm_ord: float = 2
    record_iterates: Optional[bool] = None
    record_bound: bool = True
    gamma_lb: Optional[float] = None
    lb_grid_resolution: int = 1024


@dataclass(frozen=True)
class _Resolved:
    L_gamma: float
    c_fixed: float
    c_lo: float
    c_hi: float
    record_iterates: bool


def _resolve(config, inst):
    if config.eps <= 0:
        raise ConfigurationError("eps must be positive")
    if config.max_iter < 1:
        raise ConfigurationError("max_iter must be at least 1")
    if not 0.0 < config.tau_c < 1.0:
        raise ConfigurationError("tau_c must lie in (0, 1)")
    if config.subproblem_tol <= 0:
        raise ConfigurationError("subproblem_tol must be positive")
    L = lipschitz_gamma(inst)
    c_cap = math.inf if L == 0.0 else 1.0 / L
    if config.c_fixed is not None:
        c_fixed = float(config.c_fixed)
    elif L == 0.0:
        c_fixed = 1.0
    else:
        c_fixed = 1.0 / L
    if c_fixed <= 0:
        raise ConfigurationError("c_fixed must be positive")
    if config.step_policy is StepPolicy.FIXED and c_fixed > c_cap * (1.0 + 1e-12):
        raise ConfigurationError(
            f"fixed damping c={c_fixed:.6g} violates c*L_gamma <= 1 (L_gamma={L:.6g})"
        )
    c_lo = config.c_lo if config.c_lo is not None else (0.1 if L == 0.0 else 0.1 / L)
    c_hi = config.c_hi if config.c_hi is not None else (10.0 if L == 0.0 else 10.0 / L)
    if c_lo <= 0 or c_hi < c_lo:
        raise ConfigurationError("need 0 < c_lo <= c_hi")
    if config.step_policy is StepPolicy.LINE_SEARCH and c_lo > c_cap * (1.0 + 1e-12):
        raise ConfigurationError(
            f"c_lo={c_lo:.6g} exceeds 1/L_gamma={c_cap:.6g}; the sufficient-decrease "
            f"search is not guaranteed to terminate"
        )
    rec = config.record_iterates if config.record_iterates is not None else inst.n <= 100
    return _Resolved(L, float(c_fixed), float(c_lo), float(c_hi), bool(rec))


@dataclass
class IterationTrace:
    """Per-iteration history; row k describes the step taken from iterate k.

    Columns: potential at the iterate, step norm, damping c, gradient-
    mapping norm, running best scaled squared step, and the potential-
    drop budget (gamma(x0) - gamma_lb)/(k+1) (NaN when no lower bound
    was available). ``iterates`` holds the visited points, final point
    included, when snapshot recording is on.
    """

    gamma: np.ndarray
    step_norm: np.ndarray
    c: np.ndarray
    residual: np.ndarray
    delta: np.ndarray
    bound_rhs: np.ndarray
    iterates: Optional[list] = None
    gamma_lb: Optional[float] = None

    def __len__(self):
        return int(self.gamma.size)


@dataclass
class SolveResult:
    """Final iterate plus termination and certificate data.

    ``status`` is Converged exactly when the step norm fell to eps.
    ``certificate`` bounds from below, by its negation, the potential
    slope along every unit feasible direction at ``x``.
    """

    x: np.ndarray
    status: SolveStatus
    iterations: int
    final_step_norm: float
    final_residual: float
    certificate: float
    gamma_final: float
    c_final: float
    x0_projected: bool


def gradient_mapping(inst, x, c):
    """Scaled prox displacement (x - s_c(x))/c; zero exactly at stationary points.

    Its norm is nonincreasing in c at fixed x, while the raw displacement
    norm is nondecreasing.
    """
    return (np.asarray(x, dtype=float) - prox_step(inst, x, c)) / c


def prox_model_value(inst, x, y, c):
    """Value at y of the convexified local model anchored at x."""
    if c <= 0:
        raise ValueError("c must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = apply_Btilde(inst, x) - inst.alpha_tilde - inst.cost.gradient(x)
    dy = y - x
    return (
        inst.beta * float(y @ y)
        + float(g @ dy)
        - float(inst.cost.value(x))
        + float(dy @ dy) / (2.0 * c)
    )


def _decrease_rhs_const(inst, x):
    # gamma(x) = model value at y=x plus exactly this constant
    return 0.5 * float(x @ apply_Btilde(inst, x)) - float(x @ inst.alpha_tilde)


def _sufficient_decrease(inst, x, s, c, rhs_const):
    return float(potential_gamma(inst, s)) <= prox_model_value(inst, x, s, c) + rhs_const


def _line_search(inst, x, c_init, c_lo, tau_c, rhs_const, take_step):
    c = c_init
    while True:
        s = take_step(x, c)
        if _sufficient_decrease(inst, x, s, c, rhs_const):
            return c, s
        if c <= c_lo:
            # guaranteed-descent region (c*L_gamma <= 1); accept unconditionally
            return c, s
        c = max(tau_c * c, c_lo)


def line_search_c(inst, x, c_init, config=None):
    """Shrink the damping parameter geometrically until sufficient decrease holds.

    Returns the first c in c_init, tau_c*c_init, ... (floored at c_lo)
    whose prox point makes the potential fall below the local model
    value, together with that prox point. Termination is guaranteed
    because the test always holds once c*L_gamma <= 1 and c_lo is
    validated against that threshold.
    """
    cfg = config if config is not None else SolverConfig(step_policy=StepPolicy.LINE_SEARCH)
    p = _resolve(cfg, inst)
    if not p.c_lo <= c_init <= p.c_hi * (1.0 + 1e-12):
        raise ValueError(f"c_init={c_init:.6g} outside [c_lo, c_hi] = [{p.c_lo:.6g}, {p.c_hi:.6g}]")
    x = np.asarray(x, dtype=float)
    rhs_const = _decrease_rhs_const(inst, x)
    return _line_search(inst, x, float(c_init), p.c_lo, cfg.tau_c, rhs_const, _stepper(inst, cfg))


def _stepper(inst, config):
    if not config.use_pg_subproblem:
        return lambda x, c: prox_step(inst, x, c)

    def pg_step(x, c):
        return box_pg_solve(
            prox_subproblem(inst, x, c),
            tol=config.subproblem_tol,
            max_iter=config.subproblem_max_iter,
            x0=x,
        )

    return pg_step


def solve(inst, config=None, x0=None):
    """Run the splitting proximal iteration from x0.

    Parameters
    ----------
    inst : MarketInstance
        The market to solve.
    config : SolverConfig, optional
        Damping policy and tolerances; defaults throughout.
    x0 : array_like, optional
        Starting point; the box midpoint when omitted. Points outside
        the box are projected onto it and flagged in the result.

    Returns
    -------
    (SolveResult, IterationTrace)
        The result carries the last prox point, which inherits the
        stationarity certificate (1 + c*L_gamma)*||G_c|| from the final
        step. Status is Converged when the step norm reached ``eps``,
        MaxIter when the budget ran out, SubproblemFailure when the
        optional projected-gradient inner solver gave up.
    """
    cfg = config if config is not None else SolverConfig()
    p = _resolve(cfg, inst)
    if x0 is None:
        x0 = inst.center()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (inst.n,):
        raise ValueError(f"x0 must have shape ({inst.n},), got {x0.shape}")
    x = inst.project(x0)
    x0_projected = bool(np.any(x != x0))

    gamma_lb = cfg.gamma_lb
    if (
        gamma_lb is None
        and cfg.record_bound
        and np.all(np.isfinite(inst.lower))
        and np.all(np.isfinite(inst.upper))
    ):
        gamma_lb = diagnostics.gamma_lower_bound(inst, cfg.lb_grid_resolution)

    take_step = _stepper(inst, cfg)
    gamma_x = float(potential_gamma(inst, x))
    gamma0 = gamma_x
    col_gamma, col_step, col_c, col_resid, col_delta, col_bound = [], [], [], [], [], []
    iterates = [] if p.record_iterates else None
    delta_run = math.inf
    c_prev = min(p.c_hi, max(p.c_lo, p.c_fixed))
    c_k = math.nan
    step = math.nan
    resid = math.nan
    status = SolveStatus.MAX_ITER

    for k in range(cfg.max_iter):
        try:
            if cfg.step_policy is StepPolicy.FIXED:
                c_k = p.c_fixed
                s = take_step(x, c_k)
            else:
                c_init = min(p.c_hi, max(p.c_lo, c_prev / cfg.tau_c))
                rhs_const = _decrease_rhs_const(inst, x)
                c_k, s = _line_search(inst, x, c_init, p.c_lo, cfg.tau_c, rhs_const, take_step)
        except SubproblemError:
            status = SolveStatus.SUBPROBLEM_FAILURE
            break
        dx = s - x
        step = float(np.linalg.norm(dx, ord=cfg.step_norm_ord))
        resid = step / c_k
        delta_run = min(delta_run, step * step / (2.0 * c_k))
        col_gamma.append(gamma_x)
        col_step.append(step)
        col_c.append(c_k)
        col_resid.append(resid)
        col_delta.append(delta_run)
        col_bound.append((gamma0 - gamma_lb) / (k + 1) if gamma_lb is not None else math.nan)
        if iterates is not None:
            iterates.append(x.copy())
        x = s
        gamma_x = float(potential_gamma(inst, x))
        c_prev = c_k
        if step <= cfg.eps:
            status = SolveStatus.CONVERGED
            break

    if iterates is not None:
        iterates.append(x.copy())
    iterations = len(col_gamma)
    certificate = (1.0 + c_k * p.L_gamma) * resid if iterations else math.nan
    trace = IterationTrace(
        gamma=np.asarray(col_gamma),
        step_norm=np.asarray(col_step),
        c=np.asarray(col_c),
        residual=np.asarray(col_resid),
        delta=np.asarray(col_delta),
        bound_rhs=np.asarray(col_bound),
        iterates=iterates,
        gamma_lb=gamma_lb,
    )
    result = SolveResult(
        x=x,
        status=status,
        iterations=iterations,
        final_step_norm=step,
        final_residual=resid,
        certificate=certificate,
        gamma_final=gamma_x,
        c_final=c_k,
        x0_projected=x0_projected,
    )
    return result, trace


def delta_k(trace, k):
    """Best scaled squared step over iterations 0..k: min ||dx_i||^2 / (2 c_i)."""
    m = len(trace)
    if m == 0:
        raise ValueError("empty trace")
    if not 0 <= k < m:
        raise IndexError(f"k={k} outside trace of length {m}")
    sl = slice(0, k + 1)
    return float(np.min(trace.step_norm[sl] ** 2 / (2.0 * trace.c[sl])))


def bound_rhs(gamma0, gamma_lb, k):
    """Potential-drop budget spread over k+1 steps: (gamma0 - gamma_lb)/(k+1)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if gamma_lb > gamma0:
        raise ValueError("gamma_lb must not exceed gamma0")
    return (gamma0 - gamma_lb) / (k + 1)


def eps_certificate(inst, x, c):
    """Stationarity certificate kappa = (1 + c*L_gamma)*||G_c(x)||.

    Along every unit feasible direction at the prox point s_c(x), the
    potential slope is at least -kappa, so s_c(x) is kappa-stationary.
    Zero exactly when x is already stationary.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    G = gradient_mapping(inst, x, c)
    return float((1.0 + c * lipschitz_gamma(inst)) * np.linalg.norm(G))
