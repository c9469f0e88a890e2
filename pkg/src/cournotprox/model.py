"""Nash-Cournot market datum and the equilibrium calculus built on it.

With affine inverse demand the firms couple only through total output,
so the quadratic forms involved never need materializing: the own-output
curvature acts as 2*beta*I, and the cross-firm coupling sends x to
beta*(sigma - x_i) per firm, where sigma is total output. All operations
here run in O(n) and accept arrays of shape (..., n), firm axis last.

A market instance is immutable after construction and safe to share
across concurrent solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import CostModel

__all__ = [
    "MarketInstance",
    "Direction",
    "apply_B",
    "apply_Btilde",
    "apply_Q",
    "potential_gamma",
    "grad_gamma",
    "phi_bifunction",
    "psi_bifunction",
    "dphi_directional",
    "lipschitz_gamma",
]


def _bound_vector(value, n, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or length-{n} vector, got shape {arr.shape}")
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} must not contain NaN")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MarketInstance:
    """Immutable n-firm market description.

    ``beta`` and ``alpha0`` are the inverse-demand slope and intercept,
    ``mu`` holds per-firm linear cost coefficients that are folded into
    the effective intercept ``alpha_tilde = alpha0 - mu`` (leave it at
    zero when the whole cost lives in ``cost``), and [lower, upper] is
    the box of admissible production levels. Fixed cost offsets belong
    to the cost model (e.g. ``AffineCost.xi``) and shift reported cost
    and potential values only.
    """

    beta: float
    alpha0: float
    mu: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cost: CostModel
    alpha_tilde: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.cost, CostModel):
            raise TypeError("cost must be a CostModel")
        n = self.cost.n
        beta = float(self.beta)
        alpha0 = float(self.alpha0)
        if not beta > 0:
            raise ValueError("beta must be positive")
        if alpha0 < 0:
            raise ValueError("alpha0 must be nonnegative")
        mu = _bound_vector(self.mu, n, "mu")
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ValueError("mu must be nonnegative and finite")
        lower = _bound_vector(self.lower, n, "lower")
        upper = _bound_vector(self.upper, n, "upper")
        if np.any(lower > upper):
            raise ValueError("empty box: lower > upper somewhere")
        if np.all(np.isfinite(lower)) and not self.cost.contains(lower):
            raise ValueError("box extends outside the cost domain")
        alpha_tilde = alpha0 - mu
        alpha_tilde.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha0", alpha0)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "alpha_tilde", alpha_tilde)

    @property
    def n(self):
        return self.cost.n

    @property
    def btilde_norm(self):
        """Spectral norm of the cross-firm coupling: (n-1)*beta."""
        return (self.n - 1) * self.beta

    def center(self):
        """Box midpoint (coordinates with an infinite side fall back to the finite one, else 0)."""
        lo, up = self.lower, self.upper
        mid = 0.5 * (lo + up)
        mid = np.where(np.isfinite(mid), mid, np.where(np.isfinite(lo), lo, np.where(np.isfinite(up), up, 0.0)))
        return np.clip(mid, lo, up)

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass(frozen=True)
class Direction:
    """Feasible direction t*(y - x) anchored at a box point x."""

    d: np.ndarray

    @staticmethod
    def toward(x, y, t=1.0):
        if t < 0:
            raise ValueError("t must be nonnegative")
        return Direction(t * (np.asarray(y, dtype=float) - np.asarray(x, dtype=float)))

    def unit(self):
        nrm = np.linalg.norm(self.d)
        if nrm == 0:
            raise ValueError("zero direction has no unit vector")
        return Direction(self.d / nrm)


def _points(inst, x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != inst.n:
        raise ValueError(f"{name} must have trailing axis of length {inst.n}, got shape {x.shape}")
    return x


def apply_B(inst, x):
    """Own-output quadratic operator: x -> 2*beta*x."""
    return 2.0 * inst.beta * _points(inst, x)


def apply_Btilde(inst, x):
    """Cross-firm coupling: firm i receives beta times the others' total output."""
    x = _points(inst, x)
    sigma = np.sum(x, axis=-1, keepdims=True)
    return inst.beta * (sigma - x)


def apply_Q(inst, x):
    """Combined curvature operator, the sum of the two operators above."""
    x = _points(inst, x)
    sigma = np.sum(x, axis=-1, keepdims=True)
    return inst.beta * (x + sigma)


def potential_gamma(inst, x):
    """Merit potential: both quadratic terms minus the effective revenue line minus the cost.

    Decreased monotonically by well-damped proximal steps; its gradient
    vanishing (against the box normal cone) characterizes stationarity.
    """
    x = _points(inst, x)
    sq = np.sum(x * x, axis=-1)
    sigma = np.sum(x, axis=-1)
    return 0.5 * inst.beta * (sq + sigma**2) - x @ inst.alpha_tilde - inst.cost.value(x)


def grad_gamma(inst, x):
    """Gradient of the potential: Q x - alpha_tilde - grad h(x)."""
    return apply_Q(inst, x) - inst.alpha_tilde - inst.cost.gradient(x)


def phi_bifunction(inst, x, y):
    """Equilibrium bifunction; nonnegative over all y in the box iff x is a global equilibrium.

    ``x`` is a single anchor point; ``y`` may carry leading batch axes.
    Vanishes identically at y = x. Evaluation outside the box is allowed
    so diagnostics can probe boundary behavior.
    """
    x = _points(inst, x, "x")
    y = _points(inst, y, "y")
    fx = apply_Btilde(inst, x) - inst.alpha_tilde
    cost = inst.cost
    quad = inst.beta * (np.sum(y * y, axis=-1) - np.sum(x * x, axis=-1))
    return (y - x) @ fx + quad - (cost.value(y) - cost.value(x))


def psi_bifunction(inst, x, y):
    """Variant of the bifunction whose y-dependent part is shared with phi.

    psi(x; y) - phi(x, y) = beta*||x||^2 - h(x) is constant in y, so the
    two share argmin sets in y; phi is the one that vanishes on the
    diagonal and backs the gap diagnostics.
    """
    x = _points(inst, x, "x")
    y = _points(inst, y, "y")
    fx = apply_Btilde(inst, x) - inst.alpha_tilde
    return (y - x) @ fx + inst.beta * np.sum(y * y, axis=-1) - inst.cost.value(y)


def dphi_directional(inst, x, d):
    """Directional slope of the potential at x along d (linear in d).

    Nonnegativity over every feasible direction is the first-order
    stationarity test; the box normal cone enters only implicitly
    through the admissible set of directions.
    """
    x = _points(inst, x, "x")
    if x.ndim != 1:
        raise ValueError("x must be a single point")
    d = _points(inst, d, "d")
    return d @ grad_gamma(inst, x)


def lipschitz_gamma(inst):
    """Composite curvature bound for the potential gradient: L_h + (n-1)*beta."""
    return inst.cost.lipschitz_L() + inst.btilde_norm
