"""Production-cost families for the oligopoly market model.

Every cost is separable across firms, h(x) = sum_i h_i(x_i), carries an
analytic gradient, and reports a global curvature bound max_i |h_i''|
that is used to size proximal steps. Evaluation is vectorized: inputs of
shape (..., n) are accepted with the firm axis last; ``value`` reduces
over that axis and ``gradient`` maps it elementwise.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CostDomainError",
    "CostModel",
    "AffineCost",
    "LogCost",
    "ExpCost",
    "fd_gradient_check",
]


class CostDomainError(ValueError):
    """A cost function was evaluated outside its domain."""


def _infer_n(n, *values):
    if n is not None:
        if int(n) < 1:
            raise ValueError("n must be a positive integer")
        return int(n)
    for v in values:
        if np.ndim(v) == 1:
            return len(v)
    raise ValueError("pass n= when every parameter is a scalar")


def _param(value, n, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or length-{n} vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


class CostModel(ABC):
    """Separable smooth production cost with an analytic gradient."""

    n: int
    is_concave: bool = False

    def value(self, x):
        """Total cost, summed over the trailing firm axis."""
        return np.sum(self.value_components(x), axis=-1)

    @abstractmethod
    def value_components(self, x):
        """Per-firm costs h_i(x_i); same shape as ``x``."""

    @abstractmethod
    def gradient(self, x):
        """Elementwise gradient (h_1'(x_1), ..., h_n'(x_n))."""

    @abstractmethod
    def lipschitz_L(self) -> float:
        """Global bound on |h_i''|, i.e. a Lipschitz constant for the gradient."""

    @abstractmethod
    def contains(self, x) -> bool:
        """Whether ``x`` lies in the domain of h."""

    @abstractmethod
    def component_value(self, i, t):
        """h_i evaluated at scalar or array ``t``."""

    @abstractmethod
    def component_gradient(self, i, t):
        """h_i' evaluated at scalar or array ``t``."""

    def _check_points(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.n:
            raise ValueError(f"expected trailing axis of length {self.n}, got shape {x.shape}")
        return x


@dataclass(frozen=True)
class AffineCost(CostModel):
    """Linear cost h_i(x) = mu_h[i]*x + xi[i].

    The gradient is constant and the curvature bound is zero. The fixed
    offsets ``xi`` shift cost (and potential) values only; they have no
    effect on gradients, equilibria or stationary points.
    """

    mu_h: np.ndarray
    xi: np.ndarray = 0.0
    n: int = None

    is_concave = True

    def __post_init__(self):
        n = _infer_n(self.n, self.mu_h, self.xi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mu_h", _param(self.mu_h, n, "mu_h"))
        object.__setattr__(self, "xi", _param(self.xi, n, "xi"))

    def value_components(self, x):
        x = self._check_points(x)
        return self.mu_h * x + self.xi

    def gradient(self, x):
        x = self._check_points(x)
        return np.broadcast_to(self.mu_h, x.shape).copy()

    def lipschitz_L(self):
        return 0.0

    def contains(self, x):
        return True

    def component_value(self, i, t):
        return self.mu_h[i] * np.asarray(t, dtype=float) + self.xi[i]

    def component_gradient(self, i, t):
        return np.full_like(np.asarray(t, dtype=float), self.mu_h[i])


@dataclass(frozen=True)
class LogCost(CostModel):
    """Concave logarithmic cost h_i(x) = c0[i] + c[i]*log(1 + r[i]*x).

    Models a per-unit cost that falls as production grows, with ceiling
    c0. Defined where 1 + r[i]*x > 0, in particular for nonnegative
    production levels; the curvature bound max_i c[i]*r[i]**2 is attained
    at x = 0 and is valid on the nonnegative orthant.
    """

    c0: np.ndarray
    c: np.ndarray
    r: np.ndarray
    n: int = None

    is_concave = True

    def __post_init__(self):
        n = _infer_n(self.n, self.c0, self.c, self.r)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c0", _param(self.c0, n, "c0"))
        object.__setattr__(self, "c", _param(self.c, n, "c"))
        object.__setattr__(self, "r", _param(self.r, n, "r"))
        if np.any(self.c0 < 0):
            raise ValueError("c0 must be nonnegative")
        if np.any(self.c <= 0) or np.any(self.r <= 0):
            raise ValueError("c and r must be positive")

    def _arg(self, x):
        w = self.r * x
        if not np.all(w > -1.0):
            raise CostDomainError("log cost evaluated where 1 + r*x <= 0")
        return w

    def value_components(self, x):
        x = self._check_points(x)
        return self.c0 + self.c * np.log1p(self._arg(x))

    def gradient(self, x):
        x = self._check_points(x)
        return self.c * self.r / (1.0 + self._arg(x))

    def lipschitz_L(self):
        return float(np.max(self.c * self.r**2))

    def contains(self, x):
        return bool(np.all(self.r * np.asarray(x, dtype=float) > -1.0))

    def component_value(self, i, t):
        w = self.r[i] * np.asarray(t, dtype=float)
        if not np.all(w > -1.0):
            raise CostDomainError("log cost evaluated where 1 + r*x <= 0")
        return self.c0[i] + self.c[i] * np.log1p(w)

    def component_gradient(self, i, t):
        w = self.r[i] * np.asarray(t, dtype=float)
        if not np.all(w > -1.0):
            raise CostDomainError("log cost evaluated where 1 + r*x <= 0")
        return self.c[i] * self.r[i] / (1.0 + w)


@dataclass(frozen=True)
class ExpCost(CostModel):
    """Concave saturating cost h_i(x) = c0[i] - c[i]*exp(-r[i]*x).

    Defined on the whole real line; approaches the ceiling c0 as
    production grows. Requires c0[i] >= c[i] > 0 so costs stay
    nonnegative on x >= 0. Curvature bound max_i c[i]*r[i]**2.
    """

    c0: np.ndarray
    c: np.ndarray
    r: np.ndarray
    n: int = None

    is_concave = True

    def __post_init__(self):
        n = _infer_n(self.n, self.c0, self.c, self.r)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c0", _param(self.c0, n, "c0"))
        object.__setattr__(self, "c", _param(self.c, n, "c"))
        object.__setattr__(self, "r", _param(self.r, n, "r"))
        if np.any(self.c <= 0) or np.any(self.r <= 0):
            raise ValueError("c and r must be positive")
        if np.any(self.c0 < self.c):
            raise ValueError("c0 must dominate c componentwise")

    def value_components(self, x):
        x = self._check_points(x)
        return self.c0 - self.c * np.exp(-self.r * x)

    def gradient(self, x):
        x = self._check_points(x)
        return self.c * self.r * np.exp(-self.r * x)

    def lipschitz_L(self):
        return float(np.max(self.c * self.r**2))

    def contains(self, x):
        return True

    def component_value(self, i, t):
        return self.c0[i] - self.c[i] * np.exp(-self.r[i] * np.asarray(t, dtype=float))

    def component_gradient(self, i, t):
        return self.c[i] * self.r[i] * np.exp(-self.r[i] * np.asarray(t, dtype=float))


def fd_gradient_check(model, x, step):
    """Max per-component relative error of a central difference vs the analytic gradient.

    ``x`` must be a single point lying inside the model domain by a
    margin larger than ``step``; perturbed evaluations outside the
    domain raise the model's domain error.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single point")
    if step <= 0:
        raise ValueError("step must be positive")
    shifts = step * np.eye(x.size)
    fd = (model.value(x + shifts) - model.value(x - shifts)) / (2.0 * step)
    g = model.gradient(x)
    return float(np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1e-12)))
