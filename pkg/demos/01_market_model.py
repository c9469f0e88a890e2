#!/usr/bin/env python3
"""Tour of the market datum: operators, potential, and bifunctions.

Builds a small oligopoly with a logarithmic cost, shows that the two
quadratic operators act in O(n) without any matrices, and inspects the
potential and the equilibrium bifunction around a candidate point.
"""

import numpy as np

from cournotprox import (
    LogCost,
    MarketInstance,
    apply_B,
    apply_Btilde,
    dphi_directional,
    grad_gamma,
    phi_bifunction,
    potential_gamma,
    psi_bifunction,
)

n = 4
inst = MarketInstance(
    beta=0.1,
    alpha0=10.0,
    mu=0.0,
    lower=0.0,
    upper=10.0,
    cost=LogCost(c0=2.0, c=1.5, r=[1.2, 1.4, 1.6, 1.8]),
)

print(f"{n} firms, price 10 - 0.1*total output, box [0, 10]^{n}")
print(f"coupling norm (n-1)*beta = {inst.btilde_norm}")
print(f"cost curvature bound     = {inst.cost.lipschitz_L():.4f}")

x = np.array([2.0, 4.0, 6.0, 8.0])
print("\nat x =", x)
print("  own-output operator  2*beta*x      :", apply_B(inst, x))
print("  coupling operator    beta*(sig - x):", apply_Btilde(inst, x))
print("  potential gamma(x)                 :", potential_gamma(inst, x))
print("  gradient of gamma                  :", np.round(grad_gamma(inst, x), 4))

# the bifunction vanishes on the diagonal and phi/psi differ by a y-free term
y = np.array([3.0, 3.0, 7.0, 9.0])
print("\nbifunction values against y =", y)
print("  phi(x, x) =", phi_bifunction(inst, x, x))
print("  phi(x, y) =", phi_bifunction(inst, x, y))
print("  psi(x; y) - phi(x, y) =", psi_bifunction(inst, x, y) - phi_bifunction(inst, x, y))
print("  (equals beta*||x||^2 - h(x) =", inst.beta * x @ x - float(inst.cost.value(x)), ")")

# directional slopes certify first-order behavior along feasible moves
d_in = np.array([1.0, 0.0, 0.0, 0.0])
print("\ndirectional slopes at x:")
print("  toward higher output of firm 1:", dphi_directional(inst, x, d_in))
print("  toward lower output of firm 1 :", dphi_directional(inst, x, -d_in))
print("a stationary point needs nonnegative slope along every feasible direction")
