#!/usr/bin/env python3
"""Convex sanity check: the splitting iteration against the QP oracle.

With affine costs the market is the classical convex one and has a
unique equilibrium, computable independently as a strongly convex QP.
The splitting solver must land on it; for the symmetric case the
closed-form answer (alpha0 - mu) / ((n+1) beta) is also available.
"""

import numpy as np

from cournotprox import SolverConfig, classical_equilibrium, solve
from cournotprox.experiments import affine_market

print("symmetric market: n=5, beta=0.1, alpha0=10, mu=2, box [0, 50]")
inst = affine_market(5, mu=2.0)
star = classical_equilibrium(inst)
res, trace = solve(inst, SolverConfig(eps=1e-8))
closed = (10.0 - 2.0) / (6 * 0.1)
print(f"  closed form     : {closed:.10f}")
print(f"  QP oracle       : {star[0]:.10f}")
print(f"  splitting solver: {res.x[0]:.10f}  ({res.iterations} iterations)")

print("\nasymmetric markets, solver vs oracle in the sup norm:")
for n in (1, 2, 20, 100):
    rng = np.random.default_rng(100 + n)
    inst = affine_market(n, mu=rng.uniform(0.0, 5.0, n))
    star = classical_equilibrium(inst)
    res, _ = solve(inst, SolverConfig(eps=1e-8))
    at_bounds = int(np.sum((star <= 1e-9) | (star >= 50.0 - 1e-9)))
    print(
        f"  n={n:4d}: err={np.max(np.abs(res.x - star)):.2e} "
        f"iters={res.iterations:5d} active bounds={at_bounds}"
    )

print("\nbinding production caps: tight upper bound forces a boundary equilibrium")
inst = affine_market(1, mu=0.0, upper=10.0)
print(f"  n=1, mu=0, box [0,10]: equilibrium at {classical_equilibrium(inst)[0]:.6f}")
inst = affine_market(1, mu=9.0, upper=10.0)
print(f"  n=1, mu=9, box [0,10]: equilibrium at {classical_equilibrium(inst)[0]:.6f} (interior)")
