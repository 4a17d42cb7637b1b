"""
Feynman graphs as resistor networks
===================================

At fixed Schwinger parameters the loop-momentum Gaussian is centred on the
current distribution of an electrical network with resistances alpha_r.
The currents obey both Kirchhoff laws, are bounded by the inflow (maximum
principle), and minimise the dissipated power.
"""

import numpy as np

from alpharen import library
from alpharen.parametric import (
    kirchhoff_laplacian,
    kirchhoff_solve,
    max_principle_check,
    min_eigenvalue_bound_check,
)

bubble = library.bubble()
alpha = [0.4, 1.4]
p = {"e1": [0.9, 0, 0, 0], "e3": [-0.9, 0, 0, 0]}
q = kirchhoff_solve(bubble, alpha, p)
print("bubble currents:", {r: v[0] for r, v in q.items()}, " (split by the opposite resistance)")

# the same currents from node potentials with conductances 1/alpha
rng = np.random.default_rng(1)
d = library.random_1pi_diagram(rng)
a = rng.uniform(0.1, 3.0, len(d.internal))
mom = library.random_momenta(rng, d)
q1, q2 = kirchhoff_solve(d, a, mom), kirchhoff_laplacian(d, a, mom)
print(d.name, "loop-basis vs Laplacian currents agree:", all(np.allclose(q1[r], q2[r]) for r in d.internal))

# maximum principle with the explicit constant 2 P N^R
qmax, C, ok = max_principle_check(d, a, mom)
print(f"largest current {qmax:.3f} <= C = {C:.1f}: {ok}")

# the quadratic form is bounded below by min(alpha) times the line-momentum norm
for eps in (1.0, 1e-2, 1e-4):
    lam, witness, ok = min_eigenvalue_bound_check(bubble, [eps, 1.0])
    print(f"alpha=({eps:g}, 1): lambda_min={lam:.6f}, lambda_min/min(alpha)={witness:.3f}")
