"""
Partition of unity and the factorization of painted sectors
===========================================================

The alpha-simplex is split by smooth bump functions eta_A, one for every
proper subset A of lines ("painted" lines, those with small alpha).  In a
sector the painted lines form 1PI components; integrating their loop
momenta first (nested Gaussian reduction) must reproduce the direct
evaluation with the full Symanzik polynomials.
"""

import numpy as np

from alpharen import library
from alpharen.sector import build_partition, integrate, sector_eval
from alpharen.subgraph import painted_components

# the weights sum to one everywhere on the simplex
part = build_partition(3)
beta = np.random.default_rng(0).dirichlet(np.ones(3), size=5)
total = sum(part.eta_tilde(A, beta) for A in part.subsets)
print("sum of eta~ at random simplex points:", total)

# the sector contributions add up to the full amplitude (same quadrature rule)
sunset = library.sunset()
p = {"e1": [0.5, 0.1, 0, 0], "e2": [-0.5, -0.1, 0, 0]}
z = 2.0
lines = list(sunset.internal)
pieces = {A: sector_eval(sunset, [lines[i] for i in A], p, z, part) for A in part.subsets}
direct = integrate(sunset, [p], [z], adaptive=False, m0=48, power=2).values[0, 0]
print("sum over sectors:", sum(pieces.values()).real, " direct:", direct.real)

# factorized versus direct evaluation in the painted sectors
for A in (("l1", "l2"), ("l1", "l3"), ("l2", "l3")):
    comps = painted_components(sunset, A)
    fac = sector_eval(sunset, A, p, z, method="factorized")
    dire = sector_eval(sunset, A, p, z)
    print(f"A={A}: components {[sorted(c.lines) for c in comps]}, relative difference {abs(fac / dire - 1):.2e}")
