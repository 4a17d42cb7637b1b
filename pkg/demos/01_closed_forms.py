"""
Regularised one-loop amplitudes against their closed forms
==========================================================

Each internal line gets the factor alpha^z, which turns the divergent
one-loop integrals into meromorphic functions of z.  We integrate the
tadpole and the bubble numerically on a small circle around z = 0, read off
the Laurent coefficients, and compare them with the Gamma-function closed
forms.
"""

import math

import numpy as np
from scipy.special import gamma

from alpharen import library
from alpharen.laurent import fit_laurent, z_circle
from alpharen.sector import integrate

# 32 regulator samples on |z| = 0.1, offset so that none is real
zs = z_circle(0.1, 32)

# tadpole: pi^2 m^{2-2z} Gamma(z-1), a simple pole with residue -pi^2 m^2
tadpole = library.tadpole(mass=1.0)
values = integrate(tadpole, [None], zs).values[0]
oracle = math.pi**2 * gamma(zs - 1)
print("tadpole  max relative deviation:", np.max(np.abs(values / oracle - 1)))
print("tadpole  Laurent data:", fit_laurent((zs, values), (-2, 2)))

# bubble at zero momentum: pi^2 Gamma(1+z)^2 Gamma(2z) / Gamma(2+2z)
bubble = library.bubble(mass=1.0)
values = integrate(bubble, [None], zs).values[0]
oracle = math.pi**2 * gamma(1 + zs) ** 2 * gamma(2 * zs) / gamma(2 + 2 * zs)
series = fit_laurent((zs, values), (-2, 2))
print("bubble   max relative deviation:", np.max(np.abs(values / oracle - 1)))
print("bubble   residue:", series[-1].real, " expected pi^2/2 =", math.pi**2 / 2)

# with momentum p flowing through, the pole stays and only the finite part moves
for p in (0.0, 0.5, 1.0, 2.0):
    point = {"e1": [p, 0, 0, 0], "e3": [-p, 0, 0, 0]}
    s = fit_laurent((zs, integrate(bubble, [point], zs).values[0]), (-2, 2))
    print(f"bubble   p={p:3.1f}: a_-1 = {s[-1].real:.10f}  a_0 = {s[0].real:+.10f}")
