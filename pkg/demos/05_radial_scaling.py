"""
Small-lambda scaling of the radial profile
==========================================

Writing alpha = lambda * beta with |beta| = 1 turns the amplitude into an
integral over the radial variable lambda.  Near lambda = 0 the profile of a
diagram with degree of divergence Omega behaves like lambda^(-Omega/2 - 1).
The analytic treatment of the small-lambda region then produces the poles in
z exactly.
"""

import math

import numpy as np

from alpharen import library
from alpharen.laurent import fit_laurent, z_circle
from alpharen.renorm import rtilde_radial_profile
from alpharen.sector import analytic_lambda, lambda_split_amplitude

bubble = library.bubble()
lam = np.logspace(-4, -1, 13)
p = {"e1": [0.5, 0, 0, 0], "e3": [-0.5, 0, 0, 0]}
g = rtilde_radial_profile(bubble, p, 0.0, lam)[:, 0]
slope = np.polyfit(np.log(lam), np.log(np.abs(g)), 1)[0]
print(f"log-log slope of the bubble profile: {slope:.4f} (predicted -1)")

# int_0^1 lambda^{z-1} e^{-lambda}: the Taylor terms carry the pole, the rest is smooth
zs = z_circle(0.1, 16)
vals, series = analytic_lambda(lambda x: np.exp(-x), [1.0, -1.0, 0.5], -1.0, 1.0, zs)
print("analytic pole part:", series)
print("fitted Laurent data:", fit_laurent((zs, vals), (-1, 2)))

# the same split applied to the whole bubble amplitude
zs = z_circle(0.1, 32)
s = fit_laurent((zs, lambda_split_amplitude(bubble, None, zs)), (-2, 2))
print(f"bubble residue from the split: {s[-1].real:.12f}  (pi^2/2 = {math.pi**2 / 2:.12f})")
