"""
The R-operation on the sunset diagram
=====================================

The two-loop sunset has three overlapping one-loop subdivergences (every
pair of its lines) and is itself quadratically divergent.  The recursion
first computes the counterterm of each 2-line bubble, inserts it by
collapsing the bubble to a vertex (the quotient is a tadpole), and then
subtracts the Taylor polynomial of degree 2 at zero momentum from what is
left.  The result is finite at any momentum.
"""

from alpharen import library
from alpharen.config import RunConfig
from alpharen.laurent import fit_laurent
from alpharen.renorm import CountertermMemo, compute_counterterm, renormalize, rtilde_values
from alpharen.subgraph import enumerate_disjoint_families

cfg = RunConfig()
memo = CountertermMemo()
sunset = library.sunset()

print("families of disjoint divergent subdiagrams:")
for fam in enumerate_disjoint_families(sunset):
    print("  ", [sorted(s.lines) for s in fam])

# the top-level counterterm: a mass-type term and a p^2 term
ct = compute_counterterm(sunset, cfg, memo)
for t in ct.terms:
    poly = " * ".join(f"p_{a}.p_{b}" for a, b in t.monomial) or "1"
    coeffs = ", ".join(f"z^{k}: {c.real:+.6f}" for k, c in t.coeff.items() if abs(c) > 1e-9)
    print(f"term m={t.m} P={poly}: {coeffs}")

# R~ (bare plus inserted subdivergence counterterms) still has poles ...
point = {"e1": [0.6, 0.0, 0.0, 0.0], "e2": [-0.6, 0.0, 0.0, 0.0]}
rt = fit_laurent((cfg.zs, rtilde_values(sunset, [point], cfg, memo)[0]), (-4, 2))
print("R~ at p=0.6:", rt)

# ... which the local counterterm removes
r = renormalize(sunset, [point], cfg, memo)
print("R  at p=0.6:", r.series[0])
print("certified finite:", r.finite, " pole/scale ratio:", f"{r.ratios[0]:.2e}")

# without the subdiagram insertions the overlapping poles would survive
bare = renormalize(sunset, [point], cfg.with_(subtract=False))
print("bare amplitude certified finite:", bare.finite)
