"""From samples to certificates: what estimation costs at different budgets.

A centered slab has zero gradient at its midpoint, so the gradient-aware
certificate should beat the value-only one there.  But the gradient must
be estimated, which (a) halves the failure budget available to the value
bound and (b) adds a deviation allowance that shrinks only like
sqrt(d/n).  This script certifies the same point at increasing sample
budgets and shows the crossover where gradient information starts paying
for itself, with the antithetic-pair (dipole) route converging much
faster than the pairwise-dot-product route.

Run:  python demos/sampling_pipeline.py  (a few seconds)
"""

import numpy as np

from smoothcert import SamplingPlan, Slab, certify, slab_oracle, SmoothingParams

sigma = 0.25
q09 = 1.2815515655446004  # 0.9-quantile: the slab holds mass 0.8 at the center
slab = Slab([1.0, 0.0], -sigma * q09, sigma * q09)
x = np.zeros(2)

p_true, grad_true = slab_oracle(slab, x, SmoothingParams(sigma))
print(f"analytic smoothed value {p_true:.4f}, true gradient norm {grad_true:.4f}")
print(f"population radii: value-only 0.2104, zero-gradient 0.3170 (sigma = {sigma})\n")

print(f"{'n':>9} {'first':>8} {'second':>8} {'dipole':>8} {'best':>8}")
for n in (10_000, 100_000, 1_000_000, 4_000_000):
    radii = {}
    for method in ("first", "second", "dipole", "best"):
        plan = SamplingPlan(n0=100, n=n, sigma=sigma, seed=90_000 + n % 9973)
        radii[method] = certify(slab, x, plan, 0.001, method).radius
    print(f"{n:>9} {radii['first']:8.4f} {radii['second']:8.4f} "
          f"{radii['dipole']:8.4f} {radii['best']:8.4f}")

print("""
Reading the table: the dipole route detects the slab's symmetry from the
pair counts alone and approaches the zero-gradient radius already at
moderate budgets, while the dot-product estimator needs orders of
magnitude more samples before its deviation allowance stops drowning the
signal.  'best' never falls below the value-only baseline computed from
the same evidence.""")
