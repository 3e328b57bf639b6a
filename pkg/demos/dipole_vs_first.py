"""Where antithetic-pair certificates win and where they lose.

Sliding a point through a slab changes how the top-class mass splits
between the symmetric part (hit at both x+eps and x-eps) and the
asymmetric part.  Near the center everything is symmetric and the pair
certificate approaches the zero-gradient radius; near a face the split
approaches (0.4, 0.4), a regime where the pair bound is *weaker* than
the value-only bound even with exact evidence.  The estimation penalty
(half the independent samples, half the failure budget per mass) then
decides the small-budget behavior.

Run:  python demos/dipole_vs_first.py
"""

import numpy as np

from smoothcert import (
    DipoleEvidence,
    SamplingPlan,
    Slab,
    SmoothingParams,
    certify,
    dipole_radius,
    first_order_radius,
    std_cdf,
)

sigma = 0.25
slab = Slab([1.0, 0.0], -0.6, 0.6)
params = SmoothingParams(sigma)

print("population level (exact masses, no estimation)")
print(f"{'x0':>6} {'sym':>7} {'asym':>7} {'pair radius':>12} {'value radius':>13}")
for x0 in np.linspace(0.0, 0.5, 6):
    # forward mass within the slab vs mass hit on both sides (|eps| below
    # the distance to the nearer face)
    reach = min(0.6 - x0, 0.6 + x0)
    p = float(std_cdf((0.6 - x0) / sigma)) - float(std_cdf((-0.6 - x0) / sigma))
    sym = float(std_cdf(reach / sigma)) - float(std_cdf(-reach / sigma))
    asym = p - sym
    r_pair = dipole_radius(DipoleEvidence(sym, asym), params)
    r_value = first_order_radius(p, params)
    marker = "<-- pair bound weaker" if r_pair < r_value else ""
    print(f"{x0:6.2f} {sym:7.3f} {asym:7.3f} {r_pair:12.4f} {r_value:13.4f} {marker}")

print("\nsampled at n = 100000, failure budget 0.001")
print(f"{'x0':>6} {'first':>8} {'dipole':>8} {'change':>8}")
for i, x0 in enumerate(np.linspace(0.0, 0.5, 6)):
    x = np.array([x0, 0.0])
    plan_a = SamplingPlan(n0=100, n=100_000, sigma=sigma, seed=7000 + i)
    plan_b = SamplingPlan(n0=100, n=100_000, sigma=sigma, seed=8000 + i)
    r_first = certify(slab, x, plan_a, 0.001, "first").radius
    r_dipole = certify(slab, x, plan_b, 0.001, "dipole").radius
    rel = (r_dipole - r_first) / r_first
    print(f"{x0:6.2f} {r_first:8.4f} {r_dipole:8.4f} {rel:8.1%}")

print("""
Note the population table: the pair certificate recovers the exact
distance to the nearer slab face at every point (the slab is its own
worst case), while the value-only certificate under-certifies.  Sampled,
the center keeps a double-digit gain, and the near-face points, where
the masses approach an even split, flip to small losses once the
estimation penalty is paid.  This is why the comparison harness reports
a distribution rather than a single number.""")
