"""
One set, two projectively equivalent sprays
===========================================

Functions supported on one side of 0 form a set that is invariant under the
flat spray.  Perturbing the spray by a bump-weighted projective factor keeps
the geodesics as point sets but changes their speed, and a geodesic launched
with a two-sided velocity now leaves the set.
"""
import math

import numpy as np

from spraylab import (GridFunctions, bump, bump_perturbed_spray, flat_spray,
                      half_support_union, integrate_geodesic, verify_invariance)
from spraylab.samplers import half_support_probe_sampler, half_support_sampler

grid = GridFunctions(L=2.0, h=0.01)
H = half_support_union(grid)

flat = verify_invariance(flat_spray(grid), H, half_support_sampler(grid), trials=20, rng=0)
print("flat spray:", flat.overall.value, "max distance", flat.max_distance)

spray = bump_perturbed_spray(grid, 0.2)
probe = half_support_probe_sampler(grid, 0.1)
bent = verify_invariance(spray, H, probe, trials=3, rng=0)
print("perturbed spray:", bent.overall.value)
print("  numeric admissibility of the launch data:", bent.trials[0].numeric_admissibility)

# the closed form x(t) = f + v log(1 + 2 u0 t) / (2 u0) against RK4
x, v = probe.sample(np.random.default_rng(0))
u0 = spray.alpha(v)
tr = integrate_geodesic(spray, x, v, (0.0, 1.0), 1e-3, method="rk4")
exact = x + v * math.log1p(2 * u0) / (2 * u0)
print(f"u0 = {u0:.5f}; RK4 endpoint error {np.max(np.abs(tr.xs[-1] - exact)):.2e}")
print("distance to S at t = 0.1:", H.distances(tr.state_at(0.1)[0]).max())

# a one-sided velocity misses the bump entirely and stays put
right = grid.sample(lambda t: bump(t, 0.5, 1.0))
print("alpha of a right-side velocity:", spray.alpha(right))
