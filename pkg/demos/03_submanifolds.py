"""
Totally geodesic or merely invariant
====================================

Three submanifolds under the flat and the pointwise sphere spray:

* constants, where every tangent vector launches a geodesic inside the set;
* the parabola graph {(h, h^2)}, invariant because only zero velocities are
  admissible, yet not totally geodesic;
* constant loops on a great circle of the sphere.
"""
import numpy as np

from spraylab import (GridFunctions, Product, check_geodesic_convexity,
                      check_totally_geodesic, circle_grid, constant_functions, flat_spray,
                      great_circle_constant_loops, parabola_graph, sphere_pointwise_spray,
                      verify_invariance)
from spraylab import samplers

grid = GridFunctions(L=2.0, h=0.01)
C = constant_functions(grid)
ts = samplers.constant_sampler(grid)
rep = check_totally_geodesic(flat_spray(grid), C, ts, samplers.ambient_sampler(ts, grid, 0.1),
                             count=10, rng=0)
print("constants:", rep.verdict, rep.summary["max_geodesic_distance"])
cv = check_geodesic_convexity(flat_spray(grid), C, samplers.constant_pair_sampler(grid),
                              count=10, rng=0)
print("  segments between constants, max distance:", cv.summary["max_distance"])

pair = Product((grid, grid))
P = parabola_graph(pair)
flat = flat_spray(pair)
rep = check_totally_geodesic(flat, P, samplers.parabola_tangent_sampler(pair, unit_first=True),
                             count=3, rng=0)
print("parabola:", rep.verdict, "-", rep.summary["tangent_not_admissible"],
      "tangent vectors fail admissibility")
inv = verify_invariance(flat, P, samplers.parabola_zero_section_sampler(pair), trials=10, rng=0)
print("  zero-section launches:", inv.overall.value)

# segment from (0, 0) to (1, 1): the midpoint (1/2, 1/2) misses the graph by 1/4
zero, one = np.zeros(grid.dim), np.ones(grid.dim)
mid = check_geodesic_convexity(flat, P, None, pairs=[(pair.join(zero, zero), pair.join(one, one))])
print("  midpoint residual:", mid.rows[0]["midpoint_distance"])

loops = circle_grid(64)
L = great_circle_constant_loops(loops)
rep = check_totally_geodesic(sphere_pointwise_spray(loops), L, samplers.circle_loop_sampler(loops),
                             count=5, rng=0)
print("great-circle loops:", rep.verdict)
