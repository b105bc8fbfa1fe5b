"""
Automorphisms and a stratification
==================================

A grid translation commutes with the flat spray, so it carries the invariant
half-support set to another invariant set.  It does not commute with the
bump-perturbed spray.  The second half follows finitely supported sequences:
closures H_k are invariant and geodesics cross between strata at isolated
times.
"""
import numpy as np

from spraylab import (GridFunctions, Sequences, bump_perturbed_spray, check_automorphism,
                      check_orbit_invariance, check_stratification, finite_sequence_strata,
                      flat_spray, half_support_union, integrate_geodesic, sign_change_events,
                      translate_set, translation)
from spraylab.samplers import half_support_sampler, stratum_sampler

grid = GridFunctions(L=2.0, h=0.01)
H = half_support_union(grid)
phi = translation(grid, 0.5)

print("flat spray, translation discrepancy:",
      check_automorphism(flat_spray(grid), phi, 20, 0, margin=0.6)["max_discrepancy"])
print("bump spray, translation discrepancy:",
      check_automorphism(bump_perturbed_spray(grid, 0.2), phi, 20, 0, margin=0.6)["max_discrepancy"])
rep = check_orbit_invariance(flat_spray(grid), phi, H, translate_set(H, 0.5),
                             half_support_sampler(grid, 0.6), trials=10, rng=0)
print("translated set:", rep.summary["transformed_verdict"])

seq = Sequences(8)
strata = finite_sequence_strata(seq)
rep = check_stratification(strata, flat_spray(seq), lambda k: stratum_sampler(seq, k),
                           trials=3, rng=0)
for row in rep.rows[:4]:
    print(f"  S_{row['stratum']}: closure distance {row['closure_max_distance']}, "
          f"exits {row['exit_events']}")

# x = e1 + e2 in S_2 with velocity e2 drops to S_1 exactly once, at t = -1
x = np.zeros(8)
x[:2] = 1.0
v = np.zeros(8)
v[1] = 1.0
tr = integrate_geodesic(flat_spray(seq), x, v, (-2, 2), 1e-3)
print("exit events:", sign_change_events(tr.xs[:, 1]),
      "at t =", tr.times[tr.xs[:, 1] == 0])
