"""
Adjacent cones by limit quotients
=================================

The adjacent cone of a set S at s collects the directions f along which
t^-1 d(s + t f, S) goes to zero.  Here S is the non-negative orthant of the
sequence space, where the limit is known in closed form: max(0, -f_n).
"""
import numpy as np

from spraylab import QuotientSchedule, Sequences, adjacent_member, nonneg_orthant

space = Sequences(4)
orthant = nonneg_orthant(space)
sched = QuotientSchedule()          # t = 0.1 * 0.5^k, k = 0..14
s = np.zeros(4)

for f in ([1, 2, 0, 3], [1, -2, 0, 0]):
    r = adjacent_member(space, orthant, s, f, sched)
    print(f"f = {f}: {r.verdict.value}")
    print("  limiting estimates:", np.round(r.limits, 12))

# the trace behind the second verdict, coordinate 2
r = adjacent_member(space, orthant, s, [1, -2, 0, 0], sched)
for t, q in zip(r.times[::4], r.traces[1][::4]):
    print(f"  t = {t:.2e}   q = {q:.6f}")

# the same test on a curved set: the sphere-valued loops need a finer
# schedule before the first-order quotient drops below the member threshold
from spraylab import circle_grid, great_circle_constant_loops

loops = circle_grid(64)
C = great_circle_constant_loops(loops)
p = np.tile([1.0, 0.0, 0.0], loops.n_points)
tangent = np.tile([0.0, 1.0, 0.0], loops.n_points)
r = adjacent_member(loops, C, p, tangent, sched)
print("great-circle tangent:", r.verdict.value, "after", r.times.size - 1, "halvings")
