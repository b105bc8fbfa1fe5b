"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion NN [PASS|FAIL] ...`` line (also collected into
the terminal summary) before asserting, so a failing criterion still reports
its measured numbers.
"""
import math

import numpy as np
import pytest
from conftest import record_criterion

from spraylab.cone import QuotientSchedule, Verdict, adjacent_member, admissible, second_order_member
from spraylab.invariance import (Overall, check_geodesic_convexity, check_orbit_invariance,
                                 check_stratification, check_tangency_reformulation,
                                 check_totally_geodesic, sign_change_events, verify_invariance)
from spraylab.model_space import GridFunctions, Product, Sequences
from spraylab.profiles import bump
from spraylab.samplers import (ambient_sampler, circle_loop_sampler, constant_pair_sampler,
                               constant_sampler, half_support_probe_sampler,
                               half_support_sampler, parabola_tangent_sampler,
                               parabola_zero_section_sampler, stratum_sampler)
from spraylab.sets import (LoopTangentBundle, ProductSet, SameSideBundle, ZeroSection,
                           circle_grid, constant_functions, finite_sequence_strata,
                           great_circle_constant_loops, half_support_union, nonneg_orthant,
                           parabola_graph, translate_set)
from spraylab.spray import (bump_perturbed_spray, check_automorphism, check_homogeneity,
                            flat_spray, integrate_geodesic, pushforward_spray,
                            sphere_pointwise_spray, translation)

# tolerances, pinned
ORTHANT_LIMIT_TOL = 1e-6
FLAT_INVARIANCE_TOL = 1e-9
BUMP_DISTANCE_AT_0_1 = 1e-3
BUMP_RK4_TOL = 1e-8
PARABOLA_LIMIT = 1.0
PARABOLA_LIMIT_TOL = 1e-3
HOMOGENEITY_TOL = 1e-10
SPHERE_NORM_TOL = 1e-6
SPHERE_CLOSED_TOL = 1e-8
MAX_EXIT_EVENTS = 1
RK4_HALVING_RATIO = 12.0

H_STEP = 1e-3
TSPAN = (-2.0, 2.0)
BUMP_EPS = 0.2
PROBE_DELTA = 0.1
SCHED = QuotientSchedule()


@pytest.fixture(scope="module")
def space():
    return GridFunctions(L=2.0, h=0.01)


@pytest.fixture(scope="module")
def doubled(space):
    return Product((space, space))


@pytest.fixture(scope="module")
def loop_space():
    return circle_grid(64)


@pytest.fixture(scope="module")
def c2_report(space):
    return verify_invariance(flat_spray(space), half_support_union(space),
                             half_support_sampler(space), trials=100, tspan=TSPAN, h=H_STEP,
                             rng=2)


@pytest.fixture(scope="module")
def c3_report(space):
    return verify_invariance(bump_perturbed_spray(space, BUMP_EPS), half_support_union(space),
                             half_support_probe_sampler(space, PROBE_DELTA), trials=5,
                             tspan=TSPAN, h=H_STEP, rng=3)


@pytest.fixture(scope="module")
def c4_report(doubled):
    return verify_invariance(flat_spray(doubled), parabola_graph(doubled),
                             parabola_zero_section_sampler(doubled), trials=20, tspan=TSPAN,
                             h=H_STEP, rng=4)


@pytest.fixture(scope="module")
def c7_report(loop_space):
    return verify_invariance(sphere_pointwise_spray(loop_space),
                             great_circle_constant_loops(loop_space),
                             circle_loop_sampler(loop_space), trials=5, tspan=TSPAN, h=H_STEP,
                             rng=7, method="rk4")


@pytest.fixture(scope="module")
def c8_reports():
    sp = Sequences(16)
    st = finite_sequence_strata(sp)
    return [verify_invariance(flat_spray(sp), st.closure(k), stratum_sampler(sp, k), trials=5,
                              tspan=TSPAN, h=H_STEP, rng=8 + k) for k in (1, 2, 4, 8)]


def test_criterion_01_orthant_cone():
    sp = Sequences(16)
    O = nonneg_orthant(sp)
    rng = np.random.default_rng(1)
    worst = 0.0
    mismatches = 0
    for i in range(100):
        f = rng.standard_normal(16)
        if i % 4 == 0:
            f = np.abs(f)
        r = adjacent_member(sp, O, np.zeros(16), f, SCHED)
        worst = max(worst, float(np.max(np.abs(r.limits - np.maximum(0.0, -f)))))
        mismatches += (r.verdict is Verdict.MEMBER) != (f.min() >= 0)
    ok = worst <= ORTHANT_LIMIT_TOL and mismatches == 0
    record_criterion(1, "orthant cone closed form", ok,
                     f"max limit error {worst:.2e} (tol {ORTHANT_LIMIT_TOL:g}), "
                     f"verdict mismatches {mismatches}/100")
    assert ok


def test_criterion_02_flat_half_support(c2_report):
    rep = c2_report
    ok = rep.overall is Overall.INVARIANT and rep.max_distance <= FLAT_INVARIANCE_TOL \
        and len(rep.trials) == 100
    record_criterion(2, "flat-spray invariance of the half-support union", ok,
                     f"{rep.overall.value}, max distance {rep.max_distance:.2e} "
                     f"(tol {FLAT_INVARIANCE_TOL:g}) over {len(rep.trials)} trials")
    assert ok


def test_criterion_03_projective_sensitivity(space, c3_report):
    sp = bump_perturbed_spray(space, BUMP_EPS)
    H = half_support_union(space)
    x, v = half_support_probe_sampler(space, PROBE_DELTA).sample(np.random.default_rng(3))
    u0 = sp.alpha(v)
    x01 = x + v * math.log1p(2 * u0 * 0.1) / (2 * u0)
    d01 = float(np.max(H.distances(x01)))
    tr = integrate_geodesic(sp, x, v, (0.0, 2.0), H_STEP, method="rk4")
    closed = np.array([x + v * math.log1p(2 * u0 * t) / (2 * u0) for t in tr.times])
    rk4_err = float(np.max(np.abs(tr.xs - closed)))
    ok = (c3_report.overall is Overall.VIOLATED and d01 > BUMP_DISTANCE_AT_0_1
          and rk4_err <= BUMP_RK4_TOL)
    record_criterion(3, "projective sensitivity (bump-perturbed spray)", ok,
                     f"{c3_report.overall.value}, d(0.1) = {d01:.3e} (> {BUMP_DISTANCE_AT_0_1:g}), "
                     f"RK4 vs closed form {rk4_err:.2e} (tol {BUMP_RK4_TOL:g}), u0 = {u0:.4f}; "
                     f"flat-spray verdict on the same set: Invariant (criterion 2)")
    assert ok


def test_criterion_04_parabola(space, doubled, c4_report):
    P = parabola_graph(doubled)
    flat = flat_spray(doubled)
    rng = np.random.default_rng(40)
    zs = parabola_zero_section_sampler(doubled)
    zero_members = sum(admissible(flat, P, *zs.sample(rng), SCHED).verdict is Verdict.MEMBER
                       for _ in range(50))
    h = space.sample(lambda t: 0.5 * np.sin(2 * t))
    u = np.ones(space.dim)
    r = second_order_member(doubled, P, doubled.join(h, h * h), doubled.join(u, 2 * h * u),
                            doubled.zeros(), SCHED)
    limit = float(r.limits.max())
    tg = check_totally_geodesic(flat, P, parabola_tangent_sampler(doubled, unit_first=True),
                                None, SCHED, count=5, rng=41)
    ok = (zero_members == 50 and r.verdict is Verdict.NONMEMBER
          and abs(limit - PARABOLA_LIMIT) <= PARABOLA_LIMIT_TOL
          and tg.verdict == "NotTotallyGeodesic" and c4_report.overall is Overall.INVARIANT)
    record_criterion(4, "parabola set", ok,
                     f"zero section Member {zero_members}/50; unit tangent {r.verdict.value} "
                     f"limit {limit:.9f} (1.0 +- {PARABOLA_LIMIT_TOL:g}); {tg.verdict}; "
                     f"A-sampled invariance {c4_report.overall.value}")
    assert ok


def test_criterion_05_constants(space):
    C = constant_functions(space)
    flat = flat_spray(space)
    ts = constant_sampler(space)
    tg = check_totally_geodesic(flat, C, ts, ambient_sampler(ts, space, 0.1), SCHED,
                                count=20, rng=5)
    cv = check_geodesic_convexity(flat, C, constant_pair_sampler(space), count=20, rng=6)
    gd, cd = tg.summary["max_geodesic_distance"], cv.summary["max_distance"]
    ok = tg.verdict == "TotallyGeodesic" and cv.passed and gd == 0.0 and cd == 0.0
    record_criterion(5, "constant functions totally geodesic", ok,
                     f"{tg.verdict} (geodesic distance {gd!r}), convexity "
                     f"{cv.verdict} (distance {cd!r})")
    assert ok


def test_criterion_06_homogeneity(space, loop_space):
    sprays = [flat_spray(space), bump_perturbed_spray(space, BUMP_EPS),
              sphere_pointwise_spray(loop_space),
              pushforward_spray(bump_perturbed_spray(space, BUMP_EPS), translation(space, 0.5))]
    worst = {sp.label: check_homogeneity(sp, 1000, 6)["max_relative_violation"] for sp in sprays}
    ok = max(worst.values()) <= HOMOGENEITY_TOL
    record_criterion(6, "degree-2 homogeneity of the library sprays", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                     + f" (tol {HOMOGENEITY_TOL:g}, 1000 samples each)")
    assert ok


def test_criterion_07_sphere_loops(loop_space):
    sp = sphere_pointwise_spray(loop_space)
    L = great_circle_constant_loops(loop_space)
    n = loop_space.n_points
    omega = 1.0
    p = np.tile([1.0, 0.0, 0.0], n)
    v = np.tile([0.0, omega, 0.0], n)
    tr = integrate_geodesic(sp, p, v, TSPAN, H_STEP, method="rk4")
    X = tr.xs.reshape(len(tr), n, 3)
    norm_err = float(np.max(np.abs(np.linalg.norm(X, axis=2) - 1.0)))
    off_equator = float(np.max(np.abs(X[:, :, 2])))
    want = np.stack([np.cos(omega * tr.times), np.sin(omega * tr.times),
                     np.zeros_like(tr.times)], axis=1)
    closed_err = float(np.max(np.abs(X - want[:, None, :])))
    tg = check_totally_geodesic(sp, L, circle_loop_sampler(loop_space), None, SCHED,
                                count=10, rng=7)
    ok = (norm_err <= SPHERE_NORM_TOL and off_equator == 0.0 and closed_err <= SPHERE_CLOSED_TOL
          and tg.verdict == "TotallyGeodesic")
    record_criterion(7, "sphere loop space", ok,
                     f"RK4 | |g| - 1 | {norm_err:.2e} (tol {SPHERE_NORM_TOL:g}), off-equator "
                     f"{off_equator:g}, vs great circle {closed_err:.2e} "
                     f"(tol {SPHERE_CLOSED_TOL:g}); {tg.verdict}")
    assert ok


def test_criterion_08_strata(c8_reports):
    sp = Sequences(16)
    st = finite_sequence_strata(sp)
    strat = check_stratification(st, flat_spray(sp), lambda k: stratum_sampler(sp, k),
                                 trials=5, tspan=TSPAN, h=H_STEP, rng=8)
    # random affine data in every stratum, one exit count per trajectory
    rng = np.random.default_rng(80)
    events = []
    for k in range(1, 17):
        smp = stratum_sampler(sp, k)
        for _ in range(5):
            x, v = smp.sample(rng)
            tr = integrate_geodesic(flat_spray(sp), x, v, TSPAN, H_STEP)
            events.append(sign_change_events(tr.xs[:, k - 1]))
    dist = max(r.max_distance for r in c8_reports)
    ok = (all(r.overall is Overall.INVARIANT for r in c8_reports) and dist == 0.0
          and strat.passed and strat.summary["frontier"] and max(events) <= MAX_EXIT_EVENTS)
    record_criterion(8, "finite-sequence strata", ok,
                     f"closure distance {dist!r}, frontier {strat.summary['frontier']}, "
                     f"max exit events {max(events)} over {len(events)} trajectories "
                     f"(limit {MAX_EXIT_EVENTS})")
    assert ok


def test_criterion_09_automorphism_orbit(space):
    H = half_support_union(space)
    phi = translation(space, 0.5)
    flat_disc = check_automorphism(flat_spray(space), phi, 50, 9, margin=0.6)["max_discrepancy"]
    orbit = check_orbit_invariance(flat_spray(space), phi, H, translate_set(H, 0.5),
                                   half_support_sampler(space, 0.6), trials=20, rng=9)
    bump_disc = check_automorphism(bump_perturbed_spray(space, BUMP_EPS), phi, 50, 9,
                                   margin=0.6)["max_discrepancy"]
    ok = flat_disc == 0.0 and orbit.passed and bump_disc > 0.0
    record_criterion(9, "automorphism orbit", ok,
                     f"flat discrepancy {flat_disc!r}, translated set "
                     f"{orbit.summary['transformed_verdict']}, bump discrepancy {bump_disc:.3e}")
    assert ok


def test_criterion_10_tangency_reformulation(space, doubled, loop_space):
    H = half_support_union(space)
    C = constant_functions(space)
    P = parabola_graph(doubled)
    L = great_circle_constant_loops(loop_space)
    pairs = [
        ("flat/half-support", flat_spray(space), H, SameSideBundle(H), half_support_sampler(space)),
        ("bump/half-support", bump_perturbed_spray(space, BUMP_EPS), H, ProductSet(H, None),
         half_support_probe_sampler(space, PROBE_DELTA)),
        ("flat/parabola", flat_spray(doubled), P, ZeroSection(P),
         parabola_zero_section_sampler(doubled)),
        ("flat/constants", flat_spray(space), C, ProductSet(C, C), constant_sampler(space)),
        ("sphere/circle-loops", sphere_pointwise_spray(loop_space), L, LoopTangentBundle(L),
         circle_loop_sampler(loop_space)),
    ]
    parts = []
    agree = True
    for i, (name, spray, S, A, smp) in enumerate(pairs):
        rep = check_tangency_reformulation(spray, S, A, smp, trials=5, sched=SCHED, rng=100 + i)
        agree &= rep.passed and rep.summary["agreement_rate"] == 1.0
        parts.append(f"{name} {rep.summary['tangency_verdict']}="
                     f"{rep.summary['invariance_verdict']} "
                     f"({rep.summary['agreement_rate']:.0%})")
    record_criterion(10, "tangency reformulation coherence", agree, "; ".join(parts))
    assert agree


def test_criterion_11_rechecks(c2_report, c3_report, c4_report, c7_report, c8_reports):
    in_set = [t for rep in (c2_report, c4_report, c7_report, *c8_reports)
              for t in rep.trials if t.status == "in_set"]
    non = sum(vd == Verdict.NONMEMBER.value for t in in_set for _, vd in t.rechecks)
    checked = sum(len(t.rechecks) for t in in_set)
    violated = [t for t in c3_report.trials if t.status == "violated"]
    fails = sum(t.coherent for t in violated)
    ok = non == 0 and checked == 3 * len(in_set) and violated and fails == len(violated)
    record_criterion(11, "re-check coherence along trajectories", bool(ok),
                     f"{checked} interior re-checks on {len(in_set)} in-set trajectories, "
                     f"{non} NonMember; admissibility fails after onset on "
                     f"{fails}/{len(violated)} violated trajectories")
    assert ok


def test_criterion_12_rk4_order(space, loop_space):
    ratios = {}
    bsp = bump_perturbed_spray(space, BUMP_EPS)
    chi = bump(space.x, PROBE_DELTA)
    v = chi * (0.5 / bsp.alpha(chi))
    x = space.sample(lambda t: bump(t, 0.6, 1.0))
    sph = sphere_pointwise_spray(loop_space)
    n = loop_space.n_points
    p = np.tile([1.0, 0.0, 0.0], n)
    w = np.tile([0.0, 1.0, 0.0], n)
    for name, sp, a, b in (("bump", bsp, x, v), ("sphere", sph, p, w)):
        exact, _ = sp.closed_form(2.0, a, b)
        errs = [float(np.max(np.abs(
            integrate_geodesic(sp, a, b, (0.0, 2.0), h, method="rk4").xs[-1] - exact)))
            for h in (0.1, 0.05)]
        ratios[name] = errs[0] / errs[1]
    ok = min(ratios.values()) >= RK4_HALVING_RATIO
    record_criterion(12, "RK4 order", ok,
                     ", ".join(f"{k} error ratio {r:.2f}" for k, r in ratios.items())
                     + f" (>= {RK4_HALVING_RATIO:g}, h = 0.1 -> 0.05)")
    assert ok
