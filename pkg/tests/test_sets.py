import math

import numpy as np
import pytest

from spraylab.model_space import GridFunctions, GridSeminorm, Product, Sequences
from spraylab.profiles import bump, random_bumps
from spraylab.sets import (Exactness, MissingTangentPredicate, ProductSet, SameSideBundle,
                           ZeroSection, constant_functions, finite_sequence_strata,
                           fourier_subspace, great_circle_constant_loops,
                           half_support_union, nonneg_orthant, parabola_graph,
                           translate_set)


# --- half-support union ------------------------------------------------------

def test_half_support_member(grid):
    H = half_support_union(grid)
    f = grid.sample(lambda x: bump(x, 0.5, 0.75))
    assert H.contains(f)
    assert np.all(H.distances(f) == 0)


def test_half_support_two_sided_bump(grid):
    H = half_support_union(grid)
    f = grid.sample(lambda x: bump(x, 0.5))
    d = H.distances(f)
    assert not H.contains(f)
    left = np.max(f[grid.x < 0])
    assert d[0] == pytest.approx(left) and d[0] > 0


def test_half_support_zero(grid):
    assert half_support_union(grid).contains(grid.zeros())


def test_half_support_needs_grid():
    with pytest.raises(TypeError):
        half_support_union(Sequences(4))


def test_half_support_two_sided_positive_distance(grid, rng):
    H = half_support_union(grid)
    for _ in range(50):
        f = random_bumps(grid.x, rng, -1.0, 0.0) + random_bumps(grid.x, rng, 0.0, 1.0)
        if np.any(f[grid.x < 0] != 0) and np.any(f[grid.x > 0] != 0):
            assert H.distances(f).max() > 0


def test_half_support_projection_consistency(grid, rng):
    H = half_support_union(grid)
    order0 = [i for i, s in enumerate(grid.seminorm_specs) if s.order == 0]
    for _ in range(200):
        f = random_bumps(grid.x, rng, -1.9, 1.9, count=2)
        p = H.project(f)
        assert H.contains(p)
        q = grid.seminorms(f - p)
        dp, dm = H.side_distances(f)
        side = dp if dp.max() <= dm.max() else dm
        # the only extra mass removed is the value at the origin
        f0 = abs(f[grid.n_points // 2])
        assert np.allclose(q[order0], np.maximum(side[order0], f0), atol=1e-9)
        assert np.all(q >= H.distances(f) - 1e-9)


# --- orthant ------------------------------------------------------------------

def test_orthant_examples():
    sp = Sequences(4)
    O = nonneg_orthant(sp)
    assert O.distance(1, [1, -2, 3, 0]) == 2
    assert np.all(O.distances([1, 2, 3, 0]) == 0)
    assert O.project([-1, 4, 0, 0]).tolist()[:2] == [0, 4]
    assert O.exactness is Exactness.EXACT


def test_orthant_projection_consistency(rng):
    sp = Sequences(16)
    O = nonneg_orthant(sp)
    for _ in range(200):
        x = rng.standard_normal(16)
        p = O.project(x)
        assert O.contains(p)
        assert np.allclose(sp.seminorms(x - p), O.distances(x), atol=1e-9)


# --- constants ----------------------------------------------------------------

def test_constants_examples():
    sp = GridFunctions(2.0, 0.01, seminorm_specs=(GridSeminorm(1, 0), GridSeminorm(1, 1)))
    C = constant_functions(sp)
    assert C.contains(np.full(sp.dim, 3.7))
    f = sp.sample(lambda x: x)
    d = C.distances(f)
    assert d[0] == pytest.approx(1.0)
    assert d[1] == pytest.approx(1.0)


def test_constants_projection_consistency(grid, rng):
    C = constant_functions(grid)
    widest = [i for i, s in enumerate(grid.seminorm_specs) if s.window == grid.L]
    for _ in range(200):
        f = random_bumps(grid.x, rng, -2, 2) + rng.uniform(-1, 1)
        p = C.project(f)
        assert C.contains(p)
        q, d = grid.seminorms(f - p), C.distances(f)
        assert np.allclose(q[widest], d[widest], atol=1e-9)
        assert np.all(q >= d - 1e-9)


def test_constants_tangent_predicate(grid):
    C = constant_functions(grid)
    assert C.is_tangent(grid.zeros(), np.full(grid.dim, 2.0))
    assert not C.is_tangent(grid.zeros(), grid.sample(lambda x: x))


# --- parabola -----------------------------------------------------------------

def test_parabola_examples(grid, bundle):
    P = parabola_graph(bundle)
    assert P.exactness is Exactness.UPPER_BOUND
    h = grid.sample(lambda x: np.sin(x))
    assert np.all(P.distances(bundle.join(h, h * h)) == 0)
    u = grid.sample(lambda x: 1 + 0.5 * np.cos(x))
    t = 0.01
    probe = bundle.join(h + t * u, h * h + 2 * h * u * t)
    m0 = [i for i, s in enumerate(grid.seminorm_specs) if s.order == 0]
    for i in m0:
        mask = np.abs(grid.x) <= grid.seminorm_specs[i].window + 1e-12
        assert P.distances(probe)[i] == pytest.approx(t * t * np.max(u[mask] ** 2), rel=1e-9)
    one = np.ones(grid.dim)
    assert P.distances(bundle.join(0 * one, one))[0] == pytest.approx(1.0)


def test_parabola_projection_lies_on_graph(grid, bundle, rng):
    P = parabola_graph(bundle)
    x = bundle.join(rng.standard_normal(grid.dim), rng.standard_normal(grid.dim))
    assert P.contains(P.project(x))


# --- Fourier subspace -----------------------------------------------------------

def test_fourier_examples(circle1):
    F = fourier_subspace(circle1, 3)
    assert F.distances(circle1.sample(lambda t: np.cos(2 * t))).max() <= 1e-8
    assert F.distances(circle1.sample(lambda t: np.cos(5 * t)))[0] == pytest.approx(1.0, abs=0.05)
    assert F.distances(circle1.zeros()).max() == 0
    assert F.label == "fourier:3"


def test_fourier_projection_consistency(circle1, rng):
    F = fourier_subspace(circle1, 3)
    for _ in range(200):
        f = rng.standard_normal(circle1.dim)
        p = F.project(f)
        assert F.contains(p, 1e-9)
        assert np.allclose(circle1.seminorms(f - p), F.distances(f), atol=1e-9)


# --- strata -------------------------------------------------------------------

def test_strata_examples():
    sp = Sequences(4)
    st = finite_sequence_strata(sp)
    x = np.array([1.0, 2.0, 0.0, 0.0])
    assert st.closure(2).contains(x) and st.stratum(2).contains(x)
    assert st.closure(1).distance(1, x) == 2
    z = np.zeros(4)
    assert all(st.closure(k).contains(z) for k in range(5))
    assert not any(st.stratum(k).contains(z) for k in range(1, 5))
    assert st.locate(x) == 2 and st.locate(z) == 0


def test_strata_frontier_and_nesting(rng):
    sp = Sequences(8)
    st = finite_sequence_strata(sp)
    for j in range(9):
        for _ in range(5):
            x = np.zeros(8)
            x[:j] = rng.standard_normal(j)
            if j:
                x[j - 1] = 1.0 + abs(x[j - 1])
            assert st.stratum(j).contains(x)
            for i in range(9):
                # nesting H_{i-1} in H_i and frontier: S_j in H_i iff j <= i
                assert st.closure(i).contains(x) == (j <= i)


# --- great-circle loops -----------------------------------------------------------

def test_circle_loops_examples(loops):
    L = great_circle_constant_loops(loops)
    e1 = np.tile([1.0, 0.0, 0.0], loops.n_points)
    assert L.contains(e1) and L.distances(e1).max() == 0
    pole = np.tile([0.0, 0.0, 1.0], loops.n_points)
    assert L.distances(pole)[0] >= 1.0
    circ = np.stack([np.cos(loops.x), np.sin(loops.x), 0 * loops.x], axis=1).reshape(-1)
    assert not L.contains(circ)
    assert L.distances(circ).max() > 0.9


def test_circle_loops_tangent(loops):
    L = great_circle_constant_loops(loops)
    p = np.tile([1.0, 0.0, 0.0], loops.n_points)
    assert L.is_tangent(p, np.tile([0.0, 0.7, 0.0], loops.n_points))
    assert not L.is_tangent(p, np.tile([0.0, 0.0, 0.7], loops.n_points))


# --- translation --------------------------------------------------------------------

def test_translate_identity(grid, rng):
    H = half_support_union(grid)
    T = translate_set(H, 0.0)
    for _ in range(100):
        f = random_bumps(grid.x, rng, -1.5, 1.5, count=2)
        assert T.contains(f) == H.contains(f)


def test_translate_shifted_member(grid):
    H = half_support_union(grid)
    T = translate_set(H, 0.5)
    f = grid.sample(lambda x: bump(x, 0.5, 0.75))
    assert T.contains(grid.shift(f, 50))
    g = grid.sample(lambda x: bump(x, 0.5, -0.5))
    assert T.contains(g) == H.contains(grid.shift(g, -50))


def test_translate_equivariance(grid, rng):
    H = half_support_union(grid)
    T = translate_set(H, 0.5)
    for _ in range(50):
        f = random_bumps(grid.x, rng, -1.3, 1.3, count=2)
        assert np.allclose(T.distances(grid.shift(f, 50)), H.distances(f))


def test_translate_rejects_off_grid(grid):
    with pytest.raises(ValueError):
        translate_set(half_support_union(grid), 0.005)


# --- oracle contracts -----------------------------------------------------------------

def test_exact_oracles_vanish_on_members(grid, circle1, rng):
    H = half_support_union(grid)
    C = constant_functions(grid)
    F = fourier_subspace(circle1, 2)
    O = nonneg_orthant(Sequences(16))
    for _ in range(50):
        assert H.distances(random_bumps(grid.x, rng, 0.0, 2.0)).max() <= 1e-12
        assert C.distances(np.full(grid.dim, rng.uniform(-5, 5))).max() <= 1e-12
        a = rng.uniform(-1, 1, 5)
        f = a[0] + a[1] * np.cos(circle1.x) + a[2] * np.sin(circle1.x) + a[3] * np.cos(2 * circle1.x) \
            + a[4] * np.sin(2 * circle1.x)
        assert F.distances(f).max() <= 1e-12
        assert O.distances(np.abs(rng.standard_normal(16))).max() <= 1e-12


def test_contains_implies_small_distance(grid, rng):
    H = half_support_union(grid)
    for _ in range(50):
        f = random_bumps(grid.x, rng, -1, 1) * rng.uniform(0, 1e-9)
        if H.contains(f):
            assert H.distances(f).max() <= H.tol


def test_missing_tangent_predicate(grid):
    with pytest.raises(MissingTangentPredicate):
        half_support_union(grid).is_tangent(grid.zeros(), grid.zeros())


def test_bundle_oracles(grid):
    H = half_support_union(grid)
    right = grid.sample(lambda x: bump(x, 0.5, 1.0))
    left = grid.sample(lambda x: bump(x, 0.5, -1.0))
    A = SameSideBundle(H)
    b = A.space
    assert A.contains(b.join(right, right))
    assert not A.contains(b.join(right, left))
    naive = ProductSet(H, None)
    assert naive.contains(b.join(right, grid.sample(lambda x: bump(x, 0.3))))
    Z = ZeroSection(constant_functions(grid))
    assert Z.contains(b.join(np.ones(grid.dim), grid.zeros()))
    assert not Z.contains(b.join(np.ones(grid.dim), np.ones(grid.dim)))
