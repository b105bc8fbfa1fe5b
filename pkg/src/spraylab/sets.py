"""Set oracles: membership, per-seminorm distance and (optional) projection.

Every oracle answers ``distances(x)``, the vector of pseudo-distances
``d_n(x, S) = inf_{y in S} ||x - y||_n`` over the space's seminorm family.
Oracles flagged :attr:`Exactness.UPPER_BOUND` return the seminorms of
``x - y`` for a particular ``y in S`` instead of the infimum.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model_space import GridFunctions, ModelSpace, Product, Sequences

__all__ = [
    "Exactness",
    "SetOracle",
    "MissingTangentPredicate",
    "HalfSupportUnion",
    "NonnegOrthant",
    "ConstantFunctions",
    "ParabolaGraph",
    "FourierSubspace",
    "SequenceClosure",
    "SequenceStratum",
    "Stratification",
    "GreatCircleConstantLoops",
    "TranslatedSet",
    "ProductSet",
    "SameSideBundle",
    "ZeroSection",
    "LoopTangentBundle",
    "half_support_union",
    "nonneg_orthant",
    "constant_functions",
    "parabola_graph",
    "fourier_subspace",
    "finite_sequence_strata",
    "great_circle_constant_loops",
    "translate_set",
    "circle_grid",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


class Exactness(enum.Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"


class MissingTangentPredicate(NotImplementedError):
    pass


class SetOracle:
    """Base class; subclasses implement :meth:`distances`."""

    exactness = Exactness.EXACT
    label = "set"

    def __init__(self, space: ModelSpace, tol: float = DEFAULT_TOL):
        self.space = space
        self.tol = tol

    def distances(self, x) -> np.ndarray:
        raise NotImplementedError

    def distance(self, n: int, x) -> float:
        if not 0 <= n < self.space.n_seminorms:
            raise IndexError(f"seminorm index {n} out of range")
        return float(self.distances(x)[n])

    def contains(self, x, tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return bool(np.all(self.distances(x) <= tol))

    def project(self, x):
        return None

    def is_tangent(self, x, v, tol: float | None = None) -> bool:
        raise MissingTangentPredicate(f"{self.label} has no tangent-space predicate")

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


# --- library sets -----------------------------------------------------------


class HalfSupportUnion(SetOracle):
    """Functions supported in ``[0, inf)`` or in ``(-inf, 0]``.

    A function belongs to the right half when its values, and the finite
    difference derivatives entering the seminorms, vanish at grid points < 0.
    The distance to that half under ``sup_{|x|<=j}|D^m .|`` is the sup of
    ``|D^m f|`` over the grid points of the window left of 0.
    """

    label = "half-support"

    def __init__(self, space: GridFunctions, tol: float = DEFAULT_TOL):
        if not isinstance(space, GridFunctions):
            raise TypeError("half-support sets live on grid function spaces")
        if not (np.any(space.x < 0) and np.any(space.x > 0)):
            raise ValueError("grid must contain points of both signs")
        super().__init__(space, tol)
        self._neg = space.x < 0
        self._pos = space.x > 0

    def side_distances(self, f) -> tuple[np.ndarray, np.ndarray]:
        """(distance to right half, distance to left half) per seminorm."""
        pw = self.space.pointwise_derivatives(f)
        return (self.space.seminorms_from_pointwise(pw, self._neg),
                self.space.seminorms_from_pointwise(pw, self._pos))

    def distances(self, f) -> np.ndarray:
        dp, dm = self.side_distances(f)
        return np.minimum(dp, dm)

    def contains(self, f, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        dp, dm = self.side_distances(f)
        return bool(np.all(dp <= tol) or np.all(dm <= tol))

    def project(self, f):
        # the closed half is cleared: central differences at x = -h read f(0)
        dp, dm = self.side_distances(f)
        vals = self.space.values(f).copy()
        if dp.max() <= dm.max():
            vals[~self._pos] = 0.0
        else:
            vals[~self._neg] = 0.0
        return vals.reshape(-1)


class NonnegOrthant(SetOracle):
    """Sequences with every coordinate ``>= 0``."""

    label = "orthant"

    def __init__(self, space: Sequences, tol: float = DEFAULT_TOL):
        if not isinstance(space, Sequences):
            raise TypeError("the orthant lives on a sequence space")
        super().__init__(space, tol)

    def distances(self, x) -> np.ndarray:
        x = self.space.check(x)
        return np.maximum(0.0, -x[self.space._idx])

    def contains(self, x, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        return bool(np.all(self.space.check(x) >= -tol))

    def project(self, x):
        return np.maximum(self.space.check(x), 0.0)


class ConstantFunctions(SetOracle):
    """Constant real functions.

    For order-0 seminorms the best constant on a window is the midrange, so the
    distance is half the oscillation there; derivatives of constants vanish, so
    for higher orders the distance is the seminorm of ``f`` itself.
    """

    label = "constants"

    def __init__(self, space: GridFunctions, tol: float = DEFAULT_TOL):
        if not isinstance(space, GridFunctions) or space.codomain_dim != 1:
            raise TypeError("constant_functions needs a real-valued grid space")
        super().__init__(space, tol)

    def distances(self, f) -> np.ndarray:
        sp = self.space
        vals = sp.values(f)[:, 0]
        pw = sp.pointwise_derivatives(f)
        out = sp.seminorms_from_pointwise(pw)
        for i, s in enumerate(sp.seminorm_specs):
            if s.order == 0:
                w = vals[sp._masks[i]]
                out[i] = 0.5 * (w.max() - w.min())
        return out

    def project(self, f):
        vals = self.space.values(f)[:, 0]
        widest = max(range(self.space.n_seminorms),
                     key=lambda i: self.space.seminorm_specs[i].window)
        w = vals[self.space._masks[widest]]
        return np.full(self.space.dim, 0.5 * (w.max() + w.min()))

    def is_tangent(self, x, v, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        v = self.space.check(v)
        return bool(0.5 * (v.max() - v.min()) <= tol)


class ParabolaGraph(SetOracle):
    """Pairs ``(h, h^2)`` in a product of two real grid spaces.

    The distance is the surrogate obtained from the section point
    ``(a, a^2)``: the seminorms of the residual ``b - a^2``.
    """

    label = "parabola"
    exactness = Exactness.UPPER_BOUND

    def __init__(self, space: Product, tol: float = DEFAULT_TOL):
        if not (isinstance(space, Product) and len(space.factors) == 2
                and all(isinstance(f, GridFunctions) and f.codomain_dim == 1
                        for f in space.factors)
                and space.factors[0].dim == space.factors[1].dim):
            raise TypeError("parabola_graph needs a product of two matching real grid spaces")
        super().__init__(space, tol)

    def residual(self, x) -> np.ndarray:
        a, b = self.space.split(x)
        return b - a * a

    def distances(self, x) -> np.ndarray:
        g = self.space.factors[1]
        return self.space.combine([g.seminorms(self.residual(x))])

    def project(self, x):
        a, _ = self.space.split(x)
        return self.space.join(a, a * a)

    def is_tangent(self, x, v, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        a, _ = self.space.split(x)
        u, w = self.space.split(v)
        return bool(np.max(np.abs(w - 2 * a * u)) <= tol)


class FourierSubspace(SetOracle):
    """Trigonometric polynomials of degree ``<= N`` on a periodic grid.

    Projection is the least-squares fit onto the ``2N + 1`` sampled basis
    functions, computed through an orthonormal QR factor.
    """

    label = "fourier"

    def __init__(self, space: GridFunctions, N: int, tol: float = DEFAULT_TOL):
        if not (isinstance(space, GridFunctions) and space.periodic
                and space.codomain_dim == 1):
            raise TypeError("fourier_subspace needs a real periodic grid space")
        if N < 0 or 2 * N + 1 > space.n_points:
            raise ValueError("degree too large for the grid")
        super().__init__(space, tol)
        self.N = N
        self.label = f"fourier:{N}"
        th = space.x
        cols = [np.ones_like(th)]
        for j in range(1, N + 1):
            cols += [np.cos(j * th), np.sin(j * th)]
        self._q, _ = np.linalg.qr(np.stack(cols, axis=1))

    def project(self, f):
        f = self.space.check(f)
        return self._q @ (self._q.T @ f)

    def distances(self, f) -> np.ndarray:
        f = self.space.check(f)
        return self.space.seminorms(f - self.project(f))

    def is_tangent(self, x, v, tol=None) -> bool:
        return self.contains(v, tol)


class SequenceClosure(SetOracle):
    """``H_k = span(e_1, ..., e_k)``; the distance at coordinate ``n > k`` is ``|x_n|``."""

    def __init__(self, space: Sequences, k: int, tol: float = DEFAULT_TOL):
        if not isinstance(space, Sequences):
            raise TypeError("strata live on a sequence space")
        if not 0 <= k <= space.N:
            raise ValueError("stratum index out of range")
        super().__init__(space, tol)
        self.k = k
        self.label = f"H_{k}"
        self._tail = space._idx >= k

    def distances(self, x) -> np.ndarray:
        x = self.space.check(x)
        return np.where(self._tail, np.abs(x[self.space._idx]), 0.0)

    def contains(self, x, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        return bool(np.all(np.abs(self.space.check(x)[self.k:]) <= tol))

    def project(self, x):
        y = self.space.check(x).copy()
        y[self.k:] = 0.0
        return y

    def is_tangent(self, x, v, tol=None) -> bool:
        return self.contains(v, tol)


class SequenceStratum(SequenceClosure):
    """``S_k = H_k minus H_{k-1}``: in ``H_k`` with a non-negligible k-th coordinate.

    ``S_0 = H_0 = {0}``.  Distances are those of the closure ``H_k`` (``S_k``
    is dense in it).
    """

    def __init__(self, space: Sequences, k: int, tol: float = DEFAULT_TOL):
        super().__init__(space, k, tol)
        self.label = f"S_{k}"

    def contains(self, x, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        if not super().contains(x, tol):
            return False
        return self.k == 0 or abs(self.space.check(x)[self.k - 1]) > tol

    def project(self, x):
        return None


@dataclass(frozen=True)
class Stratification:
    """Ordered strata ``(id, closure oracle H_i, stratum oracle S_i)``."""

    strata: tuple[tuple[int, SetOracle, SetOracle], ...]

    def closure(self, i: int) -> SetOracle:
        return self.strata[i][1]

    def stratum(self, i: int) -> SetOracle:
        return self.strata[i][2]

    def __len__(self):
        return len(self.strata)

    def locate(self, x, tol: float | None = None) -> int | None:
        """Id of the stratum containing ``x`` (None if none does)."""
        for sid, _, s in self.strata:
            if s.contains(x, tol):
                return sid
        return None


class GreatCircleConstantLoops(SetOracle):
    """Constant loops with value on the great circle ``C = S^2 ∩ normal^perp``.

    The projection normalises the loop average after removing its normal
    component (an arbitrary point of ``C`` when that average vanishes); the
    distance is that of the projection, hence an upper bound.
    """

    label = "circle-loops"
    exactness = Exactness.UPPER_BOUND

    def __init__(self, space: GridFunctions, normal=(0.0, 0.0, 1.0),
                 tol: float = DEFAULT_TOL):
        if not (isinstance(space, GridFunctions) and space.codomain_dim == 3):
            raise TypeError("great_circle_constant_loops needs R^3-valued loops")
        super().__init__(space, tol)
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        # fallback point on C for loops with zero planar mean
        e = np.eye(3)[np.argmin(np.abs(self.normal))]
        e = e - (e @ self.normal) * self.normal
        self._ref = e / np.linalg.norm(e)

    def base_point(self, f) -> np.ndarray:
        vals = self.space.values(f)
        planar = vals - np.outer(vals @ self.normal, self.normal)
        m = planar.mean(axis=0)
        nm = np.linalg.norm(m)
        return self._ref.copy() if nm < 1e-12 else m / nm

    def project(self, f):
        p = self.base_point(f)
        return np.tile(p, self.space.n_points)

    def distances(self, f) -> np.ndarray:
        f = self.space.check(f)
        return self.space.seminorms(f - self.project(f))

    def contains(self, f, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        vals = self.space.values(f)
        if np.max(np.abs(np.linalg.norm(vals, axis=1) - 1.0)) > tol:
            return False
        if np.max(np.abs(vals @ self.normal)) > tol:
            return False
        return super().contains(f, tol)

    def tangent_direction(self, p) -> np.ndarray:
        return np.cross(self.normal, p)

    def is_tangent(self, x, v, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        p = self.base_point(x)
        w = self.space.values(v)
        if np.max(np.abs(w - w.mean(axis=0))) > tol:
            return False
        w0 = w.mean(axis=0)
        return bool(abs(w0 @ p) <= tol and abs(w0 @ self.normal) <= tol)


class TranslatedSet(SetOracle):
    """Image of a set under the grid translation ``f -> f(. - a)``.

    Queries are shifted back by ``a`` and delegated.
    """

    def __init__(self, oracle: SetOracle, a: float):
        space = oracle.space
        if not isinstance(space, GridFunctions):
            raise TypeError("translation needs a grid function space")
        k = int(round(a / space.h))
        if abs(k * space.h - a) > 1e-9 * max(1.0, abs(a)):
            raise ValueError(f"shift {a} is not a multiple of the grid step {space.h}")
        super().__init__(space, oracle.tol)
        self.base = oracle
        self.a = float(a)
        self.k = k
        self.exactness = oracle.exactness
        self.label = f"translate:{oracle.label}:{a:g}"

    def pull_back(self, f) -> np.ndarray:
        return self.space.shift(f, -self.k)

    def distances(self, f) -> np.ndarray:
        return self.base.distances(self.pull_back(f))

    def contains(self, f, tol=None) -> bool:
        return self.base.contains(self.pull_back(f), tol)

    def project(self, f):
        p = self.base.project(self.pull_back(f))
        return None if p is None else self.space.shift(p, self.k)

    def is_tangent(self, x, v, tol=None) -> bool:
        return self.base.is_tangent(self.pull_back(x), self.pull_back(v), tol)


# --- subsets of a doubled (tangent bundle) space ------------------------------


def _bundle_space(space: ModelSpace) -> Product:
    return Product((space, space))


class ProductSet(SetOracle):
    """``A = S1 x S2`` on ``space x space``; ``None`` stands for the whole space."""

    def __init__(self, first: SetOracle | None, second: SetOracle | None,
                 space: ModelSpace | None = None, tol: float = DEFAULT_TOL):
        base = space or (first or second).space
        super().__init__(_bundle_space(base), tol)
        self.first, self.second = first, second
        bounds = [o.exactness for o in (first, second) if o is not None]
        if Exactness.UPPER_BOUND in bounds:
            self.exactness = Exactness.UPPER_BOUND
        self.label = f"{first.label if first else 'E'} x {second.label if second else 'E'}"

    def distances(self, xv) -> np.ndarray:
        x, v = self.space.split(xv)
        parts = [o.distances(p) for o, p in ((self.first, x), (self.second, v))
                 if o is not None]
        return self.space.combine(parts)

    def contains(self, xv, tol=None) -> bool:
        x, v = self.space.split(xv)
        return all(o.contains(p, tol) for o, p in ((self.first, x), (self.second, v))
                   if o is not None)


class SameSideBundle(SetOracle):
    """Pairs ``(f, u)`` lying both in the right half or both in the left half."""

    def __init__(self, half: HalfSupportUnion):
        super().__init__(_bundle_space(half.space), half.tol)
        self.half = half
        self.label = f"same-side bundle of {half.label}"

    def distances(self, xv) -> np.ndarray:
        x, v = self.space.split(xv)
        xp, xm = self.half.side_distances(x)
        vp, vm = self.half.side_distances(v)
        return np.minimum(np.maximum(xp, vp), np.maximum(xm, vm))

    def contains(self, xv, tol=None) -> bool:
        tol = self.tol if tol is None else tol
        x, v = self.space.split(xv)
        xp, xm = self.half.side_distances(x)
        vp, vm = self.half.side_distances(v)
        return bool(np.all(np.maximum(xp, vp) <= tol) or np.all(np.maximum(xm, vm) <= tol))


class ZeroSection(SetOracle):
    """Pairs ``(x, 0)`` with ``x`` in the set."""

    def __init__(self, oracle: SetOracle):
        super().__init__(_bundle_space(oracle.space), oracle.tol)
        self.base = oracle
        self.exactness = oracle.exactness
        self.label = f"zero section over {oracle.label}"

    def distances(self, xv) -> np.ndarray:
        x, v = self.space.split(xv)
        return self.space.combine([self.base.distances(x), self.base.space.seminorms(v)])


class LoopTangentBundle(SetOracle):
    """Tangent bundle of the constant great-circle loops.

    ``(f, u)`` is compared with ``(p, c)`` where ``p`` is the projection of
    ``f`` and ``c`` the constant loop obtained by projecting the mean of ``u``
    onto the tangent line of ``C`` at ``p``.
    """

    exactness = Exactness.UPPER_BOUND

    def __init__(self, loops: GreatCircleConstantLoops):
        super().__init__(_bundle_space(loops.space), loops.tol)
        self.loops = loops
        self.label = f"tangent bundle of {loops.label}"

    def distances(self, xv) -> np.ndarray:
        sp = self.loops.space
        x, v = self.space.split(xv)
        p = self.loops.base_point(x)
        t = self.loops.tangent_direction(p)
        c = (sp.values(v).mean(axis=0) @ t) * t
        dv = sp.seminorms(v - np.tile(c, sp.n_points))
        return self.space.combine([self.loops.distances(x), dv])


# --- factory functions ------------------------------------------------------


def half_support_union(space: GridFunctions, tol: float = DEFAULT_TOL) -> HalfSupportUnion:
    return HalfSupportUnion(space, tol)


def nonneg_orthant(space: Sequences, tol: float = DEFAULT_TOL) -> NonnegOrthant:
    return NonnegOrthant(space, tol)


def constant_functions(space: GridFunctions, tol: float = DEFAULT_TOL) -> ConstantFunctions:
    return ConstantFunctions(space, tol)


def parabola_graph(space: Product, tol: float = DEFAULT_TOL) -> ParabolaGraph:
    return ParabolaGraph(space, tol)


def fourier_subspace(space: GridFunctions, N: int, tol: float = DEFAULT_TOL) -> FourierSubspace:
    return FourierSubspace(space, N, tol)


def finite_sequence_strata(space: Sequences, tol: float = DEFAULT_TOL) -> Stratification:
    return Stratification(tuple(
        (k, SequenceClosure(space, k, tol), SequenceStratum(space, k, tol))
        for k in range(space.N + 1)
    ))


def great_circle_constant_loops(space: GridFunctions, normal=(0.0, 0.0, 1.0),
                                tol: float = DEFAULT_TOL) -> GreatCircleConstantLoops:
    return GreatCircleConstantLoops(space, normal, tol)


def translate_set(oracle: SetOracle, a: float) -> TranslatedSet:
    return TranslatedSet(oracle, a)


def circle_grid(n_points: int = 64) -> GridFunctions:
    """R^3-valued loops on ``n_points`` samples of the circle."""
    return GridFunctions.periodic_circle(n_points, codomain_dim=3)

