"""Samplers of initial data for the invariance experiments.

Analytic samplers draw from a closed-form description of the admissible set
(or of the tangent bundle); coefficients are uniform in ``[-1, 1]`` over the
set's natural parameters unless noted.  Numeric samplers filter generic draws
through :func:`spraylab.cone.admissible`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cone import QuotientSchedule, Verdict, admissible
from .model_space import GridFunctions, Product, Sequences
from .profiles import bump, random_bumps, trig_poly
from .sets import SetOracle
from .spray import Spray, random_element

__all__ = [
    "SamplerMode",
    "SamplerExhausted",
    "AdmissibleSampler",
    "PairSampler",
    "numeric_sampler",
    "half_support_sampler",
    "half_support_probe_sampler",
    "constant_sampler",
    "parabola_zero_section_sampler",
    "parabola_tangent_sampler",
    "fourier_sampler",
    "circle_loop_sampler",
    "stratum_sampler",
    "constant_pair_sampler",
    "parabola_pair_sampler",
    "circle_loop_pair_sampler",
    "ambient_sampler",
]


class SamplerMode(str, enum.Enum):
    ANALYTIC = "Analytic"
    NUMERIC = "Numeric"


class SamplerExhausted(RuntimeError):
    pass


@dataclass
class AdmissibleSampler:
    """Generator of ``(x, v)`` pairs with ``x`` in the set.

    In numeric mode every candidate from ``draw`` is kept only if
    :func:`admissible` returns Member; ``max_tries`` consecutive rejections
    raise :class:`SamplerExhausted`.
    """

    draw: Callable[[np.random.Generator], tuple]
    label: str
    mode: SamplerMode = SamplerMode.ANALYTIC
    spray: Optional[Spray] = None
    oracle: Optional[SetOracle] = None
    sched: Optional[QuotientSchedule] = None
    max_tries: int = 50

    def sample(self, rng: np.random.Generator):
        if self.mode is SamplerMode.ANALYTIC:
            x, v = self.draw(rng)
            return np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        if self.spray is None or self.oracle is None:
            raise ValueError("numeric sampling needs a spray and a set oracle")
        for _ in range(self.max_tries):
            x, v = self.draw(rng)
            if not self.oracle.contains(x):
                continue
            if admissible(self.spray, self.oracle, x, v, self.sched).verdict is Verdict.MEMBER:
                return np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        raise SamplerExhausted(
            f"{self.label}: no admissible pair in {self.max_tries} draws"
        )

    def mapped(self, fn, label: str | None = None) -> "AdmissibleSampler":
        """Sampler of ``fn(x, v)`` for ``(x, v)`` drawn from this one."""
        base = self

        def draw(rng):
            return fn(*base.sample(rng))

        return AdmissibleSampler(draw, label or f"mapped({self.label})", SamplerMode.ANALYTIC)


@dataclass
class PairSampler:
    """Pairs ``(p, q)`` of points of a set, for geodesic convexity checks."""

    draw: Callable[[np.random.Generator], tuple]
    label: str

    def sample(self, rng):
        p, q = self.draw(rng)
        return np.asarray(p, dtype=float), np.asarray(q, dtype=float)


def numeric_sampler(spray: Spray, oracle: SetOracle, draw, label="numeric",
                    sched: QuotientSchedule | None = None, max_tries: int = 50):
    return AdmissibleSampler(draw, label, SamplerMode.NUMERIC, spray, oracle, sched, max_tries)


def ambient_sampler(base: AdmissibleSampler, space, margin: float = 0.0) -> AdmissibleSampler:
    """Base points from ``base``, velocities generic elements of the space."""
    def draw(rng):
        x, _ = base.sample(rng)
        return x, random_element(space, rng, margin)
    return AdmissibleSampler(draw, f"ambient({base.label})")


# --- library samplers ---------------------------------------------------------


def _one_sided(space: GridFunctions, rng, side: int, margin: float):
    lo, hi = (0.0, space.L - margin) if side > 0 else (-space.L + margin, 0.0)
    return random_bumps(space.x, rng, lo, hi)


def half_support_sampler(space: GridFunctions, margin: float = 0.1) -> AdmissibleSampler:
    """Same-side pairs: ``x`` and ``v`` both sums of bumps supported in
    ``(0, L - margin)``, or both in ``(-L + margin, 0)``; side chosen by a coin.
    """
    def draw(rng):
        side = 1 if rng.random() < 0.5 else -1
        return _one_sided(space, rng, side, margin), _one_sided(space, rng, side, margin)
    return AdmissibleSampler(draw, "half-support same-side")


def half_support_probe_sampler(space: GridFunctions, delta: float,
                               margin: float = 0.1) -> AdmissibleSampler:
    """``x`` in the right half, ``v = chi_delta`` the centred bump of width ``delta``.

    This is the initial data of the bump-perturbation example; it is asserted
    admissible by construction, which the numeric admissibility test disputes
    (``chi_delta`` is two-sided).  Reports carry both verdicts.
    """
    chi = bump(space.x, delta)

    def draw(rng):
        x = _one_sided(space, rng, 1, margin)
        x = x + bump(space.x, 0.5, 1.0)  # keep x visibly non-zero
        return x, chi.copy()
    return AdmissibleSampler(draw, f"half-support + chi_{delta:g} probe")


def constant_sampler(space: GridFunctions) -> AdmissibleSampler:
    """Constant ``x`` and ``v`` with values uniform in ``[-1, 1]``."""
    def draw(rng):
        c, d = rng.uniform(-1, 1, size=2)
        return np.full(space.dim, c), np.full(space.dim, d)
    return AdmissibleSampler(draw, "constants")


def _parabola_base(space: Product, rng, margin):
    a = random_element(space.factors[0], rng, margin)
    return a


def parabola_zero_section_sampler(space: Product, margin: float = 0.1) -> AdmissibleSampler:
    """``((a, a^2), 0)``: the admissible set of the parabola under the flat spray."""
    def draw(rng):
        a = _parabola_base(space, rng, margin)
        return space.join(a, a * a), space.zeros()
    return AdmissibleSampler(draw, "parabola zero section")


def parabola_tangent_sampler(space: Product, margin: float = 0.1,
                             unit_first: bool = False) -> AdmissibleSampler:
    """Tangent vectors ``((a, a^2), (u, 2 a u))``; ``unit_first`` fixes ``u = 1``."""
    def draw(rng):
        a = _parabola_base(space, rng, margin)
        u = np.ones_like(a) if unit_first else random_element(space.factors[0], rng, margin)
        return space.join(a, a * a), space.join(u, 2 * a * u)
    return AdmissibleSampler(draw, "parabola tangent")


def fourier_sampler(space: GridFunctions, N: int) -> AdmissibleSampler:
    """``x`` and ``v`` trigonometric polynomials of degree ``N``, coefficients in ``[-1, 1]``."""
    def poly(rng):
        return trig_poly(space.x, rng.uniform(-1, 1), rng.uniform(-1, 1, N),
                         rng.uniform(-1, 1, N))

    def draw(rng):
        return poly(rng), poly(rng)
    return AdmissibleSampler(draw, f"fourier:{N}")


def _circle_point(angle, normal):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    e1 = np.eye(3)[np.argmin(np.abs(n))]
    e1 = e1 - (e1 @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    p = math.cos(angle) * e1 + math.sin(angle) * e2
    return p, np.cross(n, p)


def circle_loop_sampler(space: GridFunctions, normal=(0.0, 0.0, 1.0),
                        omega: float | None = None) -> AdmissibleSampler:
    """Constant loop ``p`` on the great circle with constant tangent ``w (n x p)``.

    The angle of ``p`` is uniform; ``w`` is uniform in ``[-1, 1]`` unless fixed.
    """
    def draw(rng):
        p, t = _circle_point(rng.uniform(0, 2 * math.pi), normal)
        w = rng.uniform(-1, 1) if omega is None else omega
        return np.tile(p, space.n_points), np.tile(w * t, space.n_points)
    return AdmissibleSampler(draw, "circle-loops tangent")


def stratum_sampler(space: Sequences, k: int) -> AdmissibleSampler:
    """``x`` in the stratum ``S_k`` and ``v`` in ``H_k``, standard normal coordinates."""
    def draw(rng):
        x = np.zeros(space.N)
        v = np.zeros(space.N)
        x[:k] = rng.standard_normal(k)
        v[:k] = rng.standard_normal(k)
        if k:
            while abs(x[k - 1]) < 1e-3:
                x[k - 1] = rng.standard_normal()
        return x, v
    return AdmissibleSampler(draw, f"strata:{k}")


# --- pair samplers ----------------------------------------------------------


def constant_pair_sampler(space: GridFunctions) -> PairSampler:
    def draw(rng):
        c1, c2 = rng.uniform(-1, 1, size=2)
        return np.full(space.dim, c1), np.full(space.dim, c2)
    return PairSampler(draw, "constant pairs")


def parabola_pair_sampler(space: Product) -> PairSampler:
    """Pairs of constant points ``(c, c^2)`` of the parabola."""
    n = space.factors[0].dim

    def draw(rng):
        c1, c2 = rng.uniform(-1, 1, size=2)
        a1, a2 = np.full(n, c1), np.full(n, c2)
        return space.join(a1, a1 ** 2), space.join(a2, a2 ** 2)
    return PairSampler(draw, "parabola pairs")


def circle_loop_pair_sampler(space: GridFunctions, normal=(0.0, 0.0, 1.0),
                             max_angle: float = 1.0) -> PairSampler:
    """Close pairs of constant loops on the great circle (angular gap ``<= max_angle``)."""
    def draw(rng):
        a = rng.uniform(0, 2 * math.pi)
        b = a + rng.uniform(-max_angle, max_angle)
        p, _ = _circle_point(a, normal)
        q, _ = _circle_point(b, normal)
        return np.tile(p, space.n_points), np.tile(q, space.n_points)
    return PairSampler(draw, "circle-loop pairs")
