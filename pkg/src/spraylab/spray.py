"""Sprays as acceleration fields, their geodesics and transformations.

A spray is stored through its chart acceleration ``accel(x, v)``; geodesics
solve ``x' = v, v' = accel(x, v)``.  Sprays may carry a closed-form geodesic,
the maximal existence interval of their geodesics and a two-point solver.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model_space import GridFunctions, ModelSpace, Product, Sequences
from .profiles import bump, random_bumps

__all__ = [
    "Spray",
    "Automorphism",
    "ProjectiveFactor",
    "Trajectory",
    "BlowUp",
    "flat_spray",
    "bump_perturbed_spray",
    "bump_weights",
    "sphere_pointwise_spray",
    "projective_transform",
    "pushforward_spray",
    "translation",
    "identity_automorphism",
    "scaling",
    "check_homogeneity",
    "check_projective_factor",
    "check_automorphism",
    "integrate_geodesic",
    "geodesic_flow",
    "reparametrize_check",
    "random_element",
]


def random_element(space: ModelSpace, rng: np.random.Generator,
                   margin: float = 0.0) -> np.ndarray:
    """A generic element: smooth bumps for grids, normal draws for sequences.

    On non-periodic grids the bumps stay ``margin`` away from the ends.
    """
    if isinstance(space, GridFunctions):
        lo, hi = -space.L + margin, space.L - margin
        if space.periodic:
            lo, hi = -space.L, space.L
        cols = [random_bumps(space.x, rng, lo, hi) for _ in range(space.codomain_dim)]
        return np.stack(cols, axis=1).reshape(-1)
    if isinstance(space, Sequences):
        return rng.standard_normal(space.N)
    if isinstance(space, Product):
        return np.concatenate([random_element(f, rng, margin) for f in space.factors])
    raise TypeError(f"cannot sample {type(space).__name__}")


@dataclass(frozen=True, eq=False)
class Spray:
    """Acceleration field ``(x, v) -> S2(x, v)``, quadratic in ``v``.

    ``closed_form(t, x0, v0)`` returns ``(x(t), v(t))``; ``domain(x0, v0)``
    returns the open maximal interval ``(t_min, t_max)`` of the geodesic;
    ``two_point(p, q, s)`` evaluates the connecting geodesic at ``s in [0, 1]``.
    """

    space: ModelSpace
    accel: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "spray"
    closed_form: Optional[Callable] = None
    domain: Optional[Callable] = None
    two_point: Optional[Callable] = None
    point_sampler: Optional[Callable] = None

    def sample_state(self, rng: np.random.Generator, margin: float = 0.0):
        x = (self.point_sampler(rng) if self.point_sampler
             else random_element(self.space, rng, margin))
        return x, random_element(self.space, rng, margin)


@dataclass(frozen=True)
class ProjectiveFactor:
    """Scalar field ``P(x, v)``, homogeneous of degree 1 in ``v``."""

    fn: Callable[[np.ndarray, np.ndarray], float]
    label: str = "P"

    def __call__(self, x, v) -> float:
        return float(self.fn(x, v))


@dataclass(frozen=True, eq=False)
class Automorphism:
    """Diffeomorphism with first and second derivatives.

    ``dforward(x, u)`` is ``dphi(x)(u)``; ``d2forward(x, u, w)`` is
    ``d^2 phi(x)(u, w)``; likewise for the inverse.
    """

    forward: Callable
    inverse: Callable
    dforward: Callable
    dinverse: Callable
    d2forward: Optional[Callable] = None
    d2inverse: Optional[Callable] = None
    label: str = "phi"

    def push(self, x, v):
        """Tangent map ``(x, v) -> (phi(x), dphi(x) v)``."""
        return self.forward(x), self.dforward(x, v)

    def pull(self, y, w):
        return self.inverse(y), self.dinverse(y, w)

    def inverted(self) -> "Automorphism":
        return Automorphism(self.inverse, self.forward, self.dinverse, self.dforward,
                            self.d2inverse, self.d2forward, f"{self.label}^-1")


# --- library sprays ---------------------------------------------------------


def flat_spray(space: ModelSpace) -> Spray:
    """Zero acceleration; geodesics are affine lines."""

    def accel(x, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def closed(t, x0, v0):
        return x0 + t * v0, np.array(v0, dtype=float)

    def segment(p, q, s):
        return p + s * (q - p)

    return Spray(space, accel, "flat", closed_form=closed, two_point=segment)


def bump_weights(space: GridFunctions, eps: float) -> np.ndarray:
    """Quadrature weights ``w`` with ``alpha(v) = w @ v = int chi_eps v dx`` (trapezoid)."""
    if not isinstance(space, GridFunctions) or space.codomain_dim != 1:
        raise TypeError("the bump-perturbed spray needs a real-valued grid space")
    if eps < 2 * space.h:
        raise ValueError(f"bump width {eps} is below two grid steps ({2 * space.h})")
    q = np.full(space.n_points, space.h)
    if not space.periodic:
        q[0] = q[-1] = space.h / 2
    return bump(space.x, eps) * q


def bump_perturbed_spray(space: GridFunctions, eps: float) -> Spray:
    """``S2(f, v) = -2 alpha(v) v`` with ``alpha(v) = int chi_eps v``.

    With ``u0 = alpha(v0)`` the geodesic is
    ``x(t) = f + v0 log(1 + 2 u0 t) / (2 u0)``, defined while ``1 + 2 u0 t > 0``.
    """
    w = bump_weights(space, eps)

    def alpha(v):
        return float(w @ v)

    def accel(x, v):
        v = np.asarray(v, dtype=float)
        return -2.0 * (w @ v) * v

    def closed(t, x0, v0):
        u0 = alpha(v0)
        s = 1.0 + 2.0 * u0 * t
        if s <= 0:
            raise ValueError(f"t={t} lies beyond the geodesic's domain boundary")
        c = t if u0 == 0 else math.log1p(2.0 * u0 * t) / (2.0 * u0)
        return x0 + c * v0, v0 / s

    def domain(x0, v0):
        u0 = alpha(v0)
        if u0 > 0:
            return -1.0 / (2.0 * u0), math.inf
        if u0 < 0:
            return -math.inf, -1.0 / (2.0 * u0)
        return -math.inf, math.inf

    sp = Spray(space, accel, f"bump(eps={eps:g})", closed_form=closed, domain=domain)
    object.__setattr__(sp, "alpha", alpha)
    object.__setattr__(sp, "eps", eps)
    return sp


def sphere_pointwise_spray(space: GridFunctions, on_sphere_tol: float = 1e-6) -> Spray:
    """Unit-sphere geodesic spray applied at every grid point of an R^3-valued loop.

    ``S2(x, v)(theta) = -|v(theta)|^2 x(theta)``.
    """
    if not isinstance(space, GridFunctions) or space.codomain_dim != 3:
        raise TypeError("the sphere spray needs R^3-valued grid functions")
    n = space.n_points

    def accel(x, v):
        X = np.reshape(x, (n, 3))
        V = np.reshape(v, (n, 3))
        return (-np.sum(V * V, axis=1)[:, None] * X).reshape(-1)

    def _check(X):
        err = np.max(np.abs(np.linalg.norm(X, axis=1) - 1.0))
        if err > on_sphere_tol:
            raise ValueError(f"base point is off the unit sphere by {err:.3g}")

    def closed(t, x0, v0):
        X = np.reshape(x0, (n, 3))
        V = np.reshape(v0, (n, 3))
        _check(X)
        w = np.linalg.norm(V, axis=1)[:, None]
        if np.max(np.abs(np.sum(X * V, axis=1))) > on_sphere_tol * (1.0 + w.max()):
            raise ValueError("initial velocity is not tangent to the sphere")
        c, s = np.cos(w * t), np.sin(w * t)
        dirn = np.divide(V, w, out=np.zeros_like(V), where=w > 0)
        xt = c * X + s * dirn
        vt = -w * s * X + c * V
        return xt.reshape(-1), vt.reshape(-1)

    def arc(p, q, s):
        P = np.reshape(p, (n, 3))
        Q = np.reshape(q, (n, 3))
        cos_th = np.clip(np.sum(P * Q, axis=1), -1.0, 1.0)
        th = np.arccos(cos_th)[:, None]
        if np.any(th > math.pi - 1e-9):
            raise ValueError("antipodal points have no unique connecting arc")
        sin_th = np.sin(th)
        small = sin_th < 1e-15
        a = np.where(small, 1.0 - s, np.sin((1.0 - s) * th) / np.where(small, 1.0, sin_th))
        b = np.where(small, s, np.sin(s * th) / np.where(small, 1.0, sin_th))
        return (a * P + b * Q).reshape(-1)

    def sample_point(rng):
        X = rng.standard_normal((n, 3))
        return (X / np.linalg.norm(X, axis=1)[:, None]).reshape(-1)

    return Spray(space, accel, "sphere", closed_form=closed, two_point=arc,
                 point_sampler=sample_point)


def projective_transform(spray: Spray, P) -> Spray:
    """Spray with acceleration ``S2(x, v) + P(x, v) v``."""
    P = P if isinstance(P, ProjectiveFactor) else ProjectiveFactor(P)

    def accel(x, v):
        v = np.asarray(v, dtype=float)
        return spray.accel(x, v) + P(x, v) * v

    return Spray(spray.space, accel, f"{spray.label}+{P.label}*v",
                 point_sampler=spray.point_sampler)


# --- automorphisms ----------------------------------------------------------


def translation(space: GridFunctions, a: float) -> Automorphism:
    """``phi_a(f)(x) = f(x - a)`` for ``a`` a multiple of the grid step.

    On non-periodic grids values leaving the grid are dropped, so the map is
    invertible only on functions supported away from the ends.
    """
    if not isinstance(space, GridFunctions):
        raise TypeError("translations act on grid function spaces")
    k = int(round(a / space.h))
    if abs(k * space.h - a) > 1e-9 * max(1.0, abs(a)):
        raise ValueError(f"shift {a} is not a multiple of the grid step {space.h}")

    def fwd(x):
        return space.shift(x, k)

    def inv(x):
        return space.shift(x, -k)

    def zero2(x, u, w):
        return np.zeros(space.dim)

    return Automorphism(fwd, inv, lambda x, u: fwd(u), lambda x, u: inv(u),
                        zero2, zero2, label=f"translate({a:g})")


def identity_automorphism(space: ModelSpace) -> Automorphism:
    def same(x):
        return np.array(x, dtype=float)

    def zero2(x, u, w):
        return np.zeros(space.dim)

    return Automorphism(same, same, lambda x, u: same(u), lambda x, u: same(u),
                        zero2, zero2, label="id")


def scaling(space: ModelSpace, c: float) -> Automorphism:
    """Linear map ``x -> c x``."""
    if c == 0:
        raise ValueError("scaling factor must be non-zero")

    def zero2(x, u, w):
        return np.zeros(space.dim)

    return Automorphism(lambda x: c * np.asarray(x), lambda x: np.asarray(x) / c,
                        lambda x, u: c * np.asarray(u), lambda x, u: np.asarray(u) / c,
                        zero2, zero2, label=f"scale({c:g})")


def pushforward_spray(spray: Spray, phi: Automorphism) -> Spray:
    """Conjugate spray ``phi_** o S o phi_*^-1``.

    Its acceleration is
    ``Z(x, y) = d2phi(p)(w, w) + dphi(p)(S2(p, w))`` with ``p = phi^-1(x)`` and
    ``w = dphi^-1(x) y``; geodesics are the images ``phi o g``.
    """
    if phi.d2forward is None or phi.dinverse is None:
        raise ValueError(f"automorphism {phi.label} lacks derivative data")

    def accel(x, y):
        p = phi.inverse(x)
        w = phi.dinverse(x, y)
        return phi.d2forward(p, w, w) + phi.dforward(p, spray.accel(p, w))

    closed = domain = None
    if spray.closed_form is not None:
        def closed(t, x0, v0):
            p, w = phi.pull(x0, v0)
            xt, vt = spray.closed_form(t, p, w)
            return phi.push(xt, vt)

    if spray.domain is not None:
        def domain(x0, v0):
            return spray.domain(*phi.pull(x0, v0))

    return Spray(spray.space, accel, f"{phi.label}_*({spray.label})",
                 closed_form=closed, domain=domain)


# --- checks -----------------------------------------------------------------

HOMOGENEITY_SCALES = (-2.0, -1.0, 0.5, 3.0)


def _rel_err(a, b) -> float:
    diff = np.max(np.abs(a - b)) if np.size(a) else 0.0
    if diff == 0.0:
        return 0.0
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return float(diff / scale)


def check_homogeneity(spray: Spray, sample_count: int = 100, rng=None,
                      scales=HOMOGENEITY_SCALES) -> dict:
    """Max relative violation of ``S2(x, s v) = s^2 S2(x, v)`` over random samples."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(sample_count):
        x, v = spray.sample_state(rng)
        base = spray.accel(x, v)
        zero = spray.accel(x, np.zeros_like(v))
        worst = max(worst, float(np.max(np.abs(zero))))
        for s in scales:
            worst = max(worst, _rel_err(spray.accel(x, s * v), s * s * base))
    return {"spray": spray.label, "samples": sample_count,
            "scales": list(scales), "max_relative_violation": worst}


def check_projective_factor(P, space: ModelSpace, sample_count: int = 100,
                            rng=None, scales=HOMOGENEITY_SCALES) -> float:
    """Max relative violation of ``P(x, r v) = r P(x, v)``."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(sample_count):
        x, v = random_element(space, rng), random_element(space, rng)
        base = P(x, v)
        for r in scales:
            worst = max(worst, _rel_err(np.array([P(x, r * v)]), np.array([r * base])))
    return worst


def check_automorphism(spray: Spray, phi: Automorphism, sample_count: int = 50,
                       rng=None, margin: float = 0.0) -> dict:
    """Max abs difference between the pushed-forward and the original acceleration."""
    rng = np.random.default_rng(rng)
    pushed = pushforward_spray(spray, phi)
    worst = 0.0
    for _ in range(sample_count):
        x, v = spray.sample_state(rng, margin)
        worst = max(worst, float(np.max(np.abs(pushed.accel(x, v) - spray.accel(x, v)))))
    return {"spray": spray.label, "automorphism": phi.label,
            "samples": sample_count, "max_discrepancy": worst}


# --- integration ------------------------------------------------------------


@dataclass
class BlowUp:
    t: float
    reason: str


@dataclass
class Trajectory:
    times: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    method: str
    h: float
    blowup: Optional[BlowUp] = None
    crossval_error: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return self.times.size

    def state_at(self, t: float):
        i = int(np.argmin(np.abs(self.times - t)))
        return self.xs[i], self.vs[i]

    def endpoint(self):
        return self.xs[-1], self.vs[-1]

    def to_csv(self, path) -> None:
        d = self.xs.shape[1]
        header = ["t"] + [f"x_{i}" for i in range(d)] + [f"v_{i}" for i in range(d)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, x, v in zip(self.times, self.xs, self.vs):
                w.writerow([f"{val:.17g}" for val in (t, *x, *v)])


def _rk4_march(fun, y0, dt, n_steps):
    """Fixed-step classical RK4.  Returns (states, index of first non-finite or None)."""
    out = [np.array(y0, dtype=float)]
    y = out[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            k1 = fun(y)
            k2 = fun(y + 0.5 * dt * k1)
            k3 = fun(y + 0.5 * dt * k2)
            k4 = fun(y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                return out, i + 1
            out.append(y)
    return out, None


def _geodesic_field(spray: Spray, d: int):
    def fun(y):
        x, v = y[:d], y[d:]
        return np.concatenate([v, spray.accel(x, v)])
    return fun


def integrate_geodesic(spray: Spray, x0, v0, tspan=(0.0, 1.0), h: float = 1e-3,
                       method: str = "auto", cross_validate: bool = False) -> Trajectory:
    """Geodesic through ``(x0, v0)`` sampled at the multiples of ``h`` in ``tspan``.

    ``method`` is ``"closed"``, ``"rk4"`` or ``"auto"`` (closed form when
    available).  Geodesics that would cross the spray's domain boundary are cut
    short and the boundary recorded in :attr:`Trajectory.blowup`; so is the time
    at which RK4 produces a non-finite state.
    """
    t_lo, t_hi = map(float, tspan)
    if h <= 0:
        raise ValueError("step must be positive")
    if not t_lo <= 0.0 <= t_hi:
        raise ValueError("tspan must contain 0")
    x0 = spray.space.check(x0)
    v0 = spray.space.check(v0)
    if method == "auto":
        method = "closed" if spray.closed_form is not None else "rk4"
    if method == "closed" and spray.closed_form is None:
        raise ValueError(f"{spray.label} has no closed-form geodesics")

    blowup = None
    k_lo = math.ceil(t_lo / h - 1e-9)
    k_hi = math.floor(t_hi / h + 1e-9)
    if spray.domain is not None:
        a, b = spray.domain(x0, v0)
        if k_lo * h <= a:
            k_lo = math.floor(a / h) + 1
            blowup = BlowUp(a, "domain boundary")
        if k_hi * h >= b:
            k_hi = math.ceil(b / h) - 1
            blowup = BlowUp(b, "domain boundary")

    d = x0.size
    if method == "closed":
        ks = np.arange(k_lo, k_hi + 1)
        states = [spray.closed_form(k * h, x0, v0) for k in ks]
        xs = np.array([s[0] for s in states])
        vs = np.array([s[1] for s in states])
        times = ks * h
    else:
        fun = _geodesic_field(spray, d)
        y0 = np.concatenate([x0, v0])
        fwd, bad_f = _rk4_march(fun, y0, h, k_hi)
        bwd, bad_b = _rk4_march(fun, y0, -h, -k_lo)
        if bad_f is not None:
            blowup = BlowUp(bad_f * h, "non-finite state")
        if bad_b is not None:
            blowup = BlowUp(-bad_b * h, "non-finite state")
        ys = np.array(bwd[:0:-1] + fwd)
        times = np.arange(-(len(bwd) - 1), len(fwd)) * h
        xs, vs = ys[:, :d], ys[:, d:]

    traj = Trajectory(times, xs, vs, method, h, blowup, label=spray.label)
    if cross_validate and spray.closed_form is not None:
        if method == "closed":
            other = integrate_geodesic(spray, x0, v0, tspan, h, "rk4")
        else:
            other = integrate_geodesic(spray, x0, v0, tspan, h, "closed")
        n = min(len(other), len(traj))
        # both grids start at the same (clipped) lower bound
        traj.crossval_error = float(np.max(np.abs(other.xs[:n] - traj.xs[:n])))
    return traj


def geodesic_flow(spray: Spray, x, v, t: float, h: float = 1e-3,
                  method: str = "auto"):
    """``Phi_t(x, v)``: base point and velocity of the geodesic at time ``t``."""
    x = spray.space.check(x)
    v = spray.space.check(v)
    if t == 0:
        return x.copy(), v.copy()
    if method == "auto":
        method = "closed" if spray.closed_form is not None else "rk4"
    if spray.domain is not None:
        a, b = spray.domain(x, v)
        if not a < t < b:
            raise ValueError(f"t={t} outside the geodesic's domain ({a}, {b})")
    if method == "closed":
        return spray.closed_form(t, x, v)
    n = max(1, math.ceil(abs(t) / h - 1e-9))
    d = x.size
    ys, bad = _rk4_march(_geodesic_field(spray, d), np.concatenate([x, v]), t / n, n)
    if bad is not None:
        raise FloatingPointError(f"non-finite state at t={bad * t / n}")
    return ys[-1][:d], ys[-1][d:]


def reparametrize_check(spray_a: Spray, spray_b: Spray, P, x0, v0,
                        tspan=(0.0, 1.0), h: float = 1e-3, n_samples: int = 21) -> dict:
    """Check that ``spray_b = spray_a + P v`` has the geodesics of ``spray_a``.

    Along the ``spray_a`` geodesic ``g`` the new time solves
    ``tbar'' = -P(g, g') tbar'``, ``tbar(0) = 0``, ``tbar'(0) = 1``; the
    ``spray_b`` geodesic ``gbar`` with the same initial data must then satisfy
    ``gbar(tbar(t)) = g(t)``.
    """
    P = P if isinstance(P, ProjectiveFactor) else ProjectiveFactor(P)
    space = spray_a.space
    x0, v0 = space.check(x0), space.check(v0)
    d = x0.size

    def fun(y):
        x, v, s = y[:d], y[d:2 * d], y[2 * d + 1]
        return np.concatenate([v, spray_a.accel(x, v), [s, -P(x, v) * s]])

    t_lo, t_hi = map(float, tspan)
    k_lo, k_hi = math.ceil(t_lo / h - 1e-9), math.floor(t_hi / h + 1e-9)
    y0 = np.concatenate([x0, v0, [0.0, 1.0]])
    fwd, bad_f = _rk4_march(fun, y0, h, k_hi)
    bwd, bad_b = _rk4_march(fun, y0, -h, -k_lo)
    if bad_f is not None or bad_b is not None:
        raise FloatingPointError("reparametrisation ODE blew up")
    ys = np.array(bwd[:0:-1] + fwd)
    times = np.arange(-(len(bwd) - 1), len(fwd)) * h
    idx = np.unique(np.linspace(0, len(times) - 1, n_samples).round().astype(int))

    rows = []
    worst_metric = worst_abs = 0.0
    for i in idx:
        y = ys[i]
        tau = float(y[2 * d])
        if spray_b.domain is not None:
            a, b = spray_b.domain(x0, v0)
            if not a < tau < b:
                raise ValueError(f"tbar={tau} leaves the domain of {spray_b.label}")
        xb, _ = geodesic_flow(spray_b, x0, v0, tau, h)
        m = space.metric(y[:d], xb)
        e = float(np.max(np.abs(y[:d] - xb)))
        worst_metric, worst_abs = max(worst_metric, m), max(worst_abs, e)
        rows.append({"t": float(times[i]), "tbar": tau, "metric": m, "max_abs": e})
    return {"spray_a": spray_a.label, "spray_b": spray_b.label,
            "max_metric": worst_metric, "max_abs": worst_abs, "samples": rows}

