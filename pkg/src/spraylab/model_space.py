"""Truncated model spaces and their seminorm families.

Three kinds of space are supported:

* :class:`GridFunctions` -- functions sampled on a uniform grid of ``[-L, L]``
  (optionally periodic), possibly vector valued.  Seminorms are
  ``sup_{|x| <= j} |D^m f(x)|`` with ``D^m`` an m-fold central finite
  difference.
* :class:`Sequences` -- the first ``N`` coordinates of a real sequence, with
  coordinate seminorms ``|x_n|``.
* :class:`Product` -- concatenated factors; the n-th seminorm of a tuple is the
  max of the factors' n-th seminorms.

Elements are flat float arrays whose length is :attr:`ModelSpace.dim`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelSpace",
    "GridSeminorm",
    "GridFunctions",
    "Sequences",
    "Product",
    "product_space",
    "seminorm",
    "metric",
    "MAX_DERIVATIVE_ORDER",
]

MAX_DERIVATIVE_ORDER = 4


class DimensionError(ValueError):
    pass


class ModelSpace:
    """Common interface of the truncated spaces."""

    dim: int

    @property
    def n_seminorms(self) -> int:
        raise NotImplementedError

    def seminorms(self, x) -> np.ndarray:
        """All seminorm values of ``x`` as a vector of length ``n_seminorms``."""
        raise NotImplementedError

    def seminorm(self, index: int, x) -> float:
        if not 0 <= index < self.n_seminorms:
            raise IndexError(
                f"seminorm index {index} out of range (space has {self.n_seminorms})"
            )
        return float(self.seminorms(x)[index])

    def metric(self, x, y) -> float:
        """Translation-invariant metric sum_n 2^-n q_n / (1 + q_n), n from 1."""
        q = self.seminorms(self.check(x) - self.check(y))
        w = 0.5 ** np.arange(1, q.size + 1)
        return float(np.sum(w * q / (1.0 + q)))

    def seminorm_labels(self) -> list[str]:
        return [str(i) for i in range(self.n_seminorms)]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dim)

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size != self.dim:
            raise DimensionError(
                f"expected a vector of length {self.dim}, got shape {x.shape}"
            )
        return x

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GridSeminorm:
    """``sup_{|x| <= window} |D^order f(x)|``."""

    window: float
    order: int = 0

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError("seminorm window must be positive")
        if not 0 <= self.order <= MAX_DERIVATIVE_ORDER:
            raise ValueError(
                f"derivative order must lie in [0, {MAX_DERIVATIVE_ORDER}]"
            )


def _default_windows(L: float) -> tuple[float, ...]:
    ws = [j for j in (1.0, 2.0) if j <= L + 1e-12]
    if not ws or abs(ws[-1] - L) > 1e-12:
        ws.append(float(L))
    return tuple(ws)


@dataclass(frozen=True, eq=False)
class GridFunctions(ModelSpace):
    """Functions on a uniform grid of ``[-L, L]`` with values in R^codomain_dim.

    Non-periodic grids include both endpoints (``2L/h + 1`` points).  Periodic
    grids cover ``[-L, L)`` with ``n_points`` points and use wrap-around
    differences.
    """

    L: float = 2.0
    h: float = 0.01
    codomain_dim: int = 1
    periodic: bool = False
    seminorm_specs: tuple[GridSeminorm, ...] = ()
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.h <= 0 or self.L <= 0:
            raise ValueError("grid step and half-width must be positive")
        if self.codomain_dim < 1:
            raise ValueError("codomain_dim must be a positive integer")
        if self.periodic:
            n = int(round(2 * self.L / self.h))
            x = -self.L + self.h * np.arange(n)
        else:
            n = int(round(2 * self.L / self.h)) + 1
            x = np.linspace(-self.L, self.L, n)
        if abs((n - (0 if self.periodic else 1)) * self.h - 2 * self.L) > 1e-9 * self.L:
            raise ValueError("grid step must divide the interval length")
        if n < 3:
            raise ValueError("grid needs at least 3 points")
        specs = self.seminorm_specs
        if not specs:
            specs = tuple(
                GridSeminorm(j, m) for j in _default_windows(self.L) for m in (0, 1)
            )
        for s in specs:
            if s.window > self.L + 1e-12:
                raise ValueError(f"window {s.window} exceeds grid half-width {self.L}")
        object.__setattr__(self, "seminorm_specs", tuple(specs))
        object.__setattr__(self, "x", x)
        masks = np.stack([np.abs(x) <= s.window + 1e-12 for s in specs])
        object.__setattr__(self, "_masks", masks)
        object.__setattr__(self, "_orders", np.array([s.order for s in specs]))
        object.__setattr__(self, "dim", n * self.codomain_dim)

    @classmethod
    def periodic_circle(cls, n_points: int = 256, codomain_dim: int = 1,
                        windows=None, orders=(0, 1)) -> "GridFunctions":
        """Periodic grid of ``[-pi, pi)`` (the circle) with ``n_points`` samples."""
        windows = windows or (math.pi,)
        specs = tuple(GridSeminorm(j, m) for j in windows for m in orders)
        return cls(L=math.pi, h=2 * math.pi / n_points, codomain_dim=codomain_dim,
                   periodic=True, seminorm_specs=specs)

    @property
    def n_points(self) -> int:
        return self.x.size

    @property
    def n_seminorms(self) -> int:
        return len(self.seminorm_specs)

    def seminorm_labels(self) -> list[str]:
        return [f"j={s.window:g},m={s.order}" for s in self.seminorm_specs]

    def values(self, f) -> np.ndarray:
        """View of ``f`` as an array of shape ``(n_points, codomain_dim)``."""
        return self.check(f).reshape(self.n_points, self.codomain_dim)

    def sample(self, fn) -> np.ndarray:
        """Sample a callable ``fn(x)`` on the grid into a flat element."""
        vals = np.asarray(fn(self.x), dtype=float)
        if vals.shape == ():
            vals = np.full(self.n_points, float(vals))
        return np.broadcast_to(
            vals.reshape(self.n_points, -1), (self.n_points, self.codomain_dim)
        ).reshape(-1).copy()

    def derivative(self, f, order: int) -> np.ndarray:
        """m-th finite-difference derivative, shape ``(n_points, codomain_dim)``.

        Central differences in the interior; second-order one-sided stencils at
        the ends of non-periodic grids.
        """
        d = self.values(f)
        for _ in range(order):
            if self.periodic:
                d = (np.roll(d, -1, axis=0) - np.roll(d, 1, axis=0)) / (2 * self.h)
            else:
                # np.gradient's edge stencil, written in differences so that
                # constants differentiate to exactly zero
                fd = np.diff(d, axis=0)
                out = np.empty_like(d)
                out[1:-1] = (fd[1:] + fd[:-1]) / (2 * self.h)
                out[0] = (3 * fd[0] - fd[1]) / (2 * self.h)
                out[-1] = (3 * fd[-1] - fd[-2]) / (2 * self.h)
                d = out
        return d

    def pointwise_derivatives(self, f) -> dict[int, np.ndarray]:
        """``{m: |D^m f|}`` for every order used by the seminorm family."""
        out = {}
        for m in sorted(set(self._orders.tolist())):
            d = self.derivative(f, m)
            out[m] = np.abs(d[:, 0]) if self.codomain_dim == 1 else np.linalg.norm(d, axis=1)
        return out

    def seminorms_from_pointwise(self, pw: dict[int, np.ndarray], region=None) -> np.ndarray:
        """Window sups of precomputed pointwise magnitudes, optionally restricted."""
        res = np.empty(self.n_seminorms)
        for i, s in enumerate(self.seminorm_specs):
            mask = self._masks[i] if region is None else self._masks[i] & region
            vals = pw[s.order][mask]
            res[i] = vals.max() if vals.size else 0.0
        return res

    def seminorms(self, x) -> np.ndarray:
        return self.seminorms_from_pointwise(self.pointwise_derivatives(x))

    def shift(self, f, k: int) -> np.ndarray:
        """Translate by ``k`` grid steps: ``(shift f)(x) = f(x - k h)``.

        Periodic grids wrap; otherwise values shifted in from outside are zero.
        """
        v = self.values(f)
        if self.periodic:
            return np.roll(v, k, axis=0).reshape(-1)
        out = np.zeros_like(v)
        n = self.n_points
        if k >= 0:
            out[k:] = v[: n - k] if k < n else 0.0
        else:
            out[: n + k] = v[-k:]
        return out.reshape(-1)

    def describe(self) -> dict:
        return {
            "kind": "grid",
            "L": self.L,
            "h": self.h,
            "codomain_dim": self.codomain_dim,
            "periodic": self.periodic,
            "seminorms": [[s.window, s.order] for s in self.seminorm_specs],
        }


@dataclass(frozen=True, eq=False)
class Sequences(ModelSpace):
    """First ``N`` coordinates of a real sequence; seminorms pick coordinates."""

    N: int = 16
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("truncation length must be positive")
        idx = tuple(self.indices) or tuple(range(self.N))
        if any(not 0 <= i < self.N for i in idx):
            raise ValueError("seminorm coordinate index out of range")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "_idx", np.array(idx, dtype=int))
        object.__setattr__(self, "dim", self.N)

    @property
    def n_seminorms(self) -> int:
        return len(self.indices)

    def seminorm_labels(self) -> list[str]:
        return [f"x_{i + 1}" for i in self.indices]

    def seminorms(self, x) -> np.ndarray:
        return np.abs(self.check(x)[self._idx])

    def describe(self) -> dict:
        return {"kind": "sequences", "N": self.N, "seminorms": list(self.indices)}


@dataclass(frozen=True, eq=False)
class Product(ModelSpace):
    """Finite product; coordinates are the factors' coordinates concatenated."""

    factors: tuple[ModelSpace, ...] = ()

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))
        offs = np.cumsum([0] + [f.dim for f in self.factors])
        object.__setattr__(self, "offsets", tuple(int(o) for o in offs))
        object.__setattr__(self, "dim", int(offs[-1]))

    @property
    def n_seminorms(self) -> int:
        return max(f.n_seminorms for f in self.factors)

    def split(self, x) -> list[np.ndarray]:
        x = self.check(x)
        o = self.offsets
        return [x[o[i]:o[i + 1]] for i in range(len(self.factors))]

    def join(self, *parts) -> np.ndarray:
        if len(parts) != len(self.factors):
            raise DimensionError("wrong number of components")
        return np.concatenate(
            [f.check(p) for f, p in zip(self.factors, parts)]
        )

    def combine(self, per_factor) -> np.ndarray:
        """Max-combine per-factor seminorm vectors (missing entries count as 0)."""
        out = np.zeros(self.n_seminorms)
        for q in per_factor:
            q = np.asarray(q, dtype=float)
            out[: q.size] = np.maximum(out[: q.size], q)
        return out

    def seminorms(self, x) -> np.ndarray:
        return self.combine(f.seminorms(p) for f, p in zip(self.factors, self.split(x)))

    def describe(self) -> dict:
        return {"kind": "product", "factors": [f.describe() for f in self.factors]}


def product_space(a: ModelSpace, b: ModelSpace) -> Product:
    return Product((a, b))


def seminorm(space: ModelSpace, index: int, x) -> float:
    return space.seminorm(index, x)


def metric(space: ModelSpace, x, y) -> float:
    return space.metric(x, y)
