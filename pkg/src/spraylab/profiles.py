"""Smooth test profiles sampled on grids."""
from __future__ import annotations

import numpy as np


def bump(x, width: float, center: float = 0.0, height: float = 1.0) -> np.ndarray:
    """Symmetric C-infinity bump, positive exactly on ``(center - w/2, center + w/2)``.

    Normalised so the peak value is ``height``.
    """
    r = 2.0 * (np.asarray(x, dtype=float) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def random_bumps(x, rng: np.random.Generator, lo: float, hi: float,
                 count: int = 3, amplitude: float = 1.0) -> np.ndarray:
    """Sum of ``count`` bumps with supports strictly inside ``(lo, hi)``.

    Coefficients are uniform in ``[-amplitude, amplitude]``.
    """
    span = hi - lo
    out = np.zeros_like(np.asarray(x, dtype=float))
    for _ in range(count):
        w = rng.uniform(0.15, 0.6) * span
        c = rng.uniform(lo + w / 2, hi - w / 2)
        out += rng.uniform(-amplitude, amplitude) * bump(x, w * 0.999, c)
    return out


def trig_poly(theta, a0: float, a, b) -> np.ndarray:
    """``a0 + sum_j a_j cos(j theta) + b_j sin(j theta)``, j from 1."""
    theta = np.asarray(theta, dtype=float)
    out = np.full_like(theta, a0)
    for j, (aj, bj) in enumerate(zip(a, b), start=1):
        out += aj * np.cos(j * theta) + bj * np.sin(j * theta)
    return out
