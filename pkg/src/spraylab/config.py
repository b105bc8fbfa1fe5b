"""Configuration files (YAML or JSON) and command-line vector parsing."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml

from .library import ConfigError
from .model_space import GridFunctions, ModelSpace, Product
from .profiles import bump

__all__ = ["load_config", "parse_vector", "parse_floats"]


def load_config(path) -> dict:
    """Read a YAML/JSON mapping.

    A saved run report is accepted too: its ``config`` block is returned, so a
    report can be fed back to ``reproduce``.
    """
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if "config" in data and isinstance(data["config"], dict) and "example" in data:
        cfg = dict(data["config"])
        cfg.setdefault("example", data["example"])
        return cfg
    return data


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


_EXPR_NAMES = {"np": np, "pi": math.pi, "bump": bump, "sin": np.sin, "cos": np.cos,
               "exp": np.exp, "abs": np.abs, "where": np.where}


def parse_vector(text: str, space: ModelSpace, rng=None) -> np.ndarray:
    """Element of ``space`` from a command-line string.

    Forms: ``zero``; ``random``; a comma list of ``dim`` numbers (or one number,
    broadcast); ``expr:<numpy expression in x>`` on grid spaces; a ``.npy`` or
    text file path.  Product components are separated by ``|``.
    """
    text = str(text).strip()
    if isinstance(space, Product):
        parts = text.split("|")
        if len(parts) == 1:
            parts = parts * len(space.factors)
        if len(parts) != len(space.factors):
            raise ConfigError(f"expected {len(space.factors)} '|'-separated components")
        return np.concatenate([parse_vector(p, f, rng) for p, f in zip(parts, space.factors)])
    if text == "zero":
        return space.zeros()
    if text == "random":
        from .spray import random_element
        return random_element(space, np.random.default_rng(rng))
    if text.startswith("expr:"):
        if not isinstance(space, GridFunctions):
            raise ConfigError("expressions need a grid function space")
        try:
            vals = eval(text[5:], {"__builtins__": {}}, dict(_EXPR_NAMES, x=space.x))
        except Exception as exc:  # noqa: BLE001 - user expression
            raise ConfigError(f"cannot evaluate {text!r}: {exc}") from exc
        return space.sample(lambda _x: vals)
    p = Path(text)
    if p.suffix in (".npy", ".txt", ".csv") and p.exists():
        arr = np.load(p) if p.suffix == ".npy" else np.loadtxt(p, delimiter="," if p.suffix == ".csv" else None)
        return space.check(np.ravel(arr))
    try:
        vals = parse_floats(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse vector {text!r}") from exc
    if len(vals) == 1:
        return np.full(space.dim, vals[0])
    if len(vals) != space.dim:
        raise ConfigError(f"expected {space.dim} values, got {len(vals)}")
    return np.array(vals)
