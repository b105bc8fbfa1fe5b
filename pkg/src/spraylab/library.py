"""String-ID construction of spaces, sets, sprays and their default samplers.

Set IDs: ``half-support``, ``orthant``, ``constants``, ``parabola``,
``fourier:N``, ``strata`` / ``strata:k``, ``circle-loops``,
``translate:<id>:<a>``.

Spray IDs: ``flat``, ``bump[:eps]``, ``sphere``, ``bump-translated[:eps[:a]]``.

Space configs are dicts with a ``kind`` key:

    {"kind": "grid", "L": 2.0, "h": 0.01, "codomain_dim": 1,
     "periodic": false, "seminorms": [[1, 0], [1, 1]]}
    {"kind": "circle", "n_points": 64, "codomain_dim": 3}
    {"kind": "sequences", "N": 16, "seminorms": [0, 1, 2]}
    {"kind": "product", "factors": [<space>, <space>]}
"""
from __future__ import annotations

from . import samplers as smp
from .model_space import GridFunctions, GridSeminorm, ModelSpace, Product, Sequences
from .sets import (LoopTangentBundle, ProductSet, SameSideBundle, SetOracle,
                   Stratification, ZeroSection, constant_functions,
                   finite_sequence_strata, fourier_subspace,
                   great_circle_constant_loops, half_support_union, nonneg_orthant,
                   parabola_graph, translate_set)
from .spray import (Spray, bump_perturbed_spray, flat_spray, pushforward_spray,
                    sphere_pointwise_spray, translation)

__all__ = [
    "ConfigError",
    "build_space",
    "default_space_config",
    "build_set",
    "build_spray",
    "default_sampler",
    "tangent_sampler",
    "pair_sampler",
    "bundle_oracle",
    "DEFAULT_BUMP_EPS",
    "DEFAULT_SHIFT",
]

DEFAULT_BUMP_EPS = 0.2
DEFAULT_SHIFT = 0.5
GRID = {"kind": "grid", "L": 2.0, "h": 0.01}


class ConfigError(ValueError):
    """Unknown ID or malformed configuration."""


def build_space(cfg: dict) -> ModelSpace:
    try:
        kind = cfg["kind"]
        if kind == "grid":
            specs = tuple(GridSeminorm(float(w), int(m)) for w, m in cfg.get("seminorms", ()))
            return GridFunctions(float(cfg.get("L", 2.0)), float(cfg.get("h", 0.01)),
                                 int(cfg.get("codomain_dim", 1)),
                                 bool(cfg.get("periodic", False)), specs)
        if kind == "circle":
            kw = {}
            if "windows" in cfg:
                kw["windows"] = tuple(cfg["windows"])
            if "orders" in cfg:
                kw["orders"] = tuple(cfg["orders"])
            return GridFunctions.periodic_circle(int(cfg.get("n_points", 64)),
                                                 int(cfg.get("codomain_dim", 1)), **kw)
        if kind == "sequences":
            return Sequences(int(cfg.get("N", 16)), tuple(cfg.get("seminorms", ())))
        if kind == "product":
            return Product(tuple(build_space(f) for f in cfg["factors"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad space config {cfg!r}: {exc}") from exc
    raise ConfigError(f"unknown space kind {cfg.get('kind')!r}")


def default_space_config(set_id: str) -> dict:
    """The natural space of a library set."""
    head = set_id.split(":")[0]
    if head in ("half-support", "constants", "translate"):
        return dict(GRID)
    if head == "parabola":
        return {"kind": "product", "factors": [dict(GRID), dict(GRID)]}
    if head in ("orthant", "strata"):
        return {"kind": "sequences", "N": 16}
    if head == "fourier":
        return {"kind": "circle", "n_points": 64, "codomain_dim": 1}
    if head == "circle-loops":
        return {"kind": "circle", "n_points": 64, "codomain_dim": 3}
    raise ConfigError(f"unknown set id {set_id!r}")


def build_set(set_id: str, space: ModelSpace):
    """Oracle for ``set_id`` (a :class:`Stratification` for plain ``strata``)."""
    parts = set_id.split(":")
    head = parts[0]
    try:
        if head == "half-support":
            return half_support_union(space)
        if head == "orthant":
            return nonneg_orthant(space)
        if head == "constants":
            return constant_functions(space)
        if head == "parabola":
            return parabola_graph(space)
        if head == "fourier":
            return fourier_subspace(space, int(parts[1]) if len(parts) > 1 else 3)
        if head == "strata":
            strata = finite_sequence_strata(space)
            return strata if len(parts) == 1 else strata.closure(int(parts[1]))
        if head == "circle-loops":
            return great_circle_constant_loops(space)
        if head == "translate":
            if len(parts) < 3:
                raise ConfigError("translate needs translate:<id>:<a>")
            return translate_set(build_set(":".join(parts[1:-1]), space), float(parts[-1]))
    except ConfigError:
        raise
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot build set {set_id!r}: {exc}") from exc
    raise ConfigError(f"unknown set id {set_id!r}")


def build_spray(spray_id: str, space: ModelSpace) -> Spray:
    parts = spray_id.split(":")
    head = parts[0]
    try:
        if head == "flat":
            return flat_spray(space)
        if head == "bump":
            eps = float(parts[1]) if len(parts) > 1 else DEFAULT_BUMP_EPS
            return bump_perturbed_spray(space, eps)
        if head == "sphere":
            return sphere_pointwise_spray(space)
        if head == "bump-translated":
            eps = float(parts[1]) if len(parts) > 1 else DEFAULT_BUMP_EPS
            a = float(parts[2]) if len(parts) > 2 else DEFAULT_SHIFT
            return pushforward_spray(bump_perturbed_spray(space, eps), translation(space, a))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot build spray {spray_id!r}: {exc}") from exc
    raise ConfigError(f"unknown spray id {spray_id!r}")


def default_sampler(set_id: str, spray_id: str, space: ModelSpace) -> smp.AdmissibleSampler:
    """Analytic admissible-data sampler for a (set, spray) pair."""
    parts = set_id.split(":")
    head = parts[0]
    if head == "half-support":
        if spray_id.startswith("bump"):
            eps = float(spray_id.split(":")[1]) if ":" in spray_id else DEFAULT_BUMP_EPS
            return smp.half_support_probe_sampler(space, eps)
        return smp.half_support_sampler(space)
    if head == "constants":
        return smp.constant_sampler(space)
    if head == "parabola":
        return smp.parabola_zero_section_sampler(space)
    if head == "fourier":
        return smp.fourier_sampler(space, int(parts[1]) if len(parts) > 1 else 3)
    if head == "circle-loops":
        return smp.circle_loop_sampler(space)
    if head == "strata":
        return smp.stratum_sampler(space, int(parts[1]) if len(parts) > 1 else 3)
    if head == "translate":
        base = default_sampler(":".join(parts[1:-1]), spray_id, space)
        phi = translation(space, float(parts[-1]))
        return base.mapped(phi.push, f"{phi.label}({base.label})")
    raise ConfigError(f"no admissible sampler for set {set_id!r}")


def tangent_sampler(set_id: str, space: ModelSpace) -> smp.AdmissibleSampler:
    """Sampler of tangent vectors ``(x, v in T_x S)`` for submanifold sets."""
    parts = set_id.split(":")
    head = parts[0]
    if head == "constants":
        return smp.constant_sampler(space)
    if head == "parabola":
        return smp.parabola_tangent_sampler(space)
    if head == "fourier":
        return smp.fourier_sampler(space, int(parts[1]) if len(parts) > 1 else 3)
    if head == "circle-loops":
        return smp.circle_loop_sampler(space)
    if head == "strata" and len(parts) > 1:
        return smp.stratum_sampler(space, int(parts[1]))
    raise ConfigError(f"set {set_id!r} has no tangent-space sampler")


def pair_sampler(set_id: str, space: ModelSpace) -> smp.PairSampler:
    head = set_id.split(":")[0]
    if head == "constants":
        return smp.constant_pair_sampler(space)
    if head == "parabola":
        return smp.parabola_pair_sampler(space)
    if head == "circle-loops":
        return smp.circle_loop_pair_sampler(space)
    raise ConfigError(f"set {set_id!r} has no pair sampler")


def bundle_oracle(set_id: str, spray_id: str, oracle: SetOracle) -> SetOracle:
    """Analytic oracle of the admissible set ``A`` on the doubled space.

    For the bump-perturbed spray on the half-support set this is the naive
    ``S x E`` (base point in the set, any velocity).
    """
    head = set_id.split(":")[0]
    if head == "half-support":
        if spray_id.startswith("bump"):
            return ProductSet(oracle, None)
        return SameSideBundle(oracle)
    if head in ("constants", "fourier", "strata"):
        return ProductSet(oracle, oracle)
    if head == "parabola":
        return ZeroSection(oracle)
    if head == "circle-loops":
        return LoopTangentBundle(oracle)
    raise ConfigError(f"no analytic admissible-set oracle for {set_id!r}")


def is_stratification(obj) -> bool:
    return isinstance(obj, Stratification)
