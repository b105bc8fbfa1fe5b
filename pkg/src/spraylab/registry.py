"""Registry of the reproducible worked examples.

Each :class:`ExampleSpec` names a space, a set, a spray and a list of checks
with their expected verdicts.  :func:`run_example` runs the checks with a fixed
seed and writes ``report.json`` (plus CSV trajectories) under ``out/<id>/``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import invariance as inv
from .cone import QuotientSchedule, Verdict, adjacent_member
from .library import (ConfigError, build_set, build_space, build_spray, bundle_oracle,
                      default_sampler, default_space_config, pair_sampler,
                      tangent_sampler)
from .report import write_json
from .samplers import ambient_sampler, circle_loop_sampler, half_support_sampler, stratum_sampler
from .spray import integrate_geodesic, translation

__all__ = [
    "ExampleSpec",
    "CheckSpec",
    "RunReport",
    "REGISTRY",
    "run_example",
    "run_all",
    "run_check",
    "EXIT_OK",
    "EXIT_MISMATCH",
    "EXIT_CONFIG",
]

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class CheckSpec:
    op: str
    expect: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExampleSpec:
    id: str
    description: str
    set_id: str
    spray_id: str
    checks: tuple
    space: dict | None = None

    def space_config(self) -> dict:
        return self.space or default_space_config(self.set_id)

    def config(self) -> dict:
        return {"id": self.id, "space": self.space_config(), "set": self.set_id,
                "spray": self.spray_id,
                "checks": [{"op": c.op, "expect": c.expect, "params": c.params}
                           for c in self.checks]}


@dataclass
class RunReport:
    example: str
    description: str
    seed: int
    config: dict
    checks: list
    artifacts: list
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["match"] for c in self.checks)

    def to_dict(self) -> dict:
        # wall time is kept out of the report so identical runs give identical bytes
        return {"example": self.example, "description": self.description,
                "seed": self.seed, "config": self.config,
                "status": "PASS" if self.passed else "FAIL",
                "discrepancies": [{"op": c["op"], "expected": c["expected"],
                                   "got": c["verdict"]}
                                  for c in self.checks if not c["match"]],
                "checks": self.checks, "artifacts": self.artifacts}


# --- check runners ------------------------------------------------------------


class _Ctx:
    def __init__(self, spec: ExampleSpec, overrides: dict, sched: QuotientSchedule):
        self.spec = spec
        self.space = build_space(spec.space_config())
        self.oracle = build_set(spec.set_id, self.space)
        self.spray = build_spray(spec.spray_id, self.space)
        self.overrides = overrides
        self.sched = sched

    def param(self, params, key, default):
        if key in self.overrides:
            return self.overrides[key]
        return params.get(key, default)


def _orthant_cone(ctx, params, rng, out):
    count = params.get("count", 100)
    tol = params.get("limit_tol", 1e-6)
    space, oracle = ctx.space, ctx.oracle
    worst = 0.0
    mismatches = 0
    rows = []
    for i in range(count):
        f = rng.standard_normal(space.dim)
        if i % 4 == 0:
            f = np.abs(f)
        r = adjacent_member(space, oracle, np.zeros(space.dim), f, ctx.sched)
        expect = Verdict.MEMBER if f.min() >= 0 else Verdict.NONMEMBER
        err = float(np.max(np.abs(r.limits - np.maximum(0.0, -f[list(space.indices)]))))
        worst = max(worst, err)
        mismatches += r.verdict is not expect
        rows.append({"index": i, "verdict": r.verdict.value, "expected": expect.value,
                     "limit_error": err})
    passed = mismatches == 0 and worst <= tol
    return inv.CheckReport("orthant_cone", "PASS" if passed else "FAIL", passed,
                           {"samples": count, "verdict_mismatches": mismatches,
                            "max_limit_error": worst, "limit_tol": tol}, rows)


def _verify(ctx, params, rng, out):
    sampler = default_sampler(ctx.spec.set_id, ctx.spec.spray_id, ctx.space)
    return inv.verify_invariance(
        ctx.spray, ctx.oracle, sampler, ctx.param(params, "trials", 20),
        tuple(params.get("tspan", (-2.0, 2.0))), params.get("h", 1e-3),
        ctx.param(params, "tol", inv.INVARIANCE_TOL),
        violation_threshold=ctx.param(params, "violation_threshold", inv.VIOLATION_THRESHOLD),
        sched=ctx.sched, rng=rng, method=params.get("method", "auto"))


def _tangency(ctx, params, rng, out):
    sampler = default_sampler(ctx.spec.set_id, ctx.spec.spray_id, ctx.space)
    A = bundle_oracle(ctx.spec.set_id, ctx.spec.spray_id, ctx.oracle)
    report = inv.verify_invariance(
        ctx.spray, ctx.oracle, sampler, ctx.param(params, "trials", 5),
        tuple(params.get("tspan", (-2.0, 2.0))), params.get("h", 1e-3),
        ctx.param(params, "tol", inv.INVARIANCE_TOL),
        violation_threshold=ctx.param(params, "violation_threshold", inv.VIOLATION_THRESHOLD),
        sched=ctx.sched, rng=rng, recheck=False, numeric_admissibility=False)
    return inv.check_tangency_reformulation(ctx.spray, ctx.oracle, A, sampler,
                                            sched=ctx.sched, invariance=report)


def _totally_geodesic(ctx, params, rng, out):
    ts = tangent_sampler(ctx.spec.set_id, ctx.space)
    amb = ambient_sampler(ts, ctx.space, 0.1)
    return inv.check_totally_geodesic(ctx.spray, ctx.oracle, ts, amb, ctx.sched,
                                      params.get("count", 10), rng,
                                      tol=ctx.param(params, "tol", inv.INVARIANCE_TOL))


def _convexity(ctx, params, rng, out):
    return inv.check_geodesic_convexity(ctx.spray, ctx.oracle,
                                        pair_sampler(ctx.spec.set_id, ctx.space),
                                        params.get("count", 20), rng=rng,
                                        tol=ctx.param(params, "tol", inv.INVARIANCE_TOL))


def _orbit(ctx, params, rng, out):
    a = params.get("shift", 0.5)
    phi = translation(ctx.space, a)
    transformed = build_set(f"translate:{ctx.spec.set_id}:{a:g}", ctx.space)
    sampler = half_support_sampler(ctx.space, margin=0.6)
    return inv.check_orbit_invariance(ctx.spray, phi, ctx.oracle, transformed, sampler,
                                      ctx.param(params, "trials", 20), rng=rng,
                                      tol=ctx.param(params, "tol", inv.INVARIANCE_TOL))


def _flow(ctx, params, rng, out):
    if ctx.spec.set_id == "circle-loops":
        sampler = circle_loop_sampler(ctx.space, omega=params.get("omega", 1.0))
    else:
        sampler = default_sampler(ctx.spec.set_id, ctx.spec.spray_id, ctx.space)
    return inv.check_flow_invariance(ctx.spray, ctx.oracle, sampler,
                                     tuple(params.get("times", (-1.0, -0.5, 0.5, 1.0))),
                                     params.get("count", 5), sched=ctx.sched, rng=rng)


def _strata(ctx, params, rng, out):
    space = ctx.space
    return inv.check_stratification(ctx.oracle, ctx.spray,
                                    lambda k: stratum_sampler(space, k),
                                    ctx.param(params, "trials", 5), rng=rng,
                                    levels=params.get("levels"))


def _integrator(ctx, params, rng, out):
    """RK4 against the closed form from library initial data."""
    tol = params.get("tol", 1e-8)
    sampler = default_sampler(ctx.spec.set_id, ctx.spec.spray_id, ctx.space)
    tspan = tuple(params.get("tspan", (-2.0, 2.0)))
    h = params.get("h", 1e-3)
    rows = []
    worst = 0.0
    traj = None
    for i in range(params.get("count", 2)):
        x, v = sampler.sample(rng)
        traj = integrate_geodesic(ctx.spray, x, v, tspan, h, "rk4", cross_validate=True)
        err = traj.crossval_error
        worst = max(worst, err)
        rows.append({"index": i, "max_abs_error": err,
                     "blowup": None if traj.blowup is None else traj.blowup.t})
    passed = worst <= tol
    rep = inv.CheckReport("integrator", "PASS" if passed else "FAIL", passed,
                          {"spray": ctx.spray.label, "h": h, "tol": tol,
                           "max_abs_error": worst}, rows)
    if traj is not None:
        rep.trajectories["rk4"] = traj
    return rep


_RUNNERS = {
    "orthant_cone": _orthant_cone,
    "verify_invariance": _verify,
    "check_tangency": _tangency,
    "check_totally_geodesic": _totally_geodesic,
    "check_convexity": _convexity,
    "check_orbit": _orbit,
    "check_flow": _flow,
    "check_strata": _strata,
    "integrator": _integrator,
}


def run_check(ctx: _Ctx, check: CheckSpec, rng):
    try:
        runner = _RUNNERS[check.op]
    except KeyError:
        raise ConfigError(f"unknown check {check.op!r}") from None
    return runner(ctx, check.params, rng, None)


# --- the registry ----------------------------------------------------------------

def _c(op, expect, **params):
    return CheckSpec(op, expect, params)


REGISTRY: dict[str, ExampleSpec] = {e.id: e for e in (
    ExampleSpec("adjacent-cone", "adjacent cone of the non-negative orthant at 0",
                "orthant", "flat", (_c("orthant_cone", "PASS", count=100),)),
    ExampleSpec("ex1-flat", "half-support union is invariant under the flat spray",
                "half-support", "flat",
                (_c("verify_invariance", "Invariant", trials=100),
                 _c("check_tangency", "Agree", trials=5),
                 _c("check_flow", "PASS", times=(-1.0, -0.5, 0.5, 1.0), count=3))),
    ExampleSpec("ex1-perturbed", "bump-perturbed spray pushes geodesics out of the half-support set",
                "half-support", "bump:0.2",
                (_c("verify_invariance", "Violated", trials=3),
                 _c("check_tangency", "Agree", trials=3),
                 _c("integrator", "PASS", tspan=(0.0, 2.0), count=1))),
    ExampleSpec("ex2-parabola", "parabola graph: invariant, yet not totally geodesic",
                "parabola", "flat",
                (_c("check_totally_geodesic", "NotTotallyGeodesic", count=5),
                 _c("verify_invariance", "Invariant", trials=20),
                 _c("check_tangency", "Agree", trials=5))),
    ExampleSpec("crit-constants", "constant functions form a totally geodesic submanifold",
                "constants", "flat",
                (_c("check_totally_geodesic", "TotallyGeodesic", count=10),
                 _c("check_convexity", "PASS", count=20),
                 _c("verify_invariance", "Invariant", trials=20))),
    ExampleSpec("ex9-translation", "translates of the half-support set stay invariant",
                "half-support", "flat",
                (_c("check_orbit", "PASS", shift=0.5, trials=20),)),
    ExampleSpec("nonneg-fourier", "trigonometric polynomials of bounded degree are invariant",
                "fourier:3", "flat",
                (_c("verify_invariance", "Invariant", trials=20),
                 _c("check_tangency", "Agree", trials=5))),
    ExampleSpec("hi-sphere-loops", "constant loops on a great circle under the pointwise sphere spray",
                "circle-loops", "sphere",
                (_c("check_totally_geodesic", "TotallyGeodesic", count=5),
                 _c("verify_invariance", "Invariant", trials=5, method="rk4"),
                 _c("check_convexity", "PASS", count=10),
                 _c("check_flow", "PASS", times=(math.pi, 0.0), count=3),
                 _c("integrator", "PASS", count=1))),
    ExampleSpec("stra-strata", "finite sequences: closures invariant, strata form a stratification",
                "strata", "flat",
                (_c("check_strata", "PASS", trials=5),)),
)}


def _write_artifacts(out_dir: Path | None, spec: ExampleSpec, idx: int, check: CheckSpec,
                     rep, artifacts: list) -> None:
    if out_dir is None:
        return
    trajs = dict(getattr(rep, "trajectories", {}) or {})
    if getattr(rep, "counterexample", None) is not None:
        trajs["counterexample"] = rep.counterexample
    for name, traj in sorted(trajs.items()):
        rel = Path(spec.id) / f"{idx:02d}_{check.op}_{name}.csv"
        (out_dir / rel).parent.mkdir(parents=True, exist_ok=True)
        traj.to_csv(out_dir / rel)
        artifacts.append(rel.as_posix())


def run_example(example_id: str, seed: int = 0, out_dir=None, overrides: dict | None = None,
                sched: QuotientSchedule | None = None,
                registry: dict | None = None) -> RunReport:
    """Run every check of a registered example.

    With ``out_dir`` the report goes to ``out_dir/<id>/report.json`` and
    trajectories next to it.  Unknown IDs raise :class:`ConfigError`.
    """
    registry = REGISTRY if registry is None else registry
    if example_id not in registry:
        raise ConfigError(f"unknown example id {example_id!r}; "
                          f"known: {', '.join(sorted(registry))}")
    spec = registry[example_id]
    overrides = dict(overrides or {})
    sched = sched or QuotientSchedule()
    out = None if out_dir is None else Path(out_dir)
    start = time.perf_counter()
    ctx = _Ctx(spec, overrides, sched)
    results = []
    artifacts: list = []
    for i, check in enumerate(spec.checks):
        rng = np.random.default_rng([seed, i])
        rep = run_check(ctx, check, rng)
        verdict = rep.overall.value if isinstance(rep, inv.InvarianceReport) else rep.verdict
        results.append({"op": check.op, "expected": check.expect, "verdict": verdict,
                        "match": verdict == check.expect, "report": rep.to_dict()})
        _write_artifacts(out, spec, i, check, rep, artifacts)
    cfg = spec.config()
    cfg.update({"seed": seed, "overrides": overrides,
                "schedule": [sched.t0, sched.ratio, sched.K]})
    report = RunReport(spec.id, spec.description, seed, cfg, results, artifacts,
                       time.perf_counter() - start)
    if out is not None:
        write_json(out / spec.id / "report.json", report)
    return report


def run_all(seed: int = 0, out_dir=None, overrides: dict | None = None,
            sched: QuotientSchedule | None = None, registry: dict | None = None,
            echo=print) -> tuple[int, list]:
    """Run every registered example and print a summary table.

    Returns ``(exit_code, rows)`` with rows ``(id, verdicts, expected, PASS/FAIL)``.
    """
    registry = REGISTRY if registry is None else registry
    rows = []
    for eid in registry:
        rep = run_example(eid, seed, out_dir, overrides, sched, registry)
        got = ",".join(c["verdict"] for c in rep.checks)
        want = ",".join(c["expected"] for c in rep.checks)
        rows.append((eid, got, want, "PASS" if rep.passed else "FAIL"))
    if echo is not None:
        width = max([len(r[0]) for r in rows] + [2])
        echo(f"{'id':<{width}}  status  verdicts (expected)")
        for eid, got, want, status in rows:
            echo(f"{eid:<{width}}  {status:<6}  {got} ({want})")
    code = EXIT_OK if all(r[3] == "PASS" for r in rows) else EXIT_MISMATCH
    return code, rows
