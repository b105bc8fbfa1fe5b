"""Command-line entry point.

Exit status: 0 when every verdict matches its expectation, 1 on a mismatch,
2 on a configuration or construction error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import invariance as inv
from .cone import (NotAdjacentError, NotInSetError, QuotientSchedule, adjacent_member,
                   admissible, second_order_member)
from .config import load_config, parse_floats, parse_vector
from .library import (ConfigError, build_set, build_space, build_spray, bundle_oracle,
                      default_sampler, default_space_config, pair_sampler,
                      tangent_sampler)
from .model_space import Sequences
from .registry import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, run_all, run_example
from .report import write_json
from .samplers import ambient_sampler, circle_loop_sampler, half_support_sampler, stratum_sampler
from .sets import finite_sequence_strata
from .spray import (check_automorphism, check_homogeneity, integrate_geodesic,
                    pushforward_spray, random_element, translation)

DEFAULT_OUT = "spraylab-out"


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="YAML/JSON configuration file")
    p.add_argument("--seed", type=int, default=d, help="random seed (u64, default 0)")
    p.add_argument("--out", default=d, help="output directory (default $SPRAYLAB_OUT or ./spraylab-out)")
    p.add_argument("--schedule", default=d, help="quotient schedule t0,ratio,K")
    p.add_argument("--tol", type=float, default=d, help="invariance tolerance")


def _set_spray_args(p, spray_default="flat", set_required=True):
    p.add_argument("--set", required=set_required, help="set id, e.g. half-support, fourier:3")
    p.add_argument("--spray", default=spray_default, help="spray id, e.g. flat, bump:0.2, sphere")
    p.add_argument("--expect", help="expected verdict; mismatch gives exit status 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spraylab",
                                     description="Numerical experiments on spray geometry.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("reproduce", "run a registered example (or all)")
    p.add_argument("example", nargs="?", help="example id or 'all'")

    p = add("check-cone", "adjacent / second-order adjacent cone membership")
    _set_spray_args(p)
    p.add_argument("--point", default="zero")
    p.add_argument("--direction", required=True)
    p.add_argument("--accel", help="second-order vector e (omit for the first-order test)")

    p = add("check-admissible", "admissibility of a tangent vector")
    _set_spray_args(p)
    p.add_argument("--point", default="zero")
    p.add_argument("--velocity", required=True)

    p = add("integrate", "integrate one geodesic and write it as CSV")
    _set_spray_args(p, set_required=False)
    p.add_argument("--point", required=True)
    p.add_argument("--velocity", required=True)
    p.add_argument("--tspan", default="0,1")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--method", default="auto", choices=("auto", "closed", "rk4"))

    p = add("verify-invariance", "sampled invariance experiment")
    _set_spray_args(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tspan", default="-2,2")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--method", default="auto", choices=("auto", "closed", "rk4"))

    p = add("check-totally-geodesic", "two-sided sample test of A = TS")
    _set_spray_args(p)
    p.add_argument("--count", type=int, default=10)

    p = add("check-convexity", "distance of connecting geodesics to the set")
    _set_spray_args(p)
    p.add_argument("--count", type=int, default=20)

    p = add("check-tangency", "bundle tangency versus trajectory invariance")
    _set_spray_args(p)
    p.add_argument("--trials", type=int, default=5)

    p = add("check-flow", "admissibility of geodesic-flow images")
    _set_spray_args(p)
    p.add_argument("--times", default="-1,-0.5,0.5,1")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--omega", type=float, help="fixed angular speed for circle-loops samples")

    p = add("check-orbit", "automorphism check and invariance of the translated set")
    _set_spray_args(p)
    p.add_argument("--shift", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=20)

    p = add("check-strata", "stratification of finite sequences")
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--spray", default="flat")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--expect")

    p = add("pushforward", "push a spray through a grid translation")
    _set_spray_args(p, set_required=False)
    p.add_argument("--shift", type=float, default=0.5)
    p.add_argument("--count", type=int, default=20)

    p = add("check-spray", "degree-2 homogeneity of a spray")
    _set_spray_args(p, set_required=False)
    p.add_argument("--count", type=int, default=100)
    return parser


# --- helpers ------------------------------------------------------------------


class _Env:
    def __init__(self, args):
        self.cfg = load_config(args.config) if args.config else {}
        self.seed = args.seed if args.seed is not None else int(self.cfg.get("seed", 0))
        out = args.out or self.cfg.get("out") or os.environ.get("SPRAYLAB_OUT") or DEFAULT_OUT
        self.out = Path(out)
        sched = args.schedule or self.cfg.get("schedule")
        if isinstance(sched, (list, tuple)):
            sched = ",".join(str(s) for s in sched)
        self.sched = QuotientSchedule.parse(sched) if sched else QuotientSchedule()
        self.tol = args.tol if args.tol is not None else self.cfg.get("tol")
        self.rng = np.random.default_rng(self.seed)

    def space_for(self, set_id=None, spray_id=None):
        if "space" in self.cfg:
            return build_space(self.cfg["space"])
        if set_id:
            return build_space(default_space_config(set_id))
        if spray_id and spray_id.startswith("sphere"):
            return build_space(default_space_config("circle-loops"))
        return build_space(default_space_config("half-support"))

    def itol(self):
        return inv.INVARIANCE_TOL if self.tol is None else float(self.tol)


def _finish(env: _Env, name: str, payload: dict, verdict: str, expect) -> int:
    path = write_json(env.out / f"{name}.json", payload)
    print(f"{name}: {verdict}  ({path})")
    if expect is not None and verdict != expect:
        print(f"expected {expect}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_reproduce(args, env):
    example = args.example or env.cfg.get("example") or env.cfg.get("id")
    if not example:
        raise ConfigError("reproduce needs an example id or 'all'")
    overrides = dict(env.cfg.get("overrides") or {})
    if env.tol is not None:
        overrides["tol"] = float(env.tol)
    if example == "all":
        code, _ = run_all(env.seed, env.out, overrides, env.sched)
        return code
    rep = run_example(example, env.seed, env.out, overrides, env.sched)
    for c in rep.checks:
        print(f"{rep.example}  {c['op']}: {c['verdict']} (expected {c['expected']})"
              f"  {'PASS' if c['match'] else 'FAIL'}")
    print(f"wall time {rep.wall_time:.2f}s; report {env.out / rep.example / 'report.json'}")
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def _cmd_check_cone(args, env):
    space = env.space_for(args.set)
    oracle = build_set(args.set, space)
    s = parse_vector(args.point, space, env.seed)
    f = parse_vector(args.direction, space, env.seed)
    if args.accel is None:
        r = adjacent_member(space, oracle, s, f, env.sched)
    else:
        r = second_order_member(space, oracle, s, f, parse_vector(args.accel, space, env.seed),
                                env.sched)
    return _finish(env, "check-cone", dict(r.to_dict(), set=args.set), r.verdict.value,
                   args.expect)


def _cmd_check_admissible(args, env):
    space = env.space_for(args.set, args.spray)
    oracle = build_set(args.set, space)
    spray = build_spray(args.spray, space)
    r = admissible(spray, oracle, parse_vector(args.point, space, env.seed),
                   parse_vector(args.velocity, space, env.seed), env.sched)
    return _finish(env, "check-admissible", dict(r.to_dict(), set=args.set),
                   r.verdict.value, args.expect)


def _cmd_integrate(args, env):
    space = env.space_for(args.set, args.spray)
    spray = build_spray(args.spray, space)
    tspan = parse_floats(args.tspan)
    traj = integrate_geodesic(spray, parse_vector(args.point, space, env.seed),
                              parse_vector(args.velocity, space, env.seed), tspan, args.h,
                              args.method, cross_validate=spray.closed_form is not None)
    env.out.mkdir(parents=True, exist_ok=True)
    csv_path = env.out / "trajectory.csv"
    traj.to_csv(csv_path)
    payload = {"spray": spray.label, "method": traj.method, "h": traj.h,
               "tspan": [float(traj.times[0]), float(traj.times[-1])], "samples": len(traj),
               "blowup": None if traj.blowup is None else
               {"t": traj.blowup.t, "reason": traj.blowup.reason},
               "crossval_error": traj.crossval_error, "csv": csv_path.name}
    verdict = "BlowUp" if traj.blowup else "OK"
    return _finish(env, "integrate", payload, verdict, args.expect)


def _components(args, env):
    space = env.space_for(args.set, args.spray)
    return space, build_set(args.set, space), build_spray(args.spray, space)


def _cmd_verify(args, env):
    space, oracle, spray = _components(args, env)
    sampler = default_sampler(args.set, args.spray, space)
    rep = inv.verify_invariance(spray, oracle, sampler, args.trials, parse_floats(args.tspan),
                                args.h, env.itol(), sched=env.sched, rng=env.rng,
                                method=args.method)
    payload = rep.to_dict()
    if rep.counterexample is not None:
        env.out.mkdir(parents=True, exist_ok=True)
        rep.counterexample.to_csv(env.out / "verify-invariance_counterexample.csv")
        payload["counterexample_csv"] = "verify-invariance_counterexample.csv"
    return _finish(env, "verify-invariance", payload, rep.overall.value, args.expect)


def _cmd_totally_geodesic(args, env):
    space, oracle, spray = _components(args, env)
    ts = tangent_sampler(args.set, space)
    rep = inv.check_totally_geodesic(spray, oracle, ts, ambient_sampler(ts, space, 0.1),
                                     env.sched, args.count, env.rng, tol=env.itol())
    return _finish(env, "check-totally-geodesic", rep.to_dict(), rep.verdict, args.expect)


def _cmd_convexity(args, env):
    space, oracle, spray = _components(args, env)
    rep = inv.check_geodesic_convexity(spray, oracle, pair_sampler(args.set, space),
                                       args.count, rng=env.rng, tol=env.itol())
    return _finish(env, "check-convexity", rep.to_dict(), rep.verdict, args.expect)


def _cmd_tangency(args, env):
    space, oracle, spray = _components(args, env)
    sampler = default_sampler(args.set, args.spray, space)
    A = bundle_oracle(args.set, args.spray, oracle)
    rep = inv.check_tangency_reformulation(spray, oracle, A, sampler, args.trials,
                                           sched=env.sched, rng=env.rng)
    return _finish(env, "check-tangency", rep.to_dict(), rep.verdict, args.expect)


def _cmd_flow(args, env):
    space, oracle, spray = _components(args, env)
    if args.omega is not None and args.set == "circle-loops":
        sampler = circle_loop_sampler(space, omega=args.omega)
    else:
        sampler = default_sampler(args.set, args.spray, space)
    rep = inv.check_flow_invariance(spray, oracle, sampler, parse_floats(args.times),
                                    args.count, sched=env.sched, rng=env.rng)
    return _finish(env, "check-flow", rep.to_dict(), rep.verdict, args.expect)


def _cmd_orbit(args, env):
    space, oracle, spray = _components(args, env)
    phi = translation(space, args.shift)
    transformed = build_set(f"translate:{args.set}:{args.shift:g}", space)
    if args.set == "half-support":
        sampler = half_support_sampler(space, margin=abs(args.shift) + 0.1)
    else:
        sampler = default_sampler(args.set, args.spray, space)
    rep = inv.check_orbit_invariance(spray, phi, oracle, transformed, sampler, args.trials,
                                     rng=env.rng, tol=env.itol())
    return _finish(env, "check-orbit", rep.to_dict(), rep.verdict, args.expect)


def _cmd_strata(args, env):
    space = Sequences(args.N)
    spray = build_spray(args.spray, space)
    rep = inv.check_stratification(finite_sequence_strata(space), spray,
                                   lambda k: stratum_sampler(space, k), args.trials,
                                   rng=env.rng)
    return _finish(env, "check-strata", rep.to_dict(), rep.verdict, args.expect)


def _cmd_pushforward(args, env):
    space = env.space_for(args.set, args.spray)
    spray = build_spray(args.spray, space)
    phi = translation(space, args.shift)
    auto = check_automorphism(spray, phi, args.count, env.rng, margin=abs(args.shift) + 0.1)
    pushed = pushforward_spray(spray, phi)
    x = random_element(space, env.rng, abs(args.shift) + 0.1)
    v = random_element(space, env.rng, abs(args.shift) + 0.1)
    g = integrate_geodesic(spray, x, v, (0.0, 1.0), 1e-2, "rk4")
    gt = integrate_geodesic(pushed, *phi.push(x, v), (0.0, 1.0), 1e-2, "rk4")
    n = min(len(g), len(gt))
    disc = float(np.max(np.abs(np.array([phi.forward(p) for p in g.xs[:n]]) - gt.xs[:n])))
    payload = dict(auto, pushed_spray=pushed.label, trajectory_discrepancy=disc)
    verdict = "Automorphism" if auto["max_discrepancy"] <= 1e-12 else "NotAutomorphism"
    return _finish(env, "pushforward", payload, verdict, args.expect)


def _cmd_check_spray(args, env):
    space = env.space_for(args.set, args.spray)
    spray = build_spray(args.spray, space)
    res = check_homogeneity(spray, args.count, env.rng)
    verdict = "PASS" if res["max_relative_violation"] <= 1e-10 else "FAIL"
    return _finish(env, "check-spray", res, verdict, args.expect)


_COMMANDS = {
    "reproduce": _cmd_reproduce,
    "check-cone": _cmd_check_cone,
    "check-admissible": _cmd_check_admissible,
    "integrate": _cmd_integrate,
    "verify-invariance": _cmd_verify,
    "check-totally-geodesic": _cmd_totally_geodesic,
    "check-convexity": _cmd_convexity,
    "check-tangency": _cmd_tangency,
    "check-flow": _cmd_flow,
    "check-orbit": _cmd_orbit,
    "check-strata": _cmd_strata,
    "pushforward": _cmd_pushforward,
    "check-spray": _cmd_check_spray,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = _Env(args)
        return _COMMANDS[args.command](args, env)
    except (ConfigError, NotInSetError, NotAdjacentError, inv.UnsupportedSpray,
            TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
