"""Batch experiments for spray invariance, total geodesy and their reformulations.

Every check draws initial data from a sampler, integrates geodesics and
measures seminorm distances to the set.  Results are plain dataclasses with a
``to_dict`` suitable for JSON reports.

A trajectory is *in the set* while its largest sampled distance is at most
``tol`` (default 1e-7).  It is *violated* once the distance exceeds
``violation_threshold`` (default 1e-4) after growing over three consecutive
samples moving away from ``t = 0``; anything between is inconclusive.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cone import (NotInSetError, QuotientSchedule, Verdict, admissible,
                   first_order_tangent_on_bundle)
from .samplers import AdmissibleSampler, PairSampler, SamplerMode
from .sets import MissingTangentPredicate, SetOracle, Stratification
from .spray import (Automorphism, BlowUp, Spray, Trajectory, check_automorphism,
                    geodesic_flow, integrate_geodesic, pushforward_spray)

__all__ = [
    "Overall",
    "TrialRecord",
    "InvarianceReport",
    "CheckReport",
    "UnsupportedSpray",
    "verify_invariance",
    "check_totally_geodesic",
    "check_geodesic_convexity",
    "check_tangency_reformulation",
    "check_flow_invariance",
    "check_orbit_invariance",
    "check_stratification",
    "sign_change_events",
    "INVARIANCE_TOL",
    "VIOLATION_THRESHOLD",
]

INVARIANCE_TOL = 1e-7
VIOLATION_THRESHOLD = 1e-4
RECHECK_FRACTIONS = (0.2, 0.7, 0.9)


class Overall(str, enum.Enum):
    INVARIANT = "Invariant"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


class UnsupportedSpray(ValueError):
    """The spray lacks a two-point geodesic solver."""


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _recheck(spray, oracle, traj: Trajectory, t, sched) -> str:
    """Admissibility verdict of the trajectory's state at ``t``.

    Closed-form states are preferred so that integrator drift does not leak into
    a second-order test.
    """
    try:
        if spray.closed_form is not None:
            x, v = spray.closed_form(t, traj.xs[np.argmin(np.abs(traj.times))],
                                     traj.vs[np.argmin(np.abs(traj.times))])
        else:
            x, v = traj.state_at(t)
        return admissible(spray, oracle, x, v, sched).verdict.value
    except NotInSetError:
        return "NotInSet"


@dataclass
class TrialRecord:
    index: int
    x: np.ndarray
    v: np.ndarray
    asserted_admissible: bool
    numeric_admissibility: Optional[str]
    max_distance: float
    status: str                       # in_set | violated | inconclusive
    blowup: Optional[BlowUp] = None
    violation_onset: Optional[float] = None
    violation_distance: Optional[float] = None
    rechecks: list = field(default_factory=list)
    coherent: bool = True
    profile: Optional[tuple] = None   # (times, distances)

    def to_dict(self, space=None) -> dict:
        out = {
            "index": self.index,
            "asserted_admissible": self.asserted_admissible,
            "numeric_admissibility": self.numeric_admissibility,
            "max_distance": self.max_distance,
            "status": self.status,
            "blowup": None if self.blowup is None else
            {"t": self.blowup.t, "reason": self.blowup.reason},
            "violation_onset": self.violation_onset,
            "violation_distance": self.violation_distance,
            "rechecks": [{"t": t, "verdict": v} for t, v in self.rechecks],
            "coherent": self.coherent,
        }
        if space is not None:
            out["x_seminorms"] = space.seminorms(self.x).tolist()
            out["v_seminorms"] = space.seminorms(self.v).tolist()
        return out


@dataclass
class InvarianceReport:
    set_id: str
    spray_label: str
    sampler_label: str
    trials: list
    overall: Overall
    tol: float
    violation_threshold: float
    counterexample: Optional[Trajectory] = None
    counterexample_index: Optional[int] = None
    space: object = None

    @property
    def max_distance(self) -> float:
        adm = [t.max_distance for t in self.trials if t.asserted_admissible]
        return max(adm) if adm else 0.0

    @property
    def coherent(self) -> bool:
        return all(t.coherent for t in self.trials)

    @property
    def numeric_disagreements(self) -> int:
        return sum(1 for t in self.trials if t.asserted_admissible
                   and t.numeric_admissibility not in (None, Verdict.MEMBER.value))

    def to_dict(self) -> dict:
        return {
            "check": "verify_invariance",
            "set": self.set_id,
            "spray": self.spray_label,
            "sampler": self.sampler_label,
            "verdict": self.overall.value,
            "tol": self.tol,
            "violation_threshold": self.violation_threshold,
            "max_distance": self.max_distance,
            "coherent": self.coherent,
            "numeric_admissibility_disagreements": self.numeric_disagreements,
            "counterexample_trial": self.counterexample_index,
            "trials": [t.to_dict(self.space) for t in self.trials],
        }


@dataclass
class CheckReport:
    check: str
    verdict: str
    passed: bool
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)   # name -> Trajectory

    def to_dict(self) -> dict:
        return {"check": self.check, "verdict": self.verdict, "passed": self.passed,
                "summary": self.summary, "rows": self.rows}


def _branch_violation(ts, ds, tol, threshold):
    """First violation along one branch ordered away from t = 0."""
    onset = None
    for j in range(ds.size):
        if onset is None and ds[j] > tol:
            onset = float(ts[j])
        if j >= 2 and ds[j] > threshold and ds[j - 2] < ds[j - 1] < ds[j]:
            return onset, float(ts[j]), float(ds[j])
    return None


def _sample_indices(n: int, n_times: int) -> np.ndarray:
    return np.unique(np.linspace(0, n - 1, n_times).round().astype(int))


def _trial(spray, oracle, x, v, index, asserted, numeric, tspan, h, tol,
           threshold, n_times, sched, recheck, method):
    traj = integrate_geodesic(spray, x, v, tspan, h, method)
    idx = _sample_indices(len(traj), n_times)
    ts = traj.times[idx]
    ds = np.array([float(np.max(oracle.distances(traj.xs[i]))) for i in idx])
    dmax = float(ds.max())
    rec = TrialRecord(index, x, v, asserted, numeric, dmax, "inconclusive",
                      traj.blowup, profile=(ts, ds))
    fwd = ts >= 0
    bwd = ts <= 0
    hits = [r for r in (
        _branch_violation(ts[fwd], ds[fwd], tol, threshold),
        _branch_violation(ts[bwd][::-1], ds[bwd][::-1], tol, threshold),
    ) if r is not None]
    if dmax <= tol:
        rec.status = "in_set"
        if recheck:
            for frac in RECHECK_FRACTIONS:
                t = float(traj.times[int(round(frac * (len(traj) - 1)))])
                rec.rechecks.append((t, _recheck(spray, oracle, traj, t, sched)))
            rec.coherent = all(vd == Verdict.MEMBER.value or vd == Verdict.INCONCLUSIVE.value
                               for _, vd in rec.rechecks)
    elif hits:
        rec.status = "violated"
        onset, t_hit, d_hit = min(hits, key=lambda r: abs(r[1]))
        rec.violation_onset, rec.violation_distance = onset, d_hit
        if recheck:
            after = ts[(np.abs(ts) >= abs(onset)) & (np.sign(ts) == np.sign(onset))][:3]
            for t in after:
                rec.rechecks.append((float(t), _recheck(spray, oracle, traj, float(t), sched)))
            rec.coherent = any(vd in (Verdict.NONMEMBER.value, "NotInSet")
                               for _, vd in rec.rechecks)
    return rec, traj


def verify_invariance(spray: Spray, oracle: SetOracle, sampler: AdmissibleSampler,
                      trials: int = 100, tspan=(-2.0, 2.0), h: float = 1e-3,
                      tol: float = INVARIANCE_TOL, *,
                      violation_threshold: float = VIOLATION_THRESHOLD,
                      n_times: int = 81, sched: QuotientSchedule | None = None,
                      rng=0, recheck: bool = True, numeric_admissibility: bool = True,
                      method: str = "auto") -> InvarianceReport:
    """Integrate geodesics from sampled admissible data and track their distance to the set.

    The verdict is Violated if any trial is violated, Invariant if every trial
    stays within ``tol``, otherwise Inconclusive.  Trials cut short by a domain
    boundary or a blow-up are recorded, not aborted.
    """
    rng = _rng(rng)
    sched = sched or QuotientSchedule()
    records = []
    counter = None
    counter_idx = None
    for i in range(trials):
        x, v = sampler.sample(rng)
        numeric = None
        if numeric_admissibility:
            try:
                numeric = admissible(spray, oracle, x, v, sched).verdict.value
            except NotInSetError:
                numeric = "NotInSet"
        rec, traj = _trial(spray, oracle, x, v, i, True, numeric, tspan, h, tol,
                           violation_threshold, n_times, sched, recheck, method)
        records.append(rec)
        if rec.status == "violated" and counter is None:
            counter, counter_idx = traj, i
    statuses = {r.status for r in records}
    if "violated" in statuses:
        overall = Overall.VIOLATED
    elif records and statuses == {"in_set"}:
        overall = Overall.INVARIANT
    else:
        overall = Overall.INCONCLUSIVE
    return InvarianceReport(oracle.label, spray.label, sampler.label, records, overall,
                            tol, violation_threshold, counter, counter_idx, spray.space)


def _verdict_of(spray, oracle, x, v, sched) -> str:
    try:
        return admissible(spray, oracle, x, v, sched).verdict.value
    except NotInSetError:
        return "NotInSet"


def check_totally_geodesic(spray: Spray, oracle: SetOracle,
                           tangent_sampler: AdmissibleSampler,
                           ambient_sampler: AdmissibleSampler | None = None,
                           sched: QuotientSchedule | None = None, count: int = 20,
                           rng=0, tspan=(-1.0, 1.0), n_times: int = 21,
                           tol: float = INVARIANCE_TOL) -> CheckReport:
    """Two-sided sample test of ``A = TS``.

    Counts tangent vectors that are not admissible and admissible vectors
    (from ``ambient_sampler``) that are not tangent.  Geodesics launched by the
    tangent samples are also followed over ``tspan`` and their largest distance
    to the set reported.
    """
    rng = _rng(rng)
    sched = sched or QuotientSchedule()
    rows = []
    tangent_fail = adm_fail = inconclusive = 0
    max_dist = 0.0
    for i in range(count):
        x, v = tangent_sampler.sample(rng)
        if not oracle.is_tangent(x, v):
            raise ValueError(f"tangent sampler produced a non-tangent vector (sample {i})")
        vd = _verdict_of(spray, oracle, x, v, sched)
        traj = integrate_geodesic(spray, x, v, tspan, h=(tspan[1] - tspan[0]) / (n_times - 1))
        d = max(float(np.max(oracle.distances(xt))) for xt in traj.xs)
        max_dist = max(max_dist, d)
        if vd in (Verdict.NONMEMBER.value, "NotInSet"):
            tangent_fail += 1
        elif vd == Verdict.INCONCLUSIVE.value:
            inconclusive += 1
        rows.append({"kind": "tangent", "index": i, "admissible": vd, "max_distance": d})
    if ambient_sampler is not None:
        for i in range(count):
            x, v = ambient_sampler.sample(rng)
            vd = _verdict_of(spray, oracle, x, v, sched)
            tangent = oracle.is_tangent(x, v)
            if vd == Verdict.MEMBER.value and not tangent:
                adm_fail += 1
            rows.append({"kind": "ambient", "index": i, "admissible": vd, "tangent": tangent})
    if tangent_fail or adm_fail:
        verdict = "NotTotallyGeodesic"
    elif inconclusive:
        verdict = "Inconclusive"
    else:
        verdict = "TotallyGeodesic"
    summary = {"set": oracle.label, "spray": spray.label,
               "tangent_not_admissible": tangent_fail,
               "admissible_not_tangent": adm_fail,
               "inconclusive": inconclusive,
               "max_geodesic_distance": max_dist,
               "geodesics_within_tol": max_dist <= tol}
    return CheckReport("check_totally_geodesic", verdict, verdict == "TotallyGeodesic",
                       summary, rows)


def check_geodesic_convexity(spray: Spray, oracle: SetOracle, pair_sampler: PairSampler,
                             count: int = 20, n_interior: int = 9, rng=0,
                             tol: float = INVARIANCE_TOL, pairs=None) -> CheckReport:
    """Follow the connecting geodesic of sampled pairs and measure its distance to the set.

    ``pairs`` may list explicit ``(p, q)`` tuples instead of sampling.  Pairs
    with ``p == q`` are skipped.
    """
    if spray.two_point is None:
        raise UnsupportedSpray(f"{spray.label} has no two-point geodesic solver")
    rng = _rng(rng)
    space = spray.space
    if pairs is None:
        pairs = [pair_sampler.sample(rng) for _ in range(count)]
    ss = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    rows = []
    worst = 0.0
    skipped = 0
    for i, (p, q) in enumerate(pairs):
        p, q = space.check(p), space.check(q)
        if np.array_equal(p, q):
            skipped += 1
            rows.append({"index": i, "skipped": "degenerate pair"})
            continue
        dists = [float(np.max(oracle.distances(spray.two_point(p, q, s)))) for s in ss]
        worst = max(worst, max(dists))
        rows.append({"index": i, "max_distance": max(dists),
                     "midpoint_distance": float(np.max(oracle.distances(spray.two_point(p, q, 0.5))))})
    passed = worst <= tol
    return CheckReport("check_geodesic_convexity", "PASS" if passed else "FAIL", passed,
                       {"set": oracle.label, "spray": spray.label, "max_distance": worst,
                        "pairs": len(pairs), "skipped": skipped}, rows)


def check_tangency_reformulation(spray: Spray, oracle: SetOracle, A_oracle: SetOracle,
                                 sampler: AdmissibleSampler, trials: int = 10,
                                 tspan=(-2.0, 2.0), h: float = 1e-3,
                                 sched: QuotientSchedule | None = None, rng=0,
                                 invariance: InvarianceReport | None = None) -> CheckReport:
    """Compare bundle tangency of the spray to ``A`` with trajectory invariance.

    Per trial, a Member tangency verdict should pair with an in-set trajectory
    and NonMember with a violated one.  The aggregated tangency verdict
    (Invariant iff all Member) must equal the invariance verdict.
    """
    sched = sched or QuotientSchedule()
    if invariance is None:
        invariance = verify_invariance(spray, oracle, sampler, trials, tspan, h,
                                       sched=sched, rng=rng, recheck=False,
                                       numeric_admissibility=False)
    bundle = A_oracle.space
    rows = []
    matrix: dict[str, int] = {}
    agree = 0
    any_non = False
    all_member = True
    for rec in invariance.trials:
        try:
            tv = first_order_tangent_on_bundle(bundle, A_oracle, rec.x, rec.v, spray,
                                               sched).verdict.value
        except NotInSetError:
            tv = "NotInA"
        any_non |= tv in (Verdict.NONMEMBER.value, "NotInA")
        all_member &= tv == Verdict.MEMBER.value
        key = f"{tv}/{rec.status}"
        matrix[key] = matrix.get(key, 0) + 1
        ok = (tv == Verdict.MEMBER.value and rec.status == "in_set") or \
             (tv in (Verdict.NONMEMBER.value, "NotInA") and rec.status == "violated")
        agree += ok
        rows.append({"trial": rec.index, "tangency": tv, "trajectory": rec.status,
                     "agree": ok})
    predicted = (Overall.VIOLATED if any_non else
                 Overall.INVARIANT if all_member else Overall.INCONCLUSIVE)
    n = len(rows)
    rate = agree / n if n else 1.0
    passed = rate == 1.0 and predicted is invariance.overall
    return CheckReport(
        "check_tangency_reformulation", "Agree" if passed else "Disagree", passed,
        {"set": oracle.label, "A": A_oracle.label, "spray": spray.label,
         "tangency_verdict": predicted.value, "invariance_verdict": invariance.overall.value,
         "agreement_rate": rate, "matrix": matrix,
         "discrepancies": [r for r in rows if not r["agree"]]},
        rows)


def check_flow_invariance(spray: Spray, oracle: SetOracle, sampler: AdmissibleSampler,
                          times=(-1.0, -0.5, 0.5, 1.0), count: int = 10, h: float = 1e-3,
                          sched: QuotientSchedule | None = None, rng=0,
                          method: str = "auto") -> CheckReport:
    """Admissibility of ``Phi_t(x, v)`` for sampled admissible ``(x, v)`` and listed ``t``."""
    rng = _rng(rng)
    sched = sched or QuotientSchedule()
    rows = []
    ok = True
    for i in range(count):
        x, v = sampler.sample(rng)
        for t in times:
            try:
                xt, vt = geodesic_flow(spray, x, v, float(t), h, method)
            except ValueError as exc:
                rows.append({"index": i, "t": float(t), "verdict": "OutsideDomain",
                             "note": str(exc)})
                continue
            vd = _verdict_of(spray, oracle, xt, vt, sched)
            ok &= vd == Verdict.MEMBER.value
            rows.append({"index": i, "t": float(t), "verdict": vd})
    return CheckReport("check_flow_invariance", "PASS" if ok else "FAIL", ok,
                       {"set": oracle.label, "spray": spray.label, "times": list(map(float, times)),
                        "samples": count}, rows)


def check_orbit_invariance(spray: Spray, phi: Automorphism, oracle: SetOracle,
                           transformed: SetOracle, sampler: AdmissibleSampler,
                           trials: int = 20, tspan=(-2.0, 2.0), h: float = 1e-3,
                           tol: float = INVARIANCE_TOL, rng=0, margin: float = 0.6,
                           automorphism_tol: float = 1e-12,
                           pushforward_tol: float = 1e-8) -> CheckReport:
    """Automorphism check, then invariance of ``phi(S)`` under pushed-forward data.

    ``transformed`` is the oracle of ``phi(S)``.  The trajectory identity
    ``phi o g = geodesic of phi_* S`` is also checked at the end of ``tspan``.
    """
    rng = _rng(rng)
    auto = check_automorphism(spray, phi, 20, rng, margin)
    pushed_sampler = sampler.mapped(phi.push, f"{phi.label}({sampler.label})")
    inv = verify_invariance(spray, transformed, pushed_sampler, trials, tspan, h, tol,
                            rng=rng, numeric_admissibility=False)
    pushed = pushforward_spray(spray, phi)
    worst = 0.0
    for _ in range(3):
        x, v = sampler.sample(rng)
        g = integrate_geodesic(spray, x, v, tspan, h)
        y, w = phi.push(x, v)
        gt = integrate_geodesic(pushed, y, w, tspan, h)
        worst = max(worst, float(np.max(np.abs(phi.forward(g.xs[-1]) - gt.xs[-1]))))
    passed = (auto["max_discrepancy"] <= automorphism_tol
              and inv.overall is Overall.INVARIANT and worst <= pushforward_tol)
    return CheckReport(
        "check_orbit_invariance", "PASS" if passed else "FAIL", passed,
        {"spray": spray.label, "automorphism": phi.label, "set": oracle.label,
         "transformed_set": transformed.label,
         "automorphism_discrepancy": auto["max_discrepancy"],
         "transformed_verdict": inv.overall.value,
         "transformed_max_distance": inv.max_distance,
         "pushforward_endpoint_discrepancy": worst},
        [t.to_dict() for t in inv.trials])


def sign_change_events(values) -> int:
    """Number of zero crossings of a sampled scalar signal; a run of exact zeros counts once."""
    s = np.sign(np.asarray(values, dtype=float))
    events = 0
    prev = None
    for cur in s:
        if cur == 0:
            if prev != 0:
                events += 1
        elif prev is not None and prev != 0 and cur != prev:
            events += 1
        prev = cur
    return events


def check_stratification(strata: Stratification, spray: Spray, sampler_for,
                         trials: int = 5, tspan=(-2.0, 2.0), h: float = 1e-3,
                         rng=0, frontier_samples: int = 5,
                         levels=None) -> CheckReport:
    """Closure invariance, stratum exits and frontier checks per stratum.

    ``sampler_for(i)`` returns a sampler of ``x in S_i``, ``v in H_i``.
    Geodesics must stay in ``H_i`` with distance exactly 0; the number of
    sampled times at which the leading coordinate of ``S_i`` crosses zero is
    reported as stratum-exit events.
    """
    rng = _rng(rng)
    levels = range(len(strata)) if levels is None else levels
    rows = []
    closure_ok = frontier_ok = True
    max_events = 0
    for i in levels:
        sid, H, S = strata.strata[i]
        sampler = sampler_for(sid)
        worst = 0.0
        events = []
        for _ in range(trials):
            x, v = sampler.sample(rng)
            traj = integrate_geodesic(spray, x, v, tspan, h)
            d = max(float(np.max(H.distances(xt))) for xt in traj.xs[::10])
            worst = max(worst, d)
            n_ev = sign_change_events(traj.xs[:, sid - 1]) if sid > 0 else 0
            events.append(n_ev)
        # frontier: lower strata lie in H_i, higher strata stay away from it
        lower_in = all(H.contains(sampler_for(j).sample(rng)[0])
                       for j in range(0, sid + 1) for _ in range(frontier_samples))
        higher_out = all(not H.contains(sampler_for(j).sample(rng)[0])
                         for j in range(sid + 1, len(strata)) for _ in range(frontier_samples))
        closure_ok &= worst == 0.0
        frontier_ok &= lower_in and higher_out
        max_events = max(max_events, max(events))
        rows.append({"stratum": sid, "closure_max_distance": worst,
                     "exit_events": events, "frontier_lower_in_closure": lower_in,
                     "frontier_higher_disjoint": higher_out})
    passed = closure_ok and frontier_ok
    return CheckReport("check_stratification", "PASS" if passed else "FAIL", passed,
                       {"spray": spray.label, "closure_invariant": closure_ok,
                        "frontier": frontier_ok, "max_exit_events": max_events}, rows)
