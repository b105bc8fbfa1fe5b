"""Adjacent and second-order adjacent cone membership by limit quotients.

For a step schedule ``t_0 > t_1 > ... > t_K`` the quotients

    first order   q_n(t) = t^-1 d_n(s + t f, S)
    second order  q_n(t) = t^-2 d_n(s + t f + t^2 e / 2, S)

are evaluated for every seminorm ``n`` of the space and the traces are
classified as Member, NonMember or Inconclusive.  Verdicts are relative to the
configured (finite) seminorm family.

Distances within ``noise_rel * (1 + max_n ||probe||_n)`` of zero are treated as
zero: below that level a computed distance is rounding error, and dividing it
by ``t^2`` would otherwise swamp the member threshold at the small end of the
schedule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .model_space import ModelSpace, Product
from .sets import SetOracle

__all__ = [
    "Verdict",
    "QuotientSchedule",
    "ConeVerdict",
    "NotInSetError",
    "NotAdjacentError",
    "quotient_traces",
    "classify",
    "adjacent_member",
    "second_order_member",
    "admissible",
    "first_order_tangent_on_bundle",
]


class Verdict(str, enum.Enum):
    MEMBER = "Member"
    NONMEMBER = "NonMember"
    INCONCLUSIVE = "Inconclusive"


class NotInSetError(ValueError):
    """The base point of a cone query does not belong to the set."""


class NotAdjacentError(ValueError):
    """The associated direction of a second-order query is not adjacent-tangent."""


@dataclass(frozen=True)
class QuotientSchedule:
    t0: float = 1e-1
    ratio: float = 0.5
    K: int = 14
    member_threshold: float = 1e-6
    nonmember_threshold: float = 1e-3
    noise_rel: float = 1e3 * np.finfo(float).eps
    window: int = 4
    monotone_slack: float = 0.1

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if not self.member_threshold < self.nonmember_threshold:
            raise ValueError("member threshold must be below the non-member threshold")
        if self.K < 4:
            raise ValueError("schedule needs at least 4 steps")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.t0 * self.ratio ** np.arange(self.K + 1)

    @classmethod
    def parse(cls, text: str, **kw) -> "QuotientSchedule":
        """From ``"t0,ratio,K"``."""
        t0, ratio, K = text.split(",")
        return cls(float(t0), float(ratio), int(K), **kw)

    def refined(self, extra: int = 4) -> "QuotientSchedule":
        return QuotientSchedule(self.t0, self.ratio, self.K + extra,
                                self.member_threshold, self.nonmember_threshold,
                                self.noise_rel, self.window, self.monotone_slack)


@dataclass
class ConeVerdict:
    verdict: Verdict
    order: int
    times: np.ndarray
    traces: np.ndarray            # (n_seminorms, K + 1)
    limits: np.ndarray            # per seminorm
    per_seminorm: list[Verdict]
    labels: list[str] = field(default_factory=list)
    note: str = ""

    def __bool__(self):
        return self.verdict is Verdict.MEMBER

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "order": self.order,
            "relative_to": "configured seminorm family",
            "note": self.note,
            "seminorms": [
                {"label": lab, "verdict": v.value, "limit": float(lim),
                 "trace": [[float(t), float(q)] for t, q in zip(self.times, tr)]}
                for lab, v, lim, tr in zip(self.labels, self.per_seminorm,
                                           self.limits, self.traces)
            ],
        }


def quotient_traces(space: ModelSpace, oracle: SetOracle, s, f, e, order: int,
                    sched: QuotientSchedule):
    """Quotient traces and their rounding-noise bounds, both ``(n_seminorms, K+1)``."""
    ts = sched.times
    n = space.n_seminorms
    q = np.empty((n, ts.size))
    noise = np.empty((n, ts.size))
    for k, t in enumerate(ts):
        probe = s + t * f if e is None else s + t * f + 0.5 * t * t * e
        d = oracle.distances(probe)
        floor = sched.noise_rel * (1.0 + float(np.max(space.seminorms(probe))))
        d = np.where(d <= floor, 0.0, d)
        q[:, k] = d / t ** order
        noise[:, k] = floor / t ** order
    return q, noise


def _limit_estimate(q: np.ndarray, noise: np.ndarray) -> float:
    # pick the step balancing trace variation against the rounding bound
    if q.size < 2:
        return float(q[-1])
    err = np.abs(np.diff(q)) + noise[1:]
    # ties go to the smallest step
    k = err.size - 1 - int(np.argmin(err[::-1]))
    return float(q[1 + k])


def _classify_trace(q: np.ndarray, sched: QuotientSchedule) -> Verdict:
    tail = q[-sched.window:]
    slack = 1e-2 * sched.member_threshold
    steps_down = np.all(tail[1:] <= (1 + sched.monotone_slack) * tail[:-1] + slack)
    if tail[-1] <= sched.member_threshold and steps_down:
        return Verdict.MEMBER
    if np.min(tail) >= sched.nonmember_threshold:
        return Verdict.NONMEMBER
    growth = tail[1:] > 2.0 * tail[:-1]
    if tail[-1] > sched.member_threshold and np.any(growth[1:] & growth[:-1]):
        return Verdict.NONMEMBER
    return Verdict.INCONCLUSIVE


def classify(traces: np.ndarray, sched: QuotientSchedule) -> tuple[Verdict, list[Verdict]]:
    per = [_classify_trace(tr, sched) for tr in traces]
    if Verdict.NONMEMBER in per:
        return Verdict.NONMEMBER, per
    if all(v is Verdict.MEMBER for v in per):
        return Verdict.MEMBER, per
    return Verdict.INCONCLUSIVE, per


def _decide(space, oracle, s, f, e, order, sched, refine, note="") -> ConeVerdict:
    s = space.check(s)
    f = space.check(f)
    if e is not None:
        e = space.check(e)
    while True:
        q, noise = quotient_traces(space, oracle, s, f, e, order, sched)
        verdict, per = classify(q, sched)
        if verdict is not Verdict.INCONCLUSIVE or refine <= 0:
            break
        sched = sched.refined()
        refine -= 1
    limits = np.array([_limit_estimate(tr, nb) for tr, nb in zip(q, noise)])
    return ConeVerdict(verdict, order, sched.times, q, limits, per,
                       space.seminorm_labels(), note)


def _require_in_set(oracle: SetOracle, s) -> None:
    if not oracle.contains(s):
        raise NotInSetError(f"base point is not in {oracle.label} "
                            f"(max distance {float(np.max(oracle.distances(s))):.3g})")


def adjacent_member(space: ModelSpace, oracle: SetOracle, s, f,
                    sched: QuotientSchedule | None = None, refine: int = 1) -> ConeVerdict:
    """Is ``f`` in the adjacent cone of the set at ``s``?"""
    sched = sched or QuotientSchedule()
    _require_in_set(oracle, s)
    return _decide(space, oracle, s, f, None, 1, sched, refine)


def second_order_member(space: ModelSpace, oracle: SetOracle, s, f, e,
                        sched: QuotientSchedule | None = None, refine: int = 1,
                        require_tangent: bool = True) -> ConeVerdict:
    """Is ``e`` a second-order adjacent vector at ``s`` with associated direction ``f``?

    With ``require_tangent`` the associated direction is first tested for
    adjacent tangency and :class:`NotAdjacentError` raised if it fails.
    """
    sched = sched or QuotientSchedule()
    _require_in_set(oracle, s)
    if require_tangent:
        first = _decide(space, oracle, s, f, None, 1, sched, refine)
        if first.verdict is Verdict.NONMEMBER:
            raise NotAdjacentError("associated direction is not adjacent-tangent")
    return _decide(space, oracle, s, f, e, 2, sched, refine)


def admissible(spray, oracle: SetOracle, x, v,
               sched: QuotientSchedule | None = None, refine: int = 1) -> ConeVerdict:
    """Is ``(x, v)`` admissible: ``x`` in the set and ``S2(x, v)`` a second-order
    adjacent vector with associated direction ``v``?

    A velocity that is not adjacent-tangent makes the second-order quotient
    diverge, so it is reported NonMember rather than raised.
    """
    sched = sched or QuotientSchedule()
    space = spray.space
    x = space.check(x)
    v = space.check(v)
    verdict = second_order_member(space, oracle, x, v, spray.accel(x, v), sched,
                                  refine, require_tangent=False)
    verdict.note = f"spray={spray.label}"
    return verdict


def first_order_tangent_on_bundle(bundle: Product, A_oracle: SetOracle, x, v, spray,
                                  sched: QuotientSchedule | None = None,
                                  refine: int = 1) -> ConeVerdict:
    """Adjacent tangency of the spray, viewed as a vector field on the doubled
    space, to the subset ``A``: direction ``(v, S2(x, v))`` at ``(x, v)``."""
    sched = sched or QuotientSchedule()
    x = spray.space.check(x)
    v = spray.space.check(v)
    point = bundle.join(x, v)
    direction = bundle.join(v, spray.accel(x, v))
    _require_in_set(A_oracle, point)
    out = _decide(bundle, A_oracle, point, direction, None, 1, sched, refine)
    out.note = f"spray={spray.label}, A={A_oracle.label}"
    return out
