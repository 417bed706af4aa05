"""Piecewise-constant control synthesis for single-neuron neural ODEs.

The dynamics are x' = w * g(a.x + b) with g one of three piecewise-linear
activations.  Every synthesized leg has a.w = 0, so each data point moves
along w at the constant speed g(a.x + b); the synthesizers exploit this to
compute exact leg durations.

Four constructions are provided:

* canonical   - one ReLU leg per axis-aligned separating threshold,
                processed in ascending order; switch count z - 1.
* truncated   - per cluster of the linear-components decomposition, a push
                leg to the target strip followed by an undo leg restoring
                every bystander; 2*ceil(Nc/d) - 1 switches.
* fem         - the hat activation confines the field to the cluster strip,
                so the undo leg disappears; ceil(Nc/d) - 1 switches.
* relu pair   - each truncated leg (a, b, w, t) is rewritten as the two
                ReLU legs (a, b, w, t), (a, b-1, -w, t), which compose to
                the same flow when a.w = 0; 4*ceil(Nc/d) - 2 switches.

The canonical construction amplifies intermediate positions multiplicatively
across legs (each leg's duration scales with the displacement the previous
legs inflicted on the next cluster), so its legs and durations are carried
in exact rational arithmetic; float64 loses the classification margins
beyond a few dozen legs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from .clustering import ClusterFamily, linear_components
from .geometry import LabeledPair
from .separability import z_axis

__all__ = [
    "ControlLeg",
    "ControlSchedule",
    "eval_activation",
    "synth_canonical",
    "synth_truncated",
    "synth_fem",
    "synth_relu_decomposed",
    "tv_seminorm",
    "tv_bound_report",
    "schedule_to_json",
    "schedule_from_json",
    "TARGET_CLEARANCE",
]

ACTIVATIONS = ("relu", "truncated", "fem")
# Classification margin beyond the strip boundary x_target = 1.
TARGET_CLEARANCE = mpq(1, 10)
_MIN_DURATION = mpq(1, 1000)
_DURATION_BITS = 256


def _round_up_dyadic(q, bits: int = _DURATION_BITS):
    """Smallest dyadic rational >= q with `bits` significant bits.

    Sequential leg durations computed as exact quotients feed each leg's
    numerator into the next leg's denominator, and coordinate sizes blow up
    quadratically in the leg count; any duration at least the exact
    requirement is admissible, so rounding up to a fixed-width dyadic keeps
    every intermediate coordinate a bounded-width dyadic instead.
    """
    if q <= 0:
        return mpq(q)
    num, den = q.numerator, q.denominator
    shift = bits - (num.bit_length() - den.bit_length())
    if shift >= 0:
        m = -(-(num << shift) // den)
        return mpq(m, 1 << shift)
    m = -(-num // (den << (-shift)))
    return mpq(m << (-shift))


def eval_activation(kind: str, z):
    """Pointwise activation value; exact for rational inputs.

    relu(z) = max(z, 0); truncated(z) = min(max(z, 0), 1);
    fem(z) = max(1 - |z|, 0).
    """
    if kind == "relu":
        return z if z > 0 else type(z)(0)
    if kind == "truncated":
        if z <= 0:
            return type(z)(0)
        return z if z < 1 else type(z)(1)
    if kind == "fem":
        m = z if z >= 0 else -z
        return 1 - m if m < 1 else type(z)(0)
    raise ValueError(f"unknown activation {kind!r}")


def _is_exact(x) -> bool:
    return isinstance(x, (type(mpq(0)), Fraction, int))


@dataclass(frozen=True)
class ControlLeg:
    """One constancy interval of the control: field w * g(a.x + b) for `duration`.

    Entries are floats or exact rationals (gmpy2.mpq); w must be unit.
    """

    a: tuple
    b: object
    w: tuple
    duration: object
    activation: str

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "w", tuple(self.w))
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        norm = math.sqrt(sum(float(v) * float(v) for v in self.w))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("w must be a unit vector")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(v) for v in self.a) and _is_exact(self.b)

    def coupling(self):
        """a.w, the self-coupling; zero for every synthesized leg."""
        return sum(ai * wi for ai, wi in zip(self.a, self.w))


@dataclass(frozen=True)
class ControlSchedule:
    """An activation-homogeneous leg sequence classifying toward x_target > 1.

    `swapped` records that the red/blue target strips were exchanged during
    synthesis (the construction always sends the strictly moving color
    upward); certification honors it.
    """

    legs: tuple[ControlLeg, ...]
    target_axis: int  # 1-based
    swapped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(self.legs))
        kinds = {leg.activation for leg in self.legs}
        if len(kinds) > 1:
            raise ValueError("all legs must share one activation")

    @property
    def switches(self) -> int:
        return len(self.legs) - 1

    @property
    def activation(self) -> Optional[str]:
        return self.legs[0].activation if self.legs else None

    @property
    def is_exact(self) -> bool:
        return any(leg.is_exact for leg in self.legs)


def _unit_axis(d: int, axis: int, exact: bool):
    one = mpq(1) if exact else 1.0
    zero = mpq(0) if exact else 0.0
    return tuple(one if i == axis - 1 else zero for i in range(d))


def synth_canonical(
    pair: LabeledPair, target_axis: Optional[int] = None
) -> ControlSchedule:
    """ReLU schedule with one leg per separating threshold of the best axis.

    The separating axis is the per-axis-count argmin (excluding the target
    axis); legs sweep the thresholds in ascending order with alternating
    field direction, so leg m carries the m-th same-color run past the
    target boundary and never disturbs runs already classified (their
    separating coordinate sits below every later threshold).  Durations are
    exact rationals: the construction needs them, see the module docstring.
    """
    d = pair.dim
    if d < 2:
        raise ValueError("canonical synthesis needs d >= 2 (no free target axis)")
    counts = {axis: z_axis(pair, axis) for axis in range(1, d + 1)}
    if target_axis is None:
        sep_axis = min(counts, key=lambda ax: (counts[ax], ax))
        target_axis = next(ax for ax in range(1, d + 1) if ax != sep_axis)
    else:
        if not 1 <= target_axis <= d:
            raise ValueError("target_axis out of range")
        sep_axis = min(
            (ax for ax in counts if ax != target_axis),
            key=lambda ax: (counts[ax], ax),
        )
    z = counts[sep_axis]

    points = pair.points()
    labels = pair.labels()
    order = np.argsort(points[:, sep_axis - 1])
    lab = labels[order]
    svals = [mpq(float(points[i, sep_axis - 1])) for i in order]
    y = [mpq(float(points[i, target_axis - 1])) for i in order]
    # threshold m sits at the midpoint of the m-th color change; run m is
    # the slice [change_pos[m-1], change_pos[m])
    change_pos = [i + 1 for i in range(len(lab) - 1) if lab[i] != lab[i + 1]]
    assert len(change_pos) == z
    thresholds = [(svals[p - 1] + svals[p]) / 2 for p in change_pos]
    bounds = change_pos + [len(svals)]

    swapped = bool(lab[0] == 0)  # lowest run red: exchange the strips
    up_target = 1 + TARGET_CLEARANCE
    down_target = 1 - TARGET_CLEARANCE

    legs = []
    for m in range(1, z + 1):
        h = thresholds[m - 1]
        up = m % 2 == 1
        lo, hi = bounds[m - 1], bounds[m]
        tau = mpq(0)
        for i in range(lo, hi):
            speed = svals[i] - h
            need = (up_target - y[i]) if up else (y[i] - down_target)
            if need > 0:
                t = need / speed
                if t > tau:
                    tau = t
        if tau <= 0:
            tau = _MIN_DURATION
        else:
            tau = _round_up_dyadic(tau)
        # advance every point above the threshold (those below never move)
        start = change_pos[m - 1]
        for i in range(start, len(svals)):
            disp = tau * (svals[i] - h)
            y[i] = y[i] + disp if up else y[i] - disp
        w = tuple(
            (mpq(1) if up else mpq(-1)) if i == target_axis - 1 else mpq(0)
            for i in range(d)
        )
        legs.append(
            ControlLeg(
                a=_unit_axis(d, sep_axis, exact=True),
                b=-h,
                w=w,
                duration=tau,
                activation="relu",
            )
        )
    return ControlSchedule(legs=tuple(legs), target_axis=target_axis, swapped=swapped)


def _cluster_push_durations(
    positions: np.ndarray,
    idx: Sequence[int],
    v: np.ndarray,
    target_axis: int,
) -> float:
    """Duration moving every indexed point (unit speed along v) past the clearance."""
    vt = float(v[target_axis - 1])
    need = float(1 + TARGET_CLEARANCE) - positions[list(idx), target_axis - 1]
    tau = float(need.max()) / vt
    return max(tau, float(_MIN_DURATION))


def _clustered_offsets(pair: LabeledPair, family: ClusterFamily) -> int:
    return 0 if family.color_clustered == "red" else pair.n_red


def _exact_leg(a, b, w, duration, activation: str) -> ControlLeg:
    """A rational leg with a.w made exactly zero.

    Float plane normals and in-plane directions are orthogonal only to
    rounding; the normal is re-orthogonalized against w in exact rational
    arithmetic (a perturbation of order 1e-16, far below every geometric
    tolerance).  The exactly vanishing coupling lets the rational simulator
    reproduce the push/undo and hat cancellations with zero error instead
    of the large float cancellation error of the scaled planes.
    """
    aq = [mpq(float(x)) for x in a]
    wq = [mpq(float(x)) for x in w]
    c = sum(ai * wi for ai, wi in zip(aq, wq))
    if c != 0:
        ww = sum(wi * wi for wi in wq)
        aq = [ai - (c / ww) * wi for ai, wi in zip(aq, wq)]
    return ControlLeg(
        a=tuple(aq),
        b=mpq(float(b)),
        w=tuple(wq),
        duration=duration if _is_exact(duration) else mpq(float(duration)),
        activation=activation,
    )


def _cluster_plan(pair: LabeledPair, target_axis: int, color: str):
    """Shared per-cluster push/undo parameters for the cluster-based synthesizers.

    For each cluster: the push plane is the far margin scaled by the minimal
    activation value among points currently inside its positive half-space,
    so every such point moves at speed exactly 1 along the in-plane
    direction; the undo plane does the same from the near margin for the
    same duration, restoring every bystander exactly.  Cluster points sit
    between the margins and are touched only by their own push leg.
    Scaling minima are recomputed from the point positions at each leg start.
    """
    family = linear_components(pair, target_axis, color)
    offset = _clustered_offsets(pair, family)
    positions = pair.points().astype(float)
    plan = []
    for c in family.clusters:
        u = c.base.normal
        v = c.direction
        hi, lo = c.margin_hi, c.margin_lo
        members = [offset + i for i in set(c.members) | set(c.padding)]

        s_hi = positions @ u + hi
        in_hi = s_hi > 1e-15
        d_push = float(np.minimum(s_hi[in_hi], 1.0).min())
        tau = _cluster_push_durations(positions, members, v, target_axis)
        push = _exact_leg(u / d_push, hi / d_push, v, tau, "truncated")
        positions = _apply_unit_speed_leg(positions, push)

        s_lo = positions @ u + lo
        in_lo = s_lo > 1e-15
        d_undo = float(np.minimum(s_lo[in_lo], 1.0).min()) if in_lo.any() else 1.0
        undo = _exact_leg(u / d_undo, lo / d_undo, -v, tau, "truncated")
        positions = _apply_unit_speed_leg(positions, undo)
        plan.append({"cluster": c, "push": push, "undo": undo, "tau": tau})
    return family, plan


def synth_truncated(
    pair: LabeledPair, target_axis: int = 1, color: str = "auto"
) -> ControlSchedule:
    """Truncated-ReLU schedule: per cluster a push leg and an exact undo leg."""
    family, plan = _cluster_plan(pair, target_axis, color)
    legs = []
    for item in plan:
        legs.append(item["push"])
        legs.append(item["undo"])
    return ControlSchedule(
        legs=tuple(legs),
        target_axis=target_axis,
        swapped=family.color_clustered == "blue",
    )


def _apply_unit_speed_leg(positions: np.ndarray, leg: ControlLeg) -> np.ndarray:
    """Float flow of one a.w = 0 leg over a position matrix (synthesis bookkeeping)."""
    a = np.array([float(v) for v in leg.a])
    w = np.array([float(v) for v in leg.w])
    s = positions @ a + float(leg.b)
    if leg.activation == "truncated":
        speed = np.clip(s, 0.0, 1.0)
    elif leg.activation == "fem":
        speed = np.maximum(1.0 - np.abs(s), 0.0)
    else:
        speed = np.maximum(s, 0.0)
    return positions + float(leg.duration) * speed[:, None] * w


def synth_fem(
    pair: LabeledPair, target_axis: int = 1, color: str = "auto"
) -> ControlSchedule:
    """Hat-activation schedule: one leg per cluster, no undo required.

    Scaling the base plane by the strip half-width makes the field's support
    exactly the open strip between the margins; all other data points sit
    outside it and never move, while the cluster rides the central ridge at
    unit speed.
    """
    family = linear_components(pair, target_axis, color)
    offset = _clustered_offsets(pair, family)
    positions = pair.points().astype(float)
    swapped = family.color_clustered == "blue"
    legs = []
    for c in family.clusters:
        u, v = c.base.normal, c.direction
        delta = c.half_width
        members = [offset + i for i in set(c.members) | set(c.padding)]
        tau = _cluster_push_durations(positions, members, v, target_axis)
        leg = _exact_leg(u / delta, c.base.offset / delta, v, tau, "fem")
        positions = _apply_unit_speed_leg(positions, leg)
        legs.append(leg)
    return ControlSchedule(legs=tuple(legs), target_axis=target_axis, swapped=swapped)


def decompose_leg(leg: ControlLeg) -> tuple[ControlLeg, ControlLeg]:
    """The two ReLU legs whose composition equals one truncated leg.

    Valid because the leg has a.w = 0, which keeps a.x constant along its
    own flow: relu(s) - relu(s - 1) = truncated(s).
    """
    coupling = float(leg.coupling())
    scale = math.sqrt(sum(float(v) ** 2 for v in leg.a))
    if abs(coupling) > 1e-9 * max(scale, 1.0):
        raise AssertionError("decomposition requires a.w = 0")
    first = ControlLeg(
        a=leg.a, b=leg.b, w=leg.w, duration=leg.duration, activation="relu"
    )
    second = ControlLeg(
        a=leg.a,
        b=leg.b - 1,
        w=tuple(-v for v in leg.w),
        duration=leg.duration,
        activation="relu",
    )
    return first, second


def _hat_legs(cluster, tau: float) -> list[ControlLeg]:
    """Three ReLU legs whose summed field is a hat supported on the cluster strip.

    With t = u.x + offset and h the strip half-width,
    relu(t + h) - 2 relu(t) + relu(t - h) equals h at the base plane and 0
    outside [-h, h], so the composition moves cluster points by exactly
    tau along the in-plane direction and no other data point at all.  The
    three legs commute (shared normal, motion in-plane), so their order is
    irrelevant.
    """
    u, off, h, v = (
        cluster.base.normal,
        cluster.base.offset,
        cluster.half_width,
        cluster.direction,
    )
    span = mpq(float(tau)) / mpq(float(h))
    hq = mpq(float(h))
    offq = mpq(float(off))
    return [
        _exact_leg(u, offq + hq, v, span, "relu"),
        _exact_leg(u, offq, -v, 2 * span, "relu"),
        _exact_leg(u, offq - hq, v, span, "relu"),
    ]


def synth_relu_decomposed(
    pair: LabeledPair, target_axis: int = 1, color: str = "auto"
) -> ControlSchedule:
    """ReLU schedule with 4*ceil(Nc/d) - 1 legs equivalent to the truncated one.

    Each truncated push/undo leg splits into the two-leg ReLU pair of
    decompose_leg, except the final cluster, which is realized by the
    three-leg hat of equal effect on the data (its field vanishes
    identically outside the cluster strip, so no undo is needed); this
    yields the switch count 4*ceil(Nc/d) - 2.
    """
    family, plan = _cluster_plan(pair, target_axis, color)
    legs: list[ControlLeg] = []
    for item in plan[:-1]:
        legs.extend(decompose_leg(item["push"]))
        legs.extend(decompose_leg(item["undo"]))
    last = plan[-1]
    legs.extend(_hat_legs(last["cluster"], last["tau"]))
    return ControlSchedule(
        legs=tuple(legs),
        target_axis=target_axis,
        swapped=family.color_clustered == "blue",
    )


def _theta(leg: ControlLeg) -> np.ndarray:
    return np.array(
        [float(v) for v in leg.a] + [float(leg.b)] + [float(v) for v in leg.w]
    )


def tv_seminorm(schedule: ControlSchedule) -> float:
    """Total variation of the control path: sum of Euclidean jump norms across switches."""
    legs = schedule.legs
    return float(
        sum(
            np.linalg.norm(_theta(b) - _theta(a))
            for a, b in zip(legs, legs[1:])
        )
    )


def tv_bound_report(schedule: ControlSchedule) -> dict:
    """The TV value against the bound 2M sqrt(2d^2+d).

    The bound presumes the control entries stay within sup-norm sqrt(2d+1);
    `premise` records whether that holds, and `within` whether the bound
    itself does.  Scaled-plane schedules (truncated/fem) may exceed the
    premise when a cluster margin is thin; the raw value is still reported.
    """
    if not schedule.legs:
        return {"tv": 0.0, "bound": 0.0, "premise": True, "within": True}
    d = schedule.legs[0].dim
    m = schedule.switches
    tv = tv_seminorm(schedule)
    bound = 2 * m * math.sqrt(2 * d * d + d)
    sup = max(float(np.abs(_theta(leg)).max()) for leg in schedule.legs)
    premise = sup <= math.sqrt(2 * d + 1) + 1e-12
    return {"tv": tv, "bound": bound, "premise": premise, "within": tv <= bound + 1e-9}


def _num_to_json(x):
    if _is_exact(x):
        q = mpq(x)
        return f"{q.numerator}/{q.denominator}"
    return float(x)


def _num_from_json(x):
    if isinstance(x, str):
        num, den = x.split("/")
        return mpq(int(num), int(den))
    return float(x)


def schedule_to_json(schedule: ControlSchedule) -> str:
    """Schedule JSON; exact rational entries serialize as 'num/den' strings."""
    return json.dumps(
        {
            "schema": 1,
            "activation": schedule.activation,
            "target_axis": schedule.target_axis,
            "swapped": schedule.swapped,
            "legs": [
                {
                    "a": [_num_to_json(v) for v in leg.a],
                    "b": _num_to_json(leg.b),
                    "w": [_num_to_json(v) for v in leg.w],
                    "tau": _num_to_json(leg.duration),
                }
                for leg in schedule.legs
            ],
        }
    )


def schedule_from_json(text: str) -> ControlSchedule:
    payload = json.loads(text)
    activation = payload["activation"]
    legs = tuple(
        ControlLeg(
            a=tuple(_num_from_json(v) for v in leg["a"]),
            b=_num_from_json(leg["b"]),
            w=tuple(_num_from_json(v) for v in leg["w"]),
            duration=_num_from_json(leg["tau"]),
            activation=activation,
        )
        for leg in payload["legs"]
    )
    return ControlSchedule(
        legs=legs,
        target_axis=payload["target_axis"],
        swapped=bool(payload.get("swapped", False)),
    )
