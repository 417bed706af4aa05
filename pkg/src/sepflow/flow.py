"""Simulation of single-neuron neural-ODE flows x' = w * g(a.x + b).

The scalar s = a.x + b obeys the closed equation s' = c * g(s) with
c = a.w, and g is piecewise linear with at most four pieces, so s(t) is
computed in closed form piece by piece (affine or exponential segments,
g >= 0 makes s monotone).  The point update follows from the integral of
the activation along the leg: x(tau) = x(0) + w * (s(tau) - s(0)) / c,
and x(0) + tau * g(s(0)) * w when c = 0.

Synthesized schedules always have c = 0; rational legs applied to rational
coordinates are then evolved exactly, which the canonical construction
requires (see the control module).  A fixed-step Runge-Kutta integrator is
provided as an independent cross-check.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq

from .control import ControlLeg, ControlSchedule, eval_activation
from .geometry import LabeledPair

__all__ = [
    "flow_leg_exact",
    "flow_leg_rk4",
    "simulate",
    "certify",
    "SimulationResult",
    "simulation_to_json",
    "write_trajectory_csv",
]

# g(s) = alpha * s + beta on [lo, hi), per activation
_INF = math.inf
_PIECES = {
    "relu": ((-_INF, 0.0, 0.0, 0.0), (0.0, _INF, 1.0, 0.0)),
    "truncated": ((-_INF, 0.0, 0.0, 0.0), (0.0, 1.0, 1.0, 0.0), (1.0, _INF, 0.0, 1.0)),
    "fem": (
        (-_INF, -1.0, 0.0, 0.0),
        (-1.0, 0.0, 1.0, 1.0),
        (0.0, 1.0, -1.0, 1.0),
        (1.0, _INF, 0.0, 0.0),
    ),
}
_COUPLING_SNAP = 1e-12


def _piece_at(pieces, s: float, direction: float) -> int:
    """Index of the piece containing s; boundary points resolve toward the motion."""
    for i, (lo, hi, _, _) in enumerate(pieces):
        if lo < s < hi:
            return i
        if s == lo:
            return i if direction >= 0 else i - 1
    return len(pieces) - 1


def _evolve_s(kind: str, s0: float, c: float, tau: float) -> float:
    """Closed-form value of s(tau) for s' = c * g(s), s(0) = s0."""
    pieces = _PIECES[kind]
    s = s0
    t_left = tau
    direction = 1.0 if c > 0 else -1.0
    while t_left > 0:
        lo, hi, alpha, beta = pieces[_piece_at(pieces, s, direction)]
        rate = c * (alpha * s + beta)
        if rate == 0.0:
            break  # g vanishes on this piece or s sits at an equilibrium
        bound = hi if rate > 0 else lo
        if alpha == 0.0:
            t_hit = _INF if math.isinf(bound) else (bound - s) / (c * beta)
            if t_hit > t_left:
                s += c * beta * t_left
                break
        else:
            s_star = -beta / alpha
            if math.isinf(bound):
                t_hit = _INF
            else:
                ratio = (bound - s_star) / (s - s_star)
                # ratio <= 0 means the boundary lies beyond the equilibrium
                t_hit = math.log(ratio) / (c * alpha) if ratio > 0 else _INF
            if t_hit > t_left:
                s = s_star + (s - s_star) * math.exp(c * alpha * t_left)
                break
        s = bound
        t_left -= t_hit
    return s


def flow_leg_exact(x0, leg: ControlLeg):
    """Endpoint of one leg from x0, in closed form.

    With rational entries and a.w = 0 the result is exact; otherwise float.
    Accepts a single point (1-D sequence), returns the same representation
    (list of rationals or float ndarray).
    """
    exact = leg.is_exact and all(
        isinstance(v, (type(mpq(0)), int)) for v in x0
    )
    if exact:
        c = leg.coupling()
        if c != 0:
            raise ValueError("exact evolution requires a.w = 0")
        s0 = sum(ai * xi for ai, xi in zip(leg.a, x0) if ai != 0) + leg.b
        g = eval_activation(leg.activation, s0)
        if g == 0:
            return list(x0)
        step = leg.duration * g
        return [xi + step * wi if wi != 0 else xi for xi, wi in zip(x0, leg.w)]

    x = np.array([float(v) for v in x0])
    a = np.array([float(v) for v in leg.a])
    w = np.array([float(v) for v in leg.w])
    b, tau = float(leg.b), float(leg.duration)
    c = float(a @ w)
    scale = max(float(np.linalg.norm(a)), 1.0)
    s0 = float(a @ x + b)
    if abs(c) <= _COUPLING_SNAP * scale:
        return x + tau * eval_activation(leg.activation, s0) * w
    s_final = _evolve_s(leg.activation, s0, c, tau)
    return x + ((s_final - s0) / c) * w


def flow_leg_rk4(points: np.ndarray, leg: ControlLeg, step: float = 1e-4) -> np.ndarray:
    """Classic fixed-step Runge-Kutta endpoint for one leg, vectorized over rows."""
    a = np.array([float(v) for v in leg.a])
    w = np.array([float(v) for v in leg.w])
    b, tau = float(leg.b), float(leg.duration)
    kind = leg.activation

    def f(x):
        s = x @ a + b
        if kind == "relu":
            g = np.maximum(s, 0.0)
        elif kind == "truncated":
            g = np.clip(s, 0.0, 1.0)
        else:
            g = np.maximum(1.0 - np.abs(s), 0.0)
        return g[:, None] * w

    n = max(1, math.ceil(tau / step))
    h = tau / n
    x = np.asarray(points, dtype=float).copy()
    if x.ndim == 1:
        x = x[None, :]
        squeeze = True
    else:
        squeeze = False
    for _ in range(n):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x[0] if squeeze else x


def _leg_exact_rows(rows, leg: ControlLeg) -> None:
    """One exact rational leg over a list of mutable coordinate lists, in place.

    Hoists the per-leg constants (sparse nonzero entries of a and w, the
    a.w = 0 check) out of the point loop; the dominant cost is the single
    big-rational product duration * g per moving point.
    """
    if leg.coupling() != 0:
        raise ValueError("exact evolution requires a.w = 0")
    b, tau, kind = leg.b, leg.duration, leg.activation
    a_nz = [(j, aj) for j, aj in enumerate(leg.a) if aj != 0]
    w_nz = [(j, wj, wj == 1, wj == -1) for j, wj in enumerate(leg.w) if wj != 0]
    for row in rows:
        s = b
        for j, aj in a_nz:
            s += row[j] if aj == 1 else aj * row[j]
        g = eval_activation(kind, s)
        if g == 0:
            continue
        step = tau if g == 1 else tau * g
        for j, wj, plus, minus in w_nz:
            if plus:
                row[j] = row[j] + step
            elif minus:
                row[j] = row[j] - step
            else:
                row[j] = row[j] + step * wj


def _pick_arithmetic(schedule: ControlSchedule, mode: str, arithmetic: str) -> bool:
    """Whether to simulate in exact rational arithmetic."""
    if mode != "exact" or arithmetic == "float":
        return False
    if arithmetic == "rational":
        if not schedule.is_exact:
            raise ValueError("rational arithmetic requires an exact schedule")
        return True
    if arithmetic == "auto":
        return schedule.is_exact
    raise ValueError("arithmetic must be 'auto', 'rational' or 'float'")


def simulate(
    points: np.ndarray,
    schedule: ControlSchedule,
    mode: str = "exact",
    step: float = 1e-4,
    record: bool = False,
    arithmetic: str = "auto",
):
    """Final positions of `points` (rows) under the whole schedule.

    mode "exact" uses the closed-form leg evolution; mode "rk4" uses
    fixed-step Runge-Kutta with `step`.  In exact mode, `arithmetic`
    selects the number representation: "auto" runs rational end to end
    when the schedule carries rational entries, "rational" requires it,
    "float" forces double precision (adequate when a clearance margin
    absorbs rounding, orders of magnitude faster).  With record=True also
    returns the list of position snapshots after each leg (floats,
    possibly overflowing for schedules whose intermediates exceed float
    range).
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    snapshots = [pts.copy()] if record else None

    if mode == "rk4":
        x = pts.copy()
        for leg in schedule.legs:
            x = flow_leg_rk4(x, leg, step)
            if record:
                snapshots.append(x.copy())
        out = x
    elif mode == "exact":
        if _pick_arithmetic(schedule, mode, arithmetic):
            rows = [[mpq(float(v)) for v in row] for row in pts]
            for leg in schedule.legs:
                _leg_exact_rows(rows, leg)
                if record:
                    snapshots.append(_to_float(rows))
            out = _to_float(rows)
            if record:
                snapshots[-1] = out
        else:
            x = pts.copy()
            for leg in schedule.legs:
                x = _flow_leg_float(x, leg)
                if record:
                    snapshots.append(x.copy())
            out = x
    else:
        raise ValueError("mode must be 'exact' or 'rk4'")
    if single:
        out = out[0]
        if record:
            snapshots = [s[0] for s in snapshots]
    return (out, snapshots) if record else out


def _flow_leg_float(points: np.ndarray, leg: ControlLeg) -> np.ndarray:
    """Closed-form float leg over a position matrix; vectorized when a.w snaps to 0."""
    a = np.array([float(v) for v in leg.a])
    w = np.array([float(v) for v in leg.w])
    b, tau = float(leg.b), float(leg.duration)
    c = float(a @ w)
    if abs(c) <= _COUPLING_SNAP * max(float(np.linalg.norm(a)), 1.0):
        s = points @ a + b
        kind = leg.activation
        if kind == "relu":
            g = np.maximum(s, 0.0)
        elif kind == "truncated":
            g = np.clip(s, 0.0, 1.0)
        else:
            g = np.maximum(1.0 - np.abs(s), 0.0)
        return points + tau * g[:, None] * w
    return np.array([flow_leg_exact(row, leg) for row in points])


def _to_float(rows) -> np.ndarray:
    def f(v):
        try:
            return float(v)
        except OverflowError:
            return math.inf if v > 0 else -math.inf

    return np.array([[f(v) for v in row] for row in rows])


@dataclass(frozen=True)
class SimulationResult:
    """Certification outcome: strip membership after the flow.

    Red points must end in {x_target > 1} and blue in {x_target <= 1},
    with the strips exchanged when the schedule was synthesized swapped.
    Displacements are sup-norm maxima over each color class (inf when a
    float simulation overflowed).
    """

    ok: bool
    red_ok: bool
    blue_ok: bool
    max_red_displacement: float
    max_blue_displacement: float
    final: np.ndarray
    swapped: bool
    exact: bool


def certify(
    pair: LabeledPair,
    schedule: ControlSchedule,
    mode: str = "exact",
    step: float = 1e-4,
    arithmetic: str = "auto",
) -> SimulationResult:
    """Run the flow on the pair and check the classification strips.

    Rational simulations also compare against the strip boundary in exact
    arithmetic; the returned final positions are floats for inspection only.
    """
    axis = schedule.target_axis - 1
    pts = pair.points()
    n_red = pair.n_red
    exact = mode == "exact" and _pick_arithmetic(schedule, mode, arithmetic)

    if exact:
        rows = [[mpq(float(v)) for v in row] for row in pts]
        for leg in schedule.legs:
            _leg_exact_rows(rows, leg)
        above = [row[axis] > 1 for row in rows]
        final = _to_float(rows)
    else:
        final = simulate(pts, schedule, mode=mode, step=step, arithmetic=arithmetic)
        above = [bool(v > 1) for v in final[:, axis]]

    red_above, blue_above = above[:n_red], above[n_red:]
    if schedule.swapped:
        red_ok = not any(red_above)
        blue_ok = all(blue_above)
    else:
        red_ok = all(red_above)
        blue_ok = not any(blue_above)

    disp = np.abs(final - pts)
    disp = np.where(np.isnan(disp), math.inf, disp)
    max_red = float(disp[:n_red].max()) if n_red else 0.0
    max_blue = float(disp[n_red:].max()) if n_red < len(pts) else 0.0
    return SimulationResult(
        ok=red_ok and blue_ok,
        red_ok=red_ok,
        blue_ok=blue_ok,
        max_red_displacement=max_red,
        max_blue_displacement=max_blue,
        final=final,
        swapped=schedule.swapped,
        exact=exact,
    )


def simulation_to_json(result: SimulationResult) -> str:
    def clean(v: float):
        return v if math.isfinite(v) else repr(v)

    return json.dumps(
        {
            "schema": 1,
            "ok": result.ok,
            "red_ok": result.red_ok,
            "blue_ok": result.blue_ok,
            "max_red_displacement": clean(result.max_red_displacement),
            "max_blue_displacement": clean(result.max_blue_displacement),
            "swapped": result.swapped,
            "exact": result.exact,
            "final": [[clean(float(v)) for v in row] for row in result.final],
        }
    )


def write_trajectory_csv(path, snapshots, labels) -> None:
    """Positions after each leg, one row per (stage, point): stage, point, label, x1..xd."""
    snaps = [np.atleast_2d(s) for s in snapshots]
    d = snaps[0].shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "point", "label"] + [f"x{i+1}" for i in range(d)])
        for stage, snap in enumerate(snaps):
            for i, row in enumerate(snap):
                writer.writerow([stage, i, int(labels[i])] + [repr(float(v)) for v in row])
