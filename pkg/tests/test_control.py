"""Tests for control legs, schedules, and the four synthesizers."""

import math

import numpy as np
import pytest
from gmpy2 import mpq

from sepflow.control import (
    TARGET_CLEARANCE,
    ControlLeg,
    ControlSchedule,
    _round_up_dyadic,
    decompose_leg,
    eval_activation,
    schedule_from_json,
    schedule_to_json,
    synth_canonical,
    synth_fem,
    synth_relu_decomposed,
    synth_truncated,
    tv_bound_report,
    tv_seminorm,
)
from sepflow.geometry import LabeledPair, sample_pair
from sepflow.separability import z_axis, z_perp


def _leg(a, b, w, tau=1.0, activation="relu"):
    return ControlLeg(a=a, b=b, w=w, duration=tau, activation=activation)


def test_eval_activation_values():
    assert eval_activation("relu", -2.0) == 0.0
    assert eval_activation("relu", 1.5) == 1.5
    assert eval_activation("truncated", -0.1) == 0.0
    assert eval_activation("truncated", 0.4) == 0.4
    assert eval_activation("truncated", 7.0) == 1.0
    assert eval_activation("fem", 0.0) == 1.0
    assert eval_activation("fem", -0.25) == 0.75
    assert eval_activation("fem", 1.5) == 0.0
    with pytest.raises(ValueError):
        eval_activation("tanh", 0.0)


def test_eval_activation_exact_types():
    v = eval_activation("relu", mpq(-1, 2))
    assert v == 0 and isinstance(v, type(mpq(0)))
    assert eval_activation("truncated", mpq(3, 2)) == mpq(1)
    assert eval_activation("fem", mpq(1, 3)) == mpq(2, 3)


def test_truncated_equals_relu_difference():
    for z in (-1.0, 0.0, 0.3, 0.999, 1.0, 2.5):
        assert eval_activation("truncated", z) == eval_activation(
            "relu", z
        ) - eval_activation("relu", z - 1.0)


def test_leg_validation():
    with pytest.raises(ValueError):
        _leg(a=(1.0, 0.0), b=0.0, w=(0.0, 2.0))
    with pytest.raises(ValueError):
        _leg(a=(1.0, 0.0), b=0.0, w=(0.0, 1.0), tau=0.0)
    with pytest.raises(ValueError):
        _leg(a=(1.0, 0.0), b=0.0, w=(0.0, 1.0), activation="step")


def test_schedule_invariants():
    legs = (_leg((1.0, 0.0), 0.0, (0.0, 1.0)), _leg((1.0, 0.0), -0.5, (0.0, -1.0)))
    sched = ControlSchedule(legs=legs, target_axis=2)
    assert sched.switches == 1
    assert sched.activation == "relu"
    with pytest.raises(ValueError):
        ControlSchedule(
            legs=(legs[0], _leg((1.0, 0.0), 0.0, (0.0, 1.0), activation="fem")),
            target_axis=2,
        )


def test_round_up_dyadic():
    for q in (mpq(1, 3), mpq(7, 10), mpq(355, 113)):
        r = _round_up_dyadic(q)
        assert r >= q
        assert r / q - 1 < mpq(1, 2) ** 250
        # denominator is a power of two
        den = int(r.denominator)
        assert den & (den - 1) == 0


def test_canonical_structure_on_alternating_pair():
    pair = LabeledPair(
        reds=[[0.1, 0.35], [0.5, 0.45]],
        blues=[[0.3, 0.55], [0.7, 0.65]],
    )
    sched = synth_canonical(pair, target_axis=2)
    assert z_axis(pair, 1) == 3
    assert sched.switches == 2
    assert sched.swapped  # lowest run on the separating axis is red
    assert sched.is_exact
    for m, leg in enumerate(sched.legs):
        assert leg.activation == "relu"
        assert leg.a == (mpq(1), mpq(0))
        sign = 1 if m % 2 == 0 else -1
        assert leg.w == (mpq(0), mpq(sign))
        assert leg.coupling() == 0
    # thresholds are the opposite-color gap midpoints, ascending
    assert [float(-leg.b) for leg in sched.legs] == pytest.approx([0.2, 0.4, 0.6])


def test_canonical_switch_count_is_best_axis_count():
    for seed in range(5):
        pair = sample_pair(3, 6, 6, seed=seed)
        sched = synth_canonical(pair)
        assert sched.switches == z_perp(pair)[0] - 1


def test_canonical_separable_pair_single_leg():
    pair = LabeledPair(
        reds=[[0.1, 0.2], [0.2, 0.8]],
        blues=[[0.8, 0.3], [0.9, 0.7]],
    )
    sched = synth_canonical(pair, target_axis=2)
    assert sched.switches == 0
    assert sched.swapped  # the single lowest run is red


def test_cluster_synth_switch_counts():
    # d=2 with 4 clustered points: ceil(4/2) = 2 clusters
    pair = sample_pair(2, 4, 4, seed=0)
    assert synth_truncated(pair).switches == 3
    assert synth_fem(pair).switches == 1
    assert synth_relu_decomposed(pair).switches == 6
    # d=3 with 7 clustered points: 3 clusters
    pair = sample_pair(3, 7, 9, seed=1)
    assert synth_truncated(pair).switches == 5
    assert synth_fem(pair).switches == 2
    assert synth_relu_decomposed(pair).switches == 10


def test_cluster_synth_legs_are_exact_and_decoupled():
    pair = sample_pair(2, 5, 5, seed=4)
    for synth in (synth_truncated, synth_fem, synth_relu_decomposed):
        sched = synth(pair)
        for leg in sched.legs:
            assert leg.is_exact
            assert leg.coupling() == 0


def test_swapped_flag_follows_clustered_color():
    pair = sample_pair(2, 6, 4, seed=2)  # blues are fewer: they get clustered
    assert synth_truncated(pair).swapped
    assert not synth_truncated(pair, color="red").swapped


def test_decompose_leg():
    leg = _leg(a=(mpq(2), mpq(0)), b=mpq(1, 4), w=(mpq(0), mpq(1)), tau=mpq(3),
               activation="truncated")
    first, second = decompose_leg(leg)
    assert first.activation == "relu" and second.activation == "relu"
    assert first.a == leg.a and second.a == leg.a
    assert second.b == leg.b - 1
    assert second.w == (mpq(0), mpq(-1))
    assert first.duration == second.duration == leg.duration
    with pytest.raises(AssertionError):
        decompose_leg(_leg(a=(1.0, 0.0), b=0.0, w=(1.0, 0.0), activation="truncated"))


def test_tv_seminorm_hand_values():
    base = _leg((1.0, 0.0), 0.0, (0.0, 1.0))
    assert tv_seminorm(ControlSchedule(legs=(base,), target_axis=2)) == 0.0
    shifted = _leg((1.0, 0.0), -0.5, (0.0, 1.0))
    sched = ControlSchedule(legs=(base, shifted), target_axis=2)
    assert tv_seminorm(sched) == pytest.approx(0.5)
    flipped = _leg((1.0, 0.0), -0.5, (0.0, -1.0))
    sched = ControlSchedule(legs=(base, flipped), target_axis=2)
    assert tv_seminorm(sched) == pytest.approx(math.hypot(0.5, 2.0))


def test_tv_bound_holds_for_canonical():
    for seed in range(3):
        pair = sample_pair(2, 5, 5, seed=seed)
        rep = tv_bound_report(synth_canonical(pair))
        assert rep["premise"] and rep["within"]
        assert rep["tv"] <= rep["bound"]


def test_target_clearance_is_material():
    assert TARGET_CLEARANCE > 0


def test_schedule_json_round_trip_exact():
    pair = sample_pair(2, 4, 4, seed=7)
    for synth in (synth_canonical, synth_truncated, synth_fem):
        sched = synth(pair)
        back = schedule_from_json(schedule_to_json(sched))
        assert back.target_axis == sched.target_axis
        assert back.swapped == sched.swapped
        assert len(back.legs) == len(sched.legs)
        for a, b in zip(back.legs, sched.legs):
            assert a.a == b.a and a.b == b.b and a.w == b.w
            assert a.duration == b.duration and a.activation == b.activation
        assert back.is_exact == sched.is_exact
