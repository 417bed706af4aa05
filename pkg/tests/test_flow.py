"""Tests for closed-form leg evolution, simulation, and certification."""

import json
import math

import numpy as np
import pytest
from gmpy2 import mpq

from sepflow.control import (
    ControlLeg,
    ControlSchedule,
    synth_canonical,
    synth_fem,
    synth_relu_decomposed,
    synth_truncated,
)
from sepflow.flow import (
    certify,
    flow_leg_exact,
    flow_leg_rk4,
    simulate,
    simulation_to_json,
    write_trajectory_csv,
)
from sepflow.geometry import sample_pair


def _leg(a, b, w, tau=1.0, activation="relu"):
    return ControlLeg(a=a, b=b, w=w, duration=tau, activation=activation)


def test_decoupled_leg_moves_linearly():
    # a.w = 0: the field is constant along the trajectory
    leg = _leg((1.0, 0.0), 0.0, (0.0, 1.0))
    assert flow_leg_exact([1.0, 0.0], leg) == pytest.approx([1.0, 1.0])
    assert flow_leg_exact([-2.0, 0.5], leg) == pytest.approx([-2.0, 0.5])


def test_coupled_relu_is_exponential():
    leg = _leg((1.0, 0.0), 0.0, (1.0, 0.0))
    out = flow_leg_exact([1.0, 0.0], leg)
    assert out == pytest.approx([math.e, 0.0], rel=1e-12)
    # contracting direction: s' = -s
    leg = _leg((1.0, 0.0), 0.0, (-1.0, 0.0))
    out = flow_leg_exact([1.0, 0.0], leg)
    assert out == pytest.approx([math.exp(-1.0), 0.0], rel=1e-12)


def test_relu_dead_zone_is_static():
    leg = _leg((1.0, 0.0), 0.0, (1.0, 0.0))
    assert flow_leg_exact([-0.5, 0.3], leg) == pytest.approx([-0.5, 0.3])


def test_truncated_saturates_at_unit_speed():
    leg = _leg((1.0, 0.0), 0.0, (1.0, 0.0), activation="truncated")
    out = flow_leg_exact([2.0, 0.0], leg)
    assert out == pytest.approx([3.0, 0.0])


def test_fem_ridge_moves_at_unit_speed():
    leg = _leg((1.0, 0.0), 0.0, (0.0, 1.0), activation="fem")
    assert flow_leg_exact([0.0, 0.3], leg) == pytest.approx([0.0, 1.3])
    # outside the support nothing moves
    assert flow_leg_exact([1.5, 0.3], leg) == pytest.approx([1.5, 0.3])


def test_exact_rational_leg_evolution():
    leg = _leg(
        (mpq(1), mpq(0)), mpq(0), (mpq(0), mpq(1)), tau=mpq(1, 3), activation="relu"
    )
    out = flow_leg_exact([mpq(1, 2), mpq(0)], leg)
    assert out == [mpq(1, 2), mpq(1, 6)]


def test_rk4_matches_closed_form():
    legs = [
        _leg((1.0, 0.0), 0.0, (1.0, 0.0)),
        _leg((1.0, 0.0), 0.0, (0.0, 1.0)),
        _leg((0.6, 0.8), -0.1, (0.8, -0.6), activation="truncated"),
    ]
    pts = np.array([[1.0, 0.0], [0.2, 0.7], [-0.4, 0.9]])
    for leg in legs:
        exact = np.vstack([flow_leg_exact(p, leg) for p in pts])
        rk4 = flow_leg_rk4(pts, leg, step=1e-4)
        assert np.abs(exact - rk4).max() < 1e-8


def test_rk4_fourth_order_convergence():
    leg = _leg((1.0, 0.0), 0.0, (1.0, 0.0))
    x0 = np.array([[1.0, 0.0]])
    truth = np.array([math.e, 0.0])
    err = [
        np.abs(flow_leg_rk4(x0, leg, step=h)[0] - truth).max() for h in (0.1, 0.05)
    ]
    assert err[0] / err[1] > 12.0  # ~16 for a smooth field


def test_simulate_split_leg_composition():
    whole = ControlSchedule(
        legs=(_leg((1.0, 0.0), 0.0, (1.0, 0.0), tau=1.0),), target_axis=1
    )
    halves = ControlSchedule(
        legs=(
            _leg((1.0, 0.0), 0.0, (1.0, 0.0), tau=0.5),
            _leg((1.0, 0.0), 0.0, (1.0, 0.0), tau=0.5),
        ),
        target_axis=1,
    )
    pts = np.array([[1.0, 0.0], [0.3, 0.2]])
    a = simulate(pts, whole)
    b = simulate(pts, halves)
    assert np.abs(a - b).max() < 1e-12


def test_simulate_records_snapshots():
    pair = sample_pair(2, 3, 3, seed=0)
    sched = synth_canonical(pair)
    final, snaps = simulate(pair.points(), sched, record=True)
    assert len(snaps) == len(sched.legs) + 1
    assert np.array_equal(snaps[0], pair.points())
    assert np.array_equal(snaps[-1], final)


def test_simulate_rejects_bad_mode_and_arithmetic():
    pair = sample_pair(2, 2, 2, seed=1)
    sched = synth_canonical(pair)
    with pytest.raises(ValueError):
        simulate(pair.points(), sched, mode="euler")
    with pytest.raises(ValueError):
        simulate(pair.points(), sched, arithmetic="interval")
    float_sched = ControlSchedule(
        legs=(_leg((1.0, 0.0), 0.0, (0.0, 1.0)),), target_axis=2
    )
    with pytest.raises(ValueError):
        simulate(pair.points(), float_sched, arithmetic="rational")


def test_certify_canonical_random_pairs():
    for seed in range(3):
        pair = sample_pair(2, 5, 5, seed=seed)
        sched = synth_canonical(pair)
        res = certify(pair, sched)
        assert res.ok and res.red_ok and res.blue_ok
        assert res.exact


def test_certify_cluster_synths():
    pair = sample_pair(2, 5, 5, seed=7)
    for synth in (synth_truncated, synth_fem, synth_relu_decomposed):
        sched = synth(pair)
        res = certify(pair, sched, arithmetic="rational")
        assert res.ok
        # the non-clustered color must not move at all (up to the exact
        # rationalization of the margin scaling)
        assert res.max_blue_displacement < 1e-9


def test_certify_honors_swap():
    pair = sample_pair(2, 6, 4, seed=2)  # blues clustered, strips exchanged
    sched = synth_truncated(pair)
    assert sched.swapped
    res = certify(pair, sched, arithmetic="rational")
    assert res.ok
    axis = sched.target_axis - 1
    assert np.all(res.final[pair.n_red :, axis] > 1.0)
    assert np.all(res.final[: pair.n_red, axis] <= 1.0)


def test_certify_rk4_mode():
    pair = sample_pair(2, 4, 4, seed=3)
    sched = synth_fem(pair)
    res = certify(pair, sched, mode="rk4", step=1e-3)
    assert res.ok and not res.exact


def test_simulation_json():
    pair = sample_pair(2, 3, 3, seed=5)
    res = certify(pair, synth_canonical(pair))
    payload = json.loads(simulation_to_json(res))
    assert payload["ok"] is True
    assert len(payload["final"]) == 6
    assert isinstance(payload["max_blue_displacement"], (int, float))


def test_write_trajectory_csv(tmp_path):
    pair = sample_pair(2, 3, 3, seed=4)
    sched = synth_fem(pair)
    _, snaps = simulate(pair.points(), sched, record=True, arithmetic="float")
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, snaps, pair.labels())
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "stage,point,label,x1,x2"
    assert len(lines) == 1 + len(snaps) * 6
