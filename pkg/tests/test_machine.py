"""Jam/steer/propagate cycle, steering planners, and the tendon baseline."""

import math

import numpy as np
import pytest

from jamftl import (ConservedPath, CycleStateError, ExtensionStrategy,
                    JointState, LimitExceeded, RobotConfig, RobotState,
                    TargetUnreachable, build_trajectory, execute_cycle,
                    forward_kinematics, plan_steering, tdcr_baseline_step)
from jamftl.machine import tdcr_command

CFG = RobotConfig()


def run_cycles(commands, strategy=ExtensionStrategy(0), cfg=CFG):
    state = RobotState.initial(cfg)
    path = ConservedPath(cfg)
    all_events = []
    for c in commands:
        state, path, events = execute_cycle(state, path, c, cfg.seg_length,
                                            strategy, cfg)
        all_events.extend(events)
    return state, path, all_events


def test_cycle_emits_thirteen_ordered_events():
    _, _, events = run_cycles([JointState(0.1, 0.0)])
    assert len(events) == 13
    assert [e.step_id for e in events] == [1, 2, 3, 4, 5, 6, 7, 8, 8, 8, 8, 8, 8]
    assert [e.action for e in events[:4]] == ["unjam", "propagate", "steer",
                                              "jam"]
    assert [e.action for e in events[4:7]] == ["unjam", "extend", "jam"]
    times = [e.time_s for e in events]
    assert times == sorted(times) and times[0] > 0


def test_strategy_sets_module_order():
    _, _, events = run_cycles([JointState(0.1, 0.0)], ExtensionStrategy(2))
    advanced = [e.fjm_index for e in events if e.action in ("propagate",
                                                            "extend")]
    assert advanced == [2, 3, 0, 1]
    assert ExtensionStrategy(1).order(4) == (1, 2, 3, 0)
    with pytest.raises(ValueError):
        ExtensionStrategy(4).order(4)


def test_cycle_boundary_invariant():
    state = RobotState.initial(CFG)
    assert state.at_cycle_boundary()
    state.fjms[1].jammed = False
    with pytest.raises(CycleStateError):
        execute_cycle(state, ConservedPath(CFG), JointState(), CFG.seg_length,
                      ExtensionStrategy(0), CFG)


def test_cycle_input_validation():
    state = RobotState.initial(CFG)
    path = ConservedPath(CFG)
    with pytest.raises(LimitExceeded):
        execute_cycle(state, path, JointState(math.radians(16), 0.0),
                      CFG.seg_length, ExtensionStrategy(0), CFG)
    with pytest.raises(ValueError):
        execute_cycle(state, path, JointState(), 0.5 * CFG.seg_length,
                      ExtensionStrategy(0), CFG)
    with pytest.raises(ValueError):
        execute_cycle(state, path, JointState(), 13 * CFG.seg_length,
                      ExtensionStrategy(0), CFG)


def test_conserved_path_is_append_only():
    state = RobotState.initial(CFG)
    path = ConservedPath(CFG)
    snapshots = []
    for k in range(3):
        state, path, _ = execute_cycle(state, path, JointState(0.05 * k, 0.3),
                                       CFG.seg_length, ExtensionStrategy(0),
                                       CFG)
        snapshots.append([s.position.copy() for s in path.samples])
    assert [len(s) for s in snapshots] == [1, 2, 3]
    for earlier, later in zip(snapshots, snapshots[1:]):
        for a, b in zip(earlier, later):
            assert np.array_equal(a, b)
    assert path.total_arclength == 3 * CFG.seg_length


def test_ideal_ftl_reproduces_forward_kinematics():
    rng = np.random.default_rng(5)
    commands = [JointState(rng.uniform(-CFG.sharp_limit, CFG.sharp_limit),
                           rng.uniform(0, 2 * math.pi))
                for _ in range(CFG.n_segments)]
    state, path, _ = run_cycles(commands)
    tip = forward_kinematics(state.joints, CFG)[-1].position
    ref = forward_kinematics(commands, CFG)[-1].position
    assert np.linalg.norm(tip - ref) <= 1e-9
    # The conserved path holds the commands themselves (as canonical
    # non-negative bends, so compare the 2-vector form).
    for held, cmd in zip(path.joints, commands):
        assert held.as_vector() == pytest.approx(cmd.as_vector(), abs=1e-12)


def test_plan_steering_follows_and_saturates():
    straight = build_trajectory("straight", "gentle", CFG)
    tip = forward_kinematics([], CFG)[-1]
    cmd = plan_steering(straight, tip, CFG)
    assert cmd.bend_angle == pytest.approx(0.0, abs=1e-12)

    # A trajectory bending harder than the limit is unreachable unless clipped.
    sched = [(CFG.sharp_limit, 0.0)] + [(0.0, 0.0)] * (CFG.n_segments - 1)
    hard = build_trajectory("custom", "sharp", CFG, custom_schedule=sched)
    off_tip = forward_kinematics([JointState(-0.1, 0.0)], CFG)[-1]
    with pytest.raises(TargetUnreachable):
        plan_steering(hard, off_tip, CFG)
    clipped = plan_steering(hard, off_tip, CFG, clip=True)
    assert clipped.bend_angle == pytest.approx(CFG.sharp_limit, abs=1e-12)


def test_tdcr_command_fits_a_uniform_arc():
    straight = build_trajectory("straight", "gentle", CFG)
    assert tdcr_command(straight, 5, CFG).bend_angle == 0.0
    c_shape = build_trajectory("C", "gentle", CFG)
    cmd = tdcr_command(c_shape, CFG.n_segments, CFG)
    assert 0.0 < cmd.bend_angle <= CFG.sharp_limit
    # The fit lands the arc tip near the path end (within a segment length).
    tip = forward_kinematics([cmd] * CFG.n_segments, CFG)[-1].position
    target = c_shape.point_at(c_shape.total_length)
    assert np.linalg.norm(tip - target) <= CFG.seg_length


def test_tdcr_baseline_never_jams():
    state = RobotState.initial(CFG)
    state, events = tdcr_baseline_step(state, JointState(0.1, 0.0),
                                       CFG.seg_length, CFG)
    assert all(not f.jammed for f in state.fjms)
    assert len(events) == 1 and events[0].action == "tdcr_step"
    # Compliant body tracks the command exactly without contact.
    assert state.joints[0].bend_angle == pytest.approx(0.1, abs=1e-9)
    with pytest.raises(LimitExceeded):
        tdcr_baseline_step(state, JointState(1.0, 0.0), CFG.seg_length, CFG)
