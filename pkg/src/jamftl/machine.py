"""Jam/unjam/propagate cycle state machine and the tendon-only baseline.

One cycle: unjam the first jamming module, feed the base forward (the body
slides along the still-jammed modules, which hold the committed shape), steer
the newly fed head joints with the tendons, jam the advanced module to commit
the new shape, then bring the remaining modules forward one at a time in the
strategy order. The tendons stay slack away from the head, so committed
joints are disturbed only through contact.

The tendon-only baseline never jams: tendon tension curves the whole
compliant body toward the current command, so shape is whatever equilibrium
yields under contact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CycleStateError, LimitExceeded, TargetUnreachable
from .geometry import (JointState, Pose, RobotConfig, forward_kinematics,
                       joint_channel_lengths)
from .statics import (EquilibriumProblem, StiffnessModel, solve_equilibrium)

BOUNDARY_TOL = 1e-9

# Default logical duration of every cycle sub-step, seconds (vacuum jam and
# unjam actuation time; used for event timestamps only, never for dynamics).
SUBSTEP_DURATION = 2.0


@dataclass
class FjmState:
    """One fiber jamming module: rigid/soft flag plus how deep its tip sits
    in the body, as arc length from the base outlet."""

    jammed: bool = True
    insertion_depth: float = 0.0


@dataclass(frozen=True)
class ExtensionStrategy:
    """Which module advances first each cycle; the rest follow clockwise."""

    first_fjm: int = 0

    def order(self, n_fjms: int) -> tuple:
        if not 0 <= self.first_fjm < n_fjms:
            raise ValueError("first_fjm out of range")
        return tuple((self.first_fjm + k) % n_fjms for k in range(n_fjms))


@dataclass(frozen=True)
class PathSample:
    """One committed joint frame on the conserved path."""

    position: np.ndarray
    tangent: np.ndarray
    bend_plane_ref: np.ndarray  # local +x of the frame, azimuth reference


@dataclass
class ConservedPath:
    """World-frame shape held by the jammed modules; append-only."""

    cfg: RobotConfig
    joints: list = field(default_factory=list)     # committed JointState
    samples: list = field(default_factory=list)    # PathSample per joint
    total_arclength: float = 0.0

    def append_committed(self, new_joints) -> None:
        self.joints.extend(new_joints)
        poses = forward_kinematics(self.joints, self.cfg)
        for pose in poses[len(self.samples) + 1:]:
            self.samples.append(PathSample(position=pose.position,
                                           tangent=pose.tangent,
                                           bend_plane_ref=pose.orientation[:, 0]))
        self.total_arclength = len(self.joints) * self.cfg.seg_length

    def tip_pose(self) -> Pose:
        return forward_kinematics(self.joints, self.cfg)[-1]


@dataclass
class RobotState:
    """Current body: one joint per inserted segment, module states, base feed
    and the head-joint tendon length targets."""

    joints: list = field(default_factory=list)
    fjms: list = field(default_factory=list)
    base_insertion: float = 0.0
    tendon_commands: tuple = (0.0, 0.0, 0.0, 0.0)

    @staticmethod
    def initial(cfg: RobotConfig) -> "RobotState":
        zero = joint_channel_lengths(JointState(), cfg)
        return RobotState(joints=[],
                          fjms=[FjmState() for _ in range(cfg.n_fjms)],
                          base_insertion=0.0,
                          tendon_commands=zero.tendon)

    def at_cycle_boundary(self) -> bool:
        depths = [f.insertion_depth for f in self.fjms]
        return (all(f.jammed for f in self.fjms)
                and max(depths) - min(depths) <= BOUNDARY_TOL)


@dataclass(frozen=True)
class CycleEvent:
    time_s: float
    step_id: int
    fjm_index: int      # -1 for whole-body actions
    action: str
    base_insertion: float


def _free_stiffness(command: JointState, cfg: RobotConfig,
                    stiffness: StiffnessModel) -> float:
    """Tracking stiffness of the steering zone; channel friction past the
    gentle bend softens it by the friction multiplier."""
    k = stiffness.k_soft
    if abs(command.bend_angle) > cfg.gentle_limit + 1e-12:
        k = k / stiffness.friction_multiplier
    return k


def _solve(joints_rest, stiffness_per_joint, initial, cfg, stiffness,
           contacts):
    problem = EquilibriumProblem(rest=np.array([j.as_vector() for j in joints_rest])
                                 if joints_rest else np.zeros((0, 2)),
                                 stiffness=np.asarray(stiffness_per_joint, float),
                                 contacts=contacts, bound=cfg.sharp_limit,
                                 cfg=cfg, k_contact=stiffness.k_contact)
    if problem.n_joints == 0:
        return problem, np.zeros(0)
    q0 = np.array([j.as_vector() for j in initial]).ravel()
    return problem, solve_equilibrium(problem, q0)


def execute_cycle(state: RobotState, path: ConservedPath, steer: JointState,
                  advance: float, strategy: ExtensionStrategy,
                  cfg: RobotConfig, stiffness: StiffnessModel | None = None,
                  contacts=(), recorder=None, start_time: float = 0.0,
                  substep_duration: float = SUBSTEP_DURATION):
    """Run one full jam/steer/propagate cycle.

    Returns (state, path, events). ``recorder``, when given, is called as
    recorder(time_s, step_id, joints, problem, q) after every sub-step with
    the equilibrium configuration of the whole body.
    """
    stiffness = stiffness or StiffnessModel()
    if not state.at_cycle_boundary():
        raise CycleStateError("cycle must start with all modules jammed at "
                              "equal insertion depths")
    if abs(steer.bend_angle) > cfg.sharp_limit + 1e-12:
        raise LimitExceeded(f"steer bend {steer.bend_angle:.4f} rad exceeds "
                            f"the sharp limit {cfg.sharp_limit:.4f} rad")
    n_new = advance / cfg.seg_length
    if advance <= 0 or abs(n_new - round(n_new)) > 1e-9:
        raise ValueError("advance must be a positive whole number of segments")
    n_new = int(round(n_new))
    if len(state.joints) + n_new > cfg.n_segments:
        raise ValueError("advance would exceed the robot length")

    order = strategy.order(cfg.n_fjms)
    first = order[0]
    events = []
    clock = start_time

    def emit(step_id, fjm_index, action):
        nonlocal clock
        clock += substep_duration
        events.append(CycleEvent(time_s=clock, step_id=step_id,
                                 fjm_index=fjm_index, action=action,
                                 base_insertion=state.base_insertion))

    def settle(step_id, rest_joints, k_free):
        """Equilibrium of committed + free joints; returns solved free states."""
        n_locked = len(path.joints)
        rest = list(path.joints) + list(rest_joints)
        ks = [stiffness.k_jam] * n_locked + [k_free] * len(rest_joints)
        problem, q = _solve(rest, ks, state.joints, cfg, stiffness, contacts)
        solved = [JointState.from_vector(q[2 * i:2 * i + 2])
                  for i in range(len(rest))]
        state.joints = solved
        if recorder is not None:
            recorder(clock, step_id, list(solved), problem, q)
        return solved[n_locked:]

    # Step 1: unjam the first module.
    state.fjms[first].jammed = False
    emit(1, first, "unjam")

    # Step 2: feed the base; new joints enter straight; the unjammed module
    # advances with the body while the jammed ones hold the committed shape.
    state.base_insertion += advance
    state.joints = state.joints + [JointState() for _ in range(n_new)]
    state.fjms[first].insertion_depth += advance
    emit(2, first, "propagate")
    new_rest = [JointState() for _ in range(n_new)]
    settle(2, new_rest, stiffness.k_soft)

    # Step 3: tendons steer the head joints to the command.
    state.tendon_commands = joint_channel_lengths(steer, cfg).tendon
    emit(3, -1, "steer")
    new_rest = [steer for _ in range(n_new)]
    free = settle(3, new_rest, _free_stiffness(steer, cfg, stiffness))

    # Step 4: jam the advanced module, committing the solved head shape.
    state.fjms[first].jammed = True
    path.append_committed(free)
    emit(4, first, "jam")
    settle(4, [], stiffness.k_soft)

    # Steps 5-7: bring the second module forward; step 8 repeats for the rest.
    for k, fjm in enumerate(order[1:]):
        ids = (5, 6, 7) if k == 0 else (8, 8, 8)
        state.fjms[fjm].jammed = False
        emit(ids[0], fjm, "unjam")
        state.fjms[fjm].insertion_depth += advance
        emit(ids[1], fjm, "extend")
        state.fjms[fjm].jammed = True
        emit(ids[2], fjm, "jam")
        settle(ids[2], [], stiffness.k_soft)

    assert state.at_cycle_boundary()
    return state, path, events


def plan_steering(trajectory, tip: Pose, cfg: RobotConfig,
                  slack: float = 0.0, clip: bool = False) -> JointState:
    """Bend command aligning the next segment with the trajectory tangent one
    segment ahead of the tip. Raises TargetUnreachable when the required bend
    exceeds the sharp limit by more than ``slack``; with ``clip`` the command
    saturates at the limit instead (an off-path body steering back as hard as
    it can)."""
    s_tip = trajectory.arc_position_of(tip.position)
    # Sample the look-ahead tangent mid-segment: the polyline tangent is
    # constant per segment and the midpoint is robust to small tip drift.
    target = trajectory.tangent_at(s_tip + 0.5 * cfg.seg_length)
    local = tip.orientation.T @ target
    local = local / np.linalg.norm(local)
    bend = math.acos(float(np.clip(local[2], -1.0, 1.0)))
    if bend > cfg.sharp_limit + slack + 1e-12 and not clip:
        raise TargetUnreachable(
            f"required bend {math.degrees(bend):.2f} deg exceeds the "
            f"{math.degrees(cfg.sharp_limit):.2f} deg limit")
    if bend < 1e-12:
        return JointState(0.0, 0.0)
    azimuth = math.atan2(float(local[1]), float(local[0]))
    return JointState(min(bend, cfg.sharp_limit), azimuth)


def tdcr_command(trajectory, n_joints: int, cfg: RobotConfig) -> JointState:
    """Steering command of the tendon-only baseline: the uniform per-joint
    bend whose tip lands closest to the path point at the tip's arc length.

    A single tendon section curves every joint equally, so the baseline can
    only reach points on constant-curvature arcs; on multi-section paths the
    best fit cuts the corner. The fit is a deterministic 1-D search over the
    bend angle in the plane containing the target.
    """
    if n_joints <= 0:
        return JointState(0.0, 0.0)
    target = trajectory.point_at(min(n_joints * cfg.seg_length,
                                     trajectory.total_length))
    radial = math.hypot(float(target[0]), float(target[1]))
    if radial < 1e-12:
        return JointState(0.0, 0.0)
    azimuth = math.atan2(float(target[1]), float(target[0]))
    js = np.arange(1, n_joints + 1)

    def tip_error(theta: float) -> float:
        # Planar arc chain: joint j tilts the next segment to angle j*theta.
        r = float(np.sum(np.sin(js * theta))) * cfg.seg_length
        z = float(np.sum(np.cos(js * theta))) * cfg.seg_length
        return (r - radial) ** 2 + (z - float(target[2])) ** 2

    thetas = np.linspace(0.0, cfg.sharp_limit, 257)
    errors = [tip_error(t) for t in thetas]
    best = int(np.argmin(errors))
    lo = thetas[max(best - 1, 0)]
    hi = thetas[min(best + 1, len(thetas) - 1)]
    res = minimize_scalar(tip_error, bounds=(lo, hi), method="bounded")
    theta = float(res.x) if res.fun <= errors[best] else float(thetas[best])
    return JointState(theta, azimuth)


def tdcr_baseline_step(state: RobotState, steer: JointState, advance: float,
                       cfg: RobotConfig, stiffness: StiffnessModel | None = None,
                       contacts=(), recorder=None, start_time: float = 0.0,
                       substep_duration: float = SUBSTEP_DURATION):
    """One feed step with every module permanently unjammed.

    Tendon tension bends the entire compliant body toward the current
    command (single-section behavior); nothing locks the committed shape.
    Returns (state, events).
    """
    stiffness = stiffness or StiffnessModel()
    if abs(steer.bend_angle) > cfg.sharp_limit + 1e-12:
        raise LimitExceeded("steer exceeds the sharp limit")
    n_new = advance / cfg.seg_length
    if advance <= 0 or abs(n_new - round(n_new)) > 1e-9:
        raise ValueError("advance must be a positive whole number of segments")
    n_new = int(round(n_new))
    if len(state.joints) + n_new > cfg.n_segments:
        raise ValueError("advance would exceed the robot length")

    for f in state.fjms:
        f.jammed = False
    state.base_insertion += advance
    state.joints = state.joints + [JointState() for _ in range(n_new)]
    state.tendon_commands = joint_channel_lengths(steer, cfg).tendon
    clock = start_time + substep_duration
    events = [CycleEvent(time_s=clock, step_id=2, fjm_index=-1,
                         action="tdcr_step", base_insertion=state.base_insertion)]

    n = len(state.joints)
    rest = [steer] * n
    ks = [stiffness.k_soft] * n
    problem, q = _solve(rest, ks, state.joints, cfg, stiffness, contacts)
    state.joints = [JointState.from_vector(q[2 * i:2 * i + 2]) for i in range(n)]
    if recorder is not None:
        recorder(clock, 2, list(state.joints), problem, q)
    return state, events
