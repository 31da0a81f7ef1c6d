"""Scenario files, run orchestration, and report emission.

A scenario is a YAML mapping validated against SCENARIO_SCHEMA; every field
has a documented default and the effective configuration (defaults included)
is echoed alongside the outputs so a run can be reproduced from its echo.
Simulation is deterministic: identical scenarios produce byte-identical CSV
and SVG payloads. Wall-clock timestamps live only in run_meta.yaml.
"""

from __future__ import annotations

import datetime
import math
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .environment import (BEND_CLASSES, CHECKPOINT_LABELS, PHASES,
                          TRAJECTORY_KINDS, Trajectory, build_trajectory,
                          classify_phase, place_checkpoints)
from .errors import ScenarioError
from .geometry import JointState, RobotConfig, forward_kinematics
from .machine import (ConservedPath, ExtensionStrategy, RobotState,
                      execute_cycle, plan_steering, tdcr_baseline_step,
                      tdcr_command)
from .metrics import (FootprintAccumulator, ForceTrace, OccupancyGrid,
                      dominant_plane_basis, grid_for_extent, summarize_forces)
from .report import (EVENTS_HEADER, FORCES_HEADER, LAMBDA_HEADER, fmt,
                     sweep_svg, write_csv)
from .statics import StiffnessModel, crossing_forces

CONTROLLERS = ("ftl", "tdcr")
OUTPUT_KINDS = ("events", "forces", "sweep", "summary")

ROBOT_DEFAULTS = {
    "n_segments": 12, "seg_length": 15.0, "seg_diameter": 15.0,
    "joint_sphere_radius": 7.5, "tendon_pitch_radius": 6.0,
    "fjm_pitch_radius": 4.5, "gentle_limit_deg": 10.0, "sharp_limit_deg": 15.0,
    "n_tendons": 4, "n_fjms": 4,
}
STIFFNESS_DEFAULTS = {
    "k_soft": 1e5, "jam_ratio": 34.0, "k_contact": 100.0,
    "friction_multiplier": 1.5,
}
TRAJECTORY_DEFAULTS = {
    "kind": "C", "bend_class": "gentle", "bent_per_section": 4, "lead": None,
    "spiral_azimuth_step_deg": 30.0,
}
SCENARIO_DEFAULTS = {
    "name": "scenario",
    "controller": "ftl",
    "strategy": "all",
    "runs": 3,
    "seed": 0,
    "perturbation_deg": 0.0,
    "checkpoint_fractions": [0.1, 0.5, 0.9],
    "checkpoint_inner_diameter": 20.0,
    "grid_resolution": 0.1,
    "sweep_interpolation": 3,
    "outputs": list(OUTPUT_KINDS),
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "robot": {"type": "object",
                  "properties": {k: {"type": "number"} for k in ROBOT_DEFAULTS},
                  "additionalProperties": False},
        "trajectory": {"type": "object",
                       "properties": {
                           "kind": {"enum": list(TRAJECTORY_KINDS)},
                           "bend_class": {"enum": list(BEND_CLASSES)},
                           "bent_per_section": {"type": "integer", "minimum": 1},
                           "lead": {"type": ["integer", "null"], "minimum": 0},
                           "spiral_azimuth_step_deg": {"type": "number"},
                       },
                       "additionalProperties": False},
        "controller": {"enum": list(CONTROLLERS)},
        "strategy": {"oneOf": [{"enum": ["all"]},
                               {"type": "integer", "minimum": 1, "maximum": 4}]},
        "stiffness": {"type": "object",
                      "properties": {k: {"type": "number", "exclusiveMinimum": 0}
                                     for k in STIFFNESS_DEFAULTS},
                      "additionalProperties": False},
        "runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "perturbation_deg": {"type": "number", "minimum": 0},
        "checkpoint_fractions": {"type": "array", "items": {"type": "number"},
                                 "minItems": 3, "maxItems": 3},
        "checkpoint_inner_diameter": {"type": "number", "exclusiveMinimum": 0},
        "grid_resolution": {"type": "number", "exclusiveMinimum": 0},
        "sweep_interpolation": {"type": "integer", "minimum": 1},
        "outputs": {"type": "array", "items": {"enum": list(OUTPUT_KINDS)}},
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Scenario:
    """Fully validated run specification with every default applied."""

    name: str
    robot: RobotConfig
    trajectory_kind: str
    bend_class: str
    bent_per_section: int
    lead: int | None
    spiral_azimuth_step_deg: float
    controller: str
    strategies: tuple           # ES indices, 1-based
    stiffness: StiffnessModel
    runs: int
    seed: int
    perturbation_deg: float
    checkpoint_fractions: tuple
    checkpoint_inner_diameter: float
    grid_resolution: float
    sweep_interpolation: int
    outputs: tuple

    def build_trajectory(self) -> Trajectory:
        return build_trajectory(
            self.trajectory_kind, self.bend_class, self.robot,
            bent_per_section=self.bent_per_section, lead=self.lead,
            spiral_azimuth_step=math.radians(self.spiral_azimuth_step_deg))

    def effective_config(self) -> dict:
        r = self.robot
        return {
            "name": self.name,
            "robot": {
                "n_segments": r.n_segments, "seg_length": r.seg_length,
                "seg_diameter": r.seg_diameter,
                "joint_sphere_radius": r.joint_sphere_radius,
                "tendon_pitch_radius": r.tendon_pitch_radius,
                "fjm_pitch_radius": r.fjm_pitch_radius,
                "gentle_limit_deg": math.degrees(r.gentle_limit),
                "sharp_limit_deg": math.degrees(r.sharp_limit),
                "n_tendons": r.n_tendons, "n_fjms": r.n_fjms,
            },
            "trajectory": {
                "kind": self.trajectory_kind, "bend_class": self.bend_class,
                "bent_per_section": self.bent_per_section, "lead": self.lead,
                "spiral_azimuth_step_deg": self.spiral_azimuth_step_deg,
            },
            "controller": self.controller,
            "strategy": ("all" if len(self.strategies) == self.robot.n_fjms
                         else self.strategies[0]),
            "stiffness": {
                "k_soft": self.stiffness.k_soft,
                "jam_ratio": self.stiffness.jam_ratio,
                "k_contact": self.stiffness.k_contact,
                "friction_multiplier": self.stiffness.friction_multiplier,
            },
            "runs": self.runs,
            "seed": self.seed,
            "perturbation_deg": self.perturbation_deg,
            "checkpoint_fractions": list(self.checkpoint_fractions),
            "checkpoint_inner_diameter": self.checkpoint_inner_diameter,
            "grid_resolution": self.grid_resolution,
            "sweep_interpolation": self.sweep_interpolation,
            "outputs": list(self.outputs),
        }


def _fail(msg: str):
    raise ScenarioError(msg)


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate a raw mapping and apply defaults; error messages name the
    offending field and the violated invariant."""
    if not isinstance(raw, dict):
        _fail("scenario file must contain a mapping at the top level")
    unknown = set(raw) - set(SCENARIO_DEFAULTS) - {"robot", "trajectory", "stiffness"}
    if unknown:
        _fail(f"unknown field(s): {sorted(unknown)}")

    def section(key, defaults):
        data = dict(defaults)
        sub = raw.get(key, {})
        if not isinstance(sub, dict):
            _fail(f"'{key}' must be a mapping")
        bad = set(sub) - set(defaults)
        if bad:
            _fail(f"unknown field(s) in '{key}': {sorted(bad)}")
        data.update(sub)
        return data

    robot_raw = section("robot", ROBOT_DEFAULTS)
    stiff_raw = section("stiffness", STIFFNESS_DEFAULTS)
    traj_raw = section("trajectory", TRAJECTORY_DEFAULTS)
    top = dict(SCENARIO_DEFAULTS)
    top.update({k: v for k, v in raw.items()
                if k not in ("robot", "trajectory", "stiffness")})

    try:
        robot = RobotConfig(
            n_segments=int(robot_raw["n_segments"]),
            seg_length=float(robot_raw["seg_length"]),
            seg_diameter=float(robot_raw["seg_diameter"]),
            joint_sphere_radius=float(robot_raw["joint_sphere_radius"]),
            tendon_pitch_radius=float(robot_raw["tendon_pitch_radius"]),
            fjm_pitch_radius=float(robot_raw["fjm_pitch_radius"]),
            gentle_limit=math.radians(float(robot_raw["gentle_limit_deg"])),
            sharp_limit=math.radians(float(robot_raw["sharp_limit_deg"])),
            n_tendons=int(robot_raw["n_tendons"]),
            n_fjms=int(robot_raw["n_fjms"]))
    except ValueError as exc:
        _fail(f"robot: {exc}")
    try:
        stiffness = StiffnessModel(
            k_soft=float(stiff_raw["k_soft"]),
            jam_ratio=float(stiff_raw["jam_ratio"]),
            k_contact=float(stiff_raw["k_contact"]),
            friction_multiplier=float(stiff_raw["friction_multiplier"]))
    except ValueError as exc:
        _fail(f"stiffness: {exc}")

    if traj_raw["kind"] not in TRAJECTORY_KINDS:
        _fail(f"trajectory.kind {traj_raw['kind']!r} invalid; "
              f"valid values: {list(TRAJECTORY_KINDS)}")
    if traj_raw["bend_class"] not in BEND_CLASSES:
        _fail(f"trajectory.bend_class {traj_raw['bend_class']!r} invalid; "
              f"valid values: {list(BEND_CLASSES)}")
    if top["controller"] not in CONTROLLERS:
        _fail(f"controller {top['controller']!r} invalid; "
              f"valid values: {list(CONTROLLERS)}")
    runs = top["runs"]
    if not isinstance(runs, int) or runs < 1:
        _fail(f"runs must be an integer >= 1, got {runs!r}")

    strategy = top["strategy"]
    if strategy == "all":
        strategies = tuple(range(1, robot.n_fjms + 1))
    elif isinstance(strategy, int) and 1 <= strategy <= robot.n_fjms:
        strategies = (strategy,)
    else:
        _fail(f"strategy must be 'all' or an integer in 1..{robot.n_fjms}, "
              f"got {strategy!r}")

    fractions = tuple(float(f) for f in top["checkpoint_fractions"])
    if len(fractions) != 3 or sorted(fractions) != list(fractions) \
            or fractions[0] <= 0 or fractions[-1] >= 1:
        _fail("checkpoint_fractions must be three increasing values in (0, 1)")
    if float(top["checkpoint_inner_diameter"]) <= robot.seg_diameter:
        _fail("checkpoint_inner_diameter must exceed the robot diameter")
    outputs = tuple(top["outputs"])
    bad = set(outputs) - set(OUTPUT_KINDS)
    if bad:
        _fail(f"unknown outputs {sorted(bad)}; valid values: {list(OUTPUT_KINDS)}")
    if float(top["grid_resolution"]) <= 0:
        _fail("grid_resolution must be positive")
    if float(top["perturbation_deg"]) < 0:
        _fail("perturbation_deg must be non-negative")

    return Scenario(
        name=str(top["name"]),
        robot=robot,
        trajectory_kind=traj_raw["kind"],
        bend_class=traj_raw["bend_class"],
        bent_per_section=int(traj_raw["bent_per_section"]),
        lead=None if traj_raw["lead"] is None else int(traj_raw["lead"]),
        spiral_azimuth_step_deg=float(traj_raw["spiral_azimuth_step_deg"]),
        controller=top["controller"],
        strategies=strategies,
        stiffness=stiffness,
        runs=runs,
        seed=int(top["seed"]),
        perturbation_deg=float(top["perturbation_deg"]),
        checkpoint_fractions=fractions,
        checkpoint_inner_diameter=float(top["checkpoint_inner_diameter"]),
        grid_resolution=float(top["grid_resolution"]),
        sweep_interpolation=int(top["sweep_interpolation"]),
        outputs=outputs)


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    sc = scenario_from_dict(raw)
    if sc.name == SCENARIO_DEFAULTS["name"]:
        sc = scenario_from_dict({**raw, "name": path.stem})
    return sc


@dataclass
class RunRecord:
    """Everything one (controller-or-strategy, run) simulation produced."""

    scenario: str
    controller: str          # "tdcr" or "ES<n>"
    run_index: int
    events: list
    trace: ForceTrace
    lam: float
    grey_cells: int
    white_cells: int
    union_cells: np.ndarray
    final_cells: np.ndarray
    resolution: float
    final_joints: list


class _Recorder:
    """Collects force samples and sweep frames during a simulation."""

    def __init__(self, scenario: Scenario, trace: ForceTrace, checkpoints,
                 grid: OccupancyGrid, state: RobotState):
        self.sc = scenario
        self.trace = trace
        self.checkpoints = checkpoints
        self.acc = FootprintAccumulator(grid)
        self.state = state
        self.prev_q = None

    def __call__(self, time_s, step_id, joints, problem, q):
        phase = classify_phase(self.state.base_insertion, self.checkpoints)
        for c in crossing_forces(q, problem):
            self.trace.add(time_s, phase, c.label, c.segment, c.force)
        # Interpolate between successive settled shapes so the sweep union
        # covers the motion, not just its endpoints.
        frames = [q]
        if self.prev_q is not None and len(self.prev_q) == len(q):
            n = self.sc.sweep_interpolation
            frames = [self.prev_q + (k / n) * (q - self.prev_q)
                      for k in range(1, n)] + [q]
        for qf in frames:
            joints_f = [JointState.from_vector(qf[2 * i:2 * i + 2])
                        for i in range(len(qf) // 2)]
            poses = forward_kinematics(joints_f, self.sc.robot)
            self.acc.add(poses, self.sc.robot)
        self.prev_q = q


def _perturbed(command: JointState, sc: Scenario, ctrl_code: int, run, cycle,
               cfg: RobotConfig) -> JointState:
    """Optional seeded steering noise for perturbation studies; the RNG key
    is built from plain integers so results are process-independent."""
    if sc.perturbation_deg <= 0:
        return command
    rng = np.random.default_rng([sc.seed, ctrl_code, run, cycle])
    d_theta = math.radians(sc.perturbation_deg) * rng.standard_normal()
    theta = min(max(command.bend_angle + d_theta, -cfg.sharp_limit),
                cfg.sharp_limit)
    return JointState(theta, command.bend_plane)


def simulate_run(sc: Scenario, strategy_index: int | None, run: int,
                 traj: Trajectory | None = None) -> RunRecord:
    """Simulate one full insertion with one controller configuration.

    ``strategy_index`` is a 1-based ES index for the FTL controller or None
    for the tendon-only baseline.
    """
    cfg = sc.robot
    traj = traj or sc.build_trajectory()
    checkpoints = place_checkpoints(traj, cfg, sc.checkpoint_fractions,
                                    sc.checkpoint_inner_diameter)
    contacts = tuple(cp.as_contact() for cp in checkpoints)

    controller = "tdcr" if strategy_index is None else f"ES{strategy_index}"
    # The tendon-only body can stray far outside the reference path, so its
    # grid gets a much wider margin around the trajectory extent.
    spread = cfg.seg_length + (traj.total_length
                               if strategy_index is None else cfg.seg_length)
    basis = dominant_plane_basis(traj.nodes)
    proj = traj.nodes @ basis.T
    origin = proj.min(axis=0) - cfg.seg_diameter - spread
    size = proj.max(axis=0) - origin + cfg.seg_diameter + spread
    grid = OccupancyGrid.empty(origin, size, sc.grid_resolution, basis)

    trace = ForceTrace(scenario=sc.name, controller=controller, run_index=run)
    state = RobotState.initial(cfg)
    recorder = _Recorder(sc, trace, checkpoints, grid, state)
    path = ConservedPath(cfg)
    stiffness = sc.stiffness
    events = []
    clock = 0.0

    ctrl_code = 0 if strategy_index is None else strategy_index
    for cycle in range(cfg.n_segments):
        if strategy_index is None:
            command = tdcr_command(traj, cycle + 1, cfg)
            command = _perturbed(command, sc, ctrl_code, run, cycle, cfg)
            state, evs = tdcr_baseline_step(
                state, command, cfg.seg_length, cfg, stiffness,
                contacts=contacts, recorder=recorder, start_time=clock)
        else:
            tip = forward_kinematics(path.joints, cfg)[-1]
            command = plan_steering(traj, tip, cfg)
            command = _perturbed(command, sc, ctrl_code, run, cycle, cfg)
            state, path, evs = execute_cycle(
                state, path, command, cfg.seg_length,
                ExtensionStrategy(first_fjm=strategy_index - 1), cfg,
                stiffness, contacts=contacts, recorder=recorder,
                start_time=clock)
        events.extend(evs)
        clock = evs[-1].time_s

    grey, white = recorder.acc.counts()
    return RunRecord(scenario=sc.name, controller=controller, run_index=run,
                     events=events, trace=trace, lam=recorder.acc.ftl_error(),
                     grey_cells=grey, white_cells=white,
                     union_cells=recorder.acc.union,
                     final_cells=recorder.acc.last,
                     resolution=sc.grid_resolution,
                     final_joints=list(state.joints))


def run_scenario(sc: Scenario, out_dir=None) -> list:
    """Execute every (strategy, run) combination of a scenario.

    Returns the RunRecord list; when ``out_dir`` is given, writes the selected
    outputs there atomically (a failed run leaves no partial files).
    """
    traj = sc.build_trajectory()
    controllers = ([None] if sc.controller == "tdcr"
                   else [i for i in sc.strategies])
    records = []
    for ctrl in controllers:
        for run in range(sc.runs):
            records.append(simulate_run(sc, ctrl, run, traj=traj))
    if out_dir is not None:
        write_outputs(sc, records, out_dir)
    return records


def write_outputs(sc: Scenario, records, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".stage-", dir=out_dir))
    try:
        _write_payloads(sc, records, staging)
        meta = {"written_at": datetime.datetime.now(datetime.timezone.utc)
                .isoformat()}
        (staging / "run_meta.yaml").write_text(yaml.safe_dump(meta),
                                               encoding="utf-8")
        for f in sorted(staging.iterdir()):
            shutil.move(str(f), out_dir / f.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _write_payloads(sc: Scenario, records, staging: Path) -> None:
    (staging / "effective_config.yaml").write_text(
        yaml.safe_dump(sc.effective_config(), sort_keys=False),
        encoding="utf-8")
    if "events" in sc.outputs:
        rows = [(r.controller, r.run_index, e.time_s, e.step_id, e.fjm_index,
                 e.action, e.base_insertion)
                for r in records for e in r.events]
        write_csv(staging / "events.csv", EVENTS_HEADER, rows)
    if "forces" in sc.outputs:
        rows = [(r.controller, r.run_index, t, ph, cp, seg, f)
                for r in records for (t, ph, cp, seg, f) in r.trace.samples]
        write_csv(staging / "forces.csv", FORCES_HEADER, rows)
        rows = [(r.scenario, r.controller, r.run_index, r.lam, r.grey_cells,
                 r.white_cells, r.resolution) for r in records]
        write_csv(staging / "lambda.csv", LAMBDA_HEADER, rows)
    if "summary" in sc.outputs:
        _write_summary(sc, records, staging / "summary.csv")
    if "sweep" in sc.outputs:
        first = records[0]
        svg = sweep_svg(first.union_cells, first.final_cells,
                        first.resolution, lam=first.lam,
                        title=f"{sc.name} {first.controller}")
        (staging / f"sweep_{sc.name}.svg").write_text(svg, encoding="utf-8")


def summary_table(records) -> dict:
    return summarize_forces([r.trace for r in records])


def _write_summary(sc: Scenario, records, path: Path) -> None:
    table = summary_table(records)
    controllers = sorted({r.controller for r in records})
    header = ["scenario", "checkpoint"] + [
        f"{ctrl}_phase_{ph}" for ctrl in controllers for ph in PHASES]
    rows = []
    for label in CHECKPOINT_LABELS:
        row = [sc.name, label]
        for ctrl in controllers:
            for ph in PHASES:
                cell = table.get((sc.name, ctrl, ph, label))
                row.append(cell.display if cell else "--")
        rows.append(row)
    write_csv(path, header, rows)
