"""Reference trajectories, checkpoint rig geometry, and tip-phase labels.

A trajectory is a per-joint bend schedule over the full segment chain; its
world polyline is the forward kinematics of that schedule. Checkpoints are
rigid rings threaded on the trajectory whose single-axis force sensors face
the outer side of the local bend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import JointState, RobotConfig, chain_nodes
from .statics import ContactRing

TRAJECTORY_KINDS = ("C", "S", "spiral", "straight", "custom")
BEND_CLASSES = ("gentle", "sharp")
CHECKPOINT_LABELS = ("bottom", "middle", "top")
PHASES = ("I", "II", "III")


@dataclass(frozen=True)
class Trajectory:
    """Reference path as a joint schedule plus its world polyline."""

    kind: str
    bend_class: str
    schedule: tuple          # JointState per joint, len = cfg.n_segments
    cfg: RobotConfig
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        nodes = chain_nodes(list(self.schedule), self.cfg)
        object.__setattr__(self, "nodes", nodes)

    @property
    def total_length(self) -> float:
        return len(self.schedule) * self.cfg.seg_length

    def point_at(self, s: float) -> np.ndarray:
        """Point on the polyline at arc length s (clamped to the ends)."""
        L = self.cfg.seg_length
        s = min(max(s, 0.0), self.total_length)
        i = min(int(s // L), len(self.schedule) - 1)
        t = (s - i * L) / L
        return (1.0 - t) * self.nodes[i] + t * self.nodes[i + 1]

    def tangent_at(self, s: float) -> np.ndarray:
        """Unit tangent of the polyline at arc length s."""
        L = self.cfg.seg_length
        s = min(max(s, 0.0), self.total_length)
        i = min(int(s // L), len(self.schedule) - 1)
        d = self.nodes[i + 1] - self.nodes[i]
        return d / np.linalg.norm(d)

    def arc_position_of(self, point: np.ndarray) -> float:
        """Arc length of the polyline point closest to ``point``."""
        point = np.asarray(point, float)
        best_s, best_d = 0.0, math.inf
        L = self.cfg.seg_length
        for i in range(len(self.schedule)):
            a, b = self.nodes[i], self.nodes[i + 1]
            ab = b - a
            t = float(np.clip((point - a) @ ab / (ab @ ab), 0.0, 1.0))
            d = float(np.linalg.norm(point - (a + t * ab)))
            if d < best_d:
                best_d, best_s = d, (i + t) * L
        return best_s

    def outward_normal_at(self, s: float) -> np.ndarray:
        """Unit vector perpendicular to the tangent at s, pointing away from
        the local center of curvature (the side a sagging body presses on).
        Falls back to the nearest bent region, then to a fixed transverse
        direction, on straight stretches."""
        tan = self.tangent_at(s)
        L = self.cfg.seg_length
        station = s / L
        # Search joints by distance from s for a usable bend direction.
        order = sorted(range(len(self.schedule)),
                       key=lambda j: abs(j + 1 - station))
        for j in order:
            if abs(self.schedule[j].bend_angle) < 1e-9 or j == 0:
                continue
            prev = self.nodes[j] - self.nodes[j - 1]
            nxt = self.nodes[j + 1] - self.nodes[j]
            turn = nxt / np.linalg.norm(nxt) - prev / np.linalg.norm(prev)
            out = -(turn - (turn @ tan) * tan)
            norm = np.linalg.norm(out)
            if norm > 1e-9:
                return out / norm
        fallback = np.array([1.0, 0.0, 0.0])
        if abs(fallback @ tan) > 0.9:
            fallback = np.array([0.0, 1.0, 0.0])
        out = fallback - (fallback @ tan) * tan
        return out / np.linalg.norm(out)


def _class_angle(bend_class: str, cfg: RobotConfig) -> float:
    if bend_class == "gentle":
        return cfg.gentle_limit
    if bend_class == "sharp":
        return cfg.sharp_limit
    raise ValueError(f"unknown bend class {bend_class!r}; "
                     f"expected one of {BEND_CLASSES}")


def build_trajectory(kind: str, bend_class: str, cfg: RobotConfig,
                     bent_per_section: int = 4, lead: int | None = None,
                     spiral_azimuth_step: float = math.radians(30.0),
                     custom_schedule=None) -> Trajectory:
    """Standard joint schedules.

    C: one section of ``bent_per_section`` joints at the class angle in one
    plane. S: two opposing sections back to back. spiral: one section with a
    constant azimuth increment per joint (non-planar). The remaining joints
    are straight; ``lead`` straight joints precede the bent region.
    """
    n = cfg.n_segments
    angle = _class_angle(bend_class, cfg) if bend_class else 0.0
    schedule = [JointState() for _ in range(n)]
    if kind == "straight":
        pass
    elif kind == "C":
        lead = 3 if lead is None else lead
        _check_fit(n, lead, bent_per_section, kind)
        for j in range(lead, lead + bent_per_section):
            schedule[j] = JointState(angle, 0.0)
    elif kind == "S":
        lead = 2 if lead is None else lead
        _check_fit(n, lead, 2 * bent_per_section, kind)
        for j in range(lead, lead + bent_per_section):
            schedule[j] = JointState(angle, 0.0)
        for j in range(lead + bent_per_section, lead + 2 * bent_per_section):
            schedule[j] = JointState(angle, math.pi)
    elif kind == "spiral":
        lead = 3 if lead is None else lead
        _check_fit(n, lead, bent_per_section, kind)
        for i, j in enumerate(range(lead, lead + bent_per_section)):
            schedule[j] = JointState(angle, i * spiral_azimuth_step)
    elif kind == "custom":
        if custom_schedule is None:
            raise ValueError("custom trajectory requires a schedule")
        schedule = [JointState(a, g) for a, g in custom_schedule]
        if len(schedule) != n:
            raise ValueError("custom schedule length must equal n_segments")
    else:
        raise ValueError(f"unknown trajectory kind {kind!r}; "
                         f"expected one of {TRAJECTORY_KINDS}")
    for j in schedule:
        if abs(j.bend_angle) > cfg.sharp_limit + 1e-12:
            raise ValueError("schedule exceeds the sharp bend limit")
    return Trajectory(kind=kind, bend_class=bend_class or "gentle",
                      schedule=tuple(schedule), cfg=cfg)


def _check_fit(n, lead, bent, kind):
    if lead + bent > n:
        raise ValueError(f"{kind} trajectory needs {lead + bent} joints, "
                         f"robot has {n}")


@dataclass(frozen=True)
class Checkpoint:
    """Instrumented ring on the trajectory."""

    center: np.ndarray
    axis: np.ndarray
    inner_diameter: float
    sensor_axis: np.ndarray
    label: str
    arc_position: float

    def as_contact(self) -> ContactRing:
        return ContactRing(center=self.center, axis=self.axis,
                           inner_radius=self.inner_diameter / 2.0,
                           sensor_axis=self.sensor_axis, label=self.label)


def place_checkpoints(traj: Trajectory, cfg: RobotConfig,
                      fractions=(0.1, 0.5, 0.9),
                      inner_diameter: float = 20.0) -> tuple:
    """Three rings centered on the trajectory at the given arc fractions,
    axes tangent to it, sensors facing the outer side of the local bend."""
    if traj.total_length < 3 * cfg.seg_length:
        raise ValueError("trajectory too short for three checkpoints")
    if inner_diameter <= cfg.seg_diameter:
        raise ValueError("checkpoint inner diameter must exceed the body")
    if len(fractions) != 3 or sorted(fractions) != list(fractions):
        raise ValueError("need three increasing checkpoint fractions")
    rings = []
    for frac, label in zip(fractions, CHECKPOINT_LABELS):
        s = frac * traj.total_length
        rings.append(Checkpoint(center=traj.point_at(s),
                                axis=traj.tangent_at(s),
                                inner_diameter=inner_diameter,
                                sensor_axis=traj.outward_normal_at(s),
                                label=label, arc_position=s))
    return tuple(rings)


def classify_phase(tip_arclength: float, checkpoints) -> str:
    """Run phase from the tip arc position: I until the tip passes the bottom
    ring, II until it reaches the top ring, III afterwards."""
    bottom, _, top = checkpoints
    if tip_arclength <= bottom.arc_position:
        return "I"
    if tip_arclength <= top.arc_position:
        return "II"
    return "III"
