"""Core geometry: segmented-chain types, channel length law, forward kinematics.

Lengths are millimetres, angles radians throughout. The robot is a chain of
rigid segments coupled by 2-DOF ball joints; each joint bends by ``bend_angle``
in the plane at azimuth ``bend_plane`` of the proximal segment's cross-section
frame. Tendon and jamming-module channels exit the joint sphere at angular
positions ``alpha`` / ``beta`` from the segment axis, and the adjustable
channel length across a joint follows a single closed form evaluated at the
channel's azimuth offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChannelDomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RobotConfig:
    """Physical parameters of the segmented robot."""

    n_segments: int = 12
    seg_length: float = 15.0
    seg_diameter: float = 15.0
    joint_sphere_radius: float = 7.5
    tendon_pitch_radius: float = 6.0
    fjm_pitch_radius: float = 4.5
    alpha: float | None = None
    beta: float | None = None
    gentle_limit: float = math.radians(10.0)
    sharp_limit: float = math.radians(15.0)
    n_tendons: int = 4
    n_fjms: int = 4

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(
                self, "alpha",
                math.asin(self.tendon_pitch_radius / self.joint_sphere_radius))
        if self.beta is None:
            object.__setattr__(
                self, "beta",
                math.asin(self.fjm_pitch_radius / self.joint_sphere_radius))
        if not (0.0 < self.alpha < math.pi / 2):
            raise ValueError("alpha must lie in (0, pi/2)")
        if not (0.0 < self.beta < math.pi / 2):
            raise ValueError("beta must lie in (0, pi/2)")
        if not self.beta < self.alpha:
            raise ValueError("beta must be smaller than alpha")
        if not (0.0 < self.gentle_limit <= self.sharp_limit):
            raise ValueError("need 0 < gentle_limit <= sharp_limit")
        if self.n_fjms < 2:
            raise ValueError("at least two jamming modules are required")
        if self.n_segments < 1 or self.seg_length <= 0 or self.seg_diameter <= 0:
            raise ValueError("segment count and dimensions must be positive")


@dataclass(frozen=True)
class JointState:
    """Bend of one inter-segment joint.

    ``bend_angle`` is the signed bend magnitude, ``bend_plane`` the azimuth of
    the bending plane in the proximal cross-section frame, normalized to
    [0, 2*pi).
    """

    bend_angle: float = 0.0
    bend_plane: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "bend_plane", self.bend_plane % TWO_PI)

    def as_vector(self) -> np.ndarray:
        """2-vector form (theta*cos(gamma), theta*sin(gamma))."""
        return np.array([self.bend_angle * math.cos(self.bend_plane),
                         self.bend_angle * math.sin(self.bend_plane)])

    @staticmethod
    def from_vector(q) -> "JointState":
        theta = float(math.hypot(q[0], q[1]))
        gamma = float(math.atan2(q[1], q[0])) if theta > 0.0 else 0.0
        return JointState(theta, gamma)


@dataclass(frozen=True)
class Pose:
    """Rigid pose: position (mm) plus proper rotation matrix."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, float))
        R = np.asarray(self.orientation, float)
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-9) or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("orientation must be a proper rotation matrix")
        object.__setattr__(self, "orientation", R)

    @property
    def tangent(self) -> np.ndarray:
        """Segment axis direction (local +z) in world frame."""
        return self.orientation[:, 2]


@dataclass(frozen=True)
class ChannelLengths:
    """Adjustable inter-segment channel lengths at one joint."""

    tendon: tuple
    fjm: tuple


def channel_length(bend_angle: float, azimuth: float, channel_angle: float,
                   sphere_radius: float) -> float:
    """Adjustable channel length across one joint.

    ``channel_angle`` is the angular position of the channel outlet on the
    joint sphere (alpha for tendons, beta for jamming modules); ``azimuth`` is
    the channel azimuth measured from the bending plane. The closed form is

        l = 2r * (1 - cos(psi)/cos(phi) * cos(phi - theta/2)),
        phi = atan(tan(psi) * cos(azimuth)).
    """
    if not (0.0 < channel_angle < math.pi / 2):
        raise ChannelDomainError(
            f"channel angle {channel_angle!r} outside (0, pi/2)")
    if sphere_radius <= 0.0:
        raise ValueError("sphere radius must be positive")
    phi = math.atan(math.tan(channel_angle) * math.cos(azimuth))
    return 2.0 * sphere_radius * (
        1.0 - math.cos(channel_angle) / math.cos(phi)
        * math.cos(phi - bend_angle / 2.0))


# Channel azimuth offsets in the cross-section frame: tendons on the
# cardinal directions, jamming modules on the diagonals between them.
TENDON_OFFSETS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
FJM_OFFSETS = (math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4)


def joint_channel_lengths(joint: JointState, cfg: RobotConfig) -> ChannelLengths:
    """All tendon and jamming-module channel lengths at one joint."""
    tendon = tuple(
        channel_length(joint.bend_angle, off - joint.bend_plane, cfg.alpha,
                       cfg.joint_sphere_radius)
        for off in TENDON_OFFSETS[:cfg.n_tendons])
    fjm = tuple(
        channel_length(joint.bend_angle, off - joint.bend_plane, cfg.beta,
                       cfg.joint_sphere_radius)
        for off in FJM_OFFSETS[:cfg.n_fjms])
    return ChannelLengths(tendon=tendon, fjm=fjm)


def joint_rotation(joint: JointState) -> np.ndarray:
    """Rotation matrix of one joint: bend_angle about the in-plane axis
    perpendicular to the bending direction."""
    return rotvec_matrix(rotation_vector(joint.as_vector()))


def rotation_vector(q) -> np.ndarray:
    """Exponential coordinates of a joint 2-vector: axis (-sin g, cos g, 0)
    scaled by the bend magnitude."""
    return np.array([-q[1], q[0], 0.0])


def rotvec_matrix(r: np.ndarray) -> np.ndarray:
    """Rotation matrix from a rotation vector (Rodrigues)."""
    theta = float(np.linalg.norm(r))
    K = np.array([[0.0, -r[2], r[1]],
                  [r[2], 0.0, -r[0]],
                  [-r[1], r[0], 0.0]])
    if theta < 1e-12:
        return np.eye(3) + K
    a = math.sin(theta) / theta
    b = (1.0 - math.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def so3_left_jacobian(r: np.ndarray) -> np.ndarray:
    """Left Jacobian of the exponential map; maps rotation-vector rates to
    world angular velocity for a rotation applied in the identity frame."""
    theta = float(np.linalg.norm(r))
    K = np.array([[0.0, -r[2], r[1]],
                  [r[2], 0.0, -r[0]],
                  [-r[1], r[0], 0.0]])
    if theta < 1e-6:
        return np.eye(3) + 0.5 * K + (1.0 / 6.0) * (K @ K)
    a = (1.0 - math.cos(theta)) / theta**2
    b = (theta - math.sin(theta)) / theta**3
    return np.eye(3) + a * K + b * (K @ K)


def forward_kinematics(joints, cfg: RobotConfig) -> list:
    """Poses of the chain: element 0 is the base (origin, identity); element
    i >= 1 is the distal end of segment i. Each joint rotates the frame, then
    the segment translates along the new local +z."""
    if len(joints) > cfg.n_segments:
        raise ValueError("more joints than segments")
    poses = [Pose(np.zeros(3), np.eye(3))]
    R = np.eye(3)
    p = np.zeros(3)
    for j in joints:
        R = R @ joint_rotation(j)
        p = p + R[:, 2] * cfg.seg_length
        poses.append(Pose(p, R))
    return poses


def chain_nodes(joints, cfg: RobotConfig) -> np.ndarray:
    """Centerline node positions, shape (len(joints)+1, 3)."""
    return np.array([pose.position for pose in forward_kinematics(joints, cfg)])
