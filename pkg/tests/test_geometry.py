"""Channel length law, specializations, and forward kinematics."""

import math

import numpy as np
import pytest

from jamftl import (ChannelDomainError, JointState, RobotConfig,
                    channel_length, forward_kinematics, joint_channel_lengths)
from jamftl.geometry import chain_nodes


def l_inner(theta, psi, r):
    """Channel on the inside of the bend (azimuth 0), hand-specialized."""
    return 2.0 * r * (1.0 - math.cos(psi - theta / 2.0))


def l_outer(theta, psi, r):
    """Channel on the outside of the bend (azimuth pi)."""
    return 2.0 * r * (1.0 - math.cos(psi + theta / 2.0))


def l_side(theta, psi, r):
    """Channel on the bending axis (azimuth +-pi/2)."""
    return 2.0 * r * (1.0 - math.cos(psi) * math.cos(theta / 2.0))


def test_specializations_match_general_form():
    rng = np.random.default_rng(1)
    n = 10_000
    thetas = rng.uniform(math.radians(-15), math.radians(15), n)
    psis = rng.uniform(1e-3, math.pi / 2 - 1e-3, n)
    radii = rng.uniform(5.0, 10.0, n)
    worst = 0.0
    for theta, psi, r in zip(thetas, psis, radii):
        worst = max(
            worst,
            abs(channel_length(theta, 0.0, psi, r) - l_inner(theta, psi, r)),
            abs(channel_length(theta, math.pi, psi, r) - l_outer(theta, psi, r)),
            abs(channel_length(theta, math.pi / 2, psi, r) - l_side(theta, psi, r)),
            abs(channel_length(theta, -math.pi / 2, psi, r) - l_side(theta, psi, r)))
    assert worst <= 1e-12


def test_opposite_channels_sum_identity():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        theta = rng.uniform(math.radians(-15), math.radians(15))
        psi = rng.uniform(1e-3, math.pi / 2 - 1e-3)
        r = rng.uniform(5.0, 10.0)
        az = rng.uniform(0.0, 2 * math.pi)
        left = channel_length(theta, az, psi, r)
        right = channel_length(theta, az + math.pi, psi, r)
        # Opposite channels always average to the side-channel length at the
        # perpendicular azimuth of the same pair.
        assert left + right == pytest.approx(2.0 * l_side(theta, psi, r),
                                             abs=1e-12)


def test_channel_length_frozen_value():
    # Independent derivation: chord between the two outlet points of a
    # channel at azimuth 0 with psi = arcsin(0.8), theta = 10 deg, r = 7.5.
    got = channel_length(math.radians(10.0), 0.0, math.asin(0.8), 7.5)
    assert got == pytest.approx(4.988378804202393, abs=1e-15)


def test_zero_bend_closes_all_channels_equally():
    cfg = RobotConfig()
    ch = joint_channel_lengths(JointState(), cfg)
    assert len(ch.tendon) == 4 and len(ch.fjm) == 4
    assert max(ch.tendon) - min(ch.tendon) <= 1e-15
    assert max(ch.fjm) - min(ch.fjm) <= 1e-15


def test_bend_shortens_inner_lengthens_outer():
    cfg = RobotConfig()
    straight = joint_channel_lengths(JointState(), cfg).tendon[0]
    ch = joint_channel_lengths(JointState(math.radians(10), 0.0), cfg)
    assert ch.tendon[0] < straight < ch.tendon[2]
    # Rotating the bend plane by 90 deg permutes the tendon lengths.
    rot = joint_channel_lengths(JointState(math.radians(10), math.pi / 2), cfg)
    assert rot.tendon[1] == pytest.approx(ch.tendon[0], abs=1e-12)


def test_channel_domain_errors():
    with pytest.raises(ChannelDomainError):
        channel_length(0.1, 0.0, 0.0, 7.5)
    with pytest.raises(ChannelDomainError):
        channel_length(0.1, 0.0, math.pi / 2, 7.5)
    with pytest.raises(ValueError):
        channel_length(0.1, 0.0, 0.5, -1.0)


def test_single_joint_forward_kinematics():
    cfg = RobotConfig()
    theta = math.radians(12.0)
    poses = forward_kinematics([JointState(theta, 0.0)], cfg)
    # Bend plane 0 tips the segment toward +x.
    tip = poses[-1].position
    assert tip == pytest.approx([cfg.seg_length * math.sin(theta), 0.0,
                                 cfg.seg_length * math.cos(theta)], abs=1e-12)
    assert poses[-1].tangent == pytest.approx([math.sin(theta), 0.0,
                                               math.cos(theta)], abs=1e-12)


def test_uniform_bend_is_a_planar_arc():
    cfg = RobotConfig()
    theta = math.radians(8.0)
    n = 6
    nodes = chain_nodes([JointState(theta, 0.0)] * n, cfg)
    js = np.arange(1, n + 1)
    x = np.cumsum(np.sin(js * theta)) * cfg.seg_length
    z = np.cumsum(np.cos(js * theta)) * cfg.seg_length
    assert np.allclose(nodes[1:, 0], x, atol=1e-12)
    assert np.allclose(nodes[1:, 1], 0.0, atol=1e-12)
    assert np.allclose(nodes[1:, 2], z, atol=1e-12)


def test_segment_lengths_are_preserved():
    cfg = RobotConfig()
    rng = np.random.default_rng(3)
    joints = [JointState(rng.uniform(-0.25, 0.25), rng.uniform(0, 2 * math.pi))
              for _ in range(10)]
    nodes = chain_nodes(joints, cfg)
    lengths = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    assert np.allclose(lengths, cfg.seg_length, atol=1e-9)


def test_joint_state_vector_round_trip():
    j = JointState(0.2, 1.3)
    back = JointState.from_vector(j.as_vector())
    assert back.bend_angle == pytest.approx(0.2, abs=1e-15)
    assert back.bend_plane == pytest.approx(1.3, abs=1e-15)
    assert JointState(0.1, 2 * math.pi + 0.5).bend_plane == pytest.approx(0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        RobotConfig(tendon_pitch_radius=8.0)   # alpha outside (0, pi/2)
    with pytest.raises(ValueError):
        RobotConfig(fjm_pitch_radius=7.0)      # beta must stay below alpha
    with pytest.raises(ValueError):
        RobotConfig(gentle_limit=0.5, sharp_limit=0.2)
    with pytest.raises(ValueError):
        forward_kinematics([JointState()] * 13, RobotConfig())
