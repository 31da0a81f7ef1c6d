"""How the adjustable channel lengths change as a joint bends.

Prints the four tendon and four jamming-module channel lengths for a sweep of
bend angles, and checks the opposite-channel sum identity numerically.
"""

import math

from jamftl import JointState, RobotConfig, joint_channel_lengths


def main():
    cfg = RobotConfig()
    print(f"tendon outlet angle alpha = {math.degrees(cfg.alpha):.2f} deg, "
          f"module outlet angle beta = {math.degrees(cfg.beta):.2f} deg")
    print(f"{'bend':>6} | {'tendon lengths (mm)':^31} | "
          f"{'module lengths (mm)':^31}")
    for deg in (0, 5, 10, 15):
        ch = joint_channel_lengths(JointState(math.radians(deg), 0.0), cfg)
        t = " ".join(f"{v:7.4f}" for v in ch.tendon)
        f = " ".join(f"{v:7.4f}" for v in ch.fjm)
        print(f"{deg:5}d | {t} | {f}")

    ch = joint_channel_lengths(JointState(math.radians(12), 0.0), cfg)
    pulled, released = ch.tendon[0], ch.tendon[2]
    side = ch.tendon[1]
    print(f"\nat 12 deg: pulled {pulled:.4f} + released {released:.4f} "
          f"= {pulled + released:.4f} = 2 x side {side:.4f} "
          f"(identity residual {pulled + released - 2 * side:.2e})")

    print("\nrotating the bend plane by 90 deg permutes the tendons:")
    rot = joint_channel_lengths(JointState(math.radians(12), math.pi / 2), cfg)
    print("  plane 0  :", " ".join(f"{v:7.4f}" for v in ch.tendon))
    print("  plane 90 :", " ".join(f"{v:7.4f}" for v in rot.tendon))


if __name__ == "__main__":
    main()
