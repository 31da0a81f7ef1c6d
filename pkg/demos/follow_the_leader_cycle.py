"""One full insertion with the jamming-assisted follow-the-leader cycle.

Steers along an S-shaped reference path cycle by cycle, printing the event
stream of the first cycle and the tip-tracking error after each advance.
"""

import numpy as np

from jamftl import (ConservedPath, ExtensionStrategy, RobotConfig, RobotState,
                    build_trajectory, execute_cycle, forward_kinematics,
                    plan_steering)


def main():
    cfg = RobotConfig()
    traj = build_trajectory("S", "gentle", cfg)
    state = RobotState.initial(cfg)
    path = ConservedPath(cfg)
    clock = 0.0

    for cycle in range(cfg.n_segments):
        tip = forward_kinematics(path.joints, cfg)[-1]
        command = plan_steering(traj, tip, cfg)
        state, path, events = execute_cycle(
            state, path, command, cfg.seg_length, ExtensionStrategy(0), cfg,
            start_time=clock)
        clock = events[-1].time_s
        if cycle == 0:
            print("events of the first cycle:")
            for e in events:
                print(f"  t={e.time_s:5.1f}s step {e.step_id} "
                      f"module {e.fjm_index:2d} {e.action}")
            print()
        tip_now = forward_kinematics(state.joints, cfg)[-1].position
        ref = traj.point_at(len(state.joints) * cfg.seg_length)
        err = np.linalg.norm(tip_now - ref)
        print(f"cycle {cycle + 1:2d}: {len(state.joints):2d} segments in, "
              f"commanded bend {np.degrees(command.bend_angle):5.2f} deg, "
              f"tip error {err:.2e} mm")

    print(f"\nconserved path length: {path.total_arclength:.0f} mm "
          f"({len(path.joints)} committed joints)")


if __name__ == "__main__":
    main()
