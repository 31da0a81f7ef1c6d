"""Quasi-static equilibrium of a bent chain pressed through a ring.

A four-joint chain wants to bend away from a ring that is offset from its
path. Solved twice: once soft (unjammed) and once jammed, showing how the
34x stiffness ratio trades shape retention against contact force.
"""

import numpy as np

from jamftl import (ContactRing, EquilibriumProblem, RobotConfig,
                    StiffnessModel, checkpoint_forces, solve_equilibrium,
                    total_energy)


def main():
    cfg = RobotConfig()
    model = StiffnessModel()
    rest = np.array([[0.1, 0.0]] * 4)   # committed 5.7-deg bends toward +x
    ring = ContactRing(center=[13.0, 0.0, 40.0], axis=[0.0, 0.0, 1.0],
                       inner_radius=9.0, sensor_axis=[1.0, 0.0, 0.0],
                       label="demo")

    for name, k in (("soft (unjammed)", model.k_soft),
                    ("jammed", model.k_jam)):
        problem = EquilibriumProblem(rest=rest, stiffness=np.full(4, k),
                                     contacts=(ring,), cfg=cfg,
                                     k_contact=model.k_contact)
        trace = []
        q = solve_equilibrium(problem, rest.ravel(), energy_trace=trace)
        dev = np.max(np.linalg.norm(q.reshape(-1, 2) - rest, axis=1))
        force = checkpoint_forces(q, problem)[0]
        print(f"{name:16s}: energy {total_energy(q, problem):10.3f} mN*mm "
              f"after {len(trace)} iterates, max joint deviation "
              f"{np.degrees(dev):6.3f} deg, ring reads {force:7.2f} mN")

    print("\nthe jammed body holds its committed shape (tiny deviation) at "
          "the price of a larger ring force; the soft body complies and "
          "presses gently.")


if __name__ == "__main__":
    main()
