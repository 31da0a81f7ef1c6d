"""Quasi-static simulator for a jamming-based follow-the-leader continuum
robot: segmented-chain kinematics, the jam/steer/propagate cycle, equilibrium
statics with checkpoint-ring contact, sweep-error metrics, and a scenario
runner comparing the jamming-assisted controller against a tendon-only
baseline."""

from .environment import (Checkpoint, Trajectory, build_trajectory,
                          classify_phase, place_checkpoints)
from .errors import (ChannelDomainError, CycleStateError, JamFtlError,
                     LimitExceeded, ScenarioError, SolverFailure,
                     TargetUnreachable)
from .geometry import (ChannelLengths, JointState, Pose, RobotConfig,
                       channel_length, forward_kinematics,
                       joint_channel_lengths)
from .machine import (ConservedPath, ExtensionStrategy, FjmState, RobotState,
                      execute_cycle, plan_steering, tdcr_baseline_step,
                      tdcr_command)
from .metrics import (ForceTrace, OccupancyGrid, ftl_error,
                      rasterize_footprint, summarize_forces)
from .scenario import Scenario, load_scenario, run_scenario, scenario_from_dict
from .statics import (ContactRing, EquilibriumProblem, StiffnessModel,
                      checkpoint_forces, energy_gradient, solve_equilibrium,
                      total_energy)

__version__ = "0.1.0"
