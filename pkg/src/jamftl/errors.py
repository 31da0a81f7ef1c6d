"""Exception types shared across the simulator."""


class JamFtlError(Exception):
    """Base class for simulator errors."""


class ChannelDomainError(JamFtlError):
    """Channel angle lies outside the open interval (0, pi/2)."""


class LimitExceeded(JamFtlError):
    """A commanded bend exceeds the mechanical joint limit."""


class CycleStateError(JamFtlError):
    """Cycle operation invoked while the robot is not at a cycle boundary."""


class SolverFailure(JamFtlError):
    """Equilibrium solver hit the iteration cap without converging."""


class TargetUnreachable(JamFtlError):
    """Steering toward the trajectory would exceed the joint limit."""


class ScenarioError(JamFtlError):
    """Scenario file failed to parse or validate."""
