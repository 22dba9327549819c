"""Exception hierarchy shared by the planner, simulator and CLI."""


class MRTAError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MRTAError):
    """Instance file could not be read or does not match the schema."""


class ValidationError(MRTAError):
    """Instance parsed but violates an invariant."""


class PlanningError(MRTAError):
    """Any failure while building a plan from a valid instance."""


class DegenerateInput(PlanningError):
    pass


class EmptyRoadmap(PlanningError):
    pass


class Unreachable(PlanningError):
    pass


class NoVisibleNode(PlanningError):
    pass


class CyclicDependency(PlanningError):
    pass


class InsufficientRobots(PlanningError):
    pass


class CountMismatch(PlanningError):
    pass


class PlacementFailure(PlanningError):
    pass


class StepLimit(MRTAError):
    """Simulation exceeded its step budget."""
