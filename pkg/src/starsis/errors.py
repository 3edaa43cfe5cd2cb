"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid model parameters (a, b outside (0, 1), bad spoke counts, ...)."""


class StateRangeError(ValueError):
    """A probability/state entry lies outside [0, 1] or is not finite."""


class DimensionError(ValueError):
    """State length does not match the topology or level count."""


class TopologyError(ValueError):
    """Topology is malformed or not of the shape an operation requires."""


class CurveExitError(ValueError):
    """The inverse phi2 curve has left the unit square at this y."""


class RegionError(ValueError):
    """A point is not in the region an operation requires."""


class RegimeError(ValueError):
    """Operation requires a different threshold regime."""


class ClosedFormSingularError(ArithmeticError):
    """Closed-form expression is numerically singular at these parameters."""


class ConvergenceError(RuntimeError):
    """An iteration or solver did not converge within its cap."""


class InsufficientSamplesError(RuntimeError):
    """Too few sample points landed in the regions being tallied."""
