"""Exception hierarchy shared across the package."""


class CliqueschedError(Exception):
    """Base class for all package-specific errors."""


class InvalidInstance(CliqueschedError):
    """The instance failed validation (see ``validate_instance`` for details)."""


class EmptyLayer(CliqueschedError):
    """Scoping or pruning emptied a dimension; no schedule can exist."""


class UnsatisfiableInclude(CliqueschedError):
    """A vertex that must be covered cannot appear in any valid configuration."""


class CoverExceedsBudget(CliqueschedError):
    """The clique cover needs more configurations than the node budget allows."""


class Infeasible(CliqueschedError):
    """No schedule satisfies the constraints."""


class EmptySchedule(CliqueschedError):
    """A distribution was requested for a schedule with no configurations."""


class UnitMismatch(CliqueschedError):
    """A schedule references a unit missing from the normalized target space."""


class DegenerateTarget(CliqueschedError):
    """Target adjustment left a dimension, pair, or the whole space with zero mass."""


class TooLarge(CliqueschedError):
    """The instance exceeds the exhaustive-search guards of the oracle."""


class InvalidSolution(CliqueschedError):
    """A schedule does not map back to a valid clique cover."""


class CheckpointMismatch(CliqueschedError):
    """A checkpoint does not belong to this instance/algorithm combination."""
