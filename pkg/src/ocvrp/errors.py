"""Exception hierarchy shared by every solver and the I/O layer."""


class OcvrpError(Exception):
    """Base class for all package errors."""


class InvalidIndex(OcvrpError, IndexError):
    pass


class InvalidCoordinate(OcvrpError, ValueError):
    pass


class InvalidCost(OcvrpError, ValueError):
    pass


class FormatError(OcvrpError, ValueError):
    """File does not follow the expected schema or binary layout."""


class CorruptMatrix(FormatError):
    """Matrix header parsed but the payload is unusable."""


class ConsistencyError(OcvrpError, ValueError):
    """Two inputs disagree, e.g. matrix order vs location count."""


class Infeasible(OcvrpError):
    """No capacity-respecting assignment was produced."""


class InfeasibleConstruction(Infeasible):
    """An ant could not complete a feasible solution."""


class IoError(OcvrpError, OSError):
    pass
