"""Exception hierarchy shared by all modules."""


class ProjConsensusError(Exception):
    """Base class for library errors."""


class InvalidInputError(ProjConsensusError, ValueError):
    pass


class CapacityError(ProjConsensusError):
    """An exact enumeration or dense solve exceeded its configured size cap."""


class InconsistentEquationError(ProjConsensusError):
    """A linear equation that must be solvable has no solution."""

    def __init__(self, message, agent=None):
        super().__init__(message)
        self.agent = agent


class NotApplicableError(ProjConsensusError):
    pass


class ScenarioParseError(ProjConsensusError):
    """Malformed scenario file; ``location`` names the offending line or key."""

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location
