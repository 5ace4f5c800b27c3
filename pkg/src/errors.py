"""Exception hierarchy for fairness computations."""


class FairnessError(ValueError):
    """Base class for every error raised by the library."""


class InvalidAllocationError(FairnessError):
    """Allocation vector is empty, negative, non-finite or all zero."""


class SingularParameterError(FairnessError):
    """Parameter sits on a singular point of the family (beta = 0 or beta = 1)."""

    def __init__(self, message: str, parameter: str = "beta") -> None:
        super().__init__(message)
        self.parameter = parameter


class ParameterDomainError(FairnessError):
    """Parameter outside the domain of the requested operation."""

    def __init__(self, parameter: str, message: str) -> None:
        super().__init__(f"{parameter}: {message}")
        self.parameter = parameter


class PartitionMismatchError(FairnessError):
    """Generator weight exponent inconsistent with beta."""


class DegenerateDirectionError(FairnessError):
    """Fairness direction eta vanishes (allocation already equal)."""


class InfeasibleRegionError(FairnessError):
    """Feasible region is empty or unbounded, or a point lies outside it."""


class SolverConvergenceError(FairnessError):
    """No start of the tradeoff solver produced a usable allocation."""


class AllocationParseError(FairnessError):
    """Input file could not be turned into allocation vectors."""

    def __init__(self, message: str, location: str) -> None:
        super().__init__(f"{location}: {message}")
        self.location = location
