"""Custom exceptions for mopf."""


class MopfError(Exception):
    """Base exception for all mopf errors."""

    pass


class CaseError(MopfError):
    """Error related to network case data."""

    pass


class CaseParseError(CaseError):
    """Malformed case input."""

    def __init__(self, location: str, token: str, message: str) -> None:
        self.location = location
        self.token = token
        super().__init__(f"Parse error at {location} near {token!r}: {message}")


class CaseValidationError(CaseError):
    """Case parsed but violates network invariants."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = list(violations)
        listing = "\n  - ".join(self.violations)
        super().__init__(f"Invalid case ({len(self.violations)} problem(s)):\n  - {listing}")


class StitchError(CaseError):
    """Tie specification references unknown data."""

    pass


class ModelError(MopfError):
    """Error while building the DC network model."""

    pass


class SingularNetworkError(ModelError):
    """Grounded susceptance matrix is singular."""

    def __init__(self, what: str) -> None:
        self.what = what
        super().__init__(f"Singular susceptance block for {what}; is the network connected?")


class SolverError(MopfError):
    """Error raised by the QP/LP solver."""

    pass


class ProblemValidationError(SolverError):
    """QP data violates the solver's input contract."""

    pass


class ParametricError(MopfError):
    """Error in parametric evaluation."""

    pass


class PenaltyConfigurationError(ParametricError):
    """Penalized area problem is unbounded, so M is misconfigured."""

    def __init__(self, area: int, message: str) -> None:
        self.area = area
        super().__init__(f"Area {area}: {message}")


class RegionDimensionError(ParametricError):
    """Brute-force region enumeration requested in too many dimensions."""

    def __init__(self, dimension: int) -> None:
        self.dimension = dimension
        super().__init__(f"Region enumeration supports at most 3 dimensions, got {dimension}")


class CoordinationError(MopfError):
    """Error while coordinating boundary angles."""

    pass


class StepsizeViolationError(CoordinationError):
    """Probe landed in regions whose intersection misses the pinned coordinates."""

    pass


class InfeasibleParameterError(CoordinationError):
    """An area problem is infeasible at the requested boundary angles."""

    def __init__(self, area: int) -> None:
        self.area = area
        super().__init__(f"Area {area} is infeasible at the requested boundary angles")


class MethodError(MopfError):
    """Base error for coordination methods."""

    pass


class MethodNotFoundError(MethodError):
    """Requested method does not exist."""

    def __init__(self, name: str, available: list[str]) -> None:
        self.name = name
        super().__init__(f"Method '{name}' not found. Available methods: {', '.join(available)}")


class MethodExecutionError(MethodError):
    """Error during a method run."""

    def __init__(self, name: str, message: str) -> None:
        self.name = name
        super().__init__(f"Error running {name}: {message}")


class CertificationError(MethodError):
    """A method stopped without an optimality certificate."""

    pass


class ExperimentConfigError(MopfError):
    """Invalid experiment configuration."""

    pass


class TraceStoreError(MopfError):
    """Error reading or writing run artifacts."""

    pass
