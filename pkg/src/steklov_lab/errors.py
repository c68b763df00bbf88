"""Exception hierarchy shared by all modules."""


class SteklovError(Exception):
    """Base class; ``module`` names the raising subsystem for CLI messages."""

    module = "steklov_lab"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class InvalidSpec(SteklovError, ValueError):
    module = "geometry"


class DegenerateCell(SteklovError, ValueError):
    module = "geometry"


class HoleRequired(SteklovError, ValueError):
    module = "shells"


class OutOfRange(SteklovError, ValueError):
    module = "shells"


class RateViolation(SteklovError, ValueError):
    module = "shells"


class NothingToEliminate(SteklovError, ValueError):
    module = "discretize"


class SingularInterior(SteklovError, ArithmeticError):
    module = "eigensolve"


class NotPositiveDefinite(SteklovError, ArithmeticError):
    module = "eigensolve"


class AllNeutral(SteklovError, ValueError):
    module = "analysis"


class NotApplicable(SteklovError, ValueError):
    module = "analysis"


class ScheduleTooCoarse(SteklovError, ValueError):
    module = "experiments"


class InvalidEnclosure(SteklovError, ValueError):
    module = "experiments"


class ParseError(SteklovError, ValueError):
    module = "cli"


class ValidationError(SteklovError, ValueError):
    module = "cli"

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
