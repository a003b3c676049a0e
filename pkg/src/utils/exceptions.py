from src.utils.constants import EXIT_CONFIG, EXIT_INVARIANT, EXIT_NUMERICAL


class BosonEntanglementError(Exception):
    """Base class for every error raised by the library and the CLI."""
    exit_code = EXIT_NUMERICAL


class InputError(BosonEntanglementError, ValueError):
    exit_code = EXIT_CONFIG


class ConfigInvalid(InputError):
    """
    Experiment configuration failed validation.

    Attributes:
        pointer (str): JSON pointer to the offending field.
    """

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


class InvalidProbability(InputError):
    pass


class ModeOutOfRange(InputError):
    pass


class MixedParticleChange(InputError):
    pass


class EmptyState(InputError):
    pass


class ConstraintViolation(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class InvariantViolation(BosonEntanglementError):
    exit_code = EXIT_INVARIANT


class PositivityViolation(InvariantViolation):
    pass


class BoundViolated(InvariantViolation):
    pass


class NumericalFailure(BosonEntanglementError):
    exit_code = EXIT_NUMERICAL


class NegativeEigenvalueInR(NumericalFailure):
    pass


class TraceNotPreserved(NumericalFailure):
    pass


class ValidityGateFailed(NumericalFailure):
    """Raised in strict mode only; carries the flagged estimate."""

    def __init__(self, message: str, estimate=None):
        self.estimate = estimate
        super().__init__(message)


class TaskFailed(BosonEntanglementError):

    def __init__(self, task: str, message: str, exit_code: int = EXIT_NUMERICAL):
        self.task = task
        self.exit_code = exit_code
        super().__init__(f"Task '{task}' failed: {message}")
