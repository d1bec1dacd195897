"""Exception types raised by gaitcf."""


class GaitError(Exception):
    """Base class for every error raised by this package."""


# -- input parsing ----------------------------------------------------------

class TraceFormatError(GaitError, ValueError):
    pass


class OrderingError(GaitError, ValueError):
    def __init__(self, row: int, message: str = ""):
        self.row = row
        super().__init__(message or f"timestamps not strictly increasing at data row {row}")


class NonFiniteValueError(GaitError, ValueError):
    pass


class ManifestError(GaitError, ValueError):
    pass


class EnumerationError(ManifestError):
    pass


class CompletenessError(ManifestError):
    pass


class MissingTraceError(GaitError, FileNotFoundError):
    pass


class OutputError(GaitError, OSError):
    pass


# -- signal conditioning ----------------------------------------------------

class DegenerateInputError(GaitError, ValueError):
    pass


class FilterSpecError(GaitError, ValueError):
    pass


class SignalLengthError(GaitError, ValueError):
    pass


class IrregularSamplingError(GaitError, ValueError):
    pass


# -- calibration / estimation -----------------------------------------------

class InsufficientStepsError(GaitError, ValueError):
    def __init__(self, activity: str, n_steps: int, minimum: int = 3):
        self.activity = activity
        self.n_steps = n_steps
        super().__init__(
            f"{activity}: {n_steps} steps detected, at least {minimum} required for calibration"
        )


class DegenerateDesignError(GaitError, ValueError):
    pass


class UnderdeterminedError(GaitError, ValueError):
    pass


class UndefinedAverageError(GaitError, ValueError):
    pass


class DegenerateDurationError(GaitError, ValueError):
    pass


# -- gait maps / metrics ----------------------------------------------------

class ShortCycleError(GaitError, ValueError):
    pass


class EmptyInputError(GaitError, ValueError):
    pass


class DegenerateDenominatorError(GaitError, ValueError):
    pass


class UndefinedCorrelationError(GaitError, ValueError):
    pass


# -- synthetic data ---------------------------------------------------------

class SynthConfigError(GaitError, ValueError):
    pass


class OutputCollisionError(GaitError, FileExistsError):
    pass
