"""Exception types shared across the package."""


class WmmdError(Exception):
    """Base class for all package errors."""


class InputError(WmmdError):
    """User-supplied data or arguments violate a precondition."""


class ContractError(WmmdError):
    """The operation is not defined for the given configuration."""


class ResourceError(WmmdError):
    """The computation would exceed a configured resource cap."""


class NumericalError(WmmdError):
    """Numerical failure: singular systems, divergence, overflow."""


class TrainingDivergence(NumericalError):
    """Training loss diverged; carries the partial trace for post-mortem."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
