"""Exception types raised across the package."""


class HolodotError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HolodotError, ValueError):
    """Invalid parameters or configuration documents."""


class NumericalError(HolodotError, RuntimeError):
    """A numerical routine failed or produced an out-of-tolerance result."""


class IntegrationError(NumericalError):
    """Propagation did not converge or broke a conservation check."""

    def __init__(self, message: str, defect: float = float("nan")):
        super().__init__(message)
        self.defect = defect


class CyclicityError(NumericalError):
    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


class DecompositionError(NumericalError, ValueError):
    """A target gate is not of the requested form."""


class DegenerateParameterError(ConfigurationError):
    """Parameters give a vanishing frequency (no dynamics)."""


class ProtocolError(NumericalError):
    """A gate protocol violated its structural guarantee."""


class InfeasibleError(NumericalError):
    def __init__(self, message: str, achievable: float):
        super().__init__(message)
        self.achievable = achievable
