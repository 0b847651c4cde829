"""Exception hierarchy.

``ConfigError`` maps to CLI exit code 2, every ``NumericalError`` to exit
code 1.
"""


class PairgenError(Exception):
    """Base class for all package errors."""


class ConfigError(PairgenError, ValueError):
    """Malformed or inconsistent configuration."""


class NumericalError(PairgenError):
    """A computation could not produce a trustworthy result."""


class DomainError(NumericalError, ValueError):
    """Argument outside the validity range of a model."""


class PoleError(DomainError):
    """Argument sits on a singularity of a model."""


class NotGuidedError(NumericalError):
    """Requested mode is below cutoff."""

    def __init__(self, message, v_number=None, cutoff_v=None):
        super().__init__(message)
        self.v_number = v_number
        self.cutoff_v = cutoff_v


class RootBracketError(NumericalError):
    """Root finder could not bracket a solution."""


class StencilCutoffError(NotGuidedError):
    """Finite-difference stencil crosses a mode cutoff."""


class NoPhasematchError(NumericalError):
    """No sign change of the index mismatch inside the diameter bracket."""

    def __init__(self, message, delta_low=None, delta_high=None):
        super().__init__(message)
        self.delta_low = delta_low
        self.delta_high = delta_high


class DegenerateBracketError(NoPhasematchError):
    """The index mismatch vanishes identically across the bracket."""


class ContractError(PairgenError, ValueError):
    """Input violates an operation precondition (e.g. unnormalized data)."""


class GridTruncationError(NumericalError):
    """The spectral grid cuts off a significant part of the amplitude."""


class FirstOrderValidityError(NumericalError):
    """Pair probability too large for the first-order state expansion."""


class PairgenWarning(UserWarning):
    """Result is usable but lies near the edge of validity."""


class WeakOverlapWarning(PairgenWarning):
    """Nonlinear overlap vanishes; the effective area diverges."""


class FirstOrderWarning(PairgenWarning):
    """Pair probability large enough that higher-order terms may matter."""


class GridResolutionError(NumericalError):
    """Grid step too coarse to resolve the narrow sum-frequency structure."""
