"""Exception hierarchy shared by all jcdimer modules."""


class JCDimerError(Exception):
    """Base class for library errors."""


class DomainError(JCDimerError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateInputError(JCDimerError, ValueError):
    """Input makes a ratio or normalisation undefined (e.g. 0/0)."""


class IntegrationError(JCDimerError, RuntimeError):
    """Adaptive ODE integration failed.

    Attributes
    ----------
    last_time : float
        Last time reached with an accepted step.
    """

    def __init__(self, message, last_time):
        super().__init__(f"{message} (last good time t={last_time:.6g})")
        self.last_time = last_time


class ConvergenceError(JCDimerError, RuntimeError):
    """Newton iteration did not reach its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


class SingularJacobianError(JCDimerError, RuntimeError):
    """Jacobian could not be inverted during a Newton step."""


class NumericError(JCDimerError, RuntimeError):
    """A dense linear-algebra routine failed."""


class CutoffError(JCDimerError, ValueError):
    """Fock-space truncation loses more weight than allowed."""


class PropagationError(JCDimerError, RuntimeError):
    """Quantum propagation violated its norm or energy monitor."""


class GridTooSmallError(JCDimerError, ValueError):
    """Phase-space grid does not capture the state's support."""


class NoPeakError(JCDimerError, ValueError):
    """Spectrum of a flat signal has no peak to report."""


class FitDomainError(JCDimerError, ValueError):
    """Log-linear fit requested on non-positive data."""
