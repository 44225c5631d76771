"""Exceptions classes for QZE Purify module.

This module holds the custom exceptions used across all components of the
QZE Purify module. Numerical failures derive from ``NumericalError`` so that
the CLI can map them to their own exit code.
"""
from typing import Any

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
_ERROR_UNKNOWN_: str = "Unknown error"


# =========================================================
#        M A I N   C L A S S   D E F I N I T I O N
# =========================================================
class QzePurifyError(Exception):
    """Exception base class for QZE Purify module.

    Catch this exception to catch all custom exceptions from
    the QZE Purify module.

    Looks for ``message`` and ``data`` in kwargs

    Args:
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        self.message = kwargs.get("message", _ERROR_UNKNOWN_)
        self.data = kwargs.get("data")
        super().__init__(self.message)

    def __repr__(self) -> str:
        return f"<{type(self).__name__}: {self.message}>"


class NumericalError(QzePurifyError):
    """Base class for failures of the numerical kernel."""


class InvalidParameterError(QzePurifyError):
    """Invalid parameter error.

    Raised when a given value is out of bounds and/or does not meet
    requirements for a domain type or an operation argument.

    Args:
        errMsg:
            error message for 'validation' failure
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, errMsg: str, *args: Any, **kwargs: Any) -> None:
        kwargs["message"] = f"Invalid parameter: {errMsg}"
        super().__init__(*args, **kwargs)


class NotHermitianError(NumericalError):
    """Matrix is not Hermitian within tolerance.

    Args:
        deviation:
            largest entry of ``|m - m^dagger|``
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, deviation: float, *args: Any, **kwargs: Any) -> None:
        self.deviation = deviation
        kwargs["message"] = f"Matrix is not Hermitian (max deviation {deviation:.3e})"
        super().__init__(*args, **kwargs)


class NoConvergenceError(NumericalError):
    """Eigensolver did not converge. The offending matrix is in ``data``."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("message", "Eigenvalue iteration did not converge")
        super().__init__(*args, **kwargs)


class SingularMatrixError(NumericalError):
    """Matrix is singular or too ill-conditioned to invert.

    Args:
        condition:
            2-norm condition estimate of the matrix
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, condition: float, *args: Any, **kwargs: Any) -> None:
        self.condition = condition
        kwargs["message"] = f"Matrix is singular (condition {condition:.3e})"
        super().__init__(*args, **kwargs)


class DefectiveMatrixError(NumericalError):
    """Eigenvector matrix is (nearly) defective, left vectors are unavailable."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("message", "Right-eigenvector matrix is defective")
        super().__init__(*args, **kwargs)


class NotNormalizedError(NumericalError):
    """State is not normalized.

    Args:
        norm:
            norm (or trace) found
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, norm: float, *args: Any, **kwargs: Any) -> None:
        self.norm = norm
        kwargs["message"] = f"State is not normalized (norm {norm:.12g})"
        super().__init__(*args, **kwargs)


class DegenerateTopError(NumericalError):
    """Top two eigenvalues share their modulus; asymptotic formulas do not apply."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("message", "Leading eigenvalue is degenerate in modulus")
        super().__init__(*args, **kwargs)


class ZeroProbabilityError(NumericalError):
    """Measurement protocol went extinct.

    Args:
        step:
            step (1-based) at which the success probability vanished
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, step: int, *args: Any, **kwargs: Any) -> None:
        self.step = step
        kwargs["message"] = f"Success probability vanished at step {step}"
        super().__init__(*args, **kwargs)


class AssignmentAmbiguousError(NumericalError):
    """Exact and perturbative levels cannot be paired unambiguously.

    The partial report is available in ``data``.
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("message", "Level spacing too small for unambiguous pairing")
        super().__init__(*args, **kwargs)


class InvalidRegimeError(QzePurifyError):
    """Perturbative regime has no small parameter.

    Args:
        regime:
            name of regime
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, regime: str, *args: Any, **kwargs: Any) -> None:
        self.regime = regime
        kwargs["message"] = f"Invalid regime for given parameters: {regime}"
        super().__init__(*args, **kwargs)


class SpecMismatchError(QzePurifyError):
    """Grids do not share the same axes."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("message", "Grid axes do not match")
        super().__init__(*args, **kwargs)


class UsageError(QzePurifyError):
    """Invalid command line or config file entry.

    Args:
        key:
            offending key
        accepted:
            description of accepted values
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, key: str, accepted: str, *args: Any, **kwargs: Any) -> None:
        self.key = key
        self.accepted = accepted
        kwargs["message"] = f"Invalid value for '{key}': expected {accepted}"
        super().__init__(*args, **kwargs)


class IoError(QzePurifyError):
    """Unable to write or read an output artifact.

    Args:
        fName:
            path of the artifact
        args:
            exception arguments
        kwargs:
            exception kwargs
    """

    def __init__(self, fName: str, *args: Any, **kwargs: Any) -> None:
        self.fName = fName
        kwargs["message"] = f"Unable to access file: {fName}"
        super().__init__(*args, **kwargs)
