"""Dense complex linear algebra kernel for QZE Purify module.

All matrices handled here are small (dimension 2, 4 or 8), so every routine
works on plain ``numpy`` arrays and leans on LAPACK through ``numpy.linalg``.
The functions add the contract checks the rest of the module relies on:
Hermiticity before ``eigh``, unit-norm eigenvectors and a condition flag
after ``eig``, and a condition guard before inversion.

Note:
    All functions are pure; inputs are never modified in place.
"""
import logging
from typing import NamedTuple
from typing import Tuple

import numpy as np
import numpy.typing as npt

import qze_purify.constants as const
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NoConvergenceError
from qze_purify.exceptions import NotHermitianError
from qze_purify.exceptions import SingularMatrixError

__all__ = [
    "ComplexMatrix",
    "ComplexVector",
    "GeneralEig",
    "condition_number",
    "general_eig",
    "hermitian_eig",
    "invert",
    "partial_trace_first",
    "unitary_propagator",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]


class GeneralEig(NamedTuple):
    """Eigensystem of a general complex matrix.

    Attributes:
        values:
            eigenvalues, in solver order, with multiplicity
        vectors:
            unit-norm right eigenvectors as columns
        condition:
            2-norm condition estimate of ``vectors``
        defective:
            'True' if ``condition`` exceeds the defective threshold
    """

    values: ComplexVector
    vectors: ComplexMatrix
    condition: float
    defective: bool


def _as_square(m: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("matrix has non-finite entries")
    return arr


def condition_number(m: npt.ArrayLike) -> float:
    """Return 2-norm condition estimate (``inf`` for singular input)."""
    arr = _as_square(m)
    cond = float(np.linalg.cond(arr))
    return cond if np.isfinite(cond) else float("inf")


# =========================================================
#       E I G E N - D E C O M P O S I T I O N S
# =========================================================
def hermitian_eig(m: npt.ArrayLike) -> Tuple[RealVector, ComplexMatrix]:
    """Diagonalize a Hermitian matrix.

    Example:
        >>> evals, evecs = hermitian_eig([[0, 1], [1, 0]])
        >>> assert np.allclose(evals, [-1, 1])

    Args:
        m:
            Hermitian matrix (max ``|m - m^dagger|`` entry within tolerance)

    Returns:
        Tuple with ascending real eigenvalues and a unitary matrix holding the
        matching eigenvectors as columns.

    Raises:
        NotHermitianError: input deviates from its adjoint beyond tolerance
        NoConvergenceError: LAPACK iteration failed
    """
    arr = _as_square(m)
    deviation = float(np.max(np.abs(arr - arr.conj().T)))
    if deviation > const.TOL_HERMITIAN:
        log.error(f"hermitian_eig: input deviates from adjoint by {deviation:.3e}")
        raise NotHermitianError(deviation, data=arr)

    try:
        evals, evecs = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as e:
        log.error(f"hermitian_eig: {e}")
        raise NoConvergenceError(data=arr) from e

    return evals.astype(np.float64), evecs.astype(np.complex128)


def unitary_propagator(h: npt.ArrayLike, tau: float) -> ComplexMatrix:
    """Build ``exp(-i h tau)`` by spectral exponentiation.

    Negative ``tau`` is accepted and means reverse evolution. ``tau == 0``
    returns the identity exactly.

    Args:
        h:
            Hermitian generator
        tau:
            evolution time

    Returns:
        Unitary propagator
    """
    arr = _as_square(h)
    if tau == 0:
        # Still validate the generator so errors do not depend on tau.
        hermitian_eig(arr)
        return np.eye(arr.shape[0], dtype=np.complex128)

    evals, evecs = hermitian_eig(arr)
    phases = np.exp(-1j * evals * tau)
    return (evecs * phases) @ evecs.conj().T


def general_eig(m: npt.ArrayLike) -> GeneralEig:
    """Diagonalize a general (non-normal) 4x4 complex matrix.

    The LAPACK driver behind ``numpy.linalg.eig`` balances the matrix, reduces
    it to Hessenberg form, runs the implicit-shift QR iteration to complex
    Schur form and back-substitutes for the eigenvectors.

    Args:
        m:
            4x4 complex matrix

    Returns:
        'GeneralEig' record. A near-defective eigenvector matrix is flagged,
        not raised.

    Raises:
        InvalidParameterError: input is not 4x4
        NoConvergenceError: QR iteration failed
    """
    arr = _as_square(m)
    if arr.shape != (4, 4):
        raise InvalidParameterError(f"general_eig expects 4x4 input, got {arr.shape}")

    try:
        evals, evecs = np.linalg.eig(arr)
    except np.linalg.LinAlgError as e:
        log.error(f"general_eig: {e}")
        raise NoConvergenceError(data=arr) from e

    evecs = evecs / np.linalg.norm(evecs, axis=0)
    cond = condition_number(evecs)
    defective = cond > const.COND_DEFECTIVE
    if defective:
        log.debug(f"general_eig: eigenvector condition {cond:.3e} flagged defective")

    return GeneralEig(
        values=evals.astype(np.complex128),
        vectors=evecs.astype(np.complex128),
        condition=cond,
        defective=defective,
    )


# =========================================================
#              O T H E R   O P E R A T I O N S
# =========================================================
def invert(m: npt.ArrayLike) -> ComplexMatrix:
    """Invert a well-conditioned matrix.

    Args:
        m:
            square matrix with condition estimate within the accepted bound

    Returns:
        Inverse matrix

    Raises:
        SingularMatrixError: condition estimate exceeds the accepted bound
    """
    arr = _as_square(m)
    cond = condition_number(arr)
    if cond > const.COND_SINGULAR:
        log.error(f"invert: condition {cond:.3e} exceeds {const.COND_SINGULAR:.0e}")
        raise SingularMatrixError(cond, data=arr)

    return np.linalg.inv(arr)


def partial_trace_first(rho: npt.ArrayLike) -> ComplexMatrix:
    """Trace out the first qubit of a two-qubit operator.

    The basis order is (up-up, up-down, down-up, down-down), i.e. row index
    ``2 * a + b`` for qubit states ``a`` (first) and ``b`` (second).

    Example:
        >>> rho = np.zeros((4, 4)); rho[1, 1] = 1.0
        >>> assert np.allclose(partial_trace_first(rho), [[0, 0], [0, 1]])

    Args:
        rho:
            4x4 operator on the two-qubit space

    Returns:
        2x2 reduced operator on the second qubit

    Raises:
        InvalidParameterError: input is not 4x4
    """
    arr = _as_square(rho)
    if arr.shape != (4, 4):
        raise InvalidParameterError(f"partial trace expects 4x4 input, got {arr.shape}")

    return np.einsum("asat->st", arr.reshape(2, 2, 2, 2))
