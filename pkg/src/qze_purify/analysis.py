"""Spectral analysis of the effective operator for QZE Purify module.

After N successful measurements the A-B pair evolves by V(tau)^N. With the
eigenvalues sorted by modulus and the left eigenvectors normalized against
the right ones, ``V^N = sum_k l_k^N |l_k><l~_k|``, so the pair is driven to
the dominant eigenvector |l_1>. This module computes that biorthogonal
system, the three witnesses (entanglement, efficiency and stability of the
extraction), and the conditional N-step state with its success probability.
"""
import logging
from dataclasses import dataclass
from math import ceil
from math import log as ln
from typing import Optional

import numpy as np
import numpy.typing as npt

import qze_purify.constants as const
from qze_purify.exceptions import DefectiveMatrixError
from qze_purify.exceptions import DegenerateTopError
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NotNormalizedError
from qze_purify.exceptions import SingularMatrixError
from qze_purify.exceptions import ZeroProbabilityError
from qze_purify.linalg import ComplexMatrix
from qze_purify.linalg import ComplexVector
from qze_purify.linalg import general_eig
from qze_purify.linalg import invert
from qze_purify.linalg import partial_trace_first

__all__ = [
    "SpectralData",
    "WitnessTriple",
    "asymptotic_state",
    "entanglement_measure",
    "entanglement_upsilon",
    "evolve_conditional",
    "evolve_spectral",
    "normalize_state",
    "required_steps",
    "spectral_decompose",
    "success_probability",
    "witnesses",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()


@dataclass(frozen=True)
class SpectralData:
    """Sorted biorthogonal eigensystem of V(tau).

    Attributes:
        eigenvalues:
            4 eigenvalues, descending modulus
        right_vecs:
            unit-norm right eigenvectors as columns, ``right_vecs[:, k]``
        left_vecs:
            left eigenvectors as rows, ``left_vecs[k] @ right_vecs[:, j]`` is
            ``delta_kj``; 'None' when the system is defective
        degenerate_top:
            'True' when ``|l_1| - |l_2|`` is below the gap tolerance
        defective:
            'True' when the right-eigenvector matrix is near singular
        condition:
            condition estimate of the right-eigenvector matrix
    """

    eigenvalues: ComplexVector
    right_vecs: ComplexMatrix
    left_vecs: Optional[ComplexMatrix]
    degenerate_top: bool
    defective: bool = False
    condition: float = 1.0

    @property
    def dominant(self) -> ComplexVector:
        """Return |l_1>."""
        return self.right_vecs[:, 0]

    @property
    def ratio(self) -> float:
        """Return ``|l_2 / l_1|`` (1 when ``|l_1|`` vanishes)."""
        top = abs(self.eigenvalues[0])
        if top < const.ZERO_MODULUS:
            return 1.0
        return float(abs(self.eigenvalues[1]) / top)


@dataclass(frozen=True)
class WitnessTriple:
    """Entanglement, efficiency and stability of the extraction.

    Attributes:
        upsilon:
            entanglement of the extracted state
        lambda_eff:
            efficiency ``1 - |l_2 / l_1|^2``
        sigma:
            stability ``|l_1|^2``
        degenerate_top:
            copied from 'SpectralData'
    """

    upsilon: float
    lambda_eff: float
    sigma: float
    degenerate_top: bool = False


def _check_density(rho: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.shape != (4, 4):
        raise InvalidParameterError(f"density matrix must be 4x4, got {arr.shape}")
    return arr


# =========================================================
#          S P E C T R A L   D E C O M P O S I T I O N
# =========================================================
def spectral_decompose(v: npt.ArrayLike) -> SpectralData:
    """Sort the eigensystem of V and build the matching left eigenvectors.

    Eigenvalues are ordered by descending modulus; ties fall back to
    descending real part, then descending imaginary part. Left vectors are
    the rows of the inverse right-eigenvector matrix.

    Args:
        v:
            4x4 effective operator

    Returns:
        'SpectralData' record; defective systems carry no left vectors
    """
    eig = general_eig(v)
    vals = eig.values
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    vals = vals[order]
    right = eig.vectors[:, order]

    mods = np.abs(vals)
    degenerate = bool(mods[0] - mods[1] < const.GAP_TOL)

    left: Optional[ComplexMatrix] = None
    defective = eig.defective
    if not defective:
        try:
            left = invert(right)
        except SingularMatrixError:
            defective = True

    if defective:
        log.debug(f"spectral_decompose: defective (condition {eig.condition:.3e})")

    return SpectralData(
        eigenvalues=vals,
        right_vecs=right,
        left_vecs=left,
        degenerate_top=degenerate,
        defective=defective,
        condition=eig.condition,
    )


# =========================================================
#                   W I T N E S S E S
# =========================================================
def entanglement_measure(rho: npt.ArrayLike) -> float:
    """Return ``2 (1 - tr(rho_B^2))`` with ``rho_B`` the trace over A.

    Example:
        >>> bell = np.zeros(4, dtype=complex); bell[1] = bell[2] = 2 ** -0.5
        >>> assert abs(entanglement_measure(np.outer(bell, bell.conj())) - 1) < 1e-12

    Args:
        rho:
            normalized 4x4 density matrix on A and B

    Returns:
        Purity-based entanglement in [0, 1] for pure states
    """
    rhoB = partial_trace_first(_check_density(rho))
    purity = float(np.real(np.trace(rhoB @ rhoB)))
    return float(min(max(2.0 * (1.0 - purity), 0.0), 1.0))


def entanglement_upsilon(state: npt.ArrayLike) -> float:
    """Return the entanglement of a unit-norm two-qubit state vector.

    Args:
        state:
            unit-norm 4-vector in (uu, ud, du, dd) order

    Returns:
        Entanglement in [0, 1]

    Raises:
        NotNormalizedError: norm deviates from 1 beyond tolerance
    """
    psi = np.asarray(state, dtype=np.complex128)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > const.TOL_NORM:
        raise NotNormalizedError(norm)
    return entanglement_measure(np.outer(psi, psi.conj()))


def witnesses(sd: SpectralData) -> WitnessTriple:
    """Compute entanglement, efficiency and stability from a spectrum.

    Efficiency is reported as exactly 0 when the top is degenerate or
    ``|l_1|`` vanishes. Stability is capped at 1 to absorb rounding of
    ``|l_1|`` just above 1.

    Args:
        sd:
            sorted eigensystem

    Returns:
        'WitnessTriple' record
    """
    top = abs(sd.eigenvalues[0])
    if sd.degenerate_top or top < const.ZERO_MODULUS:
        lambdaEff = 0.0
    else:
        lambdaEff = min(max(1.0 - sd.ratio**2, 0.0), 1.0)

    return WitnessTriple(
        upsilon=entanglement_upsilon(sd.dominant),
        lambda_eff=float(lambdaEff),
        sigma=float(min(top**2, 1.0)),
        degenerate_top=sd.degenerate_top,
    )


# =========================================================
#          C O N D I T I O N A L   E V O L U T I O N
# =========================================================
def evolve_conditional(v: npt.ArrayLike, rho0: npt.ArrayLike, n: int) -> ComplexMatrix:
    """Return the unnormalized ``V^n rho0 (V^dagger)^n``.

    The trace of the result is the probability that ``n`` consecutive
    measurements all succeed.

    Args:
        v:
            4x4 effective operator
        rho0:
            initial density matrix
        n:
            number of steps (>= 0)

    Returns:
        Unnormalized conditional density matrix
    """
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")

    vArr = np.asarray(v, dtype=np.complex128)
    rho = _check_density(rho0).copy()
    for _ in range(n):
        rho = vArr @ rho @ vArr.conj().T
    return rho


def evolve_spectral(sd: SpectralData, rho0: npt.ArrayLike, n: int) -> ComplexMatrix:
    """Evaluate the N-step state through the eigen-expansion.

    ``sum_{kj} <l~_k|rho0|l~_j> (l_k conj(l_j))^n |l_k><l_j|``

    Args:
        sd:
            sorted eigensystem with left vectors
        rho0:
            initial density matrix
        n:
            number of steps (>= 0)

    Returns:
        Unnormalized conditional density matrix

    Raises:
        DefectiveMatrixError: left vectors are not available
    """
    if sd.left_vecs is None:
        raise DefectiveMatrixError()
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")

    left = sd.left_vecs
    coeffs = left @ _check_density(rho0) @ left.conj().T
    powers = sd.eigenvalues**n
    weights = coeffs * np.outer(powers, powers.conj())
    return sd.right_vecs @ weights @ sd.right_vecs.conj().T


def normalize_state(rho: npt.ArrayLike) -> ComplexMatrix:
    """Return ``rho / tr(rho)``.

    Raises:
        ZeroProbabilityError: trace below the extinction threshold
    """
    arr = _check_density(rho)
    trace = float(np.real(np.trace(arr)))
    if trace < const.ZERO_PROBABILITY:
        raise ZeroProbabilityError(0)
    return arr / trace


def asymptotic_state(sd: SpectralData) -> ComplexMatrix:
    """Return the projector onto the extracted state |l_1>."""
    psi = sd.dominant
    return np.outer(psi, psi.conj())


def success_probability(sd: SpectralData, rho0: npt.ArrayLike, n: int) -> float:
    """Asymptotic probability of extracting |l_1> after ``n`` steps.

    ``P = <l~_1|rho0|l~_1> |l_1|^(2n)``, where the conjugate transpose of
    the left eigenvector acts as the ket |l~_1>.

    Args:
        sd:
            sorted eigensystem
        rho0:
            initial density matrix
        n:
            number of steps

    Returns:
        Non-negative probability

    Raises:
        DegenerateTopError: top eigenvalue is degenerate in modulus
        DefectiveMatrixError: left vectors are not available
    """
    if sd.degenerate_top:
        raise DegenerateTopError()
    if sd.left_vecs is None:
        raise DefectiveMatrixError()
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")

    leftTop = sd.left_vecs[0]
    weight = complex(leftTop @ _check_density(rho0) @ leftTop.conj())
    prob = weight.real * abs(sd.eigenvalues[0]) ** (2 * n)
    return float(max(prob, 0.0))


def required_steps(sd: SpectralData, tolerance: float) -> int:
    """Return the smallest N with ``|l_2 / l_1|^N <= tolerance``.

    Example:
        >>> sd = spectral_decompose(np.diag([1.0, 0.5, 0.1, 0.0]))
        >>> assert required_steps(sd, 1e-3) == 10

    Args:
        sd:
            sorted eigensystem
        tolerance:
            residual weight of the non-dominant components, in (0, 1)

    Returns:
        Number of steps

    Raises:
        DegenerateTopError: no single state is extracted
    """
    if not 0 < tolerance < 1:
        raise InvalidParameterError(f"tolerance must be in (0, 1), got {tolerance}")
    if sd.degenerate_top or sd.ratio >= 1.0:
        raise DegenerateTopError()

    ratio = sd.ratio
    if ratio <= 0.0:
        return 1
    steps = max(int(ceil(ln(tolerance) / ln(ratio) - 1e-12)), 1)
    return steps
