"""Weak- and strong-coupling spectra for QZE Purify module.

Two perturbative limits of the Hamiltonian have closed-form spectra:

* weak A-B coupling (``eta << epsilon``): the unperturbed part is the free
  term plus the ancilla couplings, and first-order corrections are
  proportional to ``eta cos(phi_eta)``;
* strong A-B coupling (``epsilon << eta``): the unperturbed part is the free
  term plus the A-B coupling, and all first-order corrections vanish. The
  ancilla then decouples from A and B, which is the Zeno-like partitioning
  that kills the extraction efficiency.

Both spectra are used as independent checks of the exact diagonalization.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from math import cos
from math import sin
from math import sqrt
from typing import List
from typing import Tuple

import numpy as np
import numpy.typing as npt

import qze_purify.constants as const
from qze_purify.exceptions import AssignmentAmbiguousError
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import InvalidRegimeError
from qze_purify.linalg import ComplexVector
from qze_purify.linalg import hermitian_eig
from qze_purify.model import ModelParams
from qze_purify.model import build_hamiltonian

__all__ = [
    "LevelMatch",
    "OrderReport",
    "PerturbativeLevel",
    "PerturbativeSpectrum",
    "Regime",
    "order_ratio",
    "strong_spectrum",
    "verify_order",
    "weak_spectrum",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

_R2_: float = 1 / sqrt(2)


class Regime(str, Enum):
    """Perturbative regime."""

    WEAK = const.REGIME_WEAK
    STRONG = const.REGIME_STRONG


@dataclass(frozen=True)
class PerturbativeLevel:
    """One level of a perturbative spectrum.

    Attributes:
        zeroth_order:
            unperturbed energy
        first_order:
            first-order energy correction
        label:
            description of the unperturbed state
        state:
            unperturbed eigenvector, 8 entries in the printed basis order
    """

    zeroth_order: float
    first_order: float
    label: str
    state: ComplexVector

    @property
    def energy(self) -> float:
        """Return zeroth plus first order."""
        return self.zeroth_order + self.first_order


@dataclass(frozen=True)
class PerturbativeSpectrum:
    """Eight levels of a perturbative spectrum."""

    regime: Regime
    levels: Tuple[PerturbativeLevel, ...]

    @property
    def energies(self) -> npt.NDArray[np.float64]:
        """Return predicted energies (zeroth plus first order) in level order."""
        return np.array([lvl.energy for lvl in self.levels])


@dataclass(frozen=True)
class LevelMatch:
    """Pairing of one predicted level with an exact eigenvalue."""

    label: str
    zeroth_order: float
    first_order: float
    predicted: float
    exact: float
    residual: float
    overlap_deficit: float


@dataclass(frozen=True)
class OrderReport:
    """Outcome of comparing a perturbative spectrum with exact diagonalization.

    Attributes:
        regime:
            perturbative regime
        small_parameter:
            ``eta / epsilon`` (weak) or ``epsilon / eta`` (strong)
        matches:
            one record per predicted level, in level order
        max_residual:
            largest ``|predicted - exact|``
        max_overlap_deficit:
            largest ``1 - |<exact|unperturbed>|^2``
        min_spacing:
            smallest gap between distinct predicted levels
        ambiguous:
            'True' when ``min_spacing`` is below the ambiguity factor times
            ``max_residual``
    """

    regime: Regime
    small_parameter: float
    matches: Tuple[LevelMatch, ...]
    max_residual: float
    max_overlap_deficit: float
    min_spacing: float
    ambiguous: bool


def _basis_vector(*amplitudes: Tuple[int, complex]) -> ComplexVector:
    vec = np.zeros(8, dtype=np.complex128)
    for row, amp in amplitudes:
        vec[row] = amp
    return vec


# =========================================================
#            P E R T U R B A T I V E   S P E C T R A
# =========================================================
def weak_spectrum(p: ModelParams) -> PerturbativeSpectrum:
    """Spectrum to first order in ``eta / epsilon``.

    Rows of the printed basis: 0 uu|u, 1 ud|u, 2 du|u, 3 uu|d, 4 ud|d,
    5 du|d, 6 dd|u, 7 dd|d. ``PsiS`` and ``PsiA`` are the symmetric and
    antisymmetric combinations of ud and du.

    Args:
        p:
            model parameters with ``epsilon > 0``

    Returns:
        'PerturbativeSpectrum' with 8 levels

    Raises:
        InvalidRegimeError: ``epsilon`` is zero
    """
    if p.epsilon <= 0:
        raise InvalidRegimeError(const.REGIME_WEAK)

    w, e = p.omega, p.epsilon
    es = e * sqrt(2)
    shift = p.eta * cos(p.phi_eta)
    half = 0.5 * shift

    def _mix(ancillaRow: int, ud: int, du: int, sign: float) -> ComplexVector:
        return _basis_vector(
            (ancillaRow, _R2_), (ud, sign * 0.5), (du, sign * 0.5)
        )

    psiAUp = _basis_vector((1, -_R2_), (2, _R2_))
    psiADown = _basis_vector((4, -_R2_), (5, _R2_))
    levels = (
        PerturbativeLevel(3 * w, 0.0, "uu|u", _basis_vector((0, 1.0))),
        PerturbativeLevel(2 * w + es, half, "(uu|d+PsiS|u)/sqrt2", _mix(3, 1, 2, 1.0)),
        PerturbativeLevel(2 * w - es, half, "(uu|d-PsiS|u)/sqrt2", _mix(3, 1, 2, -1.0)),
        PerturbativeLevel(2 * w, -shift, "PsiA|u", psiAUp),
        PerturbativeLevel(w + es, half, "(dd|u+PsiS|d)/sqrt2", _mix(6, 4, 5, 1.0)),
        PerturbativeLevel(w - es, half, "(dd|u-PsiS|d)/sqrt2", _mix(6, 4, 5, -1.0)),
        PerturbativeLevel(w, -shift, "PsiA|d", psiADown),
        PerturbativeLevel(0.0, 0.0, "dd|d", _basis_vector((7, 1.0))),
    )
    return PerturbativeSpectrum(Regime.WEAK, levels)


def strong_spectrum(p: ModelParams) -> PerturbativeSpectrum:
    """Spectrum to first order in ``epsilon / eta``.

    The unperturbed states mixing ud and du are
    ``(ud +/- exp(-i phi_eta) du) / sqrt2`` with energies shifted by
    ``+/- eta``; every first-order correction is zero.

    Args:
        p:
            model parameters with ``eta > 0``

    Returns:
        'PerturbativeSpectrum' with 8 levels

    Raises:
        InvalidRegimeError: ``eta`` is zero
    """
    if p.eta <= 0:
        raise InvalidRegimeError(const.REGIME_STRONG)

    w, g = p.omega, p.eta
    phase = complex(cos(p.phi_eta), -sin(p.phi_eta)) * _R2_

    def _pair(ud: int, du: int, sign: float) -> ComplexVector:
        return _basis_vector((ud, _R2_), (du, sign * phase))

    levels = (
        PerturbativeLevel(3 * w, 0.0, "uu|u", _basis_vector((0, 1.0))),
        PerturbativeLevel(2 * w + g, 0.0, "(ud+e^-iphi du)/sqrt2|u", _pair(1, 2, 1.0)),
        PerturbativeLevel(2 * w - g, 0.0, "(ud-e^-iphi du)/sqrt2|u", _pair(1, 2, -1.0)),
        PerturbativeLevel(2 * w, 0.0, "uu|d", _basis_vector((3, 1.0))),
        PerturbativeLevel(w + g, 0.0, "(ud+e^-iphi du)/sqrt2|d", _pair(4, 5, 1.0)),
        PerturbativeLevel(w - g, 0.0, "(ud-e^-iphi du)/sqrt2|d", _pair(4, 5, -1.0)),
        PerturbativeLevel(w, 0.0, "dd|u", _basis_vector((6, 1.0))),
        PerturbativeLevel(0.0, 0.0, "dd|d", _basis_vector((7, 1.0))),
    )
    return PerturbativeSpectrum(Regime.STRONG, levels)


# =========================================================
#           C O M P A R I S O N   W I T H   E X A C T
# =========================================================
def _greedy_pairs(
    predicted: npt.NDArray[np.float64], exact: npt.NDArray[np.float64]
) -> List[int]:
    """Pair each predicted level (in order) with the nearest unused exact one."""
    unused = list(range(len(exact)))
    pairs = []
    for value in predicted:
        best = min(unused, key=lambda k: (abs(exact[k] - value), k))
        unused.remove(best)
        pairs.append(best)
    return pairs


def _min_spacing(predicted: npt.NDArray[np.float64]) -> float:
    gaps = np.abs(predicted[:, None] - predicted[None, :])
    distinct = gaps[gaps > const.DEGENERATE_LEVELS]
    return float(distinct.min()) if distinct.size else float("inf")


def verify_order(p: ModelParams, regime: Regime, strict: bool = True) -> OrderReport:
    """Compare a perturbative spectrum with the exact eigenvalues of H.

    Args:
        p:
            model parameters
        regime:
            perturbative regime to check
        strict:
            if 'True' raise on ambiguous pairing, else only flag it

    Returns:
        'OrderReport' record

    Raises:
        AssignmentAmbiguousError: predicted levels closer than the ambiguity
            factor times the residual (report in ``data``)
    """
    regime = Regime(regime)
    spectrum = weak_spectrum(p) if regime is Regime.WEAK else strong_spectrum(p)
    small = p.eta / p.epsilon if regime is Regime.WEAK else p.epsilon / p.eta

    evals, evecs = hermitian_eig(build_hamiltonian(p))
    predicted = spectrum.energies
    pairs = _greedy_pairs(predicted, evals)

    matches = []
    for lvl, k in zip(spectrum.levels, pairs):
        overlap = abs(np.vdot(evecs[:, k], lvl.state)) ** 2
        matches.append(
            LevelMatch(
                label=lvl.label,
                zeroth_order=float(lvl.zeroth_order),
                first_order=float(lvl.first_order),
                predicted=float(lvl.energy),
                exact=float(evals[k]),
                residual=float(abs(evals[k] - lvl.energy)),
                overlap_deficit=float(max(1.0 - overlap, 0.0)),
            )
        )

    maxResidual = max(m.residual for m in matches)
    spacing = _min_spacing(predicted)
    report = OrderReport(
        regime=regime,
        small_parameter=float(small),
        matches=tuple(matches),
        max_residual=maxResidual,
        max_overlap_deficit=max(m.overlap_deficit for m in matches),
        min_spacing=spacing,
        ambiguous=spacing < const.AMBIGUITY_FACTOR * maxResidual,
    )
    log.debug(
        f"verify_order[{regime.value}]: small={small:.3e} residual={maxResidual:.3e}"
    )

    if report.ambiguous and strict:
        log.warning(f"verify_order[{regime.value}]: ambiguous level pairing")
        raise AssignmentAmbiguousError(data=report)

    return report


def order_ratio(p: ModelParams, regime: Regime, factor: float = 10.0) -> float:
    """Return residual(s) / residual(s / factor) for the regime's small parameter.

    The weak regime keeps ``epsilon`` and scales ``eta``; the strong regime
    keeps ``eta`` and scales ``epsilon``. A first-order-accurate spectrum
    gives a ratio near ``factor ** 2``.

    Args:
        p:
            model parameters at the larger small parameter
        regime:
            perturbative regime
        factor:
            reduction factor for the small parameter (> 1)

    Returns:
        Ratio of maximum residuals
    """
    if factor <= 1:
        raise InvalidParameterError(f"factor must be > 1, got {factor}")

    regime = Regime(regime)
    if regime is Regime.WEAK:
        reduced = ModelParams(p.omega, p.epsilon, p.eta / factor, p.phi_eta)
    else:
        reduced = ModelParams(p.omega, p.epsilon / factor, p.eta, p.phi_eta)

    coarse = verify_order(p, regime)
    fine = verify_order(reduced, regime)
    if fine.max_residual == 0.0:
        return float("inf")
    return coarse.max_residual / fine.max_residual
