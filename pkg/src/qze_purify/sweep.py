"""Witness maps over (eps tau, theta) grids for QZE Purify module.

A sweep evaluates the three witnesses on every cell of a rectangular grid
spanned by ``eps * tau`` and ``theta / pi``, with the model parameters and
the ancilla phase held fixed. Rows (one ``eps * tau`` value each) are the
unit of parallel work: the 8x8 propagator is built once per row and then
projected onto every ancilla state of that row. Each cell goes through the
same code path as 'evaluate_point', so a sweep cell and a single-point
evaluation agree bit for bit, whatever the worker count.

Two sweeps on the same axes can be compared cell by cell; differences are
classified as none, moderate or large increase/decrease.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from math import isfinite
from math import pi
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt
from joblib import Parallel
from joblib import delayed

import qze_purify.constants as const
from qze_purify.analysis import SpectralData
from qze_purify.analysis import WitnessTriple
from qze_purify.analysis import spectral_decompose
from qze_purify.analysis import witnesses
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NumericalError
from qze_purify.exceptions import SpecMismatchError
from qze_purify.linalg import ComplexMatrix
from qze_purify.linalg import ComplexVector
from qze_purify.linalg import unitary_propagator
from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.model import ancilla_vector
from qze_purify.model import build_hamiltonian
from qze_purify.model import project_propagator
from qze_purify.utils import resolve_workers

__all__ = [
    "AxisSpec",
    "DiffMap",
    "DiscrepancyClass",
    "GridSpec",
    "OptimalPoint",
    "PointResult",
    "SweepGrid",
    "diff_map",
    "efficiency_collapse_fraction",
    "evaluate_point",
    "find_optimal_points",
    "run_sweep",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

FloatGrid = npt.NDArray[np.float64]
BoolGrid = npt.NDArray[np.bool_]

# Column order of the per-row work result
_COLS_ = (
    const.QTY_UPSILON,
    const.QTY_LAMBDA,
    const.QTY_SIGMA,
    "degenerate",
    "defective",
)


@dataclass(frozen=True)
class AxisSpec:
    """Inclusive, linearly spaced grid axis.

    Attributes:
        minimum:
            first point
        maximum:
            last point
        count:
            number of points, at least 2
    """

    minimum: float
    maximum: float
    count: int

    def __post_init__(self) -> None:
        if not (isfinite(self.minimum) and isfinite(self.maximum)):
            raise InvalidParameterError("axis bounds must be finite")
        if self.count < 2:
            raise InvalidParameterError(f"axis count must be >= 2, got {self.count}")
        if self.minimum >= self.maximum:
            raise InvalidParameterError(
                f"axis range must be ordered, got [{self.minimum}, {self.maximum}]"
            )

    @property
    def points(self) -> FloatGrid:
        """Return the ``count`` grid points, both ends included."""
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Axes and fixed parameters of a sweep.

    Attributes:
        eps_tau:
            ``eps * tau`` axis, minimum > 0
        theta_over_pi:
            ``theta / pi`` axis inside (0, 1)
        params:
            model parameters held fixed over the grid
        phi_x:
            ancilla phase held fixed over the grid
    """

    eps_tau: AxisSpec
    theta_over_pi: AxisSpec
    params: ModelParams
    phi_x: float = 0.0

    def __post_init__(self) -> None:
        if self.eps_tau.minimum <= 0:
            raise InvalidParameterError(
                f"eps_tau minimum must be > 0, got {self.eps_tau.minimum}"
            )
        if not (0 < self.theta_over_pi.minimum and self.theta_over_pi.maximum < 1):
            raise InvalidParameterError("theta_over_pi axis must lie inside (0, 1)")
        if not (isfinite(self.phi_x) and 0 <= self.phi_x < 2 * pi):
            raise InvalidParameterError(f"phi_x must be in [0, 2pi), got {self.phi_x}")

    @property
    def shape(self) -> Tuple[int, int]:
        """Return ``(tau count, theta count)``."""
        return (self.eps_tau.count, self.theta_over_pi.count)

    @property
    def tau_points(self) -> FloatGrid:
        """Return time step of each row (the axis itself when eps = 0)."""
        if self.params.epsilon > 0:
            return self.eps_tau.points / self.params.epsilon
        return self.eps_tau.points

    def ancilla(self, theta_over_pi: float) -> AncillaState:
        """Return the ancilla state at a given ``theta / pi``."""
        return AncillaState(theta=pi * theta_over_pi, phi_x=self.phi_x)

    def same_axes(self, other: "GridSpec") -> bool:
        """Check that both specs sample the same cells."""
        return (
            self.eps_tau == other.eps_tau
            and self.theta_over_pi == other.theta_over_pi
            and self.phi_x == other.phi_x
        )


@dataclass(frozen=True)
class PointResult:
    """Witnesses and flags of one parameter point.

    Attributes:
        witnesses:
            entanglement, efficiency and stability
        degenerate:
            top eigenvalue degenerate in modulus
        defective:
            eigenvector matrix near singular, or the decomposition failed
        spectral:
            sorted eigensystem, 'None' if the decomposition failed
    """

    witnesses: WitnessTriple
    degenerate: bool
    defective: bool
    spectral: Optional[SpectralData] = None


@dataclass(frozen=True)
class SweepGrid:
    """Witness fields of a sweep, indexed ``[tau index, theta index]``."""

    spec: GridSpec
    upsilon: FloatGrid
    lambda_eff: FloatGrid
    sigma: FloatGrid
    degenerate: BoolGrid
    defective: BoolGrid

    def cell(self, i: int, j: int) -> PointResult:
        """Return the stored record of cell ``(i, j)``."""
        triple = WitnessTriple(
            upsilon=float(self.upsilon[i, j]),
            lambda_eff=float(self.lambda_eff[i, j]),
            sigma=float(self.sigma[i, j]),
            degenerate_top=bool(self.degenerate[i, j]),
        )
        return PointResult(
            triple, bool(self.degenerate[i, j]), bool(self.defective[i, j])
        )

    def values(self, quantity: str) -> FloatGrid:
        """Return the field of a witness quantity by name."""
        if quantity not in const.WITNESS_QUANTITIES:
            raise InvalidParameterError(f"unknown witness quantity '{quantity}'")
        return getattr(self, quantity)


@dataclass(frozen=True)
class OptimalPoint:
    """Grid cell meeting the optimal-extraction thresholds."""

    eps_tau: float
    theta_over_pi: float
    witnesses: WitnessTriple


# =========================================================
#            S I N G L E - P O I N T   E V A L
# =========================================================
def _evaluate_cell(u: ComplexMatrix, chi: ComplexVector) -> PointResult:
    """Project, decompose and score one cell from a prebuilt propagator."""
    try:
        sd = spectral_decompose(project_propagator(u, chi))
        triple = witnesses(sd)
    except NumericalError as e:
        log.warning(f"sweep cell failed: {e.message}")
        empty = WitnessTriple(0.0, 0.0, 0.0)
        return PointResult(empty, degenerate=False, defective=True)

    return PointResult(triple, sd.degenerate_top, sd.defective, sd)


def evaluate_point(p: ModelParams, a: AncillaState, tau: float) -> PointResult:
    """Evaluate witnesses and flags at a single parameter point.

    Args:
        p:
            model parameters
        a:
            measured ancilla state
        tau:
            time between measurements

    Returns:
        'PointResult' record
    """
    u = unitary_propagator(build_hamiltonian(p), tau)
    return _evaluate_cell(u, ancilla_vector(a))


def _sweep_row(p: ModelParams, tau: float, chis: Sequence[ComplexVector]) -> FloatGrid:
    u = unitary_propagator(build_hamiltonian(p), tau)
    row = np.zeros((len(chis), len(_COLS_)))
    for j, chi in enumerate(chis):
        res = _evaluate_cell(u, chi)
        row[j] = (
            res.witnesses.upsilon,
            res.witnesses.lambda_eff,
            res.witnesses.sigma,
            float(res.degenerate),
            float(res.defective),
        )
    return row


# =========================================================
#                     S W E E P S
# =========================================================
def run_sweep(spec: GridSpec, workers: Optional[int] = None) -> SweepGrid:
    """Evaluate the three witnesses on every cell of a grid.

    Per-cell numerical failures are recorded in the ``defective`` flag
    (with zero witnesses) and never abort the sweep.

    Args:
        spec:
            grid axes and fixed parameters
        workers:
            worker count; 'None' uses the environment default

    Returns:
        'SweepGrid' record
    """
    chis = [ancilla_vector(spec.ancilla(t)) for t in spec.theta_over_pi.points]
    taus = spec.tau_points
    nJobs = min(resolve_workers(workers), len(taus))
    log.debug(f"run_sweep: {spec.shape[0]}x{spec.shape[1]} cells, {nJobs} workers")

    rows = Parallel(n_jobs=nJobs)(
        delayed(_sweep_row)(spec.params, tau, chis) for tau in taus
    )
    data = np.stack(rows)

    grid = SweepGrid(
        spec=spec,
        upsilon=data[:, :, 0],
        lambda_eff=data[:, :, 1],
        sigma=data[:, :, 2],
        degenerate=data[:, :, 3] > 0.5,
        defective=data[:, :, 4] > 0.5,
    )
    nDegen = int(grid.degenerate.sum())
    nDefect = int(grid.defective.sum())
    if nDegen or nDefect:
        log.warning(f"run_sweep: {nDegen} degenerate and {nDefect} defective cells")

    return grid


# =========================================================
#              D I S C R E P A N C Y   M A P S
# =========================================================
class DiscrepancyClass(str, Enum):
    """Size and sign of a witness difference."""

    NONE = "none"
    MODERATE_INCREASE = "moderate_increase"
    MODERATE_DECREASE = "moderate_decrease"
    LARGE_INCREASE = "large_increase"
    LARGE_DECREASE = "large_decrease"

    @classmethod
    def classify(cls, delta: float) -> "DiscrepancyClass":
        """Classify a signed difference.

        Example:
            >>> assert DiscrepancyClass.classify(0.0099) is DiscrepancyClass.NONE
            >>> assert DiscrepancyClass.classify(-0.01).value == "moderate_decrease"
            >>> assert DiscrepancyClass.classify(0.1) is DiscrepancyClass.LARGE_INCREASE
        """
        size = abs(delta)
        if size < const.DIFF_MODERATE:
            return cls.NONE
        if size < const.DIFF_LARGE:
            return cls.MODERATE_INCREASE if delta > 0 else cls.MODERATE_DECREASE
        return cls.LARGE_INCREASE if delta > 0 else cls.LARGE_DECREASE


_CLASSIFY_ = np.vectorize(DiscrepancyClass.classify, otypes=[object])


@dataclass(frozen=True)
class DiffMap:
    """Per-cell differences ``grid - baseline`` with their classes.

    Attributes:
        grid:
            sweep under test
        baseline:
            reference sweep on the same axes
        deltas:
            signed differences keyed by diff quantity
        classes:
            'DiscrepancyClass' arrays keyed by diff quantity
        degenerate:
            degenerate flag of either sweep
        defective:
            defective flag of either sweep
    """

    grid: SweepGrid
    baseline: SweepGrid
    deltas: Dict[str, FloatGrid]
    classes: Dict[str, npt.NDArray[np.object_]]
    degenerate: BoolGrid
    defective: BoolGrid

    @property
    def spec(self) -> GridSpec:
        """Return 'GridSpec' of the sweep under test."""
        return self.grid.spec

    def values(self, quantity: str) -> FloatGrid:
        """Return differences of a diff quantity by name."""
        if quantity not in self.deltas:
            raise InvalidParameterError(f"unknown diff quantity '{quantity}'")
        return self.deltas[quantity]


def diff_map(grid: SweepGrid, baseline: SweepGrid) -> DiffMap:
    """Compare two sweeps cell by cell.

    Args:
        grid:
            sweep under test
        baseline:
            reference sweep (usually at ``eta = 0``)

    Returns:
        'DiffMap' record

    Raises:
        SpecMismatchError: axes or ancilla phase differ
    """
    if not grid.spec.same_axes(baseline.spec):
        log.error("diff_map: grids do not share the same axes")
        raise SpecMismatchError(data=(grid.spec, baseline.spec))

    deltas: Dict[str, FloatGrid] = {}
    classes: Dict[str, npt.NDArray[np.object_]] = {}
    for qty, dqty in zip(const.WITNESS_QUANTITIES, const.DIFF_QUANTITIES):
        deltas[dqty] = grid.values(qty) - baseline.values(qty)
        classes[dqty] = _CLASSIFY_(deltas[dqty])

    return DiffMap(
        grid=grid,
        baseline=baseline,
        deltas=deltas,
        classes=classes,
        degenerate=grid.degenerate | baseline.degenerate,
        defective=grid.defective | baseline.defective,
    )


# =========================================================
#                 G R I D   Q U E R I E S
# =========================================================
def find_optimal_points(
    grid: SweepGrid, min_upsilon: float, min_sigma: float
) -> List[OptimalPoint]:
    """List well-posed cells with high entanglement and stability.

    Args:
        grid:
            sweep result
        min_upsilon:
            lowest accepted entanglement
        min_sigma:
            lowest accepted stability

    Returns:
        Matching cells sorted by descending efficiency; ties keep grid order
    """
    if not (isfinite(min_upsilon) and isfinite(min_sigma)):
        raise InvalidParameterError("thresholds must be finite")

    mask = ~(grid.degenerate | grid.defective) & (grid.upsilon >= min_upsilon)
    mask &= grid.sigma >= min_sigma
    epsTau = grid.spec.eps_tau.points
    thetas = grid.spec.theta_over_pi.points

    found = [
        OptimalPoint(float(epsTau[i]), float(thetas[j]), grid.cell(i, j).witnesses)
        for i, j in zip(*np.nonzero(mask))
    ]
    return sorted(found, key=lambda pt: -pt.witnesses.lambda_eff)


def efficiency_collapse_fraction(grid: SweepGrid, cutoff: float) -> float:
    """Return the fraction of cells with efficiency below ``cutoff``.

    Raises:
        InvalidParameterError: ``cutoff`` outside (0, 1)
    """
    if not 0 < cutoff < 1:
        raise InvalidParameterError(f"cutoff must be in (0, 1), got {cutoff}")
    return float(np.count_nonzero(grid.lambda_eff < cutoff) / grid.lambda_eff.size)
