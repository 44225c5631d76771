"""Three-qubit model for QZE Purify module.

Two qubits A and B exchange excitations with an ancilla X (coupling
``epsilon``) and, optionally, with each other (coupling ``eta`` with phase
``phi_eta``). The ancilla is repeatedly measured and found in the state
``cos(theta)|up> + exp(-i phi_x) sin(theta)|down>``; sandwiching the
propagator between that state gives the 4x4 effective operator V(tau) acting
on A and B.

Note:
    The Hamiltonian diagonal runs 3w, 2w, ..., 0 rather than the symmetric
    +/-3w/2 form. A global energy shift only multiplies V(tau) by a phase, so
    every witness is the same either way.
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from math import cos
from math import isfinite
from math import pi
from math import sin
from typing import Tuple

import numpy as np
import numpy.typing as npt

from qze_purify.exceptions import InvalidParameterError
from qze_purify.linalg import ComplexMatrix
from qze_purify.linalg import ComplexVector
from qze_purify.linalg import unitary_propagator

__all__ = [
    "AB_LABELS",
    "BASIS",
    "AncillaState",
    "BasisMap",
    "ModelParams",
    "ancilla_vector",
    "build_hamiltonian",
    "effective_operator",
    "project_propagator",
    "swap_ab",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

UP: int = 0
DOWN: int = 1

AB_LABELS: Tuple[str, ...] = ("uu", "ud", "du", "dd")


@dataclass(frozen=True)
class BasisMap:
    """Map between composite labels and Hamiltonian rows.

    The 8 rows follow the printed order (AB state, then X state):
    uu|u, ud|u, du|u, uu|d, ud|d, du|d, dd|u, dd|d. The AB space uses the
    order uu, ud, du, dd and the ancilla uses up (0), down (1).

    Attributes:
        labels:
            composite labels in row order
        rows:
            4x2 table, ``rows[m][s]`` is the row of AB state ``m`` with
            ancilla state ``s``
    """

    labels: Tuple[str, ...] = (
        "uu|u",
        "ud|u",
        "du|u",
        "uu|d",
        "ud|d",
        "du|d",
        "dd|u",
        "dd|d",
    )
    rows: Tuple[Tuple[int, int], ...] = ((0, 3), (1, 4), (2, 5), (6, 7))
    _table: npt.NDArray[np.int64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_table", np.asarray(self.rows, dtype=np.int64))
        flat = sorted(self._table.ravel().tolist())
        if flat != list(range(8)):
            raise InvalidParameterError("basis map is not a bijection onto 8 rows")
        for m, ab in enumerate(AB_LABELS):
            for s, x in enumerate("ud"):
                if self.labels[self.rows[m][s]] != f"{ab}|{x}":
                    raise InvalidParameterError("basis labels do not match row table")

    def index(self, m: int, s: int) -> int:
        """Return row of AB state ``m`` with ancilla state ``s``."""
        return int(self._table[m, s])

    @property
    def table(self) -> npt.NDArray[np.int64]:
        """Return 'rows' as a 4x2 integer array."""
        return self._table

    @property
    def to_tensor(self) -> npt.NDArray[np.float64]:
        """Return permutation ``P`` with ``P[row(m, s), 2 * m + s] = 1``.

        ``P.T @ op @ P`` rewrites an operator from the printed order into the
        tensor-product order (AB outer, X inner).
        """
        perm = np.zeros((8, 8))
        for m in range(4):
            for s in range(2):
                perm[self.index(m, s), 2 * m + s] = 1.0
        return perm


BASIS = BasisMap()


# =========================================================
#                D O M A I N   T Y P E S
# =========================================================
@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the Hamiltonian.

    Attributes:
        omega:
            free Bohr frequency (same for A, B and X)
        epsilon:
            A-X and B-X coupling, non-negative
        eta:
            A-B coupling magnitude, non-negative
        phi_eta:
            A-B coupling phase in [0, 2 pi)
    """

    omega: float
    epsilon: float
    eta: float = 0.0
    phi_eta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("omega", "epsilon", "eta", "phi_eta"):
            if not isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if self.epsilon < 0:
            raise InvalidParameterError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.eta < 0:
            raise InvalidParameterError(f"eta must be >= 0, got {self.eta}")
        if not 0 <= self.phi_eta < 2 * pi:
            raise InvalidParameterError(
                f"phi_eta must be in [0, 2pi), got {self.phi_eta}"
            )

    @classmethod
    def from_eps_units(
        cls, omega_over_eps: float, eta_over_eps: float = 0.0, phi_eta: float = 0.0
    ) -> "ModelParams":
        """Create parameters in units of epsilon (epsilon = 1, so tau = eps * tau)."""
        return cls(omega=omega_over_eps, epsilon=1.0, eta=eta_over_eps, phi_eta=phi_eta)


@dataclass(frozen=True)
class AncillaState:
    """Repeatedly measured ancilla state ``|theta, phi_x>``.

    Attributes:
        theta:
            mixing angle in [0, pi]
        phi_x:
            relative phase in [0, 2 pi)
    """

    theta: float
    phi_x: float = 0.0

    def __post_init__(self) -> None:
        if not (isfinite(self.theta) and 0 <= self.theta <= pi):
            raise InvalidParameterError(f"theta must be in [0, pi], got {self.theta}")
        if not (isfinite(self.phi_x) and 0 <= self.phi_x < 2 * pi):
            raise InvalidParameterError(f"phi_x must be in [0, 2pi), got {self.phi_x}")


# =========================================================
#                 O P E R A T I O N S
# =========================================================
def build_hamiltonian(p: ModelParams) -> ComplexMatrix:
    """Build the 8x8 Hamiltonian in the printed basis order.

    Example:
        >>> h = build_hamiltonian(ModelParams(omega=2.0, epsilon=1.0))
        >>> assert h[0, 0] == 6.0 and h[1, 3] == 1.0 and h[7, 7] == 0.0

    Args:
        p:
            model parameters

    Returns:
        Hermitian 8x8 matrix
    """
    w, e = p.omega, p.epsilon
    g = p.eta * complex(cos(p.phi_eta), sin(p.phi_eta))

    diag = [3 * w, 2 * w, 2 * w, 2 * w, w, w, w, 0.0]
    h = np.diag(np.array(diag, dtype=np.complex128))

    # one-excitation-less sectors: (ud|u, du|u, uu|d) and (ud|d, du|d, dd|u)
    for a, b, x in ((1, 2, 3), (4, 5, 6)):
        h[a, b] = g
        h[b, a] = g.conjugate()
        h[a, x] = h[x, a] = e
        h[b, x] = h[x, b] = e

    return h


def ancilla_vector(a: AncillaState) -> ComplexVector:
    """Return ``(cos theta, exp(-i phi_x) sin theta)`` in (up, down) order."""
    chi = np.array(
        [cos(a.theta), complex(cos(a.phi_x), -sin(a.phi_x)) * sin(a.theta)],
        dtype=np.complex128,
    )
    norm = float(np.linalg.norm(chi))
    assert abs(norm - 1.0) < 1e-12, f"ancilla vector norm {norm}"  # noqa: S101
    return chi


def project_propagator(u: npt.ArrayLike, chi: npt.ArrayLike) -> ComplexMatrix:
    """Sandwich an 8x8 propagator between the measured ancilla state.

    ``V[m, n] = sum_{s, t} conj(chi[s]) * U[row(m, s), row(n, t)] * chi[t]``

    Args:
        u:
            8x8 propagator in the printed basis order
        chi:
            ancilla 2-vector

    Returns:
        4x4 effective operator on A and B
    """
    uArr = np.asarray(u, dtype=np.complex128)
    chiArr = np.asarray(chi, dtype=np.complex128)
    rows = BASIS.table
    blocks = uArr[rows[:, :, None, None], rows[None, None, :, :]]
    return np.einsum("s,msnt,t->mn", chiArr.conj(), blocks, chiArr)


def effective_operator(p: ModelParams, a: AncillaState, tau: float) -> ComplexMatrix:
    """Compute V(tau) = <chi| exp(-i H tau) |chi>.

    Args:
        p:
            model parameters
        a:
            measured ancilla state
        tau:
            time between measurements

    Returns:
        4x4 contraction on A and B
    """
    u = unitary_propagator(build_hamiltonian(p), tau)
    return project_propagator(u, ancilla_vector(a))


def swap_ab() -> npt.NDArray[np.float64]:
    """Return the A<->B exchange permutation on the AB space."""
    return np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.float64
    )
