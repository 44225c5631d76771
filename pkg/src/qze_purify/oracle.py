"""Full-space simulation of the repeated-measurement protocol.

The protocol simulation never forms V(tau). It keeps the whole three-qubit
state, lets it evolve under the 8x8 propagator, projects the ancilla onto
the measured state, renormalizes and traces the ancilla out again, one step
at a time. It is the independent reference against which the
effective-operator results of 'analysis' are checked.

The stochastic sampler draws the binary measurement outcome of every trial
at every step from the exact conditional probability. Trials are split into
fixed chunks, each with its own PCG64 substream spawned from the run seed,
so results do not depend on how many workers process the chunks.
"""
import logging
from dataclasses import dataclass
from math import ceil
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt
from joblib import Parallel
from joblib import delayed

import qze_purify.constants as const
from qze_purify.analysis import evolve_conditional
from qze_purify.analysis import normalize_state
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NotNormalizedError
from qze_purify.exceptions import ZeroProbabilityError
from qze_purify.linalg import ComplexMatrix
from qze_purify.linalg import ComplexVector
from qze_purify.linalg import unitary_propagator
from qze_purify.model import BASIS
from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.model import ancilla_vector
from qze_purify.model import build_hamiltonian
from qze_purify.model import effective_operator
from qze_purify.utils import resolve_workers

__all__ = [
    "MeasurementRecord",
    "OracleComparison",
    "TrajectorySummary",
    "compare_with_effective",
    "measurement_projector",
    "run_protocol",
    "run_protocol_pure",
    "sample_trajectories",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of N post-selected measurement steps.

    Attributes:
        steps:
            number of steps N
        survival_probability:
            probability that all N measurements succeed
        conditional_state:
            normalized A-B density matrix after the last success
        step_probabilities:
            conditional success probability of each step
    """

    steps: int
    survival_probability: float
    conditional_state: ComplexMatrix
    step_probabilities: Tuple[float, ...]


@dataclass(frozen=True)
class TrajectorySummary:
    """Outcome of a seeded batch of stochastic trajectories.

    Attributes:
        trials:
            number of trials
        survivors:
            trials with N successful measurements
        survival_frequency:
            ``survivors / trials``
        seed:
            run seed
        steps:
            number of measurement steps
        conditional_state:
            normalized state vector shared by all survivors
        step_probabilities:
            exact conditional success probability of each step
    """

    trials: int
    survivors: int
    survival_frequency: float
    seed: int
    steps: int
    conditional_state: ComplexVector
    step_probabilities: Tuple[float, ...]


def _full_propagator(p: ModelParams, tau: float) -> ComplexMatrix:
    """Return U(tau) in tensor-product order (AB outer, ancilla inner)."""
    perm = BASIS.to_tensor
    return perm.T @ unitary_propagator(build_hamiltonian(p), tau) @ perm


def measurement_projector(chi: npt.ArrayLike) -> ComplexMatrix:
    """Return ``I_4 (x) |chi><chi|`` in tensor-product order."""
    chiArr = np.asarray(chi, dtype=np.complex128)
    return np.kron(np.eye(4), np.outer(chiArr, chiArr.conj()))


def _trace_out_ancilla(rho: ComplexMatrix) -> ComplexMatrix:
    return np.einsum("iaja->ij", rho.reshape(4, 2, 4, 2))


# =========================================================
#             D E T E R M I N I S T I C   P A T H
# =========================================================
def run_protocol(
    p: ModelParams,
    a: AncillaState,
    tau: float,
    rho0: npt.ArrayLike,
    n: int,
) -> MeasurementRecord:
    """Simulate N measure-and-post-select steps on the full density matrix.

    Args:
        p:
            model parameters
        a:
            measured ancilla state
        tau:
            time between measurements
        rho0:
            normalized initial A-B density matrix
        n:
            number of steps (>= 1)

    Returns:
        'MeasurementRecord'

    Raises:
        NotNormalizedError: ``rho0`` does not have unit trace
        ZeroProbabilityError: a step succeeds with vanishing probability
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise InvalidParameterError(f"rho0 must be 4x4, got {rho.shape}")
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > const.TOL_TRACE:
        raise NotNormalizedError(trace)

    u = _full_propagator(p, tau)
    chi = ancilla_vector(a)
    proj = measurement_projector(chi)
    ancilla = np.outer(chi, chi.conj())

    probs: List[float] = []
    for step in range(1, n + 1):
        full = u @ np.kron(rho, ancilla) @ u.conj().T
        full = proj @ full @ proj
        prob = float(np.real(np.trace(full)))
        if prob < const.ZERO_PROBABILITY:
            log.error(f"run_protocol: extinct at step {step}")
            raise ZeroProbabilityError(step)
        probs.append(prob)
        rho = _trace_out_ancilla(full / prob)

    return MeasurementRecord(
        steps=n,
        survival_probability=float(np.prod(probs)),
        conditional_state=rho,
        step_probabilities=tuple(probs),
    )


def _pure_steps(
    u: ComplexMatrix, chi: ComplexVector, psi0: ComplexVector, n: int
) -> Tuple[ComplexVector, List[float]]:
    """Propagate a pure A-B state through ``n`` post-selected steps."""
    psi = psi0
    probs: List[float] = []
    for _ in range(n):
        full = u @ np.kron(psi, chi)
        amp = full.reshape(4, 2) @ chi.conj()
        prob = float(np.real(np.vdot(amp, amp)))
        probs.append(prob)
        if prob < const.ZERO_PROBABILITY:
            return psi, probs
        psi = amp / np.sqrt(prob)
    return psi, probs


def _check_pure(psi0: npt.ArrayLike) -> ComplexVector:
    psi = np.asarray(psi0, dtype=np.complex128)
    if psi.shape != (4,):
        raise InvalidParameterError(f"psi0 must be a 4-vector, got {psi.shape}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > const.TOL_NORM:
        raise NotNormalizedError(norm)
    return psi


def run_protocol_pure(
    p: ModelParams,
    a: AncillaState,
    tau: float,
    psi0: npt.ArrayLike,
    n: int,
) -> MeasurementRecord:
    """State-vector variant of 'run_protocol' for pure initial states."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    psi, probs = _pure_steps(
        _full_propagator(p, tau), ancilla_vector(a), _check_pure(psi0), n
    )
    if len(probs) < n or probs[-1] < const.ZERO_PROBABILITY:
        raise ZeroProbabilityError(len(probs))

    return MeasurementRecord(
        steps=n,
        survival_probability=float(np.prod(probs)),
        conditional_state=np.outer(psi, psi.conj()),
        step_probabilities=tuple(probs),
    )


# =========================================================
#               S T O C H A S T I C   P A T H
# =========================================================
def _run_chunk(
    seq: np.random.SeedSequence, size: int, probs: Tuple[float, ...]
) -> int:
    """Return number of survivors among ``size`` trials of one chunk."""
    rng = np.random.Generator(np.random.PCG64(seq))
    alive = size
    for prob in probs:
        if alive == 0:
            break
        alive = int(np.count_nonzero(rng.random(alive) < prob))
    return alive


def sample_trajectories(
    p: ModelParams,
    a: AncillaState,
    tau: float,
    psi0: npt.ArrayLike,
    n: int,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
) -> TrajectorySummary:
    """Sample the binary measurement record of many independent trials.

    Every trial starts in ``psi0``; at each step it survives with the exact
    conditional success probability and is discarded otherwise. All
    survivors of a step share the same conditional state, so that state is
    propagated once.

    Args:
        p:
            model parameters
        a:
            measured ancilla state
        tau:
            time between measurements
        psi0:
            unit-norm initial A-B state vector
        n:
            number of steps (>= 1)
        trials:
            number of trials (>= 1)
        seed:
            non-negative run seed
        workers:
            worker count for the chunks; 'None' uses the environment default

    Returns:
        'TrajectorySummary'
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise InvalidParameterError(f"seed must be >= 0, got {seed}")

    psi, probList = _pure_steps(
        _full_propagator(p, tau), ancilla_vector(a), _check_pure(psi0), n
    )
    probs = tuple(probList) + (0.0,) * (n - len(probList))

    chunks = int(ceil(trials / const.TRAJECTORY_CHUNK))
    sizes = [const.TRAJECTORY_CHUNK] * (chunks - 1)
    sizes.append(trials - const.TRAJECTORY_CHUNK * (chunks - 1))
    seqs = np.random.SeedSequence(seed).spawn(chunks)

    nJobs = min(resolve_workers(workers), chunks)
    log.debug(f"sample_trajectories: {trials} trials, {chunks} chunks, {nJobs} jobs")
    survivorsPerChunk = Parallel(n_jobs=nJobs)(
        delayed(_run_chunk)(seq, size, probs) for seq, size in zip(seqs, sizes)
    )
    survivors = int(sum(survivorsPerChunk))

    return TrajectorySummary(
        trials=trials,
        survivors=survivors,
        survival_frequency=survivors / trials,
        seed=seed,
        steps=n,
        conditional_state=psi,
        step_probabilities=probs,
    )


# =========================================================
#        C O M P A R I S O N   W I T H   V ( T A U )
# =========================================================
@dataclass(frozen=True)
class OracleComparison:
    """Full-space and effective-operator results after N steps."""

    steps: int
    survival_full_space: float
    survival_effective: float
    relative_error: float
    state_max_error: float


def compare_with_effective(
    p: ModelParams,
    a: AncillaState,
    tau: float,
    rho0: npt.ArrayLike,
    steps: Sequence[int],
) -> List[OracleComparison]:
    """Check 'run_protocol' against ``V(tau)^N rho0 V(tau)^dagger^N``.

    Args:
        p:
            model parameters
        a:
            measured ancilla state
        tau:
            time between measurements
        rho0:
            normalized initial density matrix
        steps:
            step counts to compare (each >= 1)

    Returns:
        One 'OracleComparison' per entry of ``steps``, same order
    """
    v = effective_operator(p, a, tau)
    out = []
    for n in steps:
        record = run_protocol(p, a, tau, rho0, n)
        rhoEff = evolve_conditional(v, rho0, n)
        survEff = float(np.real(np.trace(rhoEff)))
        stateDiff = normalize_state(rhoEff) - record.conditional_state
        stateErr = float(np.max(np.abs(stateDiff)))
        out.append(
            OracleComparison(
                steps=n,
                survival_full_space=record.survival_probability,
                survival_effective=survEff,
                relative_error=abs(record.survival_probability - survEff)
                / record.survival_probability,
                state_max_error=stateErr,
            )
        )
        log.debug(f"compare_with_effective: n={n} rel={out[-1].relative_error:.3e}")
    return out
