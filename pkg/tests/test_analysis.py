"""Test cases for the spectral analysis of V(tau)."""
from dataclasses import replace
from math import ceil
from math import log as ln
from math import pi

import numpy as np
import pytest
from tests.conftest import random_density
from tests.conftest import random_point
from tests.conftest import random_state

import qze_purify.constants as const
from qze_purify.analysis import asymptotic_state
from qze_purify.analysis import entanglement_measure
from qze_purify.analysis import entanglement_upsilon
from qze_purify.analysis import evolve_conditional
from qze_purify.analysis import evolve_spectral
from qze_purify.analysis import normalize_state
from qze_purify.analysis import required_steps
from qze_purify.analysis import spectral_decompose
from qze_purify.analysis import success_probability
from qze_purify.analysis import witnesses
from qze_purify.exceptions import DefectiveMatrixError
from qze_purify.exceptions import DegenerateTopError
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NotNormalizedError
from qze_purify.exceptions import ZeroProbabilityError
from qze_purify.linalg import unitary_propagator
from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.model import ancilla_vector
from qze_purify.model import build_hamiltonian
from qze_purify.model import effective_operator
from qze_purify.model import project_propagator


# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
def _gap(sd) -> float:  # type: ignore[no-untyped-def]
    mods = np.abs(sd.eigenvalues)
    return float(mods[0] - mods[1])


def _decay_slope(v: np.ndarray, top: np.ndarray, psi: np.ndarray, n0: int) -> float:
    """Fit ln(distance from |l_1>) against the step count over 21 steps."""
    dists = []
    w = psi.copy()
    for n in range(n0 + 21):
        if n >= n0:
            dists.append(np.linalg.norm(w - top * np.vdot(top, w)))
        w = v @ w
        w = w / np.linalg.norm(w)
    slope, _ = np.polyfit(np.arange(21), np.log(dists), 1)
    return float(slope)


# =========================================================
#                        T E S T S
# =========================================================
def test_eigenvalues_sorted_by_modulus_then_real_part() -> None:
    sd = spectral_decompose(np.diag([0.5, -1.0, 0.2j, 1.0]))
    assert np.array_equal(sd.eigenvalues, np.array([1.0, -1.0, 0.5, 0.2j]))
    assert sd.degenerate_top
    assert not sd.defective


def test_biorthonormality(points) -> None:  # type: ignore[no-untyped-def]
    checked = 0
    for p, a, tau in points(200):
        sd = spectral_decompose(effective_operator(p, a, tau))
        if sd.defective:
            continue
        prod = sd.left_vecs @ sd.right_vecs
        assert np.max(np.abs(prod - np.eye(4))) < const.TOL_BIORTHO
        checked += 1
    assert checked > 150


def test_global_shift_leaves_witnesses_unchanged(rng: np.random.Generator) -> None:
    checked = 0
    while checked < 50:
        p, a, tau = random_point(rng)
        shift = float(rng.uniform(-10.0, 10.0))
        chi = ancilla_vector(a)
        h = build_hamiltonian(p)
        base = spectral_decompose(project_propagator(unitary_propagator(h, tau), chi))
        if base.defective or _gap(base) < 1e-4:
            continue
        moved = spectral_decompose(
            project_propagator(unitary_propagator(h + shift * np.eye(8), tau), chi)
        )
        w0, w1 = witnesses(base), witnesses(moved)
        assert abs(w0.upsilon - w1.upsilon) < 1e-10
        assert abs(w0.lambda_eff - w1.lambda_eff) < 1e-10
        assert abs(w0.sigma - w1.sigma) < 1e-10
        checked += 1


def test_decoupled_ancilla_gives_zero_efficiency(rng: np.random.Generator) -> None:
    for _ in range(100):
        p, a, tau = random_point(rng)
        decoupled = ModelParams(p.omega, 0.0, p.eta, p.phi_eta)
        w = witnesses(spectral_decompose(effective_operator(decoupled, a, tau)))
        assert w.lambda_eff == 0.0
        assert w.degenerate_top


def test_optimal_point_at_full_period() -> None:
    # PsiA is an exact eigenvector at eta = 0 with modulus 1 when omega tau = 2 pi
    p = ModelParams.from_eps_units(2.0)
    v = effective_operator(p, AncillaState(theta=0.3 * pi), pi)
    psiA = np.array([0.0, -1.0, 1.0, 0.0]) / np.sqrt(2)
    assert np.allclose(v @ psiA, psiA, atol=1e-12)
    w = witnesses(spectral_decompose(v))
    assert w.sigma == pytest.approx(1.0, abs=1e-12)
    assert w.upsilon == pytest.approx(1.0, abs=1e-9)


def test_entanglement_of_known_states() -> None:
    bell = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    product = np.kron([0.6, 0.8], [1.0, 0.0])
    assert entanglement_upsilon(bell) == pytest.approx(1.0)
    assert entanglement_upsilon(product) == pytest.approx(0.0, abs=1e-14)
    assert entanglement_measure(np.eye(4) / 4) == 1.0


def test_entanglement_rejects_unnormalized_state() -> None:
    with pytest.raises(NotNormalizedError) as e:
        entanglement_upsilon([1.0, 1.0, 0.0, 0.0])
    assert e.value.norm == pytest.approx(np.sqrt(2))


def test_entanglement_invariant_under_local_phases(rng: np.random.Generator) -> None:
    for _ in range(50):
        sd = spectral_decompose(effective_operator(*random_point(rng)))
        a, b = rng.uniform(0.0, 2 * pi, size=2)
        local = np.exp(1j * np.array([0.0, a, b, a + b]))
        base = entanglement_upsilon(sd.dominant)
        assert entanglement_upsilon(local * sd.dominant) == pytest.approx(
            base, abs=1e-12
        )


def test_spectral_evolution_matches_direct(rng: np.random.Generator) -> None:
    for _ in range(30):
        p, a, tau = random_point(rng)
        v = effective_operator(p, a, tau)
        sd = spectral_decompose(v)
        if sd.defective or sd.condition > 1e3:
            continue
        rho0 = random_density(rng)
        for n in (0, 1, 7):
            direct = evolve_conditional(v, rho0, n)
            scale = max(np.max(np.abs(direct)), 1e-300)
            assert np.max(np.abs(evolve_spectral(sd, rho0, n) - direct)) / scale < 1e-8


def test_evolution_rejects_negative_steps() -> None:
    sd = spectral_decompose(np.diag([1.0, 0.5, 0.1, 0.0]))
    with pytest.raises(InvalidParameterError):
        evolve_conditional(np.eye(4), np.eye(4) / 4, -1)
    with pytest.raises(InvalidParameterError):
        evolve_spectral(sd, np.eye(4) / 4, -1)


def test_convergence_rate_matches_eigenvalue_ratio(rng: np.random.Generator) -> None:
    found = 0
    for _ in range(20000):
        p, a, tau = random_point(rng)
        v = effective_operator(p, a, tau)
        sd = spectral_decompose(v)
        mods = np.abs(sd.eigenvalues)
        if sd.defective or sd.degenerate_top or mods[0] < 0.3:
            continue
        ratio = mods[1] / mods[0]
        if not 0.5 <= ratio <= 0.85 or mods[2] > 0.6 * mods[1]:
            continue

        n0 = max(10, ceil(ln(1e-3) / ln(ratio)))
        slope = _decay_slope(v, sd.dominant, random_state(rng), n0)
        assert slope == pytest.approx(ln(ratio), rel=0.1)

        rho = normalize_state(evolve_conditional(v, random_density(rng), n0 + 40))
        assert np.max(np.abs(rho - asymptotic_state(sd))) < 1e-2
        found += 1
        if found == 20:
            break
    assert found == 20


def test_success_probability_matches_long_run(rng: np.random.Generator) -> None:
    checked = 0
    while checked < 10:
        p, a, tau = random_point(rng)
        v = effective_operator(p, a, tau)
        sd = spectral_decompose(v)
        if sd.defective or sd.degenerate_top or sd.ratio > 0.8:
            continue
        if abs(sd.eigenvalues[0]) < 0.3:
            continue
        rho0 = random_density(rng)
        n = 80
        exact = float(np.real(np.trace(evolve_conditional(v, rho0, n))))
        assert success_probability(sd, rho0, n) == pytest.approx(exact, rel=1e-4)
        checked += 1


def test_success_probability_errors() -> None:
    with pytest.raises(DegenerateTopError):
        success_probability(spectral_decompose(np.eye(4)), np.eye(4) / 4, 3)

    sd = spectral_decompose(np.diag([1.0, 0.5, 0.1, 0.0]))
    assert success_probability(sd, np.eye(4) / 4, 5) == pytest.approx(0.25)
    broken = replace(sd, left_vecs=None, defective=True)
    with pytest.raises(DefectiveMatrixError):
        evolve_spectral(broken, np.eye(4) / 4, 1)
    with pytest.raises(DefectiveMatrixError):
        success_probability(broken, np.eye(4) / 4, 1)


def test_required_steps() -> None:
    sd = spectral_decompose(np.diag([1.0, 0.1, 0.0, 0.0]))
    assert required_steps(sd, 1e-3) == 3
    assert required_steps(spectral_decompose(np.diag([1.0, 0.0, 0.0, 0.0])), 0.5) == 1
    with pytest.raises(DegenerateTopError):
        required_steps(spectral_decompose(np.eye(4)), 1e-3)
    with pytest.raises(InvalidParameterError):
        required_steps(sd, 1.5)


def test_normalize_state_rejects_zero_trace() -> None:
    with pytest.raises(ZeroProbabilityError):
        normalize_state(np.zeros((4, 4)))
    assert np.trace(normalize_state(2 * np.eye(4))) == pytest.approx(1.0)
