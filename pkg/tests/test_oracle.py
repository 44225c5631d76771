"""Test cases for the full-space protocol simulation."""
from math import cos
from math import pi
from math import sin

import numpy as np
import pytest
from pytest_mock import MockerFixture
from tests.conftest import random_density
from tests.conftest import random_point
from tests.conftest import random_state

import qze_purify.constants as const
from qze_purify.analysis import spectral_decompose
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import NotNormalizedError
from qze_purify.exceptions import ZeroProbabilityError
from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.model import effective_operator
from qze_purify.oracle import compare_with_effective
from qze_purify.oracle import measurement_projector
from qze_purify.oracle import run_protocol
from qze_purify.oracle import run_protocol_pure
from qze_purify.oracle import sample_trajectories
from qze_purify.utils import initial_vector


# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
POINT = ModelParams.from_eps_units(2.0, 0.3, pi / 3)
ANCILLA = AncillaState(theta=0.25 * pi)
TAU = 2.0


# =========================================================
#                        T E S T S
# =========================================================
def test_protocol_matches_effective_operator(rng: np.random.Generator) -> None:
    checked = 0
    while checked < 100:
        p, a, tau = random_point(rng)
        sd = spectral_decompose(effective_operator(p, a, tau))
        if abs(sd.eigenvalues[0]) ** 2 < 0.1:
            continue
        rho0 = random_density(rng)
        for cmp in compare_with_effective(p, a, tau, rho0, const.ORACLE_STEPS):
            assert cmp.relative_error < 1e-9
            assert cmp.state_max_error < 1e-9
        checked += 1


def test_protocol_at_zero_interval_keeps_state(rng: np.random.Generator) -> None:
    rho0 = random_density(rng)
    record = run_protocol(POINT, ANCILLA, 0.0, rho0, 5)
    assert record.survival_probability == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(record.conditional_state, rho0, atol=1e-14)


@pytest.mark.parametrize("theta", [0.1 * pi, 0.25 * pi, 0.6 * pi])
def test_decoupled_ancilla_survival(theta: float, rng: np.random.Generator) -> None:
    p = ModelParams(omega=1.7, epsilon=0.0, eta=0.4, phi_eta=1.0)
    tau, n = 0.9, 6
    c = cos(theta) ** 2 * complex(cos(p.omega * tau), -sin(p.omega * tau))
    expected = abs(c + sin(theta) ** 2) ** (2 * n)
    record = run_protocol(p, AncillaState(theta=theta), tau, random_density(rng), n)
    assert record.survival_probability == pytest.approx(expected, rel=1e-12)


def test_survival_is_non_increasing(points) -> None:  # type: ignore[no-untyped-def]
    for p, a, tau in points(10):
        record = run_protocol(p, a, tau, np.eye(4) / 4, 10)
        assert all(0.0 < prob <= 1.0 + 1e-12 for prob in record.step_probabilities)
        assert record.survival_probability <= 1.0 + 1e-12
        assert np.trace(record.conditional_state).real == pytest.approx(1.0)


def test_protocol_rejects_bad_input() -> None:
    with pytest.raises(NotNormalizedError):
        run_protocol(POINT, ANCILLA, TAU, np.eye(4) / 2, 3)
    with pytest.raises(InvalidParameterError):
        run_protocol(POINT, ANCILLA, TAU, np.eye(4) / 4, 0)
    with pytest.raises(InvalidParameterError):
        run_protocol(POINT, ANCILLA, TAU, np.eye(2) / 2, 3)
    with pytest.raises(NotNormalizedError):
        run_protocol_pure(POINT, ANCILLA, TAU, [1.0, 1.0, 0.0, 0.0], 3)


def test_protocol_extinction(mocker: MockerFixture) -> None:
    mocker.patch(
        "qze_purify.oracle.measurement_projector", return_value=np.zeros((8, 8))
    )
    with pytest.raises(ZeroProbabilityError) as e:
        run_protocol(POINT, ANCILLA, TAU, np.eye(4) / 4, 3)
    assert e.value.step == 1


def test_measurement_projector_is_idempotent() -> None:
    for theta in (0.0, 0.3, 1.2):
        chi = np.array([cos(theta), sin(theta) * 1j])
        proj = measurement_projector(chi)
        assert np.allclose(proj @ proj, proj, atol=1e-14)


def test_pure_path_matches_density_path(rng: np.random.Generator) -> None:
    for _ in range(10):
        p, a, tau = random_point(rng)
        psi0 = random_state(rng)
        pure = run_protocol_pure(p, a, tau, psi0, 8)
        mixed = run_protocol(p, a, tau, np.outer(psi0, psi0.conj()), 8)
        assert pure.survival_probability == pytest.approx(
            mixed.survival_probability, rel=1e-10
        )
        assert np.allclose(pure.conditional_state, mixed.conditional_state, atol=1e-10)


def test_trajectories_match_exact_survival(single_worker: None) -> None:
    psi0 = initial_vector(const.DEF_INITIAL_STATE)
    exact = run_protocol_pure(POINT, ANCILLA, TAU, psi0, 20).survival_probability
    summary = sample_trajectories(POINT, ANCILLA, TAU, psi0, 20, 100_000, seed=7)

    sigma = np.sqrt(summary.trials * exact * (1 - exact))
    assert abs(summary.survivors - summary.trials * exact) <= 4 * max(sigma, 1.0)
    assert summary.survival_frequency == summary.survivors / summary.trials

    again = sample_trajectories(POINT, ANCILLA, TAU, psi0, 20, 100_000, seed=7)
    assert again.survivors == summary.survivors
    assert np.array_equal(again.conditional_state, summary.conditional_state)


@pytest.mark.slow
def test_trajectories_independent_of_worker_count() -> None:
    psi0 = initial_vector("singlet")
    one = sample_trajectories(POINT, ANCILLA, TAU, psi0, 5, 35_000, seed=3, workers=1)
    two = sample_trajectories(POINT, ANCILLA, TAU, psi0, 5, 35_000, seed=3, workers=2)
    assert one.survivors == two.survivors
    assert one.step_probabilities == two.step_probabilities


def test_trajectories_reject_bad_arguments() -> None:
    psi0 = initial_vector("up_up")
    with pytest.raises(InvalidParameterError):
        sample_trajectories(POINT, ANCILLA, TAU, psi0, 0, 10, seed=1)
    with pytest.raises(InvalidParameterError):
        sample_trajectories(POINT, ANCILLA, TAU, psi0, 3, 0, seed=1)
    with pytest.raises(InvalidParameterError):
        sample_trajectories(POINT, ANCILLA, TAU, psi0, 3, 10, seed=-1)
