"""Shared fixtures and helpers for QZE Purify tests."""
from math import pi
from typing import Callable
from typing import Iterator
from typing import Tuple

import numpy as np
import pytest

from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.sweep import AxisSpec
from qze_purify.sweep import GridSpec

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
SEED: int = 20240917

typeDefPoint = Tuple[ModelParams, AncillaState, float]


def random_point(rng: np.random.Generator) -> typeDefPoint:
    """Draw a random (params, ancilla, tau) tuple in eps units."""
    p = ModelParams(
        omega=float(rng.uniform(0.2, 4.0)),
        epsilon=float(rng.uniform(0.2, 2.0)),
        eta=float(rng.uniform(0.0, 2.0)),
        phi_eta=float(rng.uniform(0.0, 2 * pi)),
    )
    a = AncillaState(
        theta=float(rng.uniform(0.05, 0.95) * pi),
        phi_x=float(rng.uniform(0.0, 2 * pi)),
    )
    return p, a, float(rng.uniform(0.1, 6.0))


def random_density(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Draw a random full-rank density matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Draw a random unit-norm complex vector."""
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


# =========================================================
#                     F I X T U R E S
# =========================================================
@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(SEED)


@pytest.fixture
def points(rng: np.random.Generator) -> Callable[[int], Iterator[typeDefPoint]]:
    """Factory yielding random parameter tuples."""

    def _points(count: int) -> Iterator[typeDefPoint]:
        for _ in range(count):
            yield random_point(rng)

    return _points


@pytest.fixture
def small_spec() -> GridSpec:
    """Small grid at omega/eps = 2, eta = 0."""
    return GridSpec(
        eps_tau=AxisSpec(0.5, 6.0, 4),
        theta_over_pi=AxisSpec(0.1, 0.7, 3),
        params=ModelParams.from_eps_units(2.0),
    )


@pytest.fixture
def single_worker(monkeypatch: pytest.MonkeyPatch) -> None:
    """Run joblib pools in-process."""
    monkeypatch.setenv("QZE_PURIFY_WORKERS", "1")
