"""Test cases for grid sweeps, discrepancy maps and grid queries."""
from dataclasses import replace
from math import pi

import numpy as np
import pytest

import qze_purify.constants as const
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import SpecMismatchError
from qze_purify.model import ModelParams
from qze_purify.sweep import AxisSpec
from qze_purify.sweep import DiscrepancyClass
from qze_purify.sweep import GridSpec
from qze_purify.sweep import SweepGrid
from qze_purify.sweep import diff_map
from qze_purify.sweep import efficiency_collapse_fraction
from qze_purify.sweep import evaluate_point
from qze_purify.sweep import find_optimal_points
from qze_purify.sweep import run_sweep


# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
def _coarse_spec(etaOverEps: float = 0.0, phi: float = 0.0) -> GridSpec:
    """Default axis ranges at reduced resolution."""
    return GridSpec(
        eps_tau=AxisSpec(*const.DEF_EPS_TAU[:2], 60),
        theta_over_pi=AxisSpec(*const.DEF_THETA_OVER_PI[:2], 49),
        params=ModelParams.from_eps_units(2.0, etaOverEps, phi),
    )


def _synthetic_grid(spec: GridSpec, **fields: np.ndarray) -> SweepGrid:
    shape = spec.shape
    data = {
        "upsilon": np.zeros(shape),
        "lambda_eff": np.zeros(shape),
        "sigma": np.zeros(shape),
        "degenerate": np.zeros(shape, dtype=bool),
        "defective": np.zeros(shape, dtype=bool),
    }
    data.update(fields)
    return SweepGrid(spec=spec, **data)


# =========================================================
#                        T E S T S
# =========================================================
def test_axis_and_grid_validation() -> None:
    with pytest.raises(InvalidParameterError):
        AxisSpec(0.0, 1.0, 1)
    with pytest.raises(InvalidParameterError):
        AxisSpec(2.0, 1.0, 5)
    with pytest.raises(InvalidParameterError):
        AxisSpec(0.0, float("inf"), 5)

    params = ModelParams.from_eps_units(2.0)
    with pytest.raises(InvalidParameterError):
        GridSpec(AxisSpec(0.0, 1.0, 3), AxisSpec(0.1, 0.9, 3), params)
    with pytest.raises(InvalidParameterError):
        GridSpec(AxisSpec(0.1, 1.0, 3), AxisSpec(0.0, 0.9, 3), params)
    with pytest.raises(InvalidParameterError):
        GridSpec(AxisSpec(0.1, 1.0, 3), AxisSpec(0.1, 0.9, 3), params, phi_x=7.0)

    axis = AxisSpec(0.5, 2.0, 4)
    assert np.allclose(axis.points, [0.5, 1.0, 1.5, 2.0])


def test_sweep_cells_match_single_point(
    small_spec: GridSpec, single_worker: None
) -> None:
    grid = run_sweep(small_spec)
    assert grid.upsilon.shape == small_spec.shape
    for i, tau in enumerate(small_spec.tau_points):
        for j, theta in enumerate(small_spec.theta_over_pi.points):
            single = evaluate_point(small_spec.params, small_spec.ancilla(theta), tau)
            assert grid.cell(i, j).witnesses == single.witnesses
            assert grid.cell(i, j).defective == single.defective


@pytest.mark.slow
def test_sweep_independent_of_worker_count(small_spec: GridSpec) -> None:
    one = run_sweep(small_spec, workers=1)
    two = run_sweep(small_spec, workers=2)
    for qty in const.WITNESS_QUANTITIES:
        assert np.array_equal(one.values(qty), two.values(qty))
    assert np.array_equal(one.degenerate, two.degenerate)


def test_sweep_in_raw_units_without_ancilla_coupling(single_worker: None) -> None:
    spec = GridSpec(
        eps_tau=AxisSpec(0.2, 3.0, 5),
        theta_over_pi=AxisSpec(0.1, 0.9, 4),
        params=ModelParams(omega=1.3, epsilon=0.0, eta=0.5),
    )
    assert np.array_equal(spec.tau_points, spec.eps_tau.points)
    grid = run_sweep(spec)
    assert np.all(grid.lambda_eff == 0.0)
    assert np.all(grid.degenerate)


def test_witness_ranges(small_spec: GridSpec, single_worker: None) -> None:
    params = ModelParams.from_eps_units(2.0, 0.4, 1.0)
    grid = run_sweep(replace(small_spec, params=params))
    for qty in const.WITNESS_QUANTITIES:
        vals = grid.values(qty)
        assert np.all((vals >= 0.0) & (vals <= 1.0))
    with pytest.raises(InvalidParameterError):
        grid.values("entropy")


def test_diff_of_grid_with_itself(small_spec: GridSpec, single_worker: None) -> None:
    grid = run_sweep(small_spec)
    dm = diff_map(grid, grid)
    for qty in const.DIFF_QUANTITIES:
        assert np.all(dm.values(qty) == 0.0)
        assert np.all(dm.classes[qty] == DiscrepancyClass.NONE)
    assert dm.spec is small_spec


def test_diff_rejects_mismatched_axes(small_spec: GridSpec) -> None:
    other = replace(small_spec, eps_tau=AxisSpec(0.5, 6.0, 5))
    with pytest.raises(SpecMismatchError):
        diff_map(_synthetic_grid(small_spec), _synthetic_grid(other))
    shifted = replace(small_spec, phi_x=0.5)
    with pytest.raises(SpecMismatchError):
        diff_map(_synthetic_grid(small_spec), _synthetic_grid(shifted))


@pytest.mark.parametrize(
    "delta, expected",
    [
        (0.0, DiscrepancyClass.NONE),
        (-0.0099, DiscrepancyClass.NONE),
        (0.01, DiscrepancyClass.MODERATE_INCREASE),
        (-0.05, DiscrepancyClass.MODERATE_DECREASE),
        (0.1, DiscrepancyClass.LARGE_INCREASE),
        (-0.7, DiscrepancyClass.LARGE_DECREASE),
    ],
)
def test_discrepancy_classes(delta: float, expected: DiscrepancyClass) -> None:
    assert DiscrepancyClass.classify(delta) is expected


def test_diff_flags_are_combined(small_spec: GridSpec) -> None:
    degen = np.zeros(small_spec.shape, dtype=bool)
    degen[1, 2] = True
    defect = np.zeros(small_spec.shape, dtype=bool)
    defect[0, 0] = True
    upsilon = np.full(small_spec.shape, 0.5)
    dm = diff_map(
        _synthetic_grid(small_spec, degenerate=degen, upsilon=upsilon),
        _synthetic_grid(small_spec, defective=defect),
    )
    assert dm.degenerate[1, 2] and dm.defective[0, 0]
    assert int(dm.degenerate.sum() + dm.defective.sum()) == 2
    assert np.all(dm.classes[const.QTY_D_UPSILON] == DiscrepancyClass.LARGE_INCREASE)


def test_find_optimal_points_ordering(small_spec: GridSpec) -> None:
    upsilon = np.full(small_spec.shape, 0.995)
    sigma = np.full(small_spec.shape, 0.99)
    lam = np.zeros(small_spec.shape)
    lam[0, 1], lam[2, 0], lam[3, 2] = 0.3, 0.8, 0.3
    degen = np.zeros(small_spec.shape, dtype=bool)
    degen[1, 1] = True
    sigma[0, 0] = 0.98
    grid = _synthetic_grid(
        small_spec, upsilon=upsilon, sigma=sigma, lambda_eff=lam, degenerate=degen
    )

    found = find_optimal_points(grid, 0.99, 0.99)
    assert len(found) == small_spec.shape[0] * small_spec.shape[1] - 2
    assert found[0].witnesses.lambda_eff == 0.8
    assert found[0].eps_tau == small_spec.eps_tau.points[2]
    expected = tuple(small_spec.eps_tau.points[[0, 3]])
    assert (found[1].eps_tau, found[2].eps_tau) == expected
    assert find_optimal_points(grid, 0.999, 0.5) == []
    with pytest.raises(InvalidParameterError):
        find_optimal_points(grid, float("nan"), 0.5)


def test_find_optimal_points_skips_defective(small_spec: GridSpec) -> None:
    defective = np.zeros(small_spec.shape, dtype=bool)
    defective[2, 1] = True
    grid = _synthetic_grid(
        small_spec,
        upsilon=np.ones(small_spec.shape),
        sigma=np.ones(small_spec.shape),
        lambda_eff=np.full(small_spec.shape, 0.5),
        defective=defective,
    )

    found = find_optimal_points(grid, 0.9, 0.9)
    assert len(found) == small_spec.shape[0] * small_spec.shape[1] - 1
    cell = (small_spec.eps_tau.points[2], small_spec.theta_over_pi.points[1])
    assert cell not in [(pt.eps_tau, pt.theta_over_pi) for pt in found]


def test_efficiency_collapse_fraction(small_spec: GridSpec) -> None:
    lam = np.full(small_spec.shape, 0.5)
    lam[0, :] = 0.001
    grid = _synthetic_grid(small_spec, lambda_eff=lam)
    assert efficiency_collapse_fraction(grid, 0.01) == pytest.approx(0.25)
    with pytest.raises(InvalidParameterError):
        efficiency_collapse_fraction(grid, 1.0)


@pytest.mark.slow
def test_optimal_extraction_exists_on_default_grid() -> None:
    spec = GridSpec(
        eps_tau=AxisSpec(*const.DEF_EPS_TAU),
        theta_over_pi=AxisSpec(*const.DEF_THETA_OVER_PI),
        params=ModelParams.from_eps_units(2.0),
    )
    grid = run_sweep(spec)
    found = find_optimal_points(grid, const.OPTIMAL_UPSILON, const.OPTIMAL_SIGMA)
    assert found
    assert all(pt.witnesses.sigma >= 0.99 for pt in found)


@pytest.mark.slow
def test_weak_quadrature_coupling_leaves_maps_unchanged() -> None:
    baseline = run_sweep(_coarse_spec())
    dm = diff_map(run_sweep(_coarse_spec(0.01, pi / 2)), baseline)
    assert np.all(dm.classes[const.QTY_D_LAMBDA] == DiscrepancyClass.NONE)
    assert np.all(dm.classes[const.QTY_D_SIGMA] == DiscrepancyClass.NONE)
    assert np.all(dm.values(const.QTY_D_UPSILON) > -const.DIFF_MODERATE)


@pytest.mark.slow
def test_weak_in_phase_coupling_keeps_efficiency_at_short_intervals() -> None:
    baseline = run_sweep(_coarse_spec())
    dm = diff_map(run_sweep(_coarse_spec(0.01, 0.0)), baseline)
    short = dm.spec.eps_tau.points < 6.0
    assert np.all(dm.classes[const.QTY_D_LAMBDA][short, :] == DiscrepancyClass.NONE)


@pytest.mark.slow
def test_strong_coupling_collapses_efficiency() -> None:
    cutoff = const.COLLAPSE_CUTOFF
    fractions = [
        efficiency_collapse_fraction(run_sweep(_coarse_spec(eta, pi / 2)), cutoff)
        for eta in (1.0, 5.0, 20.0, 50.0)
    ]
    assert all(a <= b for a, b in zip(fractions, fractions[1:]))
    assert fractions[-1] > 0.99

    inPhase = efficiency_collapse_fraction(run_sweep(_coarse_spec(20.0, 0.0)), cutoff)
    assert inPhase < fractions[2]
