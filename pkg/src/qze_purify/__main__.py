"""Command-line interface."""
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional

import konsole
import numpy as np
from rich import print as rprint
from rich import traceback
from rich.rule import Rule
from rich.table import Table

import qze_purify.constants as const
from qze_purify.analysis import required_steps
from qze_purify.analysis import success_probability
from qze_purify.config import RunConfig
from qze_purify.config import init_cli_parser
from qze_purify.config import parse_config
from qze_purify.emitters import PointSample
from qze_purify.emitters import emit_csv
from qze_purify.emitters import emit_oracle_csv
from qze_purify.emitters import emit_ppm
from qze_purify.emitters import emit_report_csv
from qze_purify.emitters import emit_trajectory_csv
from qze_purify.emitters import load_csv
from qze_purify.exceptions import DefectiveMatrixError
from qze_purify.exceptions import DegenerateTopError
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import IoError
from qze_purify.exceptions import QzePurifyError
from qze_purify.exceptions import UsageError
from qze_purify.oracle import compare_with_effective
from qze_purify.oracle import run_protocol_pure
from qze_purify.oracle import sample_trajectories
from qze_purify.perturbation import order_ratio
from qze_purify.perturbation import verify_order
from qze_purify.sweep import DiffMap
from qze_purify.sweep import DiscrepancyClass
from qze_purify.sweep import SweepGrid
from qze_purify.sweep import diff_map
from qze_purify.sweep import efficiency_collapse_fraction
from qze_purify.sweep import evaluate_point
from qze_purify.sweep import find_optimal_points
from qze_purify.sweep import run_sweep
from qze_purify.utils import initial_density
from qze_purify.utils import initial_vector

from . import __app_name__
from . import __version__

# =========================================================
#          G L O B A L    V A R S   &   I N I T S
# =========================================================
traceback.install()  # Ensure 'pretty' tracebacks

_APP_NAME_: str = "QZE Purify"


# =========================================================
#              H E L P E R   F U N C T I O N S
# =========================================================
def _banner(title: str) -> None:
    rprint(Rule())
    rprint(f"[bold black on white] - {title} - [/bold black on white]")


def _out_path(cfg: RunConfig, suffix: str) -> Path:
    """Return ``<output><suffix>``, creating the parent directory if needed."""
    path = Path(f"{cfg.output}{suffix}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(str(path.parent)) from e
    return path


def _emit_maps(cfg: RunConfig, result: Any, quantities: List[str]) -> List[Path]:
    meta = cfg.metadata()
    written = []
    if cfg.format in (const.FMT_CSV, const.FMT_BOTH):
        written.append(emit_csv(result, _out_path(cfg, ".csv"), meta))
    if cfg.format in (const.FMT_PPM, const.FMT_BOTH):
        for qty in quantities:
            written.append(emit_ppm(result, qty, _out_path(cfg, f"_{qty}.ppm"), meta))
    return written


def _grid_summary(grid: SweepGrid) -> None:
    optimal = find_optimal_points(grid, const.OPTIMAL_UPSILON, const.OPTIMAL_SIGMA)
    collapse = efficiency_collapse_fraction(grid, const.COLLAPSE_CUTOFF)
    nTau, nTheta = grid.spec.shape

    rprint(f"{'Cells':.<32}: {nTau} x {nTheta}")
    rprint(f"{'Degenerate cells':.<32}: {int(grid.degenerate.sum())}")
    rprint(f"{'Defective cells':.<32}: {int(grid.defective.sum())}")
    rprint(f"{'Optimal points':.<32}: {len(optimal)}")
    rprint(f"{'Efficiency collapse fraction':.<32}: {collapse:.4f}")
    if optimal:
        best = optimal[0]
        rprint(
            f"{'Best optimal point':.<32}: eps*tau={best.eps_tau:.6g} "
            f"theta/pi={best.theta_over_pi:.6g} lambda={best.witnesses.lambda_eff:.6g}"
        )


# =========================================================
#                C O M M A N D   A C T I O N S
# =========================================================
def run_point(cfg: RunConfig) -> None:
    """Evaluate spectrum and witnesses at one parameter point."""
    _banner("Point evaluation")
    res = evaluate_point(cfg.params, cfg.ancilla, cfg.tau)

    if res.spectral is not None:
        table = Table("k", "eigenvalue", "|eigenvalue|")
        for k, val in enumerate(res.spectral.eigenvalues, start=1):
            table.add_row(str(k), f"{val.real:.9g}{val.imag:+.9g}j", f"{abs(val):.9g}")
        rprint(table)

    w = res.witnesses
    rprint(f"{'Entanglement (upsilon)':.<32}: {w.upsilon:.9g}")
    rprint(f"{'Efficiency (lambda)':.<32}: {w.lambda_eff:.9g}")
    rprint(f"{'Stability (sigma)':.<32}: {w.sigma:.9g}")
    rprint(f"{'Degenerate / defective':.<32}: {res.degenerate} / {res.defective}")

    if res.spectral is not None:
        try:
            steps = required_steps(res.spectral, const.STEP_TOLERANCE)
            rho0 = initial_density(cfg.initial_state)
            prob = success_probability(res.spectral, rho0, cfg.n_steps)
            rprint(f"{'Steps to reach tolerance':.<32}: {steps}")
            rprint(f"{f'Success probability (N={cfg.n_steps})':.<32}: {prob:.9g}")
        except (DegenerateTopError, DefectiveMatrixError) as e:
            rprint(f"{'Asymptotic formulas':.<32}: n/a ({e.message})")

    sample = PointSample(cfg.eps_tau, cfg.theta_over_pi, res)
    rprint(f"Wrote {emit_csv(sample, _out_path(cfg, '.csv'), cfg.metadata())}")


def run_sweep_cmd(cfg: RunConfig) -> None:
    """Compute witness maps over the configured grid."""
    _banner("Witness sweep")
    grid = run_sweep(cfg.grid)
    _grid_summary(grid)
    for path in _emit_maps(cfg, grid, list(const.WITNESS_QUANTITIES)):
        rprint(f"Wrote {path}")


def run_diff(cfg: RunConfig) -> None:
    """Compare a sweep against a computed or stored baseline."""
    _banner("Discrepancy map")
    grid = run_sweep(cfg.grid)
    if cfg.baseline_csv:
        baseline = load_csv(cfg.baseline_csv)
    else:
        baseline = run_sweep(replace(cfg.grid, params=cfg.baseline_params))
    dmap: DiffMap = diff_map(grid, baseline)

    table = Table("quantity", *[c.value for c in DiscrepancyClass])
    for qty in const.DIFF_QUANTITIES:
        counts = [np.count_nonzero(dmap.classes[qty] == c) for c in DiscrepancyClass]
        table.add_row(qty, *[str(int(n)) for n in counts])
    rprint(table)

    for path in _emit_maps(cfg, dmap, list(const.DIFF_QUANTITIES)):
        rprint(f"Wrote {path}")


def run_perturb(cfg: RunConfig) -> None:
    """Check a perturbative spectrum against exact diagonalization."""
    _banner(f"Perturbation check ({cfg.regime.value} coupling)")
    params = cfg.perturb_params
    report = verify_order(params, cfg.regime, strict=False)

    table = Table("label", "predicted", "exact", "residual")
    for m in report.matches:
        table.add_row(
            m.label, f"{m.predicted:.12g}", f"{m.exact:.12g}", f"{m.residual:.3e}"
        )
    rprint(table)
    rprint(f"{'Max residual':.<32}: {report.max_residual:.3e}")
    rprint(f"{'Min level spacing':.<32}: {report.min_spacing:.3e}")
    if report.ambiguous:
        rprint("[yellow]WARNING:[/yellow] level pairing is ambiguous")
    else:
        ratio = order_ratio(params, cfg.regime)
        rprint(f"{'Residual ratio (s vs s/10)':.<32}: {ratio:.4g}")

    rprint(f"Wrote {emit_report_csv(report, _out_path(cfg, '.csv'), cfg.metadata())}")


def run_oracle(cfg: RunConfig) -> None:
    """Compare the full-space protocol with the effective operator."""
    _banner("Full-space oracle check")
    steps = sorted(set(cfg.oracle_steps) | {cfg.n_steps})
    comps = compare_with_effective(
        cfg.params, cfg.ancilla, cfg.tau, initial_density(cfg.initial_state), steps
    )

    table = Table("N", "full space", "effective", "rel. error", "state error")
    for c in comps:
        table.add_row(
            str(c.steps),
            f"{c.survival_full_space:.12g}",
            f"{c.survival_effective:.12g}",
            f"{c.relative_error:.3e}",
            f"{c.state_max_error:.3e}",
        )
    rprint(table)
    rprint(f"Wrote {emit_oracle_csv(comps, _out_path(cfg, '.csv'), cfg.metadata())}")


def run_trajectories(cfg: RunConfig) -> None:
    """Sample seeded stochastic trajectories."""
    _banner("Stochastic trajectories")
    psi0 = initial_vector(cfg.initial_state)
    summary = sample_trajectories(
        cfg.params, cfg.ancilla, cfg.tau, psi0, cfg.n_steps, cfg.trials, cfg.seed
    )
    exact = run_protocol_pure(cfg.params, cfg.ancilla, cfg.tau, psi0, cfg.n_steps)

    rprint(f"{'Trials / survivors':.<32}: {summary.trials} / {summary.survivors}")
    rprint(f"{'Survival frequency':.<32}: {summary.survival_frequency:.9g}")
    rprint(f"{'Exact survival probability':.<32}: {exact.survival_probability:.9g}")
    path = emit_trajectory_csv(
        summary, exact.survival_probability, _out_path(cfg, ".csv"), cfg.metadata()
    )
    rprint(f"Wrote {path}")


COMMAND_MAP: Dict[str, Callable[[RunConfig], None]] = {
    const.CMD_POINT: run_point,
    const.CMD_SWEEP: run_sweep_cmd,
    const.CMD_DIFF: run_diff,
    const.CMD_PERTURB: run_perturb,
    const.CMD_ORACLE: run_oracle,
    const.CMD_TRAJECTORIES: run_trajectories,
}


# =========================================================
#      M A I N   F U N C T I O N    /   A C T I O N S
# =========================================================
def main(inArgs: Optional[List[str]] = None) -> None:  # noqa: C901
    """Core function to run one command.    # noqa: D417,D415

    Note:
        - Application will exit with error level 1 on invalid flags, config
          keys or values. Nothing is computed in that case.

        - Application will exit with error level 2 if a numerical failure
          (or an output error) stops the command.

        - Application will exit with error level 0 if either no arguments are
          entered via CLI, or if arguments '-V' or '--version' are used.

    Args:
        inArgs:
            CLI arguments used to start application
    """
    args = sys.argv[1:] if inArgs is None else list(inArgs)
    cli = init_cli_parser()

    # Show 'help' and exit if no args
    if not args:
        cli.print_help(sys.stdout)
        sys.exit(const.EXIT_OK)

    try:
        cliArgs, _ = cli.parse_known_args(args)
        if cliArgs.version:
            rprint(f"{_APP_NAME_} ({__app_name__}) v{__version__}")
            sys.exit(const.EXIT_OK)

        cfg = parse_config(args)

    except (UsageError, InvalidParameterError) as e:
        rprint(f"[red]ERROR:[/red] {e.message}")
        sys.exit(const.EXIT_USAGE)

    # Initialize loggers
    logger = logging.getLogger()
    logging.basicConfig(filename=cfg.log, level=logging.INFO)
    logger.setLevel(logging.DEBUG if cfg.debug else logging.INFO)

    konsole.config(level=konsole.DEBUG if cfg.debug else konsole.ERROR)

    logger.info(f"{__app_name__} v{__version__}: {cfg.command} {' '.join(cfg.argv)}")
    try:
        COMMAND_MAP[cfg.command](cfg)

    except (UsageError, InvalidParameterError) as e:
        logger.error(repr(e))
        rprint(f"[red]ERROR:[/red] {e.message}")
        sys.exit(const.EXIT_USAGE)

    except QzePurifyError as e:
        logger.error(repr(e))
        rprint(f"[red]ERROR:[/red] {e.message}")
        sys.exit(const.EXIT_NUMERICAL)

    rprint(Rule())


# =========================================================
#            G L O B A L   C A T C H - A L L
# =========================================================
if __name__ == "__main__":
    main()  # pragma: no cover
