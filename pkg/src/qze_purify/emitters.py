"""File emitters for QZE Purify module.

Every artifact starts with a metadata block of ``key: value`` pairs: leading
``#`` lines in CSV files and header comments in PPM images. Numbers are
printed with 12 significant digits, flags as 0/1, lines end with LF, and no
timestamps are written, so the same run always produces the same bytes.

Sweep CSV files can be read back with 'load_csv', which is how a stored
baseline enters a diff.
"""
import csv
import logging
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Iterable
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence
from typing import Union

import numpy as np
import numpy.typing as npt

import qze_purify.constants as const
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import IoError
from qze_purify.model import ModelParams
from qze_purify.oracle import OracleComparison
from qze_purify.oracle import TrajectorySummary
from qze_purify.perturbation import OrderReport
from qze_purify.sweep import AxisSpec
from qze_purify.sweep import DiffMap
from qze_purify.sweep import DiscrepancyClass
from qze_purify.sweep import GridSpec
from qze_purify.sweep import PointResult
from qze_purify.sweep import SweepGrid

__all__ = [
    "GRID_HEADER",
    "DIFF_HEADER",
    "PointSample",
    "emit_csv",
    "emit_oracle_csv",
    "emit_ppm",
    "emit_report_csv",
    "emit_trajectory_csv",
    "grid_metadata",
    "load_csv",
    "read_metadata",
    "witness_color",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

GRID_HEADER = (
    "eps_tau",
    "theta_over_pi",
    "upsilon",
    "lambda_eff",
    "sigma",
    "degenerate",
    "defective",
)
DIFF_HEADER = GRID_HEADER + (
    "d_upsilon",
    "d_lambda",
    "d_sigma",
    "class_upsilon",
    "class_lambda",
    "class_sigma",
)

CLASS_COLORS = {
    DiscrepancyClass.NONE: (255, 255, 255),
    DiscrepancyClass.MODERATE_INCREASE: (173, 216, 230),
    DiscrepancyClass.LARGE_INCREASE: (0, 0, 139),
    DiscrepancyClass.MODERATE_DECREASE: (255, 182, 193),
    DiscrepancyClass.LARGE_DECREASE: (139, 0, 0),
}


class PointSample(NamedTuple):
    """Single-point result with its coordinates, for one-row CSV output."""

    eps_tau: float
    theta_over_pi: float
    result: PointResult


typeDefEmittable = Union[SweepGrid, DiffMap, PointSample]
typeDefMeta = Optional[Dict[str, str]]


def _fmt(val: Any) -> str:
    if isinstance(val, (bool, np.bool_)):
        return "1" if val else "0"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (float, np.floating)):
        return f"{float(val):.12g}"
    return str(val)


def _write_csv(
    fName: Union[str, Path],
    meta: Dict[str, str],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> Path:
    path = Path(fName)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            for key, val in meta.items():
                fp.write(f"# {key}: {val}\n")
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as e:
        log.error(f"Unable to write '{path}': {e}")
        raise IoError(str(path)) from e

    log.info(f"Wrote {path}")
    return path


def grid_metadata(spec: GridSpec) -> Dict[str, str]:
    """Return metadata keys describing a grid at full precision."""
    p = spec.params
    return {
        "omega": repr(p.omega),
        "epsilon": repr(p.epsilon),
        "eta": repr(p.eta),
        "phi_eta": repr(p.phi_eta),
        "phi_x": repr(spec.phi_x),
        const.KWD_EPS_TAU_MIN: repr(spec.eps_tau.minimum),
        const.KWD_EPS_TAU_MAX: repr(spec.eps_tau.maximum),
        const.KWD_EPS_TAU_COUNT: str(spec.eps_tau.count),
        const.KWD_THETA_MIN: repr(spec.theta_over_pi.minimum),
        const.KWD_THETA_MAX: repr(spec.theta_over_pi.maximum),
        const.KWD_THETA_COUNT: str(spec.theta_over_pi.count),
    }


def _merge_meta(base: Dict[str, str], meta: typeDefMeta) -> Dict[str, str]:
    merged = dict(meta or {})
    merged.update(base)
    return merged


# =========================================================
#                  C S V   E M I T T E R S
# =========================================================
def _grid_rows(grid: SweepGrid) -> Iterable[List[Any]]:
    epsTau = grid.spec.eps_tau.points
    thetas = grid.spec.theta_over_pi.points
    for i, et in enumerate(epsTau):
        for j, th in enumerate(thetas):
            yield [
                et,
                th,
                grid.upsilon[i, j],
                grid.lambda_eff[i, j],
                grid.sigma[i, j],
                grid.degenerate[i, j],
                grid.defective[i, j],
            ]


def _diff_rows(dmap: DiffMap) -> Iterable[List[Any]]:
    nTheta = dmap.spec.theta_over_pi.count
    for k, row in enumerate(_grid_rows(dmap.grid)):
        i, j = divmod(k, nTheta)
        row[5] = dmap.degenerate[i, j]
        row[6] = dmap.defective[i, j]
        row.extend(dmap.deltas[q][i, j] for q in const.DIFF_QUANTITIES)
        row.extend(dmap.classes[q][i, j].value for q in const.DIFF_QUANTITIES)
        yield row


def emit_csv(
    result: typeDefEmittable, fName: Union[str, Path], meta: typeDefMeta = None
) -> Path:
    """Write a sweep, diff or single-point result as CSV.

    Rows are ordered by ascending ``eps * tau``, then ascending ``theta``.

    Args:
        result:
            'SweepGrid', 'DiffMap' or 'PointSample'
        fName:
            output path
        meta:
            run metadata (command, argv, version, ...)

    Returns:
        Path of written file

    Raises:
        IoError: file cannot be written
    """
    if isinstance(result, DiffMap):
        return _write_csv(
            fName,
            _merge_meta(grid_metadata(result.spec), meta),
            DIFF_HEADER,
            _diff_rows(result),
        )
    if isinstance(result, SweepGrid):
        return _write_csv(
            fName,
            _merge_meta(grid_metadata(result.spec), meta),
            GRID_HEADER,
            _grid_rows(result),
        )
    if isinstance(result, PointSample):
        w = result.result.witnesses
        row = [
            result.eps_tau,
            result.theta_over_pi,
            w.upsilon,
            w.lambda_eff,
            w.sigma,
            result.result.degenerate,
            result.result.defective,
        ]
        return _write_csv(fName, dict(meta or {}), GRID_HEADER, [row])

    raise InvalidParameterError(f"cannot emit '{type(result).__name__}' as CSV")


def emit_report_csv(
    report: OrderReport, fName: Union[str, Path], meta: typeDefMeta = None
) -> Path:
    """Write a perturbation 'OrderReport', one row per level."""
    header = (
        "level",
        "label",
        "zeroth_order",
        "first_order",
        "predicted",
        "exact",
        "residual",
    )
    base = {
        "regime": report.regime.value,
        "small_parameter": repr(report.small_parameter),
        "max_residual": f"{report.max_residual:.12g}",
        "min_spacing": f"{report.min_spacing:.12g}",
        "ambiguous": _fmt(report.ambiguous),
    }
    rows = [
        [k, m.label, m.zeroth_order, m.first_order, m.predicted, m.exact, m.residual]
        for k, m in enumerate(report.matches)
    ]
    return _write_csv(fName, _merge_meta(base, meta), header, rows)


def emit_oracle_csv(
    comparisons: Sequence[OracleComparison],
    fName: Union[str, Path],
    meta: typeDefMeta = None,
) -> Path:
    """Write full-space versus effective-operator comparisons."""
    header = (
        "steps",
        "survival_full_space",
        "survival_effective",
        "relative_error",
        "state_max_error",
    )
    rows = [
        [
            c.steps,
            c.survival_full_space,
            c.survival_effective,
            c.relative_error,
            c.state_max_error,
        ]
        for c in comparisons
    ]
    return _write_csv(fName, dict(meta or {}), header, rows)


def emit_trajectory_csv(
    summary: TrajectorySummary,
    exactSurvival: float,
    fName: Union[str, Path],
    meta: typeDefMeta = None,
) -> Path:
    """Write a 'TrajectorySummary' next to the exact survival probability.

    ``sigma_deviations`` is the distance of the sampled frequency from the
    exact value in binomial standard deviations (0 if the spread vanishes).
    """
    spread = np.sqrt(exactSurvival * (1.0 - exactSurvival) / summary.trials)
    deviation = abs(summary.survival_frequency - exactSurvival)
    sigmas = deviation / spread if spread > 0 else 0.0

    header = (
        "trials",
        "survivors",
        "survival_frequency",
        "exact_survival",
        "sigma_deviations",
    )
    freq = summary.survival_frequency
    rows = [[summary.trials, summary.survivors, freq, exactSurvival, sigmas]]
    base = {"seed": str(summary.seed), "steps": str(summary.steps)}
    return _write_csv(fName, _merge_meta(base, meta), header, rows)


# =========================================================
#                    C S V   R E A D E R
# =========================================================
def read_metadata(fName: Union[str, Path]) -> Dict[str, str]:
    """Return the leading ``# key: value`` block of an emitted CSV."""
    path = Path(fName)
    meta: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fp:
            for line in fp:
                if not line.startswith("#"):
                    break
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
    except OSError as e:
        raise IoError(str(path)) from e
    return meta


def load_csv(fName: Union[str, Path]) -> SweepGrid:
    """Read an emitted sweep CSV back into a 'SweepGrid'.

    Axes and fixed parameters come from the metadata block, witness values
    and flags from the data rows.

    Args:
        fName:
            path of a CSV written by 'emit_csv' for a 'SweepGrid'

    Returns:
        'SweepGrid' instance

    Raises:
        IoError: file is missing, incomplete or not a sweep CSV
    """
    path = Path(fName)
    meta = read_metadata(path)
    try:
        spec = GridSpec(
            eps_tau=AxisSpec(
                float(meta[const.KWD_EPS_TAU_MIN]),
                float(meta[const.KWD_EPS_TAU_MAX]),
                int(meta[const.KWD_EPS_TAU_COUNT]),
            ),
            theta_over_pi=AxisSpec(
                float(meta[const.KWD_THETA_MIN]),
                float(meta[const.KWD_THETA_MAX]),
                int(meta[const.KWD_THETA_COUNT]),
            ),
            params=ModelParams(
                omega=float(meta["omega"]),
                epsilon=float(meta["epsilon"]),
                eta=float(meta["eta"]),
                phi_eta=float(meta["phi_eta"]),
            ),
            phi_x=float(meta["phi_x"]),
        )
    except (KeyError, ValueError, InvalidParameterError) as e:
        log.error(f"'{path}' has no valid grid metadata: {e}")
        raise IoError(str(path)) from e

    with open(path, encoding="utf-8", newline="") as fp:
        lines = [line for line in fp if not line.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0][: len(GRID_HEADER)]) != GRID_HEADER:
        raise IoError(str(path), data="missing sweep header")

    nTau, nTheta = spec.shape
    body = rows[1:]
    if len(body) != nTau * nTheta:
        msg = f"expected {nTau * nTheta} rows, got {len(body)}"
        raise IoError(str(path), data=msg)

    values = np.array([[float(v) for v in row[2:7]] for row in body])
    values = values.reshape(nTau, nTheta, 5)
    return SweepGrid(
        spec=spec,
        upsilon=values[:, :, 0],
        lambda_eff=values[:, :, 1],
        sigma=values[:, :, 2],
        degenerate=values[:, :, 3] > 0.5,
        defective=values[:, :, 4] > 0.5,
    )


# =========================================================
#                  P P M   E M I T T E R
# =========================================================
def _round(x: npt.NDArray[np.float64]) -> npt.NDArray[np.uint8]:
    return np.floor(x + 0.5).astype(np.uint8)


def witness_color(values: npt.ArrayLike) -> npt.NDArray[np.uint8]:
    """Map witness values in [0, 1] from white (0) to dark blue (1).

    Example:
        >>> witness_color([0.0, 1.0]).tolist()
        [[255, 255, 255], [0, 0, 139]]
    """
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    rg = _round(255.0 * (1.0 - v))
    return np.stack([rg, rg, _round(255.0 - 116.0 * v)], axis=-1)


def _class_color(classes: npt.NDArray[np.object_]) -> npt.NDArray[np.uint8]:
    out = np.zeros(classes.shape + (3,), dtype=np.uint8)
    for cls, rgb in CLASS_COLORS.items():
        out[classes == cls] = rgb
    return out


def emit_ppm(
    result: Union[SweepGrid, DiffMap],
    quantity: str,
    fName: Union[str, Path],
    meta: typeDefMeta = None,
) -> Path:
    """Write one quantity of a sweep or diff as a binary PPM (P6) image.

    Width is the ``eps * tau`` count, height the ``theta`` count; row 0
    holds the largest ``theta``. Diff quantities are drawn with the class
    colors, witness quantities with 'witness_color'.

    Args:
        result:
            'SweepGrid' or 'DiffMap'
        quantity:
            witness quantity, or diff quantity for a 'DiffMap'
        fName:
            output path
        meta:
            run metadata

    Returns:
        Path of written file

    Raises:
        IoError: file cannot be written
    """
    if isinstance(result, DiffMap) and quantity in const.DIFF_QUANTITIES:
        pixels = _class_color(result.classes[quantity])
    else:
        grid = result.grid if isinstance(result, DiffMap) else result
        pixels = witness_color(grid.values(quantity))

    # [tau, theta, rgb] -> [row = theta descending, col = tau, rgb]
    image = np.ascontiguousarray(pixels.transpose(1, 0, 2)[::-1])
    height, width = image.shape[:2]

    metaAll = _merge_meta(grid_metadata(result.spec), meta)
    metaAll["quantity"] = quantity
    header = "P6\n"
    header += "".join(f"# {key}: {val}\n" for key, val in metaAll.items())
    header += f"{width} {height}\n255\n"

    path = Path(fName)
    try:
        with open(path, "wb") as fp:
            fp.write(header.encode("utf-8"))
            fp.write(image.astype(np.uint8).tobytes())
    except OSError as e:
        log.error(f"Unable to write '{path}': {e}")
        raise IoError(str(path)) from e

    log.info(f"Wrote {path}")
    return path
