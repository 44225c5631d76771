"""Run configuration for QZE Purify module.

Settings come from three layers, lowest precedence first: built-in defaults,
a config file, and command-line flags. The config file is a plain list of
``key = value`` lines with ``#`` comments (an optional ``[qze_purify]``
section header is accepted) and is parsed with 'ConfigParser'. Every value
is validated here, so an invalid run aborts before any computation starts.

Note:
    Flags use dashes (``--omega-over-eps``) while file keys use underscores
    (``omega_over_eps``); both map to the same key.
"""
import argparse
import logging
import os
from configparser import ConfigParser
from configparser import Error as ConfigParserError
from configparser import ExtendedInterpolation
from dataclasses import dataclass
from math import isfinite
from math import pi
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Optional
from typing import Sequence
from typing import Tuple

import qze_purify.constants as const
from qze_purify.exceptions import InvalidParameterError
from qze_purify.exceptions import UsageError
from qze_purify.model import AncillaState
from qze_purify.model import ModelParams
from qze_purify.perturbation import Regime
from qze_purify.sweep import AxisSpec
from qze_purify.sweep import GridSpec
from qze_purify.utils import ENV_CONFIG
from qze_purify.utils import convert_attrib_str_to_list
from qze_purify.utils import convert_str_to_bool
from qze_purify.utils import get_valid_location

from . import __app_name__
from . import __version__

__all__ = [
    "RunConfig",
    "init_cli_parser",
    "parse_config",
    "read_config_file",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
log = logging.getLogger()

# Keys only valid with 'units = raw' and only valid with 'units = eps'
_RAW_KEYS_ = (const.KWD_OMEGA, const.KWD_EPSILON, const.KWD_ETA, const.KWD_TAU)
_EPS_KEYS_ = (
    const.KWD_OMEGA_OVER_EPS,
    const.KWD_ETA_OVER_EPS,
    const.KWD_EPS_TAU,
    const.KWD_PRESET,
)

# Value keys, in the order they appear in '--help'
_VALUE_KEYS_: Tuple[Tuple[str, str], ...] = (
    (const.KWD_PRESET, f"named parameter set: {', '.join(const.PRESETS)}"),
    (const.KWD_UNITS, "parameter units: eps (default) or raw"),
    (const.KWD_OMEGA_OVER_EPS, "omega / eps"),
    (const.KWD_ETA_OVER_EPS, "eta / eps, >= 0"),
    (const.KWD_PHI_ETA_OVER_PI, "A-B coupling phase / pi, in [0, 2)"),
    (const.KWD_PHI_X_OVER_PI, "ancilla phase / pi, in [0, 2)"),
    (const.KWD_THETA_OVER_PI, "ancilla angle / pi, in (0, 1)"),
    (const.KWD_EPS_TAU, "eps * tau of a single point, > 0"),
    (const.KWD_OMEGA, "omega (raw units)"),
    (const.KWD_EPSILON, "eps (raw units), >= 0"),
    (const.KWD_ETA, "eta (raw units), >= 0"),
    (const.KWD_TAU, "tau of a single point (raw units), > 0"),
    (const.KWD_EPS_TAU_MIN, "first eps * tau of the grid, > 0"),
    (const.KWD_EPS_TAU_MAX, "last eps * tau of the grid"),
    (const.KWD_EPS_TAU_COUNT, "number of eps * tau points, >= 2"),
    (const.KWD_THETA_MIN, "first theta / pi of the grid, in (0, 1)"),
    (const.KWD_THETA_MAX, "last theta / pi of the grid, in (0, 1)"),
    (const.KWD_THETA_COUNT, "number of theta / pi points, >= 2"),
    (const.KWD_BASELINE_ETA, "eta / eps of the diff baseline (default 0)"),
    (const.KWD_BASELINE_CSV, "load the diff baseline from an emitted sweep CSV"),
    (const.KWD_REGIME, "perturbative regime: weak or strong"),
    (const.KWD_SMALL, "small parameter of the regime, in (0, 1)"),
    (const.KWD_N_STEPS, "number of measurement steps, >= 1"),
    (const.KWD_ORACLE_STEPS, "comma-separated step counts of oracle-check"),
    (const.KWD_TRIALS, "number of stochastic trials, >= 1"),
    (const.KWD_SEED, "seed of the stochastic sampler, >= 0"),
    (
        const.KWD_INITIAL_STATE,
        f"initial A-B state: {', '.join(const.INITIAL_STATES)}",
    ),
    (const.KWD_OUTPUT, "output path stem"),
    (const.KWD_FORMAT, "output format: csv, ppm or both"),
)

_ALL_KEYS_ = frozenset(
    [const.KWD_COMMAND, const.KWD_LOG, const.KWD_DEBUG] + [k for k, _ in _VALUE_KEYS_]
)


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises 'UsageError' instead of exiting."""

    def error(self, message: str) -> Any:  # type: ignore[override]
        raise UsageError("command line", message)


# =========================================================
#               R U N   C O N F I G U R A T I O N
# =========================================================
@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one run.

    Attributes:
        command:
            one of 'point', 'sweep', 'diff', 'perturb', 'oracle-check',
            'trajectories'
        units:
            'eps' or 'raw'
        params:
            model parameters
        theta_over_pi:
            ancilla angle of single-point commands
        phi_x:
            ancilla phase
        tau:
            time step of single-point commands
        grid:
            sweep grid ('sweep' and 'diff')
        baseline_params:
            model parameters of the computed diff baseline
        baseline_csv:
            path of a stored diff baseline, if any
        regime:
            perturbative regime ('perturb')
        small_parameter:
            small parameter of the regime ('perturb')
        n_steps:
            number of measurement steps
        oracle_steps:
            step counts compared by 'oracle-check'
        trials:
            number of stochastic trials
        seed:
            sampler seed
        initial_state:
            name of the initial A-B state
        output:
            output path stem
        format:
            'csv', 'ppm' or 'both'
        log:
            log file path
        debug:
            debug logging flag
        argv:
            command line as given
        config_file:
            config file that was read, empty if none
    """

    command: str
    units: str
    params: ModelParams
    theta_over_pi: float
    phi_x: float
    tau: float
    grid: GridSpec
    baseline_params: ModelParams
    baseline_csv: Optional[str]
    regime: Regime
    small_parameter: float
    n_steps: int
    oracle_steps: Tuple[int, ...]
    trials: int
    seed: int
    initial_state: str
    output: str
    format: str
    log: str
    debug: bool
    argv: Tuple[str, ...] = ()
    config_file: str = ""

    @property
    def ancilla(self) -> AncillaState:
        """Return measured ancilla state of single-point commands."""
        return AncillaState(theta=pi * self.theta_over_pi, phi_x=self.phi_x)

    @property
    def eps_tau(self) -> float:
        """Return ``eps * tau`` of single-point commands."""
        return self.tau * self.params.epsilon if self.params.epsilon > 0 else self.tau

    @property
    def perturb_params(self) -> ModelParams:
        """Return model parameters at the regime's small parameter.

        The weak regime keeps ``eps`` and sets ``eta = s * eps``; the strong
        regime keeps ``eta`` and sets ``eps = s * eta``.
        """
        p = self.params
        if self.regime is Regime.WEAK:
            eta = self.small_parameter * p.epsilon
            return ModelParams(p.omega, p.epsilon, eta, p.phi_eta)
        return ModelParams(p.omega, self.small_parameter * p.eta, p.eta, p.phi_eta)

    def metadata(self) -> Dict[str, str]:
        """Return key-value block embedded in every emitted artifact."""
        meta = {
            "command": self.command,
            "argv": " ".join(self.argv),
            "version": f"{__app_name__} {__version__}",
            "units": self.units,
            "omega": repr(self.params.omega),
            "epsilon": repr(self.params.epsilon),
            "eta": repr(self.params.eta),
            "phi_eta": repr(self.params.phi_eta),
            "phi_x": repr(self.phi_x),
        }
        if self.command in (const.CMD_POINT, const.CMD_ORACLE, const.CMD_TRAJECTORIES):
            meta["theta_over_pi"] = repr(self.theta_over_pi)
            meta["tau"] = repr(self.tau)
            meta["initial_state"] = self.initial_state
            meta["n_steps"] = str(self.n_steps)
        if self.command == const.CMD_ORACLE:
            meta["oracle_steps"] = ",".join(str(n) for n in self.oracle_steps)
        if self.command == const.CMD_DIFF:
            meta["baseline"] = self.baseline_csv or f"eta={self.baseline_params.eta!r}"
        if self.command == const.CMD_PERTURB:
            meta["regime"] = self.regime.value
            meta["small_parameter"] = repr(self.small_parameter)
        if self.command == const.CMD_TRAJECTORIES:
            meta["trials"] = str(self.trials)
            meta["seed"] = str(self.seed)
        return meta


# =========================================================
#                   P A R S E R S
# =========================================================
def init_cli_parser() -> argparse.ArgumentParser:
    """Initialize CLI (ArgParse) parser.

    Value flags default to 'SUPPRESS' so that only flags actually given on
    the command line override the config file.

    Returns:
        ArgParse parser instance
    """
    parser = _Parser(
        prog=__app_name__,
        description=f"Repeated-measurement purification simulator [v{__version__}]",
        epilog="NOTE: values are in units of eps unless '--units raw' is given",
        argument_default=argparse.SUPPRESS,
    )

    parser.add_argument(
        "command",
        nargs="?",
        default=None,
        help=f"Action to run: {', '.join(const.COMMANDS)} (or 'command' in config)",
    )
    parser.add_argument(
        "-V",
        "--version",
        action="store_true",
        default=False,
        help="Display module version number and exit.",
    )
    parser.add_argument("-d", "--debug", action="store_true", help="Run in debug mode")
    parser.add_argument(
        "--config",
        action="store",
        type=str,
        default=None,
        help="Path to config file",
    )
    parser.add_argument("--log", action="store", type=str, help="Path to log file")

    for key, helpTxt in _VALUE_KEYS_:
        parser.add_argument(
            f"--{key.replace('_', '-')}",
            dest=key,
            action="store",
            type=str,
            help=helpTxt,
        )

    return parser


def read_config_file(fName: str) -> Dict[str, str]:
    """Read a ``key = value`` config file.

    Args:
        fName:
            path to config file

    Returns:
        'dict' with normalized keys and raw string values

    Raises:
        UsageError: file is missing or unreadable, has a foreign section or
            an unknown key
    """
    path = Path(fName).expanduser()
    if not path.exists():
        raise UsageError("config", f"an existing file, '{path}' does not exist")

    text = path.read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = f"[{const.CONFIG_SCTN}]\n{text}"

    parser = ConfigParser(interpolation=ExtendedInterpolation())
    try:
        parser.read_string(text, source=str(path))
    except ConfigParserError as e:
        raise UsageError("config", f"'key = value' lines ({e})") from None

    foreign = [s for s in parser.sections() if s != const.CONFIG_SCTN]
    if foreign:
        raise UsageError(foreign[0], f"no section other than [{const.CONFIG_SCTN}]")

    outDict: Dict[str, str] = {}
    for key, val in parser.items(const.CONFIG_SCTN):
        normKey = key.strip().replace("-", "_")
        if normKey not in _ALL_KEYS_:
            log.error(f"Unknown config key '{key}' in {path}")
            raise UsageError(normKey, f"one of: {', '.join(sorted(_ALL_KEYS_))}")
        outDict[normKey] = val.strip()

    return outDict


# =========================================================
#              V A L U E   C O N V E R S I O N
# =========================================================
def _to_float(
    raw: Dict[str, Any],
    key: str,
    default: float,
    accepted: str = "a finite number",
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    loOpen: bool = False,
    hiOpen: bool = False,
) -> float:
    if key not in raw:
        return default
    try:
        val = float(raw[key])
    except (TypeError, ValueError):
        raise UsageError(key, accepted) from None

    bad = not isfinite(val)
    if lo is not None:
        bad = bad or (val <= lo if loOpen else val < lo)
    if hi is not None:
        bad = bad or (val >= hi if hiOpen else val > hi)
    if bad:
        raise UsageError(key, accepted)
    return val


def _to_int(raw: Dict[str, Any], key: str, default: int, minimum: int) -> int:
    if key not in raw:
        return default
    try:
        val = int(str(raw[key]).strip())
    except ValueError:
        raise UsageError(key, f"an integer >= {minimum}") from None
    if val < minimum:
        raise UsageError(key, f"an integer >= {minimum}")
    return val


def _to_steps(
    raw: Dict[str, Any], key: str, default: Tuple[int, ...]
) -> Tuple[int, ...]:
    if key not in raw:
        return default
    try:
        steps = convert_attrib_str_to_list(raw[key], const.DELIM_VAL, int)
    except ValueError:
        raise UsageError(key, "comma-separated integers >= 1") from None
    if not steps or min(steps) < 1:
        raise UsageError(key, "comma-separated integers >= 1")
    return tuple(sorted(set(steps)))


def _to_choice(
    raw: Dict[str, Any], key: str, default: str, choices: Sequence[str]
) -> str:
    val = str(raw.get(key, default)).strip().lower()
    if val not in choices:
        raise UsageError(key, " | ".join(choices))
    return val


def _apply_preset(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Fill omega/eps, eta/eps and phi_eta from a named preset.

    Explicit keys win over the preset.
    """
    name = str(raw[const.KWD_PRESET]).strip().lower()
    if name not in const.PRESETS:
        raise UsageError(const.KWD_PRESET, " | ".join(const.PRESETS))

    omegaOverEps, etaOverEps, phiEta = const.PRESETS[name]
    filled = {
        const.KWD_OMEGA_OVER_EPS: repr(omegaOverEps),
        const.KWD_ETA_OVER_EPS: repr(etaOverEps),
        const.KWD_PHI_ETA_OVER_PI: repr(phiEta / pi),
    }
    filled.update(raw)
    return filled


def _build_params(raw: Dict[str, Any], units: str) -> ModelParams:
    phiEta = pi * _to_float(
        raw, const.KWD_PHI_ETA_OVER_PI, 0.0, "a number in [0, 2)", 0.0, 2.0, hiOpen=True
    )
    if units == const.UNITS_RAW:
        omega = _to_float(raw, const.KWD_OMEGA, const.DEF_OMEGA_OVER_EPS)
        eps = _to_float(raw, const.KWD_EPSILON, 1.0, "a number >= 0", 0.0)
        eta = _to_float(raw, const.KWD_ETA, 0.0, "a number >= 0", 0.0)
        return ModelParams(omega=omega, epsilon=eps, eta=eta, phi_eta=phiEta)

    omegaOverEps = _to_float(raw, const.KWD_OMEGA_OVER_EPS, const.DEF_OMEGA_OVER_EPS)
    etaOverEps = _to_float(raw, const.KWD_ETA_OVER_EPS, 0.0, "a number >= 0", 0.0)
    return ModelParams.from_eps_units(omegaOverEps, etaOverEps, phiEta)


def _build_grid(raw: Dict[str, Any], params: ModelParams, phiX: float) -> GridSpec:
    tauMin, tauMax, tauCount = const.DEF_EPS_TAU
    thMin, thMax, thCount = const.DEF_THETA_OVER_PI

    epsTau = (
        _to_float(raw, const.KWD_EPS_TAU_MIN, tauMin, "a number > 0", 0.0, loOpen=True),
        _to_float(raw, const.KWD_EPS_TAU_MAX, tauMax, "a number > 0", 0.0, loOpen=True),
        _to_int(raw, const.KWD_EPS_TAU_COUNT, tauCount, 2),
    )
    inside = "a number in (0, 1)"
    theta = (
        _to_float(raw, const.KWD_THETA_MIN, thMin, inside, 0.0, 1.0, True, True),
        _to_float(raw, const.KWD_THETA_MAX, thMax, inside, 0.0, 1.0, True, True),
        _to_int(raw, const.KWD_THETA_COUNT, thCount, 2),
    )
    if epsTau[0] >= epsTau[1]:
        raise UsageError(const.KWD_EPS_TAU_MAX, f"a number > {const.KWD_EPS_TAU_MIN}")
    if theta[0] >= theta[1]:
        raise UsageError(const.KWD_THETA_MAX, f"a number > {const.KWD_THETA_MIN}")

    return GridSpec(AxisSpec(*epsTau), AxisSpec(*theta), params, phiX)


def _build_run_config(
    raw: Dict[str, Any], argv: Tuple[str, ...], configFile: str
) -> RunConfig:
    inside = "a number in (0, 1)"
    command = _to_choice(raw, const.KWD_COMMAND, "", const.COMMANDS)

    units = _to_choice(
        raw, const.KWD_UNITS, const.UNITS_EPS, (const.UNITS_EPS, const.UNITS_RAW)
    )
    offKeys = _EPS_KEYS_ if units == const.UNITS_RAW else _RAW_KEYS_
    for key in offKeys:
        if key in raw:
            raise UsageError(key, f"not allowed with units = {units}")

    if const.KWD_PRESET in raw:
        raw = _apply_preset(raw)

    params = _build_params(raw, units)
    phiX = pi * _to_float(
        raw, const.KWD_PHI_X_OVER_PI, 0.0, "a number in [0, 2)", 0.0, 2.0, hiOpen=True
    )
    thetaOverPi = _to_float(
        raw,
        const.KWD_THETA_OVER_PI,
        const.DEF_THETA_POINT,
        inside,
        0.0,
        1.0,
        True,
        True,
    )
    tauKey = const.KWD_TAU if units == const.UNITS_RAW else const.KWD_EPS_TAU
    tau = _to_float(
        raw, tauKey, const.DEF_EPS_TAU_POINT, "a number > 0", 0.0, loOpen=True
    )

    baselineEta = _to_float(raw, const.KWD_BASELINE_ETA, 0.0, "a number >= 0", 0.0)
    baselineParams = ModelParams(
        params.omega, params.epsilon, baselineEta * params.epsilon, params.phi_eta
    )

    regime = Regime(
        _to_choice(raw, const.KWD_REGIME, const.REGIME_WEAK, [r.value for r in Regime])
    )
    small = _to_float(
        raw, const.KWD_SMALL, const.DEF_SMALL, inside, 0.0, 1.0, True, True
    )
    if command == const.CMD_PERTURB:
        if regime is Regime.WEAK and params.epsilon <= 0:
            raise UsageError(const.KWD_EPSILON, "a number > 0 for the weak regime")
        if regime is Regime.STRONG and params.eta <= 0:
            raise UsageError(const.KWD_ETA_OVER_EPS, "a number > 0 (strong regime)")

    initialState = _to_choice(
        raw, const.KWD_INITIAL_STATE, const.DEF_INITIAL_STATE, const.INITIAL_STATES
    )
    if command == const.CMD_TRAJECTORIES and initialState == const.STATE_MIXED:
        raise UsageError(const.KWD_INITIAL_STATE, "a pure state for trajectories")

    return RunConfig(
        command=command,
        units=units,
        params=params,
        theta_over_pi=thetaOverPi,
        phi_x=phiX,
        tau=tau,
        grid=_build_grid(raw, params, phiX),
        baseline_params=baselineParams,
        baseline_csv=raw.get(const.KWD_BASELINE_CSV) or None,
        regime=regime,
        small_parameter=small,
        n_steps=_to_int(raw, const.KWD_N_STEPS, const.DEF_N_STEPS, 1),
        oracle_steps=_to_steps(raw, const.KWD_ORACLE_STEPS, const.ORACLE_STEPS),
        trials=_to_int(raw, const.KWD_TRIALS, const.DEF_TRIALS, 1),
        seed=_to_int(raw, const.KWD_SEED, const.DEF_SEED, 0),
        initial_state=initialState,
        output=str(raw.get(const.KWD_OUTPUT, const.DEF_OUTPUT)),
        format=_to_choice(
            raw,
            const.KWD_FORMAT,
            const.FMT_BOTH,
            (const.FMT_CSV, const.FMT_PPM, const.FMT_BOTH),
        ),
        log=str(raw.get(const.KWD_LOG, const.DEF_LOG)),
        debug=convert_str_to_bool(raw.get(const.KWD_DEBUG, False)),
        argv=argv,
        config_file=configFile,
    )


def parse_config(
    inArgs: Sequence[str], environ: Optional[Dict[str, str]] = None
) -> RunConfig:
    """Build a validated 'RunConfig' from command-line args and config file.

    The config file is ``--config PATH``, else the ``QZE_PURIFY_CONFIG``
    environment variable, else ``qze-purify.config.ini`` in a default
    location, else none. Flags override file values key by key.

    Example:
        >>> cfg = parse_config(["point", "--theta-over-pi", "0.25"], environ={})
        >>> assert cfg.command == "point" and cfg.params.epsilon == 1.0

    Args:
        inArgs:
            command-line arguments (without program name)
        environ:
            environment mapping, defaults to 'os.environ'

    Returns:
        'RunConfig' instance

    Raises:
        UsageError: invalid flag, key or value
    """
    env = os.environ if environ is None else environ
    argv = tuple(str(a) for a in inArgs)
    cliArgs = vars(init_cli_parser().parse_args(list(argv)))

    configFile = (
        cliArgs.pop("config", None)
        or env.get(ENV_CONFIG)
        or get_valid_location(const.DEF_CONFIG)
    )
    cliArgs.pop("version", None)

    fileVals = read_config_file(configFile) if configFile else {}
    merged: Dict[str, Any] = dict(fileVals)
    merged.update({k: v for k, v in cliArgs.items() if v is not None})
    log.debug(f"parse_config: file='{configFile}' keys={sorted(merged)}")

    try:
        return _build_run_config(merged, argv, str(configFile or ""))
    except InvalidParameterError as e:
        raise UsageError("parameters", e.message) from None
