"""Global constants for QZE Purify module.

This module holds all global constants used within the various components
of the QZE Purify module: the numerical tolerances that operations and tests
share, grid defaults, and the keywords used in config files and on the
command line.
"""
from math import pi
from typing import Dict
from typing import Tuple

# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
DELIM_VAL: str = ","

# =========================================================
#                 T O L E R A N C E S
# =========================================================
TOL_HERMITIAN: float = 1e-12  # max |m - m^dagger| entry accepted as Hermitian
TOL_UNITARY: float = 1e-12  # max |U^dagger U - I| entry
TOL_RECONSTRUCT: float = 1e-10  # eigen-reconstruction of Hermitian input
TOL_EIG_RESIDUAL: float = 1e-9  # general eigenpair residual
TOL_CONTRACTION: float = 1e-10  # largest singular value of V above 1
TOL_BIORTHO: float = 1e-9  # max |<l~_i|l_j> - delta_ij|
TOL_NORM: float = 1e-8  # state-vector norm deviation
TOL_TRACE: float = 1e-10  # density-matrix trace deviation
TOL_PSD: float = 1e-10  # most negative eigenvalue accepted as PSD

COND_DEFECTIVE: float = 1e8  # right-eigenvector condition flagged defective
COND_SINGULAR: float = 1e10  # refuse inversion beyond this condition

GAP_TOL: float = 1e-9  # |l1| - |l2| below this marks a degenerate top
ZERO_MODULUS: float = 1e-14  # |l1| below this gives efficiency 0
ZERO_PROBABILITY: float = 1e-300  # step probability treated as extinction

AMBIGUITY_FACTOR: float = 10.0  # level spacing must exceed this x residual
DEGENERATE_LEVELS: float = 1e-12  # predicted levels closer than this coincide

# =========================================================
#      D I S C R E P A N C Y   T H R E S H O L D S
# =========================================================
DIFF_MODERATE: float = 0.01
DIFF_LARGE: float = 0.1

# =========================================================
#                G R I D   D E F A U L T S
# =========================================================
DEF_EPS_TAU: Tuple[float, float, int] = (0.05, 12.0, 240)
DEF_THETA_OVER_PI: Tuple[float, float, int] = (0.01, 0.99, 196)

TRAJECTORY_CHUNK: int = 10_000

# =========================================================
#    K E Y W O R D S   F O R   C O N F I G   F I L E S
# =========================================================
CONFIG_SCTN: str = "qze_purify"

CMD_POINT: str = "point"
CMD_SWEEP: str = "sweep"
CMD_DIFF: str = "diff"
CMD_PERTURB: str = "perturb"
CMD_ORACLE: str = "oracle-check"
CMD_TRAJECTORIES: str = "trajectories"
COMMANDS: Tuple[str, ...] = (
    CMD_POINT,
    CMD_SWEEP,
    CMD_DIFF,
    CMD_PERTURB,
    CMD_ORACLE,
    CMD_TRAJECTORIES,
)

KWD_COMMAND: str = "command"
KWD_PRESET: str = "preset"
KWD_UNITS: str = "units"
KWD_OMEGA_OVER_EPS: str = "omega_over_eps"
KWD_ETA_OVER_EPS: str = "eta_over_eps"
KWD_PHI_ETA_OVER_PI: str = "phi_eta_over_pi"
KWD_PHI_X_OVER_PI: str = "phi_x_over_pi"
KWD_THETA_OVER_PI: str = "theta_over_pi"
KWD_EPS_TAU: str = "eps_tau"
KWD_OMEGA: str = "omega"
KWD_EPSILON: str = "epsilon"
KWD_ETA: str = "eta"
KWD_TAU: str = "tau"
KWD_EPS_TAU_MIN: str = "eps_tau_min"
KWD_EPS_TAU_MAX: str = "eps_tau_max"
KWD_EPS_TAU_COUNT: str = "eps_tau_count"
KWD_THETA_MIN: str = "theta_over_pi_min"
KWD_THETA_MAX: str = "theta_over_pi_max"
KWD_THETA_COUNT: str = "theta_over_pi_count"
KWD_BASELINE_ETA: str = "baseline_eta_over_eps"
KWD_BASELINE_CSV: str = "baseline_csv"
KWD_REGIME: str = "regime"
KWD_SMALL: str = "small_parameter"
KWD_N_STEPS: str = "n_steps"
KWD_ORACLE_STEPS: str = "oracle_steps"
KWD_TRIALS: str = "trials"
KWD_SEED: str = "seed"
KWD_INITIAL_STATE: str = "initial_state"
KWD_OUTPUT: str = "output"
KWD_FORMAT: str = "format"
KWD_LOG: str = "log"
KWD_DEBUG: str = "debug"

UNITS_EPS: str = "eps"
UNITS_RAW: str = "raw"

REGIME_WEAK: str = "weak"
REGIME_STRONG: str = "strong"

FMT_CSV: str = "csv"
FMT_PPM: str = "ppm"
FMT_BOTH: str = "both"

QTY_UPSILON: str = "upsilon"
QTY_LAMBDA: str = "lambda_eff"
QTY_SIGMA: str = "sigma"
QTY_D_UPSILON: str = "d_upsilon"
QTY_D_LAMBDA: str = "d_lambda"
QTY_D_SIGMA: str = "d_sigma"
WITNESS_QUANTITIES: Tuple[str, ...] = (QTY_UPSILON, QTY_LAMBDA, QTY_SIGMA)
DIFF_QUANTITIES: Tuple[str, ...] = (QTY_D_UPSILON, QTY_D_LAMBDA, QTY_D_SIGMA)

STATE_MIXED: str = "mixed"
INITIAL_STATES: Tuple[str, ...] = (
    STATE_MIXED,
    "up_up",
    "up_down",
    "down_up",
    "down_down",
    "singlet",
    "triplet",
)

# (omega/eps, eta/eps, phi_eta) of named parameter points
PRESETS: Dict[str, Tuple[float, float, float]] = {
    "baseline": (2.0, 0.0, 0.0),
    "weak_in_phase": (2.0, 0.01, 0.0),
    "weak_quarter_phase": (2.0, 0.01, pi / 4),
    "weak_quadrature": (2.0, 0.01, pi / 2),
    "strong_quadrature_1": (2.0, 1.0, pi / 2),
    "strong_quadrature_5": (2.0, 5.0, pi / 2),
    "strong_quadrature_20": (2.0, 20.0, pi / 2),
    "strong_quadrature_50": (2.0, 50.0, pi / 2),
    "strong_in_phase_1": (2.0, 1.0, 0.0),
    "strong_in_phase_25": (2.0, 25.0, 0.0),
    "strong_in_phase_100": (2.0, 100.0, 0.0),
}

# =========================================================
#              E X I T   C O D E S
# =========================================================
EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_NUMERICAL: int = 2

# =========================================================
#              R U N   D E F A U L T S
# =========================================================
DEF_OMEGA_OVER_EPS: float = 2.0
DEF_THETA_POINT: float = 0.25
DEF_EPS_TAU_POINT: float = 2.0
DEF_N_STEPS: int = 20
DEF_TRIALS: int = 100_000
DEF_SEED: int = 0
DEF_SMALL: float = 1e-3
DEF_INITIAL_STATE: str = "up_down"
DEF_OUTPUT: str = "qze-purify"
DEF_LOG: str = "qze-purify.log"
DEF_CONFIG: str = "qze-purify.config.ini"

ORACLE_STEPS: Tuple[int, ...] = (1, 5, 20, 50)

STEP_TOLERANCE: float = 1e-3  # residual weight reported by 'point'
OPTIMAL_UPSILON: float = 0.99
OPTIMAL_SIGMA: float = 0.99
COLLAPSE_CUTOFF: float = 0.01
