"""Utility functions for QZE Purify module.

This module includes several functions that are used throughout the
QZE Purify module to handle common tasks like converting config strings,
locating files, resolving the worker count, and building initial states.
"""
import os
import re
from math import sqrt
from pathlib import Path
from typing import Any
from typing import List
from typing import Optional

import numpy as np
from joblib import effective_n_jobs

import qze_purify.constants as const
from qze_purify.exceptions import UsageError
from qze_purify.linalg import ComplexMatrix
from qze_purify.linalg import ComplexVector

from . import __app_name__

__all__ = [
    "ENV_CONFIG",
    "ENV_WORKERS",
    "convert_attrib_str_to_list",
    "convert_str_to_bool",
    "get_valid_location",
    "initial_density",
    "initial_vector",
    "resolve_workers",
]

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
_APP_NORMALIZED_: str = re.sub(r"[^A-Z0-9]", "_", str(__app_name__).upper())

# OS ENVIRON variable names
ENV_CONFIG: str = f"{_APP_NORMALIZED_}_CONFIG"
ENV_WORKERS: str = f"{_APP_NORMALIZED_}_WORKERS"

_R2_: float = 1 / sqrt(2)

# Amplitudes in (uu, ud, du, dd) order
_PURE_STATES_ = {
    "up_up": (1.0, 0.0, 0.0, 0.0),
    "up_down": (0.0, 1.0, 0.0, 0.0),
    "down_up": (0.0, 0.0, 1.0, 0.0),
    "down_down": (0.0, 0.0, 0.0, 1.0),
    "singlet": (0.0, _R2_, -_R2_, 0.0),
    "triplet": (0.0, _R2_, _R2_, 0.0),
}


# =========================================================
#            S T R I N G   C O N V E R S I O N S
# =========================================================
def convert_attrib_str_to_list(
    inStr: Any, itemDelim: str = const.DELIM_VAL, itemFmt: Any = str
) -> List[Any]:
    """Convert a given attribute string to list format.

    Example:
        >>> myList = convert_attrib_str_to_list("0.05, 12, 240")
        >>> assert myList == ["0.05", "12", "240"]

        >>> myList = convert_attrib_str_to_list("1|5|20", "|", int)
        >>> assert myList == [1, 5, 20]

    Args:
        inStr:
            configuration string to be converted.
        itemDelim:
            item delimiter
        itemFmt:
            item (data) formatter

    Returns:
        List with zero or more attribute values
    """
    tmpList = str(inStr).split(itemDelim)
    return [itemFmt(item.strip()) for item in tmpList if item.strip()]


def convert_str_to_bool(inVal: Any) -> bool:
    """Convert string value to boolean.

    Example:
        >>> assert convert_str_to_bool("TRUE")
        >>> assert convert_str_to_bool("1")
        >>> assert not convert_str_to_bool("no")

    Args:
        inVal:
            Value to be converted.

    Returns:
        Boolean 'True' or 'False' based on input.
    """
    return (
        inVal
        if isinstance(inVal, bool)
        else str(inVal).strip().lower() in {"true", "1", "t", "y", "yes", "on"}
    )


# =========================================================
#             E N V I R O N M E N T   A N D   F S
# =========================================================
def get_valid_location(inFName: str) -> str:
    """Get valid location for a given filename.

    We use this to look for a given file (mainly config
    files) in a few default locations.

    Args:
        inFName:
            filename (string) to look for

    Returns:
        filename as string, empty if not found
    """
    cleanFName = inFName.strip("/")
    defaultLocations = [
        f"{Path.cwd()}/{cleanFName}",
        f"{Path.home()}/{cleanFName}",
        f"/etc/{__app_name__}/{cleanFName}",
    ]

    return next((str(item) for item in defaultLocations if Path(item).exists()), "")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Return effective worker count.

    Uses ``workers`` when given, else the ``QZE_PURIFY_WORKERS`` environment
    variable, else all available cores. ``-1`` means all cores.

    Raises:
        UsageError: value is not an integer >= 1 or -1
    """
    raw: Any = workers if workers is not None else os.environ.get(ENV_WORKERS, "-1")
    try:
        nJobs = int(raw)
    except (TypeError, ValueError):
        raise UsageError(ENV_WORKERS, "integer >= 1 or -1") from None
    if nJobs == 0 or nJobs < -1:
        raise UsageError(ENV_WORKERS, "integer >= 1 or -1")

    return int(effective_n_jobs(nJobs))


# =========================================================
#               I N I T I A L   S T A T E S
# =========================================================
def initial_vector(name: str) -> ComplexVector:
    """Return a named pure A-B state as a unit 4-vector.

    Raises:
        UsageError: name is unknown or denotes a mixed state
    """
    key = name.strip().lower()
    if key not in _PURE_STATES_:
        raise UsageError(const.KWD_INITIAL_STATE, "|".join(_PURE_STATES_))
    return np.array(_PURE_STATES_[key], dtype=np.complex128)


def initial_density(name: str) -> ComplexMatrix:
    """Return a named A-B initial state as a density matrix.

    Example:
        >>> rho = initial_density("mixed")
        >>> assert np.allclose(rho, np.eye(4) / 4)

    Raises:
        UsageError: name is unknown
    """
    if name.strip().lower() == const.STATE_MIXED:
        return np.eye(4, dtype=np.complex128) / 4
    psi = initial_vector(name)
    return np.outer(psi, psi.conj())
