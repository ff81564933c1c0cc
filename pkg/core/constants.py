"""Calibrated constants standing in for the unnamed c, C of the nodal-line estimates.

The values live in a versioned JSON file (``constants.v1``) written by
``scripts/calibrate.py``. Tests and certificates read the frozen file so that
verdicts are reproducible.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from core import config
from core.errors import ConfigError

logger = logging.getLogger(__name__)

CONSTANTS_VERSION = 1


@dataclass(frozen=True)
class CalibratedConstants:
    c_cal: float = 0.9           # exponential rate in eta * exp(-c N)
    C_w: float = 10.0            # nodal projection diameter
    C_g: float = 50.0            # max|g'| + max|g''|
    C_tau: float = 10.0          # half-width of I
    C_loc: float = 1.0           # location window of the nodal line
    C_bv: float = 2.0            # mode boundary values
    C_decay: float = 2.0         # interior mode decay
    C_F: float = 50.0            # forcing bound
    Lambda_slope: float = 2.0    # |w1'| >= Lambda_slope / N near N/2
    C_rot: float = 2.0           # rotation angle of the boundary frame
    C_floor: float = 1.0         # resolution floor, multiplies h^2
    C_x0_coarse: float = 1.0     # coarse x0 window
    C_x0_flat: float = 1.0       # sharper flat-frame x0 window
    angle_tol_flat: float = 0.02
    angle_tol_curved: float = 0.05
    bracket_allowance: float = 3.0  # multiple of the rectangle discretization error
    eta_max: float = 0.05        # largest eta the constants were measured on
    version: int = CONSTANTS_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def floor(self, h: float) -> float:
        """Resolution floor added to bounds that the grid cannot resolve below."""
        return self.C_floor * h * h


def load_constants(path: Optional[Union[str, Path]] = None) -> CalibratedConstants:
    """
    Load constants from a JSON file.

    Args:
        path: File path, defaults to core.config.CONSTANTS_FILE

    Returns:
        CalibratedConstants; defaults are used when the file does not exist
    """
    path = Path(path or config.CONSTANTS_FILE)
    if not path.exists():
        logger.warning(f"Constants file {path} not found, using built-in defaults")
        return CalibratedConstants()

    try:
        raw = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigError('constants', f"Constants file {path} is not valid JSON: {e}")

    known = {f.name for f in fields(CalibratedConstants)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(unknown[0], f"Unknown constant in {path}: {unknown[0]}")
    if int(raw.get('version', CONSTANTS_VERSION)) != CONSTANTS_VERSION:
        raise ConfigError('version', f"Constants file {path} has version {raw.get('version')}, "
                                     f"expected {CONSTANTS_VERSION}")

    try:
        values = {k: (int(v) if k == 'version' else float(v)) for k, v in raw.items()}
    except (TypeError, ValueError) as e:
        raise ConfigError('constants', f"Non-numeric constant in {path}: {e}")

    constants = CalibratedConstants(**values)
    logger.debug(f"Loaded constants from {path}: {constants}")
    return constants


def save_constants(constants: CalibratedConstants, path: Union[str, Path]) -> None:
    path = Path(path)
    path.write_text(json.dumps(constants.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    logger.info(f"Wrote constants to {path}")
