"""The zero x₀ of the first mode and the windows it is expected in."""

from __future__ import annotations

import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from adiabatic.modes import ModeProfile
from core.constants import CalibratedConstants
from core.errors import InvalidParameter, MultipleRoots, NoRoot
from geometry.domain import DomainSpec

logger = logging.getLogger(__name__)

NEWTON_STEPS = 3


def slope_floor_window(N: float) -> Tuple[float, float]:
    """Where |w₁′| ≥ Λ_slope/N is asserted: [3N/8, 5N/8]."""
    return 3 * N / 8, 5 * N / 8


def mode_zero(profile: ModeProfile, N: float, constants: Optional[CalibratedConstants] = None) -> Tuple[float, float]:
    """
    Unique zero of w₁ in [N/4, 3N/4] and the slope there.

    The sign change is bracketed on the samples, located by brentq and polished
    by Newton steps on the spline. A slope below Λ_slope/N inside
    [3N/8, 5N/8] is logged as a warning.

    Raises:
        NoRoot: no sign change in [N/4, 3N/4]
        MultipleRoots: more than one sign change
    """
    if profile.k != 1:
        raise InvalidParameter(f"mode_zero needs the k=1 profile, got k={profile.k}", parameter='k')
    constants = constants or CalibratedConstants()
    lo, hi = N / 4, 3 * N / 4
    inside = (profile.xs >= lo) & (profile.xs <= hi)
    xs = profile.xs[inside]
    ws = profile.wk[inside]
    signs = np.sign(ws)
    changes = np.flatnonzero(signs[:-1] * signs[1:] <= 0)
    # a sample that is exactly zero shows up in two adjacent pairs
    changes = changes[np.concatenate(([True], np.diff(changes) > 1))] if changes.size else changes
    if changes.size == 0:
        raise NoRoot(f"w1 has no sign change in [{lo:g}, {hi:g}]", N=N)
    if changes.size > 1:
        raise MultipleRoots(f"w1 changes sign {changes.size} times in [{lo:g}, {hi:g}]",
                            N=N, locations=[float(xs[i]) for i in changes])

    i = int(changes[0])
    a, b = float(xs[i]), float(xs[i + 1])
    if ws[i] == 0:
        x0 = a
    elif ws[i + 1] == 0:
        x0 = b
    else:
        x0 = brentq(lambda x: profile(x), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(NEWTON_STEPS):
        slope = profile(x0, 1)
        if slope == 0:
            break
        step = profile(x0) / slope
        if not a <= x0 - step <= b:
            break
        x0 -= step
    slope = float(profile(x0, 1))

    floor_lo, floor_hi = slope_floor_window(N)
    floor = min_slope(profile, N)
    if floor < constants.Lambda_slope / N:
        logger.warning(f"|w1'| drops to {floor:.3e} < Lambda_slope/N = {constants.Lambda_slope / N:.3e} "
                       f"on [{floor_lo:g}, {floor_hi:g}]")
    logger.info(f"Mode zero x0={x0:.12g}, slope={slope:.6g}")
    return float(x0), slope


def min_slope(profile: ModeProfile, N: float) -> float:
    """inf |w₁′| over the slope-floor window."""
    window = np.linspace(*slope_floor_window(N), 257)
    return float(np.min(np.abs(profile(window, 1))))


def x0_windows(spec: DomainSpec, x0: float, constants: Optional[CalibratedConstants] = None) -> Dict[str, dict]:
    """
    Both location windows for x₀.

    ``coarse``: N/2 ± C_x0_coarse·N(η + δ); ``flat_frame``: N/2 ± C_x0_flat·N(η + δ/N).
    """
    constants = constants or CalibratedConstants()
    N = spec.N
    windows = {
        'coarse': constants.C_x0_coarse * N * (spec.eta + spec.delta),
        'flat_frame': constants.C_x0_flat * N * (spec.eta + spec.delta / N),
    }
    result = {}
    for name, half in windows.items():
        result[name] = {
            'lo': N / 2 - half, 'hi': N / 2 + half, 'half_width': half,
            'offset': abs(x0 - N / 2), 'contains': bool(abs(x0 - N / 2) <= half + 1e-9),
        }
    return result
