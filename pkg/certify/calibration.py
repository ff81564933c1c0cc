"""Calibration sweep: measure the ratios behind every named constant and freeze them with a safety margin."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from adiabatic.duhamel import duhamel_data
from adiabatic.forcing import forcing_bound
from adiabatic.modes import decompose
from adiabatic.zeros import min_slope, mode_zero
from certify.intervals import compute_intervals
from certify.lambdas import boundary_frames
from certify.theorem import DECAY_MODES, regime_scale
from core.constants import CalibratedConstants
from core.errors import NodalRectError
from discretize.mesh import Resolution
from eigensolve.solver import pair, solve_domain
from geometry.domain import DomainSpec, domain_from_mapping
from geometry.frame import identity_frame
from nodal.curve import extract_nodal, graph_derivatives

logger = logging.getLogger(__name__)

CALIBRATION_N = (6.0, 9.0, 12.0)
FLAT_ETAS = (0.01, 0.05)
CURVED_DELTAS = (0.05, 0.15)
SAFETY = 3.0
# constants never drop below this, so a measured zero still leaves room for round-off
MIN_CONSTANT = 0.1
FORCING_MODES = 4

# measured ratio -> constant it calibrates; Lambda_slope is a lower bound and handled apart
CALIBRATED = ('C_w', 'C_g', 'C_tau', 'C_loc', 'C_bv', 'C_decay', 'C_F', 'C_rot', 'C_x0_coarse', 'C_x0_flat')


def calibration_specs(ns: Sequence[float] = CALIBRATION_N) -> List[DomainSpec]:
    """Flat side bumps σ_L = −(η/π²) sin(πy) and curved top/bottom ±(δ/N³)cos x, small and large, for every N."""
    specs = []
    for N in ns:
        for eta in FLAT_ETAS:
            specs.append(domain_from_mapping({
                'N': str(N), 'ETA': str(eta), 'DELTA': '0',
                'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi**2',
            }))
        for delta in CURVED_DELTAS:
            specs.append(domain_from_mapping({
                'N': str(N), 'ETA': '0', 'DELTA': str(delta),
                'BOTTOM_FAMILY': 'trig_series', 'BOTTOM_COEFFICIENTS': '0, 1, scale, 0',
                'TOP_FAMILY': 'trig_series', 'TOP_COEFFICIENTS': '1, 1, -scale, 0',
            }))
    return specs


@dataclass
class Measurement:
    """Ratios measured on one spec; a missing entry means the quantity was unavailable."""

    N: float
    eta: float
    delta: float
    ratios: Dict[str, float] = field(default_factory=dict)
    slope_floor: Optional[float] = None
    errors: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'N': self.N, 'eta': self.eta, 'delta': self.delta, 'ratios': self.ratios,
                'slope_floor': self.slope_floor, 'errors': self.errors}


def _ratio(measured: float, reference: float) -> Optional[float]:
    if reference <= 0 or not np.isfinite(measured):
        return None
    return float(measured / reference)


def measure(spec: DomainSpec, resolution: Optional[Resolution] = None,
            base: Optional[CalibratedConstants] = None) -> Measurement:
    """Solve ``spec`` and divide each measured quantity by the shape of its bound."""
    base = base or CalibratedConstants()
    N, eta, delta = spec.N, spec.eta, spec.delta
    result = Measurement(N=N, eta=eta, delta=delta)
    ratios = result.ratios
    scale = regime_scale(spec, base)

    try:
        sol = pair(solve_domain(spec, resolution, k=2), 2)
        curve = graph_derivatives(extract_nodal(sol), sol)
        profiles, residual = decompose(sol)
    except NodalRectError as e:
        logger.error(f"Calibration point N={N} eta={eta} delta={delta} failed: {e.message}")
        result.errors.append(e.code)
        return result

    ratios['C_w'] = _ratio(curve.proj_diameter, scale)
    ratios['C_g'] = _ratio(curve.max_abs('g1') + curve.max_abs('g2'), scale)
    lo, hi = curve.x_range
    ratios['C_loc'] = _ratio(max(abs(lo - N / 2), abs(hi - N / 2)), N * (eta + delta / N))

    boundary = max(abs(p.boundary_values[0]) + abs(p.boundary_values[1]) for p in profiles[:DECAY_MODES])
    ratios['C_bv'] = _ratio(boundary, eta + spec.scale)

    decay = []
    for profile in profiles[1:DECAY_MODES]:
        mu_k = np.sqrt(max(np.pi ** 2 * profile.k ** 2 - sol.mu, 0.0))
        inside = (profile.xs >= 1.0) & (profile.xs <= N - 1.0)
        distance = np.minimum(profile.xs[inside], N - profile.xs[inside])
        shape = eta * np.exp(-base.c_cal * mu_k * distance) + spec.scale / profile.k
        if np.all(shape > 0):
            decay.append(float(np.max(np.abs(profile.wk[inside]) / shape)))
    ratios['C_decay'] = max(decay) if decay else None

    frame = identity_frame(spec)
    forcing = []
    for profile in profiles[:FORCING_MODES]:
        try:
            data = duhamel_data(sol, profile)
        except NodalRectError as e:
            result.errors.append(f'duhamel_{profile.k}:{e.code}')
            continue
        shape = forcing_bound(frame, profile.k, profile.xs, data.x_star)
        if np.max(shape) > 0:
            forcing.append(float(np.max(np.abs(data.Fk_samples)) / np.max(shape)))
    ratios['C_F'] = max(forcing) if forcing else None

    try:
        x0, _ = mode_zero(profiles[0], N, base)
        ratios['C_x0_coarse'] = _ratio(abs(x0 - N / 2), N * (eta + delta))
        ratios['C_x0_flat'] = _ratio(abs(x0 - N / 2), N * (eta + delta / N))
        result.slope_floor = float(min_slope(profiles[0], N) * N)
        intervals = compute_intervals(profiles, residual, spec, base)
        ratios['C_tau'] = _ratio(intervals.tau, scale)
    except NodalRectError as e:
        result.errors.append(e.code)

    if not spec.is_flat:
        try:
            angles = [abs(frame.angle) for frame in boundary_frames(spec, curve)]
            ratios['C_rot'] = _ratio(max(angles), spec.scale)
        except NodalRectError as e:
            result.errors.append(e.code)

    logger.info(f"Calibration point N={N:g} eta={eta:g} delta={delta:g}: "
                + ', '.join(f'{k}={v:.3g}' for k, v in ratios.items() if v is not None))
    return result


def calibrate(measurements: Sequence[Measurement], base: Optional[CalibratedConstants] = None,
              safety: float = SAFETY) -> CalibratedConstants:
    """
    Constants = safety × the largest measured ratio (at least MIN_CONSTANT).

    Λ_slope takes the smallest measured N·inf|w₁′| divided by ``safety``.
    ``eta_max`` records the largest η measured; certificates beyond it are flagged.
    Constants with no measurement keep their value in ``base``.
    """
    base = base or CalibratedConstants()
    updates = {}
    for name in CALIBRATED:
        values = [m.ratios[name] for m in measurements if m.ratios.get(name) is not None]
        if values:
            updates[name] = max(safety * max(values), MIN_CONSTANT)
        else:
            logger.warning(f"No measurement for {name}; keeping {getattr(base, name)}")
    floors = [m.slope_floor for m in measurements if m.slope_floor is not None]
    if floors:
        updates['Lambda_slope'] = min(floors) / safety
    if measurements:
        updates['eta_max'] = max(m.eta for m in measurements)
    constants = replace(base, **updates)
    logger.info(f"Calibrated constants: {constants}")
    return constants
