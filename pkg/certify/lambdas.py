"""Lower bounds Λ₁, Λ₂ for |∂ₓw| on the nodal line and their error terms.

    e₁ = sup_I |∂ₓẼ| + π sup_I |w₁| · sup_I h̃⁻²(|h̃′| + |ρ_B′ρ_T|)
    Λ₁ = ½ inf_I |w₁′|/h̃ − e₁
    e₂ = sup_{I×S^B} |∂_y∂ₓẼ| + π sup_I |w₁| · sup_I |h̃′|/h̃²
    Λ₂ = 2 inf_I |w₁′|/h̃ − e₂

Λ₁ bounds |∂ₓw| between the strips, Λ₂·y inside the bottom strip of a frame
whose bottom passes through the foot of the nodal point.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np

from adiabatic.modes import ModeProfile, ResidualField, decompose
from adiabatic.zeros import mode_zero
from certify.intervals import IntervalData, compute_intervals, interval_points
from core.errors import NodalRectError
from eigensolve.solver import EigenSolution
from geometry.domain import DomainSpec
from geometry.frame import RotatedDomain, boundary_foot, rotated_frame
from nodal.curve import NodalCurve

logger = logging.getLogger(__name__)

# nodal points used for the boundary frames, as a fraction of the height from each end
FRAME_POINT_DEPTH = 0.125


@dataclass(frozen=True)
class LambdaData:
    e1: float
    Lambda1: float
    e2: float
    Lambda2: float
    x0: float
    inf_slope_ratio: float
    sup_w1: float
    center_g1_bound: float
    strip_g1_rate: float
    frame: str = 'identity'

    def to_dict(self) -> dict:
        return asdict(self)


def _strip_rate(residual: ResidualField, xs: np.ndarray, region: str) -> float:
    """sup over I × strip of ½h̃⁻²(1+|ρ_B″|)|∂_yẼ| + ½|ρ_B″||∂_y²E| + |∂_y³E|."""
    frame = residual.frame
    X, Y = residual.region_points(xs, region)
    d = residual.derivatives(X, Y, order=3)
    h = frame.height(X)
    b2 = np.abs(frame.rhoB(X, 2))
    value = 0.5 * (1.0 + b2) * np.abs(d['y']) / h ** 2 + 0.5 * b2 * np.abs(d['yy']) + np.abs(d['yyy'])
    return float(np.max(value))


def compute_lambdas(
    profiles: Sequence[ModeProfile],
    residual: ResidualField,
    frame: RotatedDomain,
    spec: DomainSpec,
    intervals: Optional[IntervalData] = None,
) -> LambdaData:
    """
    e₁, Λ₁, e₂, Λ₂ in one frame.

    I keeps the half-width τ of ``intervals`` and is re-centred on the zero of
    the frame's own w₁ when the frame is rotated. ∂ₓβ̃ is taken in its displayed
    form −π(yh̃′ + ρ_B′ρ_T)/h̃², whose size enters e₁ through |h̃′| + |ρ_B′ρ_T|.
    In the identity frame the strip S^B stands for both strips.
    """
    intervals = intervals or compute_intervals(profiles, residual, spec)
    w1 = profiles[0]
    if frame.is_identity and residual.frame.is_identity:
        x0 = intervals.x0
    else:
        x0 = mode_zero(w1, spec.N)[0]
    tau = intervals.tau
    xs = interval_points(x0 - tau, x0 + tau, [x0])

    h = frame.height(xs)
    h1 = frame.height(xs, 1)
    b1 = frame.rhoB(xs, 1)
    top = frame.rhoT(xs)
    slope_ratio = float(np.min(np.abs(w1(xs, 1)) / h))
    sup_w1 = float(np.max(np.abs(w1(xs))))

    geometry_1 = float(np.max((np.abs(h1) + np.abs(b1 * top)) / h ** 2))
    geometry_2 = float(np.max(np.abs(h1) / h ** 2))
    strip = 'strip' if frame.is_identity else 'bottom'

    e1 = residual.sup_at('x', xs) + np.pi * sup_w1 * geometry_1
    Lambda1 = 0.5 * slope_ratio - e1
    e2 = residual.sup_at('xy', xs, strip) + np.pi * sup_w1 * geometry_2
    Lambda2 = 2.0 * slope_ratio - e2

    sup_Ey_center = residual.sup_at('y', xs)
    center = (np.pi * sup_w1 / float(np.min(h)) + sup_Ey_center) / Lambda1 if Lambda1 > 0 else float('inf')
    rate = _strip_rate(residual, xs, strip) / Lambda2 if Lambda2 > 0 else float('inf')

    data = LambdaData(
        e1=float(e1), Lambda1=float(Lambda1), e2=float(e2), Lambda2=float(Lambda2), x0=float(x0),
        inf_slope_ratio=slope_ratio, sup_w1=sup_w1, center_g1_bound=float(center), strip_g1_rate=float(rate),
        frame='identity' if frame.is_identity else ('top' if frame.reflected else 'bottom'),
    )
    logger.info(f"Lambdas ({data.frame} frame): Lambda1={Lambda1:.6g} (e1={e1:.3e}), "
                f"Lambda2={Lambda2:.6g} (e2={e2:.3e})")
    return data


def boundary_frames(spec: DomainSpec, curve: NodalCurve) -> List[RotatedDomain]:
    """Rotated frames at nodal points an eighth of the height above the bottom and below the top."""
    return [_boundary_frame(spec, curve, side) for side in ('B', 'T')]


def _boundary_frame(spec: DomainSpec, curve: NodalCurve, side: str) -> RotatedDomain:
    fraction = FRAME_POINT_DEPTH if side == 'B' else 1.0 - FRAME_POINT_DEPTH
    y = curve.ys[0] + fraction * (curve.ys[-1] - curve.ys[0])
    point = (float(np.interp(y, curve.ys, curve.gs)), float(y))
    return rotated_frame(spec, point, boundary_foot(spec, point, side))


def frame_lambdas(
    sol: EigenSolution,
    spec: DomainSpec,
    curve: NodalCurve,
    intervals: IntervalData,
    kmax: Optional[int] = None,
) -> List[LambdaData]:
    """Λ quantities in the two boundary frames; a frame that cannot be built or decomposed is skipped."""
    results = []
    for side in ('B', 'T'):
        try:
            frame = _boundary_frame(spec, curve, side)
            profiles, residual = decompose(sol, frame, kmax)
            results.append(compute_lambdas(profiles, residual, frame, spec, intervals))
        except NodalRectError as e:
            logger.warning(f"Boundary frame on side {side} skipped: {e.message}")
    return results
