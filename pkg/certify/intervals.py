"""The intervals Ĩ ⊇ I around the zero x₀ of the first mode.

Ĩ is the smallest interval around x₀ outside of which

    (A) sup_{S^c} |E| < ½ inf |w₁|/h̃   and   (B) sup_S |∂_y E| < 2 inf |w₁|/h̃,

and I = [x₀ − τ, x₀ + τ] with

    τ = sup_Ĩ h̃ / (2 inf_Ĩ |w₁′|) · max(4 sup_Ĩ |E|, sup_Ĩ |∂_y E|),

the suprema of E running over whole cross-sections.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from adiabatic.modes import SAMPLES_PER_UNIT, ModeProfile, ResidualField
from adiabatic.zeros import mode_zero
from core.constants import CalibratedConstants
from core.errors import NoValidInterval
from geometry.domain import DomainSpec

logger = logging.getLogger(__name__)

EDGE_MARGIN = 1.0
MIN_INTERVAL_POINTS = 9


@dataclass(frozen=True)
class IntervalData:
    x0: float
    slope: float
    threshold: float
    tilde: Tuple[float, float]
    I: Tuple[float, float]
    tau: float
    sup_complement_E: float
    sup_strip_Ey: float
    inf_outside_ratio: float

    @property
    def condition_A(self) -> bool:
        return self.sup_complement_E < 0.5 * self.inf_outside_ratio

    @property
    def condition_B(self) -> bool:
        return self.sup_strip_Ey < 2.0 * self.inf_outside_ratio

    def to_dict(self) -> dict:
        data = asdict(self)
        data['tilde'] = list(self.tilde)
        data['I'] = list(self.I)
        data['condition_A'] = self.condition_A
        data['condition_B'] = self.condition_B
        return data


def interval_points(lo: float, hi: float, extra: Sequence[float] = (), per_unit: int = SAMPLES_PER_UNIT) -> np.ndarray:
    """Dense abscissae on [lo, hi], endpoints and ``extra`` included."""
    n = max(MIN_INTERVAL_POINTS, int(np.ceil((hi - lo) * per_unit)) + 1)
    return np.unique(np.concatenate((np.linspace(lo, hi, n), np.asarray(extra, dtype=float))))


def _edge(ratio, threshold: float, inside: float, outside: float) -> float:
    """Where |w₁|/h̃ crosses the threshold between an inside and an outside sample."""
    if threshold <= 0:
        return inside
    return float(brentq(lambda x: ratio(x) - threshold, inside, outside, xtol=1e-14))


def compute_intervals(
    profiles: Sequence[ModeProfile],
    residual: ResidualField,
    spec: DomainSpec,
    constants: Optional[CalibratedConstants] = None,
) -> IntervalData:
    """
    Ĩ, I and τ from an identity-frame decomposition.

    The conditions are evaluated on x ∈ [1, N−1]: within one unit of the sides E
    is of order η while w₁ is small, so no interval could exclude them.

    Raises:
        NoValidInterval: the set where (A)–(B) fail reaches the edge of the range
    """
    w1 = profiles[0]
    N = spec.N
    frame = residual.frame
    x0, slope = mode_zero(w1, N, constants)

    lo = max(EDGE_MARGIN, residual.x_range[0])
    hi = min(N - EDGE_MARGIN, residual.x_range[1])
    sup_complement_E = residual.sup('E', 'complement', (lo, hi))
    sup_strip_Ey = residual.sup('y', 'strip', (lo, hi))
    threshold = max(2.0 * sup_complement_E, 0.5 * sup_strip_Ey)

    def ratio(x):
        return np.abs(w1(x)) / frame.height(x)

    xs = interval_points(lo, hi, [x0])
    r = ratio(xs)
    bad = r <= threshold
    i0 = int(np.argmin(np.abs(xs - x0)))
    bad[i0] = True
    left, right = int(np.flatnonzero(bad)[0]), int(np.flatnonzero(bad)[-1])
    if left == 0 or right == len(xs) - 1:
        raise NoValidInterval(
            f"|w1|/h stays below {threshold:.3e} up to the edge of [{lo:g}, {hi:g}]",
            threshold=threshold, sup_complement_E=sup_complement_E, sup_strip_Ey=sup_strip_Ey,
        )

    tilde_lo = min(x0, _edge(ratio, threshold, float(xs[left]), float(xs[left - 1])))
    tilde_hi = max(x0, _edge(ratio, threshold, float(xs[right]), float(xs[right + 1])))
    outside = np.concatenate((r[:left], r[right + 1:]))
    inf_outside = float(np.min(outside))

    on_tilde = interval_points(tilde_lo, tilde_hi, [x0])
    sup_h = float(np.max(frame.height(on_tilde)))
    inf_slope = float(np.min(np.abs(w1(on_tilde, 1))))
    if inf_slope == 0:
        raise NoValidInterval(f"w1' vanishes on [{tilde_lo:.6g}, {tilde_hi:.6g}]", x0=x0)
    sup_E = residual.sup_at('E', on_tilde)
    sup_Ey = residual.sup_at('y', on_tilde)
    tau = sup_h / (2.0 * inf_slope) * max(4.0 * sup_E, sup_Ey)

    data = IntervalData(
        x0=x0, slope=slope, threshold=threshold,
        tilde=(tilde_lo, tilde_hi), I=(x0 - tau, x0 + tau), tau=float(tau),
        sup_complement_E=sup_complement_E, sup_strip_Ey=sup_strip_Ey, inf_outside_ratio=inf_outside,
    )
    logger.info(f"Intervals: x0={x0:.10g}, tilde I=[{tilde_lo:.10g}, {tilde_hi:.10g}], tau={tau:.3e}")
    if not (data.condition_A and data.condition_B):
        logger.warning(f"Interval conditions fail: A={data.condition_A}, B={data.condition_B}")
    return data
