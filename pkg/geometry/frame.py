"""Rotated frame aligned with the boundary tangent at the foot of a nodal point.

In frame coordinates the curve through the foot, ρ_B, satisfies
ρ_B(x̃₀) = ρ_B′(x̃₀) = 0 at the anchor x̃₀. Feet on the top curve are handled by
composing the rotation with the reflection y ↦ −y, so the foot's curve is always
the frame's bottom.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar, newton

from core.errors import DegenerateFoot, InvalidParameter
from geometry.curves import BoundaryCurve, SampledCurve
from geometry.domain import DomainSpec, Side

logger = logging.getLogger(__name__)

Curve = Union[BoundaryCurve, SampledCurve]
Point = Tuple[float, float]

FRAME_SAMPLES_PER_UNIT = 200


@dataclass(frozen=True)
class RotatedDomain:
    """
    Isometry F from frame coordinates p̃ to physical p:
    p = Qᵀ(p̃ − (x̄, d)) + pivot, with Q a rotation (times the reflection for top feet).
    """

    pivot: Point
    angle: float
    rhoB: Curve
    rhoT: Curve
    rhoL: Curve
    rhoR: Curve
    anchor: float
    foot: Point
    distance: float
    reflected: bool = False
    is_identity: bool = False

    @property
    def Q(self) -> np.ndarray:
        c, s = np.cos(self.angle), np.sin(self.angle)
        rotation = np.array([[c, -s], [s, c]])
        if self.reflected:
            return rotation @ np.diag([1.0, -1.0])
        return rotation

    @property
    def _frame_origin(self) -> np.ndarray:
        return np.array([self.pivot[0], self.distance])

    def to_physical(self, xt, yt):
        """F: frame coordinates -> physical coordinates."""
        if self.is_identity:
            return np.asarray(xt, dtype=float), np.asarray(yt, dtype=float)
        Q = self.Q
        dx = np.asarray(xt, dtype=float) - self._frame_origin[0]
        dy = np.asarray(yt, dtype=float) - self._frame_origin[1]
        x = Q[0, 0] * dx + Q[1, 0] * dy + self.pivot[0]
        y = Q[0, 1] * dx + Q[1, 1] * dy + self.pivot[1]
        return x, y

    def from_physical(self, x, y):
        """F⁻¹: physical coordinates -> frame coordinates."""
        if self.is_identity:
            return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        Q = self.Q
        dx = np.asarray(x, dtype=float) - self.pivot[0]
        dy = np.asarray(y, dtype=float) - self.pivot[1]
        xt = Q[0, 0] * dx + Q[0, 1] * dy + self._frame_origin[0]
        yt = Q[1, 0] * dx + Q[1, 1] * dy + self._frame_origin[1]
        return xt, yt

    def pull_gradient(self, vx, vy):
        """Physical gradient -> frame gradient (∇̃w = Q∇v)."""
        if self.is_identity:
            return vx, vy
        Q = self.Q
        return Q[0, 0] * vx + Q[0, 1] * vy, Q[1, 0] * vx + Q[1, 1] * vy

    def pull_hessian(self, vxx, vxy, vyy):
        """Physical Hessian -> frame Hessian (Q H Qᵀ)."""
        if self.is_identity:
            return vxx, vxy, vyy
        Q = self.Q
        a, b, c, d = Q[0, 0], Q[0, 1], Q[1, 0], Q[1, 1]
        wxx = a * a * vxx + 2 * a * b * vxy + b * b * vyy
        wxy = a * c * vxx + (a * d + b * c) * vxy + b * d * vyy
        wyy = c * c * vxx + 2 * c * d * vxy + d * d * vyy
        return wxx, wxy, wyy

    def height(self, x, order: int = 0):
        """h̃(x) = ρ_T(x) − ρ_B(x) and its derivatives."""
        return self.rhoT(x, order) - self.rhoB(x, order)

    def beta(self, x, y):
        return np.pi * (np.asarray(y) - self.rhoB(x)) / self.height(x)


def identity_frame(spec: DomainSpec) -> RotatedDomain:
    """The trivial frame: ρ-curves are the σ-curves and F is the identity."""
    return RotatedDomain(
        pivot=(0.0, 0.0), angle=0.0,
        rhoB=spec.bottom, rhoT=spec.top, rhoL=spec.left, rhoR=spec.right,
        anchor=float('nan'), foot=(float('nan'), float('nan')), distance=0.0,
        is_identity=True,
    )


def _foot_residual(curve: BoundaryCurve, point: Point):
    """Stationarity of |p − (x, σ(x))|² in x, with its derivative."""
    px, py = point

    def f(x):
        return (x - px) + (curve(x) - py) * curve(x, 1)

    def fprime(x):
        return 1.0 + curve(x, 1) ** 2 + (curve(x) - py) * curve(x, 2)

    return f, fprime


def polish_foot(curve: BoundaryCurve, point: Point, x_guess: float) -> Point:
    f, fprime = _foot_residual(curve, point)
    x = float(newton(f, x_guess, fprime=fprime, tol=1e-15, maxiter=50))
    return x, float(curve(x))


def boundary_foot(spec: DomainSpec, point: Point, side: Union[Side, str] = Side.B) -> Point:
    """Closest point to ``point`` on the bottom or top curve."""
    curve = spec.curve(side)
    px, py = point
    lo, hi = curve.interval
    result = minimize_scalar(
        lambda x: (x - px) ** 2 + (curve(x) - py) ** 2,
        bounds=(max(lo, px - 1.0), min(hi, px + 1.0)),
        method='bounded',
        options={'xatol': 1e-10},
    )
    return polish_foot(curve, point, float(result.x))


def _graph_image(frame_map, xs: np.ndarray, ys: np.ndarray, nominal: float, swap: bool) -> SampledCurve:
    """Spline of a mapped graph; ``swap`` for side curves given as x(y)."""
    xt, yt = frame_map(xs, ys)
    t, v = (yt, xt) if swap else (xt, yt)
    order = np.argsort(t)
    t, v = t[order], v[order]
    keep = np.concatenate(([True], np.diff(t) > 1e-9))
    return SampledCurve(t[keep], v[keep], nominal=nominal)


def rotated_frame(spec: DomainSpec, nodal_point: Point, boundary_foot_point: Point) -> RotatedDomain:
    """
    Build the frame rotating about ``nodal_point`` so the boundary tangent at the foot is horizontal.

    The foot is polished to the exact closest point on its curve before use.

    Raises:
        DegenerateFoot: the nodal point coincides with the foot
    """
    px, py = map(float, nodal_point)
    fx, fy = map(float, boundary_foot_point)
    on_bottom = abs(fy - float(spec.bottom(fx))) <= abs(fy - float(spec.top(fx)))
    foot_curve = spec.bottom if on_bottom else spec.top
    other_curve = spec.top if on_bottom else spec.bottom

    if np.hypot(px - fx, py - fy) < 1e-14:
        raise DegenerateFoot(f"nodal point {nodal_point} coincides with boundary foot", point=list(nodal_point))
    fx, fy = polish_foot(foot_curve, (px, py), fx)

    d = float(np.hypot(px - fx, py - fy))
    if d < 1e-14:
        raise DegenerateFoot(f"nodal point {nodal_point} lies on the boundary", point=list(nodal_point))
    n = np.array([px - fx, py - fy]) / d
    if not on_bottom:
        n = n * np.array([1.0, -1.0])
    if n[1] <= 0:
        raise InvalidParameter(f"foot {boundary_foot_point} is not below the nodal point in the boundary frame")
    angle = float(np.arctan2(n[0], n[1]))

    if on_bottom and angle == 0.0 and fy == 0.0:
        logger.debug("Boundary frame is the identity")
        return RotatedDomain(
            pivot=(px, py), angle=0.0, rhoB=spec.bottom, rhoT=spec.top, rhoL=spec.left, rhoR=spec.right,
            anchor=px, foot=(fx, fy), distance=d, is_identity=True,
        )

    partial = RotatedDomain(
        pivot=(px, py), angle=angle, rhoB=spec.bottom, rhoT=spec.top, rhoL=spec.left, rhoR=spec.right,
        anchor=px, foot=(fx, fy), distance=d, reflected=not on_bottom,
    )
    to_frame = partial.from_physical

    x_lo, x_hi = spec.bottom.interval
    xs = np.linspace(x_lo, x_hi, int(np.ceil((x_hi - x_lo) * FRAME_SAMPLES_PER_UNIT)) + 1)
    xs = np.unique(np.concatenate((xs, [fx])))
    y_lo, y_hi = spec.left.interval
    ys = np.linspace(y_lo, y_hi, int(np.ceil((y_hi - y_lo) * FRAME_SAMPLES_PER_UNIT)) + 1)

    rhoB = _graph_image(to_frame, xs, foot_curve(xs), 0.0, swap=False)
    rhoT = _graph_image(to_frame, xs, other_curve(xs), 1.0, swap=False)
    rhoL = _graph_image(to_frame, spec.left(ys), ys, 0.0, swap=True)
    rhoR = _graph_image(to_frame, spec.right(ys), ys, spec.N, swap=True)

    frame = RotatedDomain(
        pivot=(px, py), angle=angle, rhoB=rhoB, rhoT=rhoT, rhoL=rhoL, rhoR=rhoR,
        anchor=px, foot=(fx, fy), distance=d, reflected=not on_bottom,
    )
    logger.debug(f"Rotated frame at foot ({fx:.6f}, {fy:.3e}): angle={angle:.3e}, "
                 f"rhoB(anchor)={frame.rhoB(px):.2e}, rhoB'(anchor)={frame.rhoB(px, 1):.2e}")
    return frame
