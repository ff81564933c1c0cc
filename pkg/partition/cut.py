"""Cutting a domain along the nodal line of its second eigenfunction."""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from core.errors import NonGraphCurve
from geometry.curves import BoundaryCurve, CurveKind
from geometry.domain import DomainSpec
from nodal.curve import NodalCurve

logger = logging.getLogger(__name__)

FIT_HARMONICS = 7
FIT_OMEGA = np.pi
FIT_TOL = 1e-8
X_PADDING = 0.5


def _design(y: np.ndarray, harmonics: int = FIT_HARMONICS, omega: float = FIT_OMEGA) -> np.ndarray:
    columns = [np.ones_like(y)]
    for j in range(1, harmonics + 1):
        columns += [np.cos(j * omega * y), np.sin(j * omega * y)]
    return np.column_stack(columns)


def fit_nodal_curve(curve: NodalCurve, nominal: float) -> Tuple[BoundaryCurve, float]:
    """
    Least-squares fit of x = g(y) in the trig_series family, harmonics j = 0..7.

    Returns:
        (side curve with the given nominal on the curve's y-span, max fit error at the samples)

    Raises:
        NonGraphCurve: samples not strictly increasing in y
    """
    ys, gs = np.asarray(curve.ys, dtype=float), np.asarray(curve.gs, dtype=float)
    if ys.size < 2 * FIT_HARMONICS + 2 or np.any(np.diff(ys) <= 0):
        raise NonGraphCurve("nodal curve samples are not a graph over y", samples=int(ys.size))

    A = _design(ys)
    coefficients, *_ = np.linalg.lstsq(A, gs, rcond=None)
    error = float(np.max(np.abs(A @ coefficients - gs)))
    trig = [float(coefficients[0]), FIT_OMEGA] + [float(c) for c in coefficients[1:]]
    side = BoundaryCurve(CurveKind.TRIG_SERIES, tuple(trig), nominal=nominal,
                         interval=(float(ys[0]), float(ys[-1])))
    if error >= FIT_TOL:
        logger.warning(f"Nodal curve fit error {error:.3e} is above {FIT_TOL:.0e}")
    else:
        logger.debug(f"Nodal curve fit error {error:.3e}")
    return side, error


def _restricted(curve: BoundaryCurve, shift: float, length: float) -> BoundaryCurve:
    return curve.translated(shift, interval=(-X_PADDING, length + X_PADDING))


def cut_along_nodal(spec: DomainSpec, curve: NodalCurve) -> Tuple[DomainSpec, DomainSpec]:
    """
    The two nodal domains as DomainSpecs.

    The left child keeps the left side and gets g as its right side; the right
    child gets g as its left side and is translated by the left child's width so
    that its nominal rectangle starts at 0. Widths are the mean of g and
    N − mean g; no rescaling in x.

    Raises:
        NonGraphCurve: the curve is not a graph over y
    """
    width = curve.mean_x
    if not 0.0 < width < spec.N:
        raise NonGraphCurve(f"nodal curve at mean x={width:.6g} does not split [0, {spec.N}]")
    cut, error = fit_nodal_curve(curve, nominal=width)
    rest = spec.N - width

    left = DomainSpec.from_curves(
        width, spec.eta, spec.delta,
        left=spec.left,
        right=cut,
        bottom=_restricted(spec.bottom, 0.0, width),
        top=_restricted(spec.top, 0.0, width),
        c_tilde=spec.c_tilde,
    )
    right = DomainSpec.from_curves(
        rest, spec.eta, spec.delta,
        left=cut.offset(-width),
        right=spec.right.offset(-width),
        bottom=_restricted(spec.bottom, width, rest),
        top=_restricted(spec.top, width, rest),
        c_tilde=spec.c_tilde,
    )
    logger.info(f"Cut N={spec.N:g} at x={width:.10g}: widths {width:.6g} + {rest:.6g}, "
                f"cut amplitude {cut.amplitude:.3e}, fit error {error:.1e}")
    return left, right
