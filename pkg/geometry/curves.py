"""Boundary curves of the curvilinear rectangle.

Curves are graphs: the sides are x = σ(y), bottom and top are y = σ(x). Closed-form
families give exact derivatives to order 5; ``SampledCurve`` covers curves that
only exist as samples (images under the rotated frame).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import make_interp_spline

from core.errors import NonEvaluableCurve, OutOfRange

logger = logging.getLogger(__name__)

MAX_ORDER = 5
AMPLITUDE_SAMPLES = 4001


class CurveKind(str, Enum):
    CONSTANT = 'constant'
    POLYNOMIAL = 'polynomial'
    TRIG_SERIES = 'trig_series'


class _Curve:
    """Shared behaviour: call syntax, interval checks and the sampled amplitude."""

    interval: Tuple[float, float]
    nominal: float

    def evaluate(self, t, order: int = 0):
        raise NotImplementedError

    def __call__(self, t, order: int = 0):
        return self.evaluate(t, order)

    def contains(self, t: float, tol: float = 1e-12) -> bool:
        lo, hi = self.interval
        return lo - tol <= t <= hi + tol

    def check_order(self, order: int) -> None:
        if not 0 <= order <= MAX_ORDER:
            raise OutOfRange(f"Derivative order {order} outside 0..{MAX_ORDER}", order=order)

    def dense_grid(self, n: int = AMPLITUDE_SAMPLES, span: Tuple[float, float] = None) -> np.ndarray:
        lo, hi = span or self.interval
        return np.linspace(lo, hi, n)

    def sup(self, order: int = 0, span: Tuple[float, float] = None, n: int = AMPLITUDE_SAMPLES) -> float:
        """Sup of |curve^(order) - nominal·[order == 0]| over a dense sample."""
        t = self.dense_grid(n, span)
        values = np.asarray(self.evaluate(t, order), dtype=float)
        if order == 0:
            values = values - self.nominal
        return float(np.max(np.abs(values)))

    @cached_property
    def amplitude(self) -> float:
        return self.sup(0)


@dataclass(frozen=True, eq=False)
class BoundaryCurve(_Curve):
    """
    Closed-form boundary curve.

    ``trig_series`` coefficients are ``[c0, omega, a1, b1, a2, b2, ...]`` meaning
    ``c0 + sum_j a_j cos(j omega s) + b_j sin(j omega s)``. Polynomial coefficients
    are in increasing degree. The curve is evaluated at ``s = t + shift``.
    """

    kind: CurveKind
    coefficients: Tuple[float, ...]
    nominal: float
    interval: Tuple[float, float]
    shift: float = 0.0
    _poly: Polynomial = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        kind = CurveKind(self.kind)
        coefficients = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'interval', (float(self.interval[0]), float(self.interval[1])))

        if not coefficients or not np.all(np.isfinite(coefficients)):
            raise NonEvaluableCurve(f"{kind.value} curve needs finite coefficients, got {coefficients}")
        if kind is CurveKind.CONSTANT and len(coefficients) != 1:
            raise NonEvaluableCurve(f"constant curve takes one coefficient, got {len(coefficients)}")
        if kind is CurveKind.TRIG_SERIES and (len(coefficients) < 2 or len(coefficients) % 2):
            raise NonEvaluableCurve("trig_series coefficients must be [c0, omega, a1, b1, ...]")
        if kind is CurveKind.POLYNOMIAL:
            object.__setattr__(self, '_poly', Polynomial(coefficients))

    @classmethod
    def constant(cls, value: float, interval: Tuple[float, float]) -> 'BoundaryCurve':
        return cls(CurveKind.CONSTANT, (value,), nominal=value, interval=interval)

    def evaluate(self, t, order: int = 0):
        self.check_order(order)
        s = np.asarray(t, dtype=float) + self.shift

        if self.kind is CurveKind.CONSTANT:
            value = self.coefficients[0] if order == 0 else 0.0
            result = np.full_like(s, value)
        elif self.kind is CurveKind.POLYNOMIAL:
            poly = self._poly.deriv(order) if order else self._poly
            result = poly(s)
        else:
            c0, omega = self.coefficients[:2]
            result = np.full_like(s, c0 if order == 0 else 0.0)
            pairs = self.coefficients[2:]
            for j in range(len(pairs) // 2):
                a, b = pairs[2 * j], pairs[2 * j + 1]
                freq = (j + 1) * omega
                phase = freq * s + order * np.pi / 2
                result = result + freq ** order * (a * np.cos(phase) + b * np.sin(phase))

        return float(result) if np.ndim(result) == 0 else result

    def translated(self, shift: float, interval: Tuple[float, float] = None) -> 'BoundaryCurve':
        """Curve t -> σ(t + shift) on a new parameter interval."""
        new_interval = interval or (self.interval[0] - shift, self.interval[1] - shift)
        return replace(self, shift=self.shift + shift, interval=new_interval)

    def offset(self, value: float) -> 'BoundaryCurve':
        """Curve t -> σ(t) + value, nominal moved with it."""
        coefficients = list(self.coefficients)
        coefficients[0] += value
        return replace(self, coefficients=tuple(coefficients), nominal=self.nominal + value)

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'coefficients': list(self.coefficients),
            'nominal': self.nominal,
            'interval': list(self.interval),
            'shift': self.shift,
            'amplitude': self.amplitude,
        }


class SampledCurve(_Curve):
    """Graph known only through samples, held as a quintic interpolating spline."""

    def __init__(self, t: Sequence[float], values: Sequence[float], nominal: float):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.size < 6 or np.any(np.diff(t) <= 0):
            raise NonEvaluableCurve("sampled curve needs at least 6 strictly increasing abscissae")
        self.nominal = float(nominal)
        self.interval = (float(t[0]), float(t[-1]))
        self._spline = make_interp_spline(t, values, k=5)
        self._derivatives = [self._spline] + [self._spline.derivative(m) for m in range(1, MAX_ORDER + 1)]

    def evaluate(self, t, order: int = 0):
        self.check_order(order)
        result = self._derivatives[order](np.asarray(t, dtype=float))
        return float(result) if np.ndim(result) == 0 else result

    def to_dict(self) -> dict:
        return {'kind': 'sampled', 'nominal': self.nominal, 'interval': list(self.interval),
                'amplitude': self.amplitude}


def check_evaluable(curve: _Curve, n: int = 1001) -> None:
    """Raise NonEvaluableCurve unless every derivative to order 5 is finite on the interval."""
    t = curve.dense_grid(n)
    for order in range(MAX_ORDER + 1):
        values = np.asarray(curve.evaluate(t, order), dtype=float)
        if not np.all(np.isfinite(values)):
            raise NonEvaluableCurve(f"derivative of order {order} is not finite on {curve.interval}",
                                    order=order)
