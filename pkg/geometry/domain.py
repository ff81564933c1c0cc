"""The curvilinear-rectangle domain class, its validation and pointwise geometry."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from scipy.optimize import brentq

from core.errors import ConfigError, InvalidParameter, OutOfRange, OutsideDomain
from geometry.curves import BoundaryCurve, CurveKind, check_evaluable
from utils.expressions import evaluate_list, evaluate_number

logger = logging.getLogger(__name__)

SIDE_INTERVAL = (-0.5, 1.5)
VALIDATION_SAMPLES = 1001
VALIDATION_TOL = 1e-12
POINT_TOL = 1e-12


class Side(str, Enum):
    L = 'L'
    R = 'R'
    B = 'B'
    T = 'T'


@dataclass(frozen=True)
class DomainSpec:
    """
    Ω = {σ_B(x) ≤ y ≤ σ_T(x), σ_L(y) ≤ x ≤ σ_R(y)}, a perturbation of [0,N]×[0,1].

    Construction does not validate; ``check_parameters`` and ``validate_domain``
    do, so that degenerate specs can still reach the mesher and fail there.
    """

    N: float
    eta: float
    delta: float
    left: BoundaryCurve
    right: BoundaryCurve
    bottom: BoundaryCurve
    top: BoundaryCurve
    c_tilde: Tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)

    @classmethod
    def rectangle(cls, N: float, eta: float = 0.0, delta: float = 0.0) -> 'DomainSpec':
        return cls.from_curves(N, eta, delta)

    @classmethod
    def from_curves(
        cls,
        N: float,
        eta: float,
        delta: float,
        left: Optional[BoundaryCurve] = None,
        right: Optional[BoundaryCurve] = None,
        bottom: Optional[BoundaryCurve] = None,
        top: Optional[BoundaryCurve] = None,
        c_tilde: Tuple[float, ...] = (1.0,) * 5,
    ) -> 'DomainSpec':
        """Fill missing sides with the nominal rectangle's straight edges."""
        x_interval = (-0.5, N + 0.5)
        return cls(
            N=float(N),
            eta=float(eta),
            delta=float(delta),
            left=left or BoundaryCurve.constant(0.0, SIDE_INTERVAL),
            right=right or BoundaryCurve.constant(float(N), SIDE_INTERVAL),
            bottom=bottom or BoundaryCurve.constant(0.0, x_interval),
            top=top or BoundaryCurve.constant(1.0, x_interval),
            c_tilde=tuple(float(c) for c in c_tilde),
        )

    @property
    def scale(self) -> float:
        """δ/N³, the size of the top and bottom perturbations."""
        return self.delta / self.N ** 3

    def curve(self, side: Union[Side, str]) -> BoundaryCurve:
        return {Side.L: self.left, Side.R: self.right, Side.B: self.bottom, Side.T: self.top}[Side(side)]

    def height(self, x, order: int = 0):
        """h(x) = σ_T(x) − σ_B(x) and its derivatives."""
        return self.top(x, order) - self.bottom(x, order)

    @property
    def is_flat(self) -> bool:
        return self.bottom.amplitude == 0.0 and self.top.amplitude == 0.0

    def summary(self) -> Dict[str, object]:
        return {
            'N': self.N,
            'eta': self.eta,
            'delta': self.delta,
            'c_tilde': list(self.c_tilde),
            'left': self.left.to_dict(),
            'right': self.right.to_dict(),
            'bottom': self.bottom.to_dict(),
            'top': self.top.to_dict(),
        }


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    bound: float
    relation: str = '<='
    tol: float = VALIDATION_TOL

    @property
    def passed(self) -> bool:
        if self.relation == '<=':
            return self.measured <= self.bound + self.tol
        if self.relation == '==':
            return abs(self.measured - self.bound) <= self.tol
        return self.measured >= self.bound - self.tol

    def to_dict(self) -> Dict[str, object]:
        return {'name': self.name, 'measured': self.measured, 'bound': self.bound,
                'relation': self.relation, 'tol': self.tol, 'passed': self.passed}


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def get(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> Dict[str, object]:
        return {'passed': self.passed, 'failures': self.failures,
                'checks': [check.to_dict() for check in self.checks]}


def check_parameters(spec: DomainSpec) -> None:
    """Standing assumptions N ≥ 5, 0 ≤ δ < 1/5, η ≥ 0."""
    values = {'N': spec.N, 'eta': spec.eta, 'delta': spec.delta}
    for name, value in values.items():
        if not np.isfinite(value):
            raise InvalidParameter(f"{name} must be finite, got {value}", parameter=name)
    if spec.N < 5:
        raise InvalidParameter(f"N must be at least 5, got {spec.N}", parameter='N')
    if not 0.0 <= spec.delta < 0.2:
        raise InvalidParameter(f"delta must lie in [0, 1/5), got {spec.delta}", parameter='delta')
    if spec.eta < 0:
        raise InvalidParameter(f"eta must be non-negative, got {spec.eta}", parameter='eta')
    if len(spec.c_tilde) != 5 or any(c <= 0 for c in spec.c_tilde):
        raise InvalidParameter("c_tilde needs five positive constants", parameter='c_tilde')


def _corner(side_curve: BoundaryCurve, graph_curve: BoundaryCurve, y_bracket: Tuple[float, float]) -> Tuple[float, float]:
    """Intersection of x = side(y) with y = graph(x), solved in y."""
    def f(y):
        return y - graph_curve(side_curve(y))

    try:
        y = brentq(f, *y_bracket, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    except ValueError as e:
        raise InvalidParameter(f"boundary curves do not meet inside {y_bracket}: {e}")
    return float(side_curve(y)), float(y)


def corners(spec: DomainSpec) -> Dict[str, Tuple[float, float]]:
    """The four corner points, keyed 'BL', 'BR', 'TL', 'TR'."""
    return {
        'BL': _corner(spec.left, spec.bottom, (-0.5, 0.5)),
        'BR': _corner(spec.right, spec.bottom, (-0.5, 0.5)),
        'TL': _corner(spec.left, spec.top, (0.5, 1.5)),
        'TR': _corner(spec.right, spec.top, (0.5, 1.5)),
    }


def _side_span(spec: DomainSpec, side: Side, corner_points: Dict[str, Tuple[float, float]]) -> Tuple[float, float]:
    key = 'L' if side is Side.L else 'R'
    return corner_points['B' + key][1], corner_points['T' + key][1]


def validate_domain(spec: DomainSpec, samples: int = VALIDATION_SAMPLES) -> ValidationReport:
    """
    Measure every inequality on the boundary curves by dense sampling.

    Side curves are sampled over the part that actually bounds Ω (between their
    corners); top and bottom over their whole interval.

    Raises:
        InvalidParameter: standing assumptions violated
        NonEvaluableCurve: a derivative to order 5 is not finite
    """
    check_parameters(spec)
    for side in Side:
        check_evaluable(spec.curve(side), samples)

    report = ValidationReport()
    add = report.checks.append
    eta, s = spec.eta, spec.scale
    corner_points = corners(spec)

    for side, name in ((Side.L, 'left'), (Side.R, 'right')):
        curve = spec.curve(side)
        t = np.linspace(*_side_span(spec, side, corner_points), samples)
        offset = curve(t) - (0.0 if side is Side.L else spec.N)
        if side is Side.L:
            add(Check(f'{name}_range_upper', float(np.max(offset)), 0.0))
            add(Check(f'{name}_range_lower', float(np.max(-offset)), eta))
        else:
            add(Check(f'{name}_range_lower', float(np.max(-offset)), 0.0))
            add(Check(f'{name}_range_upper', float(np.max(offset)), eta))
        for order in (1, 2):
            add(Check(f'{name}_d{order}', float(np.max(np.abs(curve(t, order)))), eta))

    x = np.linspace(*spec.bottom.interval, samples)
    for side, name, nominal in ((Side.B, 'bottom', 0.0), (Side.T, 'top', 1.0)):
        curve = spec.curve(side)
        add(Check(f'{name}_range', float(np.max(np.abs(curve(x) - nominal))), s))
        for order in range(1, 6):
            bound = spec.c_tilde[order - 1] * s
            add(Check(f'{name}_d{order}', float(np.max(np.abs(curve(x, order)))), bound))

    x_core = np.linspace(0.0, spec.N, samples)
    h = spec.height(x_core)
    add(Check('height_min', float(np.min(h)), 1.0 - 2.0 * s, relation='>='))
    add(Check('height_max', float(np.max(h)), 1.0 + 2.0 * s))

    inner, outer = domain_boxes(spec)
    y_inner = np.linspace(inner[2], inner[3], samples)
    add(Check('contains_inner_box', float(max(np.max(spec.left(y_inner)) - inner[0],
                                              inner[1] - np.min(spec.right(y_inner)),
                                              np.max(spec.bottom(x_core)) - inner[2],
                                              inner[3] - np.min(spec.top(x_core)))), 0.0))
    x_all = np.linspace(outer[0], outer[1], samples)
    y_left = np.linspace(*_side_span(spec, Side.L, corner_points), samples)
    y_right = np.linspace(*_side_span(spec, Side.R, corner_points), samples)
    add(Check('inside_outer_box', float(max(outer[0] - np.min(spec.left(y_left)),
                                            np.max(spec.right(y_right)) - outer[1],
                                            outer[2] - np.min(spec.bottom(x_all)),
                                            np.max(spec.top(x_all)) - outer[3])), 0.0))

    if report.passed:
        logger.info(f"Domain N={spec.N} eta={spec.eta} delta={spec.delta} passed all {len(report.checks)} checks")
    else:
        logger.warning(f"Domain N={spec.N} eta={spec.eta} delta={spec.delta} failed: {', '.join(report.failures)}")
    return report


def domain_boxes(spec: DomainSpec) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Inner rectangle [0,N]×[s,1−s] and outer [−2η,N+2η]×[−s,1+s] as (x0, x1, y0, y1)."""
    s = spec.scale
    return (0.0, spec.N, s, 1.0 - s), (-2.0 * spec.eta, spec.N + 2.0 * spec.eta, -s, 1.0 + s)


def eigenvalue_bracket(spec: DomainSpec) -> Tuple[float, float]:
    """Closed-form bounds for μ₂ from domain monotonicity."""
    s = spec.scale
    lo = np.pi ** 2 * (1.0 + 2.0 * s) ** -2 + 4.0 * np.pi ** 2 * (spec.N + 4.0 * spec.eta) ** -2
    hi = np.pi ** 2 * (1.0 - 2.0 * s) ** -2 + 4.0 * np.pi ** 2 * spec.N ** -2
    return float(lo), float(hi)


def eval_boundary(spec: DomainSpec, side: Union[Side, str], t: float, order: int = 0) -> float:
    """Exact value of a boundary curve or one of its derivatives."""
    curve = spec.curve(side)
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= 5:
        raise OutOfRange(f"order must be an integer in 0..5, got {order}", order=order)
    if not curve.contains(t):
        raise OutOfRange(f"t={t} outside {Side(side).value} interval {curve.interval}", t=t)
    return float(curve(t, order))


def height_and_beta(spec: DomainSpec, x: float, y: float) -> Tuple[float, float]:
    """h(x) and β(x,y) = π(y − σ_B(x))/h(x)."""
    if not -POINT_TOL <= x <= spec.N + POINT_TOL:
        raise OutsideDomain(f"x={x} outside [0, {spec.N}]", x=x, y=y)
    bottom, top = float(spec.bottom(x)), float(spec.top(x))
    if not bottom - POINT_TOL <= y <= top + POINT_TOL:
        raise OutsideDomain(f"y={y} outside [{bottom}, {top}] at x={x}", x=x, y=y)
    h = top - bottom
    beta = float(np.clip(np.pi * (y - bottom) / h, 0.0, np.pi))
    return h, beta


# ----- config files -----

SIDE_KEYS = {'LEFT': Side.L, 'RIGHT': Side.R, 'BOTTOM': Side.B, 'TOP': Side.T}
DOMAIN_KEYS = {'N', 'ETA', 'DELTA', 'C_TILDE'} | {f'{p}_{q}' for p in SIDE_KEYS for q in ('FAMILY', 'COEFFICIENTS')}


def _required_number(values: Mapping[str, Optional[str]], key: str, names: Mapping[str, float]) -> float:
    raw = values.get(key)
    if raw is None or not str(raw).strip():
        raise ConfigError(key, f"missing required key {key}")
    try:
        return evaluate_number(str(raw), names)
    except ValueError as e:
        raise ConfigError(key, f"{key}: {e}")


def domain_from_mapping(values: Mapping[str, Optional[str]]) -> DomainSpec:
    """
    Build a DomainSpec from config key/value pairs.

    Numeric entries may be expressions in pi, N, eta, delta and scale (= delta/N^3).
    """
    N = _required_number(values, 'N', {})
    eta = _required_number(values, 'ETA', {'N': N})
    delta = _required_number(values, 'DELTA', {'N': N, 'eta': eta})
    names = {'N': N, 'eta': eta, 'delta': delta, 'scale': delta / N ** 3 if N else 0.0}

    c_tilde = (1.0,) * 5
    if values.get('C_TILDE'):
        try:
            c_tilde = tuple(evaluate_list(values['C_TILDE'], names))
        except ValueError as e:
            raise ConfigError('C_TILDE', f"C_TILDE: {e}")
        if len(c_tilde) != 5:
            raise ConfigError('C_TILDE', f"C_TILDE needs 5 values, got {len(c_tilde)}")

    curves = {}
    for prefix, side in SIDE_KEYS.items():
        family = values.get(f'{prefix}_FAMILY')
        coefficients = values.get(f'{prefix}_COEFFICIENTS')
        if family is None and coefficients is None:
            continue
        key = f'{prefix}_FAMILY'
        try:
            kind = CurveKind((family or 'constant').strip().lower())
        except ValueError:
            raise ConfigError(key, f"{key}: unknown family {family!r}")
        key = f'{prefix}_COEFFICIENTS'
        if not coefficients:
            raise ConfigError(key, f"missing {key} for family {kind.value}")
        try:
            parsed = evaluate_list(coefficients, names)
        except ValueError as e:
            raise ConfigError(key, f"{key}: {e}")
        nominal = {Side.L: 0.0, Side.R: N, Side.B: 0.0, Side.T: 1.0}[side]
        interval = SIDE_INTERVAL if side in (Side.L, Side.R) else (-0.5, N + 0.5)
        try:
            curves[side] = BoundaryCurve(kind, tuple(parsed), nominal=nominal, interval=interval)
        except Exception as e:
            raise ConfigError(key, f"{key}: {e}")

    return DomainSpec.from_curves(
        N, eta, delta,
        left=curves.get(Side.L), right=curves.get(Side.R),
        bottom=curves.get(Side.B), top=curves.get(Side.T),
        c_tilde=c_tilde,
    )


def load_domain(path: Union[str, Path]) -> DomainSpec:
    """Read a domain definition from a KEY=VALUE config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(None, f"config file not found: {path}")
    return domain_from_mapping(dotenv_values(path))
