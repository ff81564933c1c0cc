"""Pass/fail verdicts for the nodal-line estimates, gathered in a CertificateReport."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from adiabatic.duhamel import QUAD_EPSABS, DuhamelData, transverse_eigenvalue
from adiabatic.modes import STRIP_WIDTH, ModeProfile, ResidualField
from adiabatic.zeros import x0_windows
from certify.intervals import IntervalData, interval_points
from certify.lambdas import LambdaData
from core.constants import CalibratedConstants
from eigensolve.solver import EigenSolution
from geometry.domain import Check, DomainSpec, eigenvalue_bracket, validate_domain
from nodal.curve import NodalCurve, boundary_angles

logger = logging.getLogger(__name__)

DECAY_MODES = 8


@dataclass
class CertificateReport:
    """
    Everything measured for one eigenpair together with the verdicts.

    Each verdict is a ``Check`` holding measured value, bound and tolerance, so
    ``passed`` can be recomputed from the stored numbers alone.
    """

    spec: Dict[str, object]
    strips: Dict[str, object] = field(default_factory=lambda: {
        'width': STRIP_WIDTH,
        'bottom': '[rho_B, rho_B + 1/4]',
        'top': '[rho_T - 1/4, rho_T]',
    })
    mu: Optional[float] = None
    x0: Optional[float] = None
    interval_tilde: Optional[Tuple[float, float]] = None
    interval_I: Optional[Tuple[float, float]] = None
    tau: Optional[float] = None
    e1: Optional[float] = None
    Lambda1: Optional[float] = None
    e2: Optional[float] = None
    Lambda2: Optional[float] = None
    bracket: Optional[Tuple[float, float, float, bool]] = None
    windows: Dict[str, dict] = field(default_factory=dict)
    frames: List[dict] = field(default_factory=list)
    curve: Optional[dict] = None
    checks: List[Check] = field(default_factory=list)
    hypotheses: List[str] = field(default_factory=list)
    hadamard: List[dict] = field(default_factory=list)
    errors: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def get(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(check.name == name for check in self.checks)

    @property
    def diam_check(self) -> Check:
        return self.get('diam')

    @property
    def slope_check(self) -> Check:
        return self.get('slope')

    @property
    def curvature_check(self) -> Check:
        return self.get('curvature')

    @property
    def angle_check(self) -> Tuple[Check, Check]:
        return self.get('angle_bottom'), self.get('angle_top')

    def record_failure(self, step: str, error: dict) -> None:
        """A pipeline step that raised: kept as an error entry and as a failed verdict."""
        self.errors.append({'step': step, **error})
        self.checks.append(Check(f'{step}_completed', 0.0, 1.0, relation='>=', tol=0.0))

    def to_dict(self) -> dict:
        return {
            'spec': self.spec,
            'strips': self.strips,
            'mu': self.mu,
            'x0': self.x0,
            'interval_tilde': list(self.interval_tilde) if self.interval_tilde else None,
            'interval_I': list(self.interval_I) if self.interval_I else None,
            'tau': self.tau,
            'e1': self.e1,
            'Lambda1': self.Lambda1,
            'e2': self.e2,
            'Lambda2': self.Lambda2,
            'bracket': list(self.bracket) if self.bracket else None,
            'windows': self.windows,
            'frames': self.frames,
            'curve': self.curve,
            'hypotheses': self.hypotheses,
            'hadamard': self.hadamard,
            'errors': self.errors,
            'passed': self.passed,
            'failures': self.failures,
            'checks': [check.to_dict() for check in self.checks],
        }

    def summary_row(self) -> Dict[str, object]:
        """One CSV row for sweep tables."""
        curve = self.curve or {}
        return {
            'N': self.spec.get('N'), 'eta': self.spec.get('eta'), 'delta': self.spec.get('delta'),
            'mu': self.mu, 'x0': self.x0, 'tau': self.tau,
            'Lambda1': self.Lambda1, 'Lambda2': self.Lambda2,
            'proj_diameter': curve.get('proj_diameter'),
            'max_abs_g1': curve.get('max_abs_g1'), 'max_abs_g2': curve.get('max_abs_g2'),
            'passed': self.passed, 'failures': ';'.join(self.failures),
        }


def regime_scale(spec: DomainSpec, constants: CalibratedConstants) -> float:
    """η e^{−c N} + δ/N², the size every nodal-line estimate is measured against."""
    return spec.eta * np.exp(-constants.c_cal * spec.N) + spec.delta / spec.N ** 2


def rectangle_discretization_error(N: float, nx: int, ny: int) -> float:
    """|μ₂,h − μ₂| for the Q1 discretization of [0,N]×[0,1] on nx × ny cells."""
    discrete = transverse_eigenvalue(2, N, nx) + transverse_eigenvalue(1, 1.0, ny)
    return abs(discrete - (4 * np.pi ** 2 / N ** 2 + np.pi ** 2))


def hypothesis_checks(spec: DomainSpec, constants: CalibratedConstants) -> Tuple[List[str], List[Check]]:
    """
    The domain inequalities and the calibrated η range as verdicts.

    Returns the names of the failed domain inequalities and two checks:
    ``hypotheses`` counts those failures, ``eta_calibrated`` compares η with
    the largest η the constants were measured on.

    Raises:
        InvalidParameter: standing assumptions violated
    """
    validation = validate_domain(spec)
    failures = validation.failures
    if failures:
        logger.warning(f"Certificate outside the domain hypotheses: {', '.join(failures)}")
    checks = [
        Check('hypotheses', float(len(failures)), 0.0, relation='==', tol=0.0),
        Check('eta_calibrated', spec.eta, constants.eta_max, tol=0.0),
    ]
    return failures, checks


def bracket_checks(spec: DomainSpec, sol: EigenSolution, constants: CalibratedConstants) -> Tuple[tuple, List[Check]]:
    """μ₂ against the closed-form bracket widened by the rectangle discretization error."""
    lo, hi = eigenvalue_bracket(spec)
    mesh = sol.mesh
    allowance = constants.bracket_allowance * rectangle_discretization_error(spec.N, mesh.nx, mesh.ny)
    checks = [
        Check('bracket_lower', sol.mu, lo, relation='>=', tol=allowance),
        Check('bracket_upper', sol.mu, hi, relation='<=', tol=allowance),
    ]
    return (lo, hi, sol.mu, all(c.passed for c in checks)), checks


def adiabatic_checks(profiles: Sequence[ModeProfile], spec: DomainSpec, mu: float,
                     constants: CalibratedConstants, floor: float) -> List[Check]:
    """Boundary-value smallness and interior decay of the higher modes."""
    N, eta, scale = spec.N, spec.eta, spec.scale
    checks = []
    boundary = max(abs(p.boundary_values[0]) + abs(p.boundary_values[1]) for p in profiles[:DECAY_MODES])
    checks.append(Check('mode_boundary_values', boundary, constants.C_bv * (eta + scale), tol=floor))

    excess = -np.inf
    for profile in profiles[1:DECAY_MODES]:
        k = profile.k
        mu_k = np.sqrt(max(np.pi ** 2 * k ** 2 - mu, 0.0))
        inside = (profile.xs >= 1.0) & (profile.xs <= N - 1.0)
        xs = profile.xs[inside]
        distance = np.minimum(xs, N - xs)
        bound = constants.C_decay * (eta * np.exp(-constants.c_cal * mu_k * distance) + scale / k)
        excess = max(excess, float(np.max(np.abs(profile.wk[inside]) - bound)))
    checks.append(Check('mode_decay', excess, 0.0, tol=floor))
    return checks


def duhamel_checks(data: DuhamelData, profile: ModeProfile, reconstruction_error: float, ode_residual: float,
                   h: float, constants: CalibratedConstants) -> List[Check]:
    """
    Reconstruction error within 5× the quadrature plus O(h²) budget, and the
    mode ODE residual within an O(h²) bound scaled by λ_k and the mode size.
    """
    floor = constants.floor(h)
    size = float(np.max(np.abs(profile.wk)))
    k = data.k
    return [
        Check(f'duhamel_reconstruction_k{k}', reconstruction_error, 5 * (QUAD_EPSABS + floor), tol=0.0),
        Check(f'ode_residual_k{k}', ode_residual, 5 * floor * (1 + data.transverse) * size, tol=floor),
    ]


def _strip_split(curve: NodalCurve, spec: DomainSpec):
    """Interior samples with their distance to the nearer boundary curve and which end that is."""
    inner = curve.interior
    g, y = curve.gs[inner], curve.ys[inner]
    below = y - spec.bottom(g)
    above = spec.top(g) - y
    distance = np.minimum(below, above)
    return inner, g, y, distance, below <= above


def check_theorem(
    curve: NodalCurve,
    intervals: IntervalData,
    spec: DomainSpec,
    *,
    sol: EigenSolution,
    lambdas: LambdaData,
    profiles: Sequence[ModeProfile],
    residual: ResidualField,
    boundary_lambdas: Sequence[LambdaData] = (),
    constants: Optional[CalibratedConstants] = None,
    report: Optional[CertificateReport] = None,
) -> CertificateReport:
    """
    Verdicts on the nodal curve, the intervals and the Λ quantities.

    Failures are verdicts, never exceptions. Every bound carries the resolution
    floor C_floor·h² as its tolerance.
    """
    constants = constants or CalibratedConstants()
    report = report or CertificateReport(spec=spec.summary())
    add = report.checks.append
    floor = constants.floor(sol.mesh.h)
    scale = regime_scale(spec, constants)
    N, eta, delta = spec.N, spec.eta, spec.delta

    report.mu = sol.mu
    report.x0 = intervals.x0
    report.interval_tilde = intervals.tilde
    report.interval_I = intervals.I
    report.tau = intervals.tau
    report.e1, report.Lambda1 = lambdas.e1, lambdas.Lambda1
    all_lambdas = [lambdas, *boundary_lambdas]
    weakest = min(all_lambdas, key=lambda d: d.Lambda2)
    report.e2, report.Lambda2 = weakest.e2, weakest.Lambda2
    report.frames = [d.to_dict() for d in all_lambdas]

    # shape of the curve
    max_g1, max_g2 = curve.max_abs('g1'), curve.max_abs('g2')
    add(Check('diam', curve.proj_diameter, constants.C_w * scale, tol=floor))
    add(Check('slope', max_g1, constants.C_g * scale, tol=floor))
    add(Check('curvature', max_g2, constants.C_g * scale, tol=floor))
    add(Check('slope_curvature', max_g1 + max_g2, constants.C_g * scale, tol=floor))
    add(Check('endpoints', float(len(curve.endpoints)), 2.0, relation='==', tol=0.0))

    angles = curve.angles or boundary_angles(curve, spec)
    angle_tol = constants.angle_tol_flat if spec.is_flat else constants.angle_tol_curved
    add(Check('angle_bottom', abs(angles[0] - np.pi / 2), 0.0, tol=angle_tol))
    add(Check('angle_top', abs(angles[1] - np.pi / 2), 0.0, tol=angle_tol))

    location = constants.C_loc * N * (eta + delta / N)
    lo, hi = curve.x_range
    add(Check('location', max(abs(lo - N / 2), abs(hi - N / 2)), location, tol=floor))

    if delta <= eta:
        add(Check('eta_dominant_diam', curve.proj_diameter, eta / 2, tol=floor))
        add(Check('eta_dominant_slope_curvature', max_g1 + max_g2, eta / 2, tol=floor))

    # eigenvalue and first-mode zero
    report.bracket, checks = bracket_checks(spec, sol, constants)
    report.checks.extend(checks)
    report.windows = x0_windows(spec, intervals.x0, constants)
    for name, window in report.windows.items():
        add(Check(f'x0_{name}', window['offset'], window['half_width'], tol=floor))
    add(Check('tau', intervals.tau, constants.C_tau * scale, tol=floor))
    add(Check('interval_condition_A', intervals.sup_complement_E, 0.5 * intervals.inf_outside_ratio, tol=0.0))
    add(Check('interval_condition_B', intervals.sup_strip_Ey, 2.0 * intervals.inf_outside_ratio, tol=0.0))

    add(Check('Lambda1_positive', lambdas.Lambda1, 0.0, relation='>=', tol=0.0))
    add(Check('Lambda2_positive', weakest.Lambda2, 0.0, relation='>=', tol=0.0))

    _transversality(report, curve, spec, sol, lambdas, weakest, floor)
    _slope_bounds(report, curve, spec, lambdas, boundary_lambdas, floor)
    if spec.is_flat:
        _flat_term_bounds(report, curve, spec, sol, profiles, residual, intervals, floor)

    report.curve = curve.to_dict()
    if report.failures:
        logger.warning(f"Certificate N={N} eta={eta} delta={delta}: failed {', '.join(report.failures)}")
    else:
        logger.info(f"Certificate N={N} eta={eta} delta={delta}: all {len(report.checks)} checks passed")
    return report


def _transversality(report, curve, spec, sol, lambdas, weakest, floor) -> None:
    """|∂ₓv| ≥ Λ₁ between the strips and ≥ Λ₂·dist inside them."""
    inner, g, y, distance, _ = _strip_split(curve, spec)
    vx = np.abs(sol.interpolant.derivatives(g, y, order=1, strict=False)['x'])
    center = distance >= STRIP_WIDTH
    if np.any(center):
        report.checks.append(Check('transversal_center', float(np.min(vx[center])), lambdas.Lambda1,
                                   relation='>=', tol=floor))
    if np.any(~center):
        ratio = vx[~center] / distance[~center]
        report.checks.append(Check('transversal_strip', float(np.min(ratio)), weakest.Lambda2,
                                   relation='>=', tol=floor))


def _slope_bounds(report, curve, spec, lambdas, boundary_lambdas, floor) -> None:
    """|g′| against the centre bound and the strip bound |y|·rate."""
    if curve.g1 is None:
        return
    inner, _, _, distance, nearer_bottom = _strip_split(curve, spec)
    g1 = np.abs(curve.g1[inner])
    center = distance >= STRIP_WIDTH
    if np.any(center):
        report.checks.append(Check('center_slope_bound', float(np.max(g1[center])), lambdas.center_g1_bound,
                                   tol=floor))
    if np.any(~center):
        rates = {'identity': lambdas.strip_g1_rate}
        rates.update({d.frame: d.strip_g1_rate for d in boundary_lambdas})
        rate = np.where(nearer_bottom, rates.get('bottom', rates['identity']), rates.get('top', rates['identity']))
        excess = g1[~center] - distance[~center] * rate[~center]
        report.checks.append(Check('strip_slope_bound', float(np.max(excess)), 0.0, tol=floor))


def _flat_term_bounds(report, curve, spec, sol, profiles, residual, intervals, floor) -> None:
    """Term-by-term estimates for the second derivatives of v on a flat-topped domain."""
    w1 = profiles[0]
    lo, hi = intervals.I
    xs = interval_points(lo, hi, [intervals.x0])
    sup_v1 = float(np.max(np.abs(w1(xs))))
    sup_v1p = float(np.max(np.abs(w1(xs, 1))))
    sup_v1pp = float(np.max(np.abs(w1(xs, 2))))
    sup = {key: residual.sup_at(key, xs) for key in ('y', 'xx', 'xy', 'yy', 'yyy')}

    inner, g, y, distance, _ = _strip_split(curve, spec)
    d = sol.interpolant.derivatives(g, y, order=2, strict=False)
    vy, vxy, vxx, vyy = (np.abs(d[key]) for key in ('y', 'xy', 'xx', 'yy'))
    center = distance >= STRIP_WIDTH
    strip = ~center
    add = report.checks.append

    add(Check('flat_dxy', float(np.max(vxy)), np.pi * sup_v1p + sup['xy'], tol=floor))
    add(Check('flat_dxx', float(np.max(vxx)), sup_v1pp + sup['xx'], tol=floor))
    if np.any(center):
        add(Check('flat_dy_center', float(np.max(vy[center])), np.pi * sup_v1 + sup['y'], tol=floor))
        add(Check('flat_dyy_center', float(np.max(vyy[center])), np.pi ** 2 * sup_v1 + sup['yy'], tol=floor))
    if np.any(strip):
        dist = distance[strip]
        dy_bound = dist ** 2 * (sup['yyy'] + 0.5 * sup['y'])
        dyy_bound = dist * (np.pi ** 3 * sup_v1 + sup['yyy'])
        add(Check('flat_dy_strip', float(np.max(vy[strip] - dy_bound)), 0.0, tol=floor))
        add(Check('flat_dyy_strip', float(np.max(vyy[strip] - dyy_bound)), 0.0, tol=floor))
