"""Certificate pipeline: solve, extract, decompose and check, recording failures instead of raising."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Optional, Sequence

from adiabatic.modes import decompose
from certify.hadamard import hadamard_check
from certify.intervals import compute_intervals
from certify.lambdas import compute_lambdas, frame_lambdas
from certify.theorem import CertificateReport, adiabatic_checks, bracket_checks, check_theorem, hypothesis_checks
from core.constants import CalibratedConstants, load_constants
from core.errors import NodalRectError
from discretize.mesh import Resolution
from eigensolve.solver import EigenSolution, pair, solve_domain
from geometry.domain import DomainSpec
from geometry.frame import identity_frame
from nodal.curve import boundary_angles, extract_nodal, graph_derivatives

logger = logging.getLogger(__name__)


def certify_solution(
    sol: EigenSolution,
    constants: Optional[CalibratedConstants] = None,
    kmax: Optional[int] = None,
    hadamard_modes: Sequence[int] = (1, 2),
    report: Optional[CertificateReport] = None,
) -> CertificateReport:
    """Certificate for a solved second eigenpair; each failing step becomes a failed verdict."""
    constants = constants or load_constants()
    spec = sol.mesh.spec
    report = report or CertificateReport(spec=spec.summary())
    report.mu = sol.mu

    try:
        report.hypotheses, checks = hypothesis_checks(spec, constants)
        report.checks.extend(checks)
    except NodalRectError as e:
        report.record_failure('validate', e.to_dict())

    try:
        curve = extract_nodal(sol)
        curve = graph_derivatives(curve, sol)
        curve = replace(curve, angles=boundary_angles(curve, spec))
    except NodalRectError as e:
        logger.error(f"Nodal extraction failed: {e.message}")
        report.record_failure('nodal', e.to_dict())
        report.bracket, checks = bracket_checks(spec, sol, constants)
        report.checks.extend(checks)
        return report

    try:
        profiles, residual = decompose(sol, kmax=kmax)
        intervals = compute_intervals(profiles, residual, spec, constants)
        lambdas = compute_lambdas(profiles, residual, identity_frame(spec), spec, intervals)
    except NodalRectError as e:
        logger.error(f"Decomposition stage failed: {e.message}")
        report.curve = curve.to_dict()
        report.record_failure('decompose', e.to_dict())
        report.bracket, checks = bracket_checks(spec, sol, constants)
        report.checks.extend(checks)
        return report

    boundary = [] if spec.is_flat else frame_lambdas(sol, spec, curve, intervals, kmax)
    check_theorem(curve, intervals, spec, sol=sol, lambdas=lambdas, profiles=profiles, residual=residual,
                  boundary_lambdas=boundary, constants=constants, report=report)
    report.checks.extend(adiabatic_checks(profiles, spec, sol.mu, constants, constants.floor(sol.mesh.h)))

    if spec.is_flat and spec.delta == 0:
        for k in hadamard_modes:
            try:
                report.hadamard.append(hadamard_check(spec, sol, k).to_dict())
            except NodalRectError as e:
                report.record_failure(f'hadamard_{k}', e.to_dict())
    return report


def certify_spec(
    spec: DomainSpec,
    resolution: Optional[Resolution] = None,
    constants: Optional[CalibratedConstants] = None,
    tol: Optional[float] = None,
    kmax: Optional[int] = None,
) -> CertificateReport:
    """Solve ``spec`` and certify its second eigenpair; never raises for numerical failures."""
    report = CertificateReport(spec=spec.summary())
    try:
        solutions = solve_domain(spec, resolution, k=2, tol=tol)
    except NodalRectError as e:
        logger.error(f"Eigensolve failed for N={spec.N} eta={spec.eta} delta={spec.delta}: {e.message}")
        report.record_failure('solve', e.to_dict())
        return report
    return certify_solution(pair(solutions, 2), constants, kmax, report=report)
