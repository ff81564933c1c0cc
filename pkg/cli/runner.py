"""Task pipeline behind every CLI subcommand: one run config in, reports and tables out."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from adiabatic.duhamel import duhamel_data, duhamel_reconstruct
from adiabatic.forcing import ode_residual
from adiabatic.modes import ModeProfile, ResidualField, decompose
from certify.hadamard import hadamard_check
from certify.pipeline import certify_solution
from certify.theorem import duhamel_checks
from cli.runconfig import RunConfig
from cli.writers import normalize, write_csv, write_json, write_plot_data, write_records
from core import config
from core.constants import CalibratedConstants, load_constants
from core.errors import ConfigError, NodalRectError
from eigensolve.solver import EigenSolution, pair, solve_domain
from geometry.domain import Check, eigenvalue_bracket, validate_domain
from geometry.frame import identity_frame
from nodal.curve import NodalCurve, boundary_angles, extract_nodal, graph_derivatives
from partition.courant import courant_sharp_check
from partition.tree import iterate_partition

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

DUHAMEL_MODES = 4
# spline end effects keep the ODE residual meaningful only away from x = 0, N
ODE_MARGIN = 0.5


@dataclass
class RunState:
    """Everything one run has computed so far, shared by the task handlers."""

    run: RunConfig
    out: Path
    constants: CalibratedConstants
    workers: int = 1
    report: Dict[str, Any] = field(default_factory=dict)
    solutions: List[EigenSolution] = field(default_factory=list)
    curve: Optional[NodalCurve] = None
    profiles: List[ModeProfile] = field(default_factory=list)
    residual: Optional[ResidualField] = None

    @property
    def second(self) -> EigenSolution:
        return pair(self.solutions, 2)


def _validate(state: RunState) -> None:
    validation = validate_domain(state.run.spec)
    state.report['validation'] = validation.to_dict()
    write_json(state.out / 'validation.json', validation.to_dict())
    if not validation.passed:
        logger.warning(f"Domain validation failed: {', '.join(validation.failures)}")


def _solve(state: RunState) -> None:
    run = state.run
    state.solutions = solve_domain(run.spec, run.resolution, k=run.num_pairs, tol=run.solver_tol)
    lo, hi = eigenvalue_bracket(run.spec)
    state.report['eigenpairs'] = [sol.summary() for sol in state.solutions]
    state.report['mesh'] = {'nx': run.mesh_nx, 'ny': run.ny, 'h': state.solutions[0].mesh.h}
    state.report['bracket'] = [lo, hi]
    write_csv(state.out / 'eigenpairs.csv', ('index', 'mu', 'residual', 'lanczos_vectors'),
              ((s.index, s.mu, s.residual, s.lanczos_vectors) for s in state.solutions))
    state.solutions[0].mesh.dump(state.out / 'mesh.txt')


def _duhamel(state: RunState) -> Tuple[List[Dict[str, Any]], List[Check]]:
    """Reconstruct the first modes from their ODE and judge them against the measured profiles."""
    sol, spec = state.second, state.run.spec
    frame = identity_frame(spec)
    x_star = spec.N / 2 if state.run.x_star is None else state.run.x_star
    rows, checks = [], []
    for profile in state.profiles[:DUHAMEL_MODES]:
        try:
            data = duhamel_data(sol, profile, x_star=x_star, transverse='discrete')
        except NodalRectError as e:
            logger.warning(f"Duhamel data for k={profile.k} unavailable: {e.message}")
            rows.append({'k': profile.k, 'error': e.code, 'message': e.message})
            continue
        rebuilt = duhamel_reconstruct(data, spec.N, profile.xs)
        interior = (profile.xs >= ODE_MARGIN) & (profile.xs <= spec.N - ODE_MARGIN)
        residual = ode_residual(profile, sol.mu, frame, x_star, data.Fk_samples, transverse=data.transverse)
        error = float(np.max(np.abs(rebuilt - profile.wk)))
        ode = float(np.max(np.abs(residual[interior])))
        mode_checks = duhamel_checks(data, profile, error, ode, sol.mesh.h, state.constants)
        checks.extend(mode_checks)
        rows.append({**data.to_dict(), 'max_reconstruction_error': error, 'max_ode_residual': ode,
                     'passed': all(check.passed for check in mode_checks)})
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning(f"Duhamel verdicts failed: {', '.join(failed)}")
    return rows, checks


def _decompose(state: RunState) -> None:
    sol, spec = state.second, state.run.spec
    state.profiles, state.residual = decompose(sol, kmax=state.run.kmax)
    xs = state.profiles[0].xs
    header = ['x'] + [f'w{p.k}' for p in state.profiles]
    write_csv(state.out / 'modes.csv', header, zip(xs, *(p.wk for p in state.profiles)))
    write_csv(state.out / 'mode1.csv', ('x', 'w1', 'w1_d1', 'w1_d2', 'w1_d3'), state.profiles[0].to_rows())

    middle = (xs >= spec.N / 4) & (xs <= 3 * spec.N / 4)
    decay = {
        'k': [p.k for p in state.profiles],
        'sup_middle': [float(np.max(np.abs(p.wk[middle]))) for p in state.profiles],
        'alpha_left': [p.boundary_values[0] for p in state.profiles],
        'alpha_right': [p.boundary_values[1] for p in state.profiles],
    }
    write_plot_data(state.out / 'mode_decay.dat', decay)

    duhamel, checks = _duhamel(state)
    write_records(state.out / 'duhamel.csv', duhamel)
    residual_sups = state.residual.gradient_sups((1.0, spec.N - 1.0))
    logger.info(f"Residual sups on [1, N-1]: " + ', '.join(f'{k}={v:.3e}' for k, v in residual_sups.items()))
    state.report['decompose'] = {
        'kmax': state.run.kmax,
        'sup_E': residual_sups['order0'],
        'residual_sups': residual_sups,
        'checks': [check.to_dict() for check in checks],
        'passed': all(check.passed for check in checks),
        'mode_decay': decay,
        'duhamel': duhamel,
    }


def _nodal(state: RunState) -> None:
    sol, spec = state.second, state.run.spec
    curve = graph_derivatives(extract_nodal(sol), sol)
    state.curve = replace(curve, angles=boundary_angles(curve, spec))
    state.report['nodal'] = state.curve.to_dict()
    write_csv(state.out / 'nodal_curve.csv', ('y', 'g', 'g1', 'g2'), state.curve.to_rows())
    write_plot_data(state.out / 'nodal_curve.dat', {'x': state.curve.gs, 'y': state.curve.ys})


def _certify(state: RunState) -> None:
    run = state.run
    certificate = certify_solution(state.second, state.constants, run.kmax, run.hadamard_modes)
    state.report['certificate'] = certificate.to_dict()
    write_json(state.out / 'certificate.json', certificate.to_dict())
    write_records(state.out / 'certificate.csv', [check.to_dict() for check in certificate.checks])
    log = logger.info if certificate.passed else logger.warning
    log(f"Certificate {'passed' if certificate.passed else 'failed'}: "
        f"{len(certificate.checks)} checks, failures: {', '.join(certificate.failures) or 'none'}")


def _hadamard(state: RunState) -> None:
    results = [hadamard_check(state.run.spec, state.second, k) for k in state.run.hadamard_modes]
    state.report['hadamard'] = [r.to_dict() for r in results]
    write_records(state.out / 'hadamard.csv', state.report['hadamard'])


def _partition(state: RunState) -> None:
    run = state.run
    tree = iterate_partition(run.spec, run.partition_depth, run.resolution, run.solver_tol, state.workers)
    state.report['partition'] = tree.to_dict()
    write_json(state.out / 'partition.json', tree.to_dict())
    write_records(state.out / 'partition.csv', tree.rows())


def _courant(state: RunState) -> None:
    run = state.run
    result = courant_sharp_check(run.spec, run.courant_k, run.resolution, run.solver_tol)
    state.report['courant'] = result.to_dict()
    write_json(state.out / 'courant.json', result.to_dict())


def _sweep(state: RunState) -> None:
    from cli.sweep import run_sweep

    state.report['sweep'] = run_sweep(state.run, state.out, state.constants, state.workers)


HANDLERS: Dict[str, Callable[[RunState], None]] = {
    'validate': _validate,
    'solve': _solve,
    'decompose': _decompose,
    'nodal': _nodal,
    'certify': _certify,
    'hadamard': _hadamard,
    'partition': _partition,
    'courant': _courant,
    'sweep': _sweep,
}


def execute(run: RunConfig, out: Union[str, Path], constants: CalibratedConstants, workers: int = 1) -> Dict[str, Any]:
    """
    Run every enabled task in pipeline order and write report.json.

    A sweep run executes only validation itself; the other tasks are carried
    out for each variation.

    Raises:
        NodalRectError: the first task that fails
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    state = RunState(run=run, out=out, constants=constants, workers=workers)
    state.report['config'] = run.summary()
    state.report['constants'] = constants.to_dict()

    tasks = ('validate', 'sweep') if 'sweep' in run.tasks else run.tasks
    for task in tasks:
        started = time.perf_counter()
        logger.info(f"[{run.name}] task {task}")
        HANDLERS[task](state)
        logger.info(f"[{run.name}] task {task} done in {time.perf_counter() - started:.1f}s")

    write_json(out / 'report.json', state.report)
    return state.report


def report_error(error: NodalRectError, out: Optional[Union[str, Path]] = None) -> int:
    """Write error.json, echo it to stdout and return the exit code for ``error``."""
    payload = error.to_dict()
    if isinstance(error, ConfigError):
        payload.setdefault('key', None)
    if out is not None:
        try:
            write_json(Path(out) / 'error.json', payload)
        except OSError as e:
            logger.error(f"Could not write error.json to {out}: {e}")
    print(json.dumps(normalize(payload), sort_keys=True))
    return EXIT_CONFIG if isinstance(error, ConfigError) else EXIT_FAILURE


def run(
    run_config: RunConfig,
    out: Optional[Union[str, Path]] = None,
    constants: Optional[CalibratedConstants] = None,
    workers: Optional[int] = None,
) -> int:
    """
    Execute ``run_config`` and return the process exit code.

    0 on success, 2 for a configuration error, 1 for any other solver error.
    """
    out = Path(out) if out is not None else Path(config.OUTPUT_DIR) / run_config.name
    workers = config.WORKERS if workers is None else workers
    try:
        constants = constants or load_constants()
        report = execute(run_config, out, constants, workers)
    except NodalRectError as e:
        logger.error(f"Run {run_config.name} failed: {e.code}: {e.message}")
        return report_error(e, out)

    print(json.dumps({'status': 'ok', 'out': str(out), 'tasks': list(report['config']['tasks'])}, sort_keys=True))
    return EXIT_OK
