"""Parameter sweeps: one run per value, one summary row per run."""

from __future__ import annotations

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Tuple

from cli.runconfig import RunConfig, parse_config
from cli.runner import execute
from cli.writers import write_plot_data, write_records
from core.constants import CalibratedConstants
from core.errors import NodalRectError
from core.logging import setup_from_config

logger = logging.getLogger(__name__)

# fork would share the parent's logging handlers
_CTX = mp.get_context('spawn')

Job = Tuple[Dict[str, str], str, str, float, str, CalibratedConstants]


def _init_worker() -> None:
    setup_from_config(console=False)


def summary_row(param: str, value: float, report: Dict[str, Any]) -> Dict[str, Any]:
    """Flatten the headline numbers of one variation's report."""
    domain = report['config']['domain']
    row: Dict[str, Any] = {
        'param': param, 'value': value, 'status': 'ok', 'error': '',
        'N': domain.get('N'), 'eta': domain.get('eta'), 'delta': domain.get('delta'),
    }
    for sol in report.get('eigenpairs', []):
        row[f"mu{sol['index']}"] = sol['mu']
    nodal = report.get('nodal')
    if nodal:
        row['proj_diameter'] = nodal['proj_diameter']
        row['max_abs_g1'] = nodal['max_abs_g1']
        row['max_abs_g2'] = nodal['max_abs_g2']
        if nodal.get('angles'):
            row['angle_bottom'], row['angle_top'] = nodal['angles']
    certificate = report.get('certificate')
    if certificate:
        row.update({'tau': certificate['tau'], 'Lambda1': certificate['Lambda1'],
                    'Lambda2': certificate['Lambda2'], 'certified': certificate['passed'],
                    'failures': ';'.join(certificate['failures'])})
    for result in report.get('hadamard', []):
        row[f"hadamard{result['k']}_direct"] = result['direct']
        row[f"hadamard{result['k']}_main"] = result['main']
        row[f"hadamard{result['k']}_relative"] = result['relative']
    courant = report.get('courant')
    if courant:
        row['courant_count'] = courant['count']
    return row


def run_variation(job: Job) -> Dict[str, Any]:
    """Execute one variation; solver errors become a failed row instead of stopping the sweep."""
    raw, name, param, value, out, constants = job
    base = parse_config(raw, name=name)
    try:
        variation = base.variation(param, value)
        report = execute(variation, Path(out) / variation.name, constants)
    except NodalRectError as e:
        logger.error(f"Sweep point {param}={value:g} failed: {e.code}: {e.message}")
        return {'param': param, 'value': value, 'status': 'failed', 'error': f'{e.code}: {e.message}'}
    return summary_row(param, value, report)


def run_sweep(run: RunConfig, out: Path, constants: CalibratedConstants, workers: int = 1) -> List[Dict[str, Any]]:
    """
    Run every SWEEP_VALUES entry and write sweep.csv plus a plot-data file.

    Rows keep the order of SWEEP_VALUES whatever the worker count; numbers are
    reproducible bit for bit only with one worker.
    """
    jobs: List[Job] = [(dict(run.raw), run.name, run.sweep_param, value, str(out), constants)
                       for value in run.sweep_values]
    logger.info(f"Sweep {run.sweep_param} over {len(jobs)} values with {workers} worker(s)")
    if workers <= 1:
        rows = [run_variation(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, mp_context=_CTX) as pool:
            rows = list(pool.map(run_variation, jobs))

    failed = [row for row in rows if row['status'] != 'ok']
    if failed:
        logger.warning(f"Sweep finished with {len(failed)} failed point(s) of {len(rows)}")
    write_records(out / 'sweep.csv', rows)

    columns = {'value': [row['value'] for row in rows]}
    for key in ('mu2', 'proj_diameter', 'hadamard1_relative', 'hadamard2_relative'):
        if any(key in row for row in rows):
            columns[key] = [float('nan') if row.get(key) is None else row[key] for row in rows]
    write_plot_data(out / f'sweep_{run.sweep_param.lower()}.dat', columns)
    return rows
