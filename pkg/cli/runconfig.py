"""Run configuration: a KEY=VALUE file describing a domain, a resolution and the tasks to run."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from core import config
from core.errors import ConfigError, NodalRectError
from discretize.mesh import DEFAULT_BLEND_LENGTH, Resolution
from geometry.domain import DOMAIN_KEYS, DomainSpec, domain_from_mapping
from utils.expressions import evaluate_list, evaluate_number

logger = logging.getLogger(__name__)

TASKS = ('validate', 'solve', 'decompose', 'nodal', 'certify', 'hadamard', 'partition', 'courant', 'sweep')

# every task pulls in the tasks it needs
PREREQUISITES = {
    'validate': (),
    'solve': (),
    'decompose': ('solve',),
    'nodal': ('solve',),
    'certify': ('validate', 'solve', 'nodal', 'decompose'),
    'hadamard': ('validate', 'solve'),
    'partition': ('validate',),
    'courant': (),
    'sweep': (),
}

SWEEP_PARAMS = {'N', 'ETA', 'DELTA', 'NX', 'NY'}

RUN_KEYS = {
    'NX', 'NY', 'MESH_BLEND_LENGTH', 'SOLVER_TOL', 'NUM_PAIRS', 'KMAX', 'X_STAR', 'TASKS',
    'HADAMARD_MODES', 'PARTITION_DEPTH', 'COURANT_K', 'SWEEP_PARAM', 'SWEEP_VALUES',
}


@dataclass(frozen=True)
class RunConfig:
    spec: DomainSpec
    raw: Dict[str, str] = field(repr=False)
    nx: Optional[int] = None
    ny: int = config.CELLS_Y
    blend_length: Optional[float] = DEFAULT_BLEND_LENGTH
    solver_tol: float = config.SOLVER_TOL
    num_pairs: int = 2
    kmax: int = config.KMAX
    x_star: Optional[float] = None
    tasks: Tuple[str, ...] = ('validate',)
    hadamard_modes: Tuple[int, ...] = (1, 2)
    partition_depth: int = 2
    courant_k: int = 3
    sweep_param: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    name: str = 'run'

    @property
    def resolution(self) -> Resolution:
        """Resolution whose nx_for(N) returns NX when it is set."""
        per_unit = self.nx / self.spec.N if self.nx else float(config.CELLS_PER_UNIT_X)
        return Resolution(per_unit, self.ny, self.blend_length)

    @property
    def mesh_nx(self) -> int:
        return self.resolution.nx_for(self.spec.N)

    def variation(self, param: str, value: float) -> 'RunConfig':
        """The same run with one key replaced, re-parsed so expressions in other keys follow."""
        raw = dict(self.raw)
        raw[param] = repr(float(value)) if param not in ('NX', 'NY') else str(int(value))
        raw.pop('SWEEP_PARAM', None)
        raw.pop('SWEEP_VALUES', None)
        tasks = [t for t in self.tasks if t != 'sweep']
        raw['TASKS'] = ','.join(tasks or ['validate'])
        return parse_config(raw, name=f'{self.name}_{param.lower()}_{value:g}')

    def summary(self) -> dict:
        return {
            'name': self.name, 'nx': self.mesh_nx, 'ny': self.ny, 'blend_length': self.blend_length,
            'solver_tol': self.solver_tol, 'num_pairs': self.num_pairs, 'kmax': self.kmax,
            'x_star': self.x_star, 'tasks': list(self.tasks), 'hadamard_modes': list(self.hadamard_modes),
            'partition_depth': self.partition_depth, 'courant_k': self.courant_k,
            'sweep_param': self.sweep_param, 'sweep_values': list(self.sweep_values),
            'domain': self.spec.summary(),
        }


def _number(raw: Mapping[str, str], key: str, names: Mapping[str, float], default=None) -> Optional[float]:
    text = raw.get(key)
    if text is None or not str(text).strip():
        return default
    try:
        return evaluate_number(str(text), names)
    except ValueError as e:
        raise ConfigError(key, f"{key}: {e}")


def _integer(raw: Mapping[str, str], key: str, names: Mapping[str, float], default: Optional[int]) -> Optional[int]:
    value = _number(raw, key, names)
    if value is None:
        return default
    if value != int(value):
        raise ConfigError(key, f"{key} must be an integer, got {value}")
    return int(value)


def _tasks(raw: Mapping[str, str]) -> Tuple[str, ...]:
    text = raw.get('TASKS') or 'validate'
    requested = [t.strip().lower() for t in text.split(',') if t.strip()]
    unknown = [t for t in requested if t not in TASKS]
    if unknown:
        raise ConfigError('TASKS', f"unknown task {unknown[0]!r}; expected a subset of {', '.join(TASKS)}")
    enabled = set()
    for task in requested:
        enabled.add(task)
        enabled.update(PREREQUISITES[task])
    return tuple(t for t in TASKS if t in enabled)


def parse_config(raw: Mapping[str, Optional[str]], name: str = 'run') -> RunConfig:
    """
    Build a RunConfig from key/value pairs.

    Raises:
        ConfigError: unknown key, missing required key or unparsable value
    """
    raw = {k: ('' if v is None else str(v)) for k, v in raw.items()}
    for key in raw:
        if key not in DOMAIN_KEYS and key not in RUN_KEYS:
            raise ConfigError(key, f"unknown key {key}")

    try:
        spec = domain_from_mapping(raw)
    except ConfigError:
        raise
    except NodalRectError as e:
        raise ConfigError(str(e.details.get('parameter') or 'N').upper(), e.message)
    names = {'N': spec.N, 'eta': spec.eta, 'delta': spec.delta, 'scale': spec.scale}

    blend_text = raw.get('MESH_BLEND_LENGTH', '').strip().lower()
    if blend_text == 'linear':
        blend = None
    else:
        blend = _number(raw, 'MESH_BLEND_LENGTH', names, DEFAULT_BLEND_LENGTH)
        if blend <= 0:
            raise ConfigError('MESH_BLEND_LENGTH', f"MESH_BLEND_LENGTH must be positive or 'linear', got {blend}")

    nx = _integer(raw, 'NX', names, None)
    ny = _integer(raw, 'NY', names, config.CELLS_Y)
    if nx is not None and nx < 8 * spec.N:
        raise ConfigError('NX', f"NX={nx} is below 8*N={8 * spec.N:g}")
    if ny < 16:
        raise ConfigError('NY', f"NY={ny} is below 16")

    solver_tol = _number(raw, 'SOLVER_TOL', names, config.SOLVER_TOL)
    if not 0 < solver_tol <= 1e-6:
        raise ConfigError('SOLVER_TOL', f"SOLVER_TOL must be in (0, 1e-6], got {solver_tol}")
    num_pairs = _integer(raw, 'NUM_PAIRS', names, 2)
    if not 2 <= num_pairs <= 10:
        raise ConfigError('NUM_PAIRS', f"NUM_PAIRS must be in 2..10, got {num_pairs}")
    kmax = _integer(raw, 'KMAX', names, config.KMAX)
    if kmax < 2:
        raise ConfigError('KMAX', f"KMAX must be at least 2, got {kmax}")
    x_star = _number(raw, 'X_STAR', names, None)
    if x_star is not None and not 0 <= x_star <= spec.N:
        raise ConfigError('X_STAR', f"X_STAR={x_star} outside [0, N]")

    try:
        modes = tuple(int(m) for m in evaluate_list(raw.get('HADAMARD_MODES') or '1,2', names))
    except ValueError as e:
        raise ConfigError('HADAMARD_MODES', f"HADAMARD_MODES: {e}")
    if any(m < 1 for m in modes):
        raise ConfigError('HADAMARD_MODES', "HADAMARD_MODES must be positive")
    depth = _integer(raw, 'PARTITION_DEPTH', names, 2)
    if not 0 <= depth <= 4:
        raise ConfigError('PARTITION_DEPTH', f"PARTITION_DEPTH must be in 0..4, got {depth}")
    courant_k = _integer(raw, 'COURANT_K', names, 3)
    if not 2 <= courant_k <= 6:
        raise ConfigError('COURANT_K', f"COURANT_K must be in 2..6, got {courant_k}")

    tasks = _tasks(raw)
    sweep_param = (raw.get('SWEEP_PARAM') or '').strip().upper() or None
    sweep_values: Tuple[float, ...] = ()
    if sweep_param is not None or 'sweep' in tasks:
        if sweep_param not in SWEEP_PARAMS:
            raise ConfigError('SWEEP_PARAM', f"SWEEP_PARAM must be one of {', '.join(sorted(SWEEP_PARAMS))}")
        try:
            sweep_values = tuple(evaluate_list(raw.get('SWEEP_VALUES') or '', names))
        except ValueError as e:
            raise ConfigError('SWEEP_VALUES', f"SWEEP_VALUES: {e}")
        if len(sweep_values) < 2:
            raise ConfigError('SWEEP_VALUES', f"a sweep needs at least 2 values, got {len(sweep_values)}")

    return RunConfig(
        spec=spec, raw=raw, nx=nx, ny=ny, blend_length=blend, solver_tol=solver_tol, num_pairs=num_pairs,
        kmax=kmax, x_star=x_star, tasks=tasks, hadamard_modes=modes, partition_depth=depth,
        courant_k=courant_k, sweep_param=sweep_param, sweep_values=sweep_values, name=name,
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and parse a run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(None, f"config file not found: {path}")
    run = parse_config(dotenv_values(path), name=path.stem)
    logger.info(f"Loaded run config {path}: tasks={','.join(run.tasks)}")
    return run


def with_tasks(run: RunConfig, tasks: List[str]) -> RunConfig:
    """The run with TASKS replaced, prerequisites re-derived."""
    raw = dict(run.raw)
    raw['TASKS'] = ','.join(tasks)
    return parse_config(raw, name=run.name)
