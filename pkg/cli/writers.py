"""JSON, CSV and plot-data writers with a fixed number format."""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def normalize(value: Any) -> Any:
    """JSON-ready copy: numpy scalars and arrays unwrapped, floats at 17 digits, non-finite as null."""
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [normalize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    return value


def format_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_json(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(normalize(payload), sort_keys=True, indent=2) + '\n', encoding='utf-8')
    logger.debug(f"Wrote {path}")
    return path


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    logger.debug(f"Wrote {path}")
    return path


def write_records(path: Union[str, Path], records: List[Dict[str, Any]]) -> Path:
    """CSV of dict rows; columns in first-seen order."""
    header: List[str] = []
    for record in records:
        header += [key for key in record if key not in header]
    return write_csv(path, header, ([record.get(key) for key in header] for record in records))


def write_plot_data(path: Union[str, Path], columns: Dict[str, Sequence[float]]) -> Path:
    """Whitespace-separated columns under a '#' header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[name], dtype=float) for name in names]
    lines = ['# ' + ' '.join(names)]
    for row in zip(*data):
        lines.append(' '.join(FLOAT_FORMAT % value for value in row))
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.debug(f"Wrote {path}")
    return path
