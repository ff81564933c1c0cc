"""Nodal-domain counting and interior cut locations of higher eigenfunctions."""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np
from scipy import ndimage

from discretize.mesh import Mesh
from eigensolve.solver import EigenSolution

logger = logging.getLogger(__name__)


def cell_signs(values: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Sign of each cell's 4-node average; exact zeros count as positive."""
    grid = mesh.grid(values)
    average = 0.25 * (grid[:-1, :-1] + grid[1:, :-1] + grid[1:, 1:] + grid[:-1, 1:])
    return np.where(average >= 0, 1, -1)


def nodal_domain_count(sol: EigenSolution, mesh: Optional[Mesh] = None) -> int:
    """Connected components of {v > 0} plus those of {v < 0}, by flood fill over cells."""
    mesh = mesh or sol.mesh
    signs = cell_signs(sol.values, mesh)
    _, positive = ndimage.label(signs > 0)
    _, negative = ndimage.label(signs < 0)
    count = int(positive + negative)
    logger.info(f"Eigenpair {sol.index}: {count} nodal domains ({positive} positive, {negative} negative)")
    return count


def cut_locations(sol: EigenSolution, k: int, mesh: Optional[Mesh] = None) -> List[float]:
    """
    Mean x of each of the k−1 interior nodal lines.

    Every interior grid row contributes its linearly interpolated sign changes;
    rows with other than k−1 crossings are skipped.
    """
    mesh = mesh or sol.mesh
    grid = mesh.grid(sol.values)
    X = mesh.nodes[:, 0].reshape(mesh.shape)
    rows = []
    for j in range(1, mesh.ny):
        v = grid[1:-1, j]
        x = X[1:-1, j]
        v = np.where(v == 0, np.finfo(float).tiny, v)
        idx = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        if len(idx) != k - 1:
            continue
        t = v[idx] / (v[idx] - v[idx + 1])
        rows.append(x[idx] + t * (x[idx + 1] - x[idx]))
    if not rows:
        logger.warning(f"No grid row has exactly {k - 1} sign changes")
        return []
    cuts = np.mean(np.array(rows), axis=0)
    logger.debug(f"Cut locations from {len(rows)} rows: {np.round(cuts, 6).tolist()}")
    return [float(c) for c in cuts]
