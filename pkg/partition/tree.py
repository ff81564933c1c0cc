"""Repeated nodal cuts: the partition tree and its convergence to rectangles."""

from __future__ import annotations

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from core.errors import InvalidParameter, NodalRectError
from core.logging import setup_from_config
from discretize.mesh import Resolution
from eigensolve.solver import pair, solve_domain
from geometry.domain import DomainSpec, corners
from nodal.curve import extract_nodal
from partition.cut import cut_along_nodal

logger = logging.getLogger(__name__)

MAX_DEPTH = 4
MIN_CHILD_N = 5.0
# children narrower than 5 by less than this still count as 5 wide
MIN_CHILD_SLACK = 1e-3
BOUNDARY_SAMPLES_PER_UNIT = 1024
FIT_SAMPLES_PER_UNIT = 256
FIT_SWEEPS = 4
FIT_RANGE = 0.25
MONOTONE_TOL = 1e-4

Rectangle = Tuple[float, float, float, float]

_CTX = mp.get_context('spawn')


@dataclass
class PartitionNode:
    id: str
    depth: int
    spec: DomainSpec
    parent: Optional[str] = None
    status: str = 'ok'
    message: str = ''
    side_amplitudes: Dict[str, float] = field(default_factory=dict)
    cut_side_amplitude: Optional[float] = None
    parent_proj_diameter: Optional[float] = None
    hausdorff: float = float('nan')
    best_rectangle: Optional[Rectangle] = None
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    proj_diameter: Optional[float] = None
    cut_x: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'id': self.id, 'depth': self.depth, 'parent': self.parent, 'status': self.status,
            'message': self.message, 'N': self.spec.N, 'side_amplitudes': self.side_amplitudes,
            'cut_side_amplitude': self.cut_side_amplitude, 'parent_proj_diameter': self.parent_proj_diameter,
            'hausdorff': self.hausdorff, 'best_rectangle': list(self.best_rectangle) if self.best_rectangle else None,
            'mu1': self.mu1, 'mu2': self.mu2, 'proj_diameter': self.proj_diameter, 'cut_x': self.cut_x,
            'domain': self.spec.summary(),
        }

    def to_row(self) -> Dict[str, object]:
        return {
            'id': self.id, 'depth': self.depth, 'parent': self.parent or '', 'status': self.status,
            'N': self.spec.N, 'left_amplitude': self.side_amplitudes.get('left'),
            'right_amplitude': self.side_amplitudes.get('right'),
            'cut_side_amplitude': self.cut_side_amplitude, 'hausdorff': self.hausdorff,
            'mu1': self.mu1, 'proj_diameter': self.proj_diameter,
        }


@dataclass
class PartitionTree:
    depth: int
    nodes: List[PartitionNode] = field(default_factory=list)
    edges: List[Tuple[str, str]] = field(default_factory=list)

    def node(self, node_id: str) -> PartitionNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def children(self, node_id: str) -> List[PartitionNode]:
        return [self.node(child) for parent, child in self.edges if parent == node_id]

    @property
    def leaves(self) -> List[PartitionNode]:
        parents = {parent for parent, _ in self.edges}
        return [node for node in self.nodes if node.id not in parents]

    def paths(self) -> List[List[PartitionNode]]:
        """Every root-to-leaf path."""
        result = []
        for leaf in self.leaves:
            path = [leaf]
            while path[-1].parent is not None:
                path.append(self.node(path[-1].parent))
            result.append(path[::-1])
        return result

    def monotone_paths(self, tol: float = MONOTONE_TOL) -> bool:
        """Hausdorff distance non-increasing along every path below the first cut."""
        for path in self.paths():
            distances = [node.hausdorff for node in path[1:]]
            if any(b > a + tol for a, b in zip(distances, distances[1:])):
                return False
        return True

    def cut_contraction(self, tol: float = 1e-8) -> bool:
        """Every cut-generated side is no wider than the parent's nodal line."""
        return all(node.cut_side_amplitude <= node.parent_proj_diameter + tol
                   for node in self.nodes if node.cut_side_amplitude is not None)

    def to_dict(self) -> dict:
        return {'depth': self.depth, 'monotone_paths': self.monotone_paths(),
                'cut_contraction': self.cut_contraction(),
                'nodes': [node.to_dict() for node in self.nodes],
                'edges': [list(edge) for edge in self.edges]}

    def rows(self) -> List[Dict[str, object]]:
        return [node.to_row() for node in self.nodes]


def boundary_points(spec: DomainSpec, per_unit: int = BOUNDARY_SAMPLES_PER_UNIT) -> np.ndarray:
    """Dense samples of ∂Ω, corner to corner along each side."""
    c = corners(spec)
    pieces = []
    for lo, hi, graph in ((c['BL'][0], c['BR'][0], spec.bottom), (c['TL'][0], c['TR'][0], spec.top)):
        x = np.linspace(lo, hi, int(np.ceil((hi - lo) * per_unit)) + 1)
        pieces.append(np.column_stack([x, graph(x)]))
    for lo, hi, side in ((c['BL'][1], c['TL'][1], spec.left), (c['BR'][1], c['TR'][1], spec.right)):
        y = np.linspace(lo, hi, int(np.ceil((hi - lo) * per_unit)) + 1)
        pieces.append(np.column_stack([side(y), y]))
    return np.vstack(pieces)


def rectangle_points(rect: Rectangle, per_unit: int = BOUNDARY_SAMPLES_PER_UNIT) -> np.ndarray:
    x0, x1, y0, y1 = rect
    nx = int(np.ceil(abs(x1 - x0) * per_unit)) + 1
    ny = int(np.ceil(abs(y1 - y0) * per_unit)) + 1
    x = np.linspace(x0, x1, nx)
    y = np.linspace(y0, y1, ny)
    return np.vstack([
        np.column_stack([x, np.full(nx, y0)]), np.column_stack([x, np.full(nx, y1)]),
        np.column_stack([np.full(ny, x0), y]), np.column_stack([np.full(ny, x1), y]),
    ])


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    forward, _ = cKDTree(b).query(a)
    backward, _ = cKDTree(a).query(b)
    return float(max(np.max(forward), np.max(backward)))


def best_fit_rectangle(spec: DomainSpec) -> Tuple[Rectangle, float]:
    """
    Axis-aligned rectangle closest to Ω in Hausdorff distance.

    Coordinate descent over the four side positions, each a bounded scalar
    minimization within ¼ of its current value, on a coarse sampling; the
    final distance is measured on the dense one.
    """
    coarse = boundary_points(spec, FIT_SAMPLES_PER_UNIT)
    tree = cKDTree(coarse)

    def distance(rect):
        forward = _to_rectangle(coarse, rect)
        backward, _ = tree.query(rectangle_points(rect, FIT_SAMPLES_PER_UNIT))
        return max(float(np.max(forward)), float(np.max(backward)))

    rect = [0.0, spec.N, 0.0, 1.0]
    best = distance(rect)
    for sweep in range(FIT_SWEEPS):
        previous = best
        for i in range(4):
            centre = rect[i]

            def objective(value, i=i):
                trial = list(rect)
                trial[i] = value
                return distance(trial)

            result = minimize_scalar(objective, bounds=(centre - FIT_RANGE, centre + FIT_RANGE),
                                     method='bounded', options={'xatol': 1e-10})
            if result.fun < best:
                rect[i], best = float(result.x), float(result.fun)
        if previous - best < 1e-12:
            break

    value = hausdorff(boundary_points(spec), rectangle_points(tuple(rect)))
    return tuple(rect), value


def _to_rectangle(points: np.ndarray, rect) -> np.ndarray:
    """Exact distance from each point to the boundary of an axis-aligned rectangle."""
    x0, x1, y0, y1 = rect
    px, py = points[:, 0], points[:, 1]
    inside = (px >= x0) & (px <= x1) & (py >= y0) & (py <= y1)
    to_edges = np.minimum.reduce([px - x0, x1 - px, py - y0, y1 - py])
    dx = np.maximum.reduce([x0 - px, np.zeros_like(px), px - x1])
    dy = np.maximum.reduce([y0 - py, np.zeros_like(py), py - y1])
    return np.where(inside, to_edges, np.hypot(dx, dy))


def _side_amplitudes(spec: DomainSpec) -> Dict[str, float]:
    c = corners(spec)
    left_span = np.linspace(c['BL'][1], c['TL'][1], 257)
    right_span = np.linspace(c['BR'][1], c['TR'][1], 257)
    return {
        'left': float(np.max(np.abs(spec.left(left_span) - spec.left.nominal))),
        'right': float(np.max(np.abs(spec.right(right_span) - spec.right.nominal))),
        'bottom': spec.bottom.amplitude,
        'top': spec.top.amplitude,
    }


Job = Tuple[PartitionNode, int, Optional[Resolution], Optional[float]]


def _init_worker() -> None:
    setup_from_config(console=False)


def _process(job: Job) -> Tuple[PartitionNode, List[PartitionNode]]:
    """Measure one node and, unless it is too short, solve and cut it."""
    node, depth, resolution, tol = job
    node.side_amplitudes = _side_amplitudes(node.spec)
    node.best_rectangle, node.hausdorff = best_fit_rectangle(node.spec)
    if node.spec.N < MIN_CHILD_N - MIN_CHILD_SLACK:
        node.status = 'stopped'
        node.message = f"N={node.spec.N:.6g} below {MIN_CHILD_N:g}"
        logger.warning(f"Partition node {node.id} stopped: {node.message}")
        return node, []
    return node, _expand(node, depth, resolution, tol)


def iterate_partition(spec: DomainSpec, depth: int, resolution: Optional[Resolution] = None,
                      tol: Optional[float] = None, workers: int = 1) -> PartitionTree:
    """
    Cut along the nodal line ``depth`` times, breadth first.

    A node narrower than N = 5 is flagged ``stopped`` and never solved; a node
    whose solve or extraction fails is flagged ``failed``. Both end their branch.
    With ``workers`` > 1 the nodes of one level are processed in a spawn pool;
    node order is the same either way.
    """
    if not 0 <= depth <= MAX_DEPTH:
        raise InvalidParameter(f"partition depth must be in 0..{MAX_DEPTH}, got {depth}", parameter='depth')
    tree = PartitionTree(depth=depth)
    frontier = [PartitionNode(id='root', depth=0, spec=spec)]

    while frontier:
        jobs: List[Job] = [(node, depth, resolution, tol) for node in frontier]
        if workers <= 1 or len(jobs) == 1:
            results = [_process(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=min(workers, len(jobs)), initializer=_init_worker,
                                     mp_context=_CTX) as pool:
                results = list(pool.map(_process, jobs))

        frontier = []
        for node, children in results:
            tree.nodes.append(node)
            for child in children:
                tree.edges.append((node.id, child.id))
                frontier.append(child)

    logger.info(f"Partition tree: {len(tree.nodes)} nodes, depth {depth}, "
                f"monotone={tree.monotone_paths()}, cut contraction={tree.cut_contraction()}")
    return tree


def _expand(node: PartitionNode, depth: int, resolution, tol) -> List[PartitionNode]:
    """Solve one node and, above the requested depth, cut it into two children."""
    cut = node.depth < depth
    try:
        solutions = solve_domain(node.spec, resolution, k=2 if cut else 1, tol=tol)
        node.mu1 = pair(solutions, 1).mu
        if not cut:
            return []
        second = pair(solutions, 2)
        node.mu2 = second.mu
        curve = extract_nodal(second)
        node.proj_diameter = curve.proj_diameter
        node.cut_x = curve.mean_x
        left, right = cut_along_nodal(node.spec, curve)
    except NodalRectError as e:
        node.status = 'failed'
        node.message = e.message
        logger.error(f"Partition node {node.id} failed: {e.message}")
        return []

    children = []
    for suffix, child_spec in (('L', left), ('R', right)):
        child = PartitionNode(id=f'{node.id}.{suffix}', depth=node.depth + 1, spec=child_spec, parent=node.id,
                              parent_proj_diameter=node.proj_diameter)
        cut_side = child_spec.right if suffix == 'L' else child_spec.left
        child.cut_side_amplitude = cut_side.amplitude
        children.append(child)
    return children
