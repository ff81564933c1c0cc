"""Nodal curve of the second eigenfunction as a graph x = g(y)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from contourpy import LineType, contour_generator
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from core.errors import ClosedLoopDetected, DisconnectedNodalSet, NonGraphCurve, VanishingTransversal
from discretize.interpolation import INTERP_TOL, SolutionField
from discretize.mesh import Mesh
from eigensolve.solver import EigenSolution
from geometry.domain import DomainSpec

logger = logging.getLogger(__name__)

SAMPLES_PER_CELL = 4
EDGE_CELLS = 2
NEWTON_MAXITER = 30
NEWTON_TOL = 1e-14
END_FIT_POINTS = 5
END_SEARCH = 0.25
G2_EDGE_CELLS = 3
MIN_TRANSVERSAL = 1e-6


@dataclass(frozen=True, eq=False)
class NodalCurve:
    """
    Samples (g(y), y) ordered in y, endpoints on the bottom and top curves.

    ``ys``/``gs`` hold the endpoints first and last; ``g1``/``g2`` align with
    them. ``g2`` is NaN within three cell heights of either endpoint.
    """

    ys: np.ndarray
    gs: np.ndarray
    endpoints: Tuple[Tuple[float, float], Tuple[float, float]]
    end_slopes: Tuple[float, float]
    proj_diameter: float
    max_residual: float
    cell_height: float
    g1: Optional[np.ndarray] = field(default=None, compare=False)
    g2: Optional[np.ndarray] = field(default=None, compare=False)
    angles: Optional[Tuple[float, float]] = None

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.ys.tolist(), self.gs.tolist()))

    @property
    def interior(self) -> slice:
        return slice(1, len(self.ys) - 1)

    @property
    def x_range(self) -> Tuple[float, float]:
        return float(np.min(self.gs)), float(np.max(self.gs))

    @property
    def mean_x(self) -> float:
        return float(np.mean(self.gs))

    def max_abs(self, which: str) -> float:
        values = {'g1': self.g1, 'g2': self.g2}[which]
        if values is None:
            return float('nan')
        return float(np.nanmax(np.abs(values)))

    def to_rows(self) -> List[Tuple[float, float, float, float]]:
        """CSV rows (y, g, g′, g″)."""
        nan = np.full_like(self.ys, np.nan)
        g1 = self.g1 if self.g1 is not None else nan
        g2 = self.g2 if self.g2 is not None else nan
        return [tuple(map(float, row)) for row in zip(self.ys, self.gs, g1, g2)]

    def to_dict(self) -> dict:
        return {
            'endpoints': [list(p) for p in self.endpoints],
            'end_slopes': list(self.end_slopes),
            'angles': list(self.angles) if self.angles else None,
            'proj_diameter': self.proj_diameter,
            'x_range': list(self.x_range),
            'max_residual': self.max_residual,
            'max_abs_g1': self.max_abs('g1'),
            'max_abs_g2': self.max_abs('g2'),
            'samples': len(self.ys),
        }


def zero_contours(values: np.ndarray, mesh: Mesh) -> List[np.ndarray]:
    """Zero level lines of the nodal values on the reference grid, boundary rows excluded."""
    grid = mesh.grid(values)
    generator = contour_generator(x=mesh.xi[1:-1], y=mesh.zeta[1:-1], z=grid[1:-1, 1:-1].T,
                                  line_type=LineType.Separate)
    return [np.asarray(line) for line in generator.lines(0.0)]


def _trace(sol: EigenSolution, mesh: Mesh) -> np.ndarray:
    """Single spanning contour in physical coordinates, sorted by y."""
    lines = zero_contours(sol.values, mesh)
    for line in lines:
        if len(line) > 2 and np.allclose(line[0], line[-1], atol=1e-12):
            raise ClosedLoopDetected("nodal set contains a closed loop", points=len(line))
    if len(lines) != 1:
        raise DisconnectedNodalSet(f"nodal set has {len(lines)} components", components=len(lines))

    line = lines[0]
    zeta = line[:, 1]
    d_zeta = mesh.zeta[1]
    if zeta.min() > mesh.zeta[1] + 1e-12 or zeta.max() < mesh.zeta[-2] - 1e-12:
        raise DisconnectedNodalSet(f"nodal line spans only zeta in [{zeta.min():.3f}, {zeta.max():.3f}]")

    x, y = mesh.transform(line[:, 0], line[:, 1])
    if y[0] > y[-1]:
        x, y = x[::-1], y[::-1]
    backtrack = np.maximum.accumulate(y) - y
    if np.max(backtrack) > d_zeta:
        raise NonGraphCurve(f"nodal line is not a graph over y (backtracks by {np.max(backtrack):.3e})")
    order = np.argsort(y, kind="stable")
    return np.column_stack([x[order], y[order]])


def _polish(sol: EigenSolution, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    field_ = sol.interpolant
    for _ in range(NEWTON_MAXITER):
        d = field_.derivatives(x, y, order=1, strict=False)
        step = d['v'] / d['x']
        x = x - step
        if np.max(np.abs(step)) < NEWTON_TOL:
            break
    residual = float(np.max(np.abs(field_.derivatives(x, y, order=0, strict=False)['v'])))
    return x, residual


def _endpoint(spec: DomainSpec, ys: np.ndarray, gs: np.ndarray, bottom: bool):
    sel = slice(0, END_FIT_POINTS) if bottom else slice(-END_FIT_POINTS, None)
    fit = Polynomial.fit(ys[sel], gs[sel], 2)
    curve = spec.bottom if bottom else spec.top
    y_edge = float(ys[0] if bottom else ys[-1])
    bracket = (y_edge - END_SEARCH, y_edge) if bottom else (y_edge, y_edge + END_SEARCH)
    y_end = brentq(lambda y: y - curve(fit(y)), *bracket, xtol=1e-15)
    return (float(fit(y_end)), float(y_end)), float(fit.deriv()(y_end))


def extract_nodal(sol: EigenSolution, mesh: Optional[Mesh] = None) -> NodalCurve:
    """
    Nodal line of ``sol`` as a graph over y.

    Marching squares on the reference grid seeds 4·ny + 1 levels in y between two
    cells from the bottom and top; each seed is polished by Newton steps on the
    spline interpolant, and the endpoints come from a quadratic fit of the last
    five samples intersected with the boundary curve.

    Raises:
        ClosedLoopDetected, DisconnectedNodalSet: the zero set is not one spanning line
        NonGraphCurve: the traced line is not monotone in y
    """
    mesh = mesh or sol.mesh
    spec = mesh.spec
    trace = _trace(sol, mesh)

    x_mid = float(np.median(trace[:, 0]))
    h_mid = float(spec.height(x_mid))
    y_lo = float(spec.bottom(x_mid)) + EDGE_CELLS * h_mid / mesh.ny
    y_hi = float(spec.top(x_mid)) - EDGE_CELLS * h_mid / mesh.ny
    ys = np.linspace(y_lo, y_hi, SAMPLES_PER_CELL * mesh.ny + 1)
    seeds = np.interp(ys, trace[:, 1], trace[:, 0])
    gs, residual = _polish(sol, seeds, ys)
    if residual > 10 * INTERP_TOL:
        logger.warning(f"Nodal polish residual {residual:.3e} above {10 * INTERP_TOL:.1e}")

    bottom_point, bottom_slope = _endpoint(spec, ys, gs, bottom=True)
    top_point, top_slope = _endpoint(spec, ys, gs, bottom=False)
    all_y = np.concatenate(([bottom_point[1]], ys, [top_point[1]]))
    all_g = np.concatenate(([bottom_point[0]], gs, [top_point[0]]))

    curve = NodalCurve(
        ys=all_y, gs=all_g, endpoints=(bottom_point, top_point), end_slopes=(bottom_slope, top_slope),
        proj_diameter=float(np.max(all_g) - np.min(all_g)), max_residual=residual,
        cell_height=h_mid / mesh.ny,
    )
    logger.info(f"Nodal line: x in [{curve.x_range[0]:.10g}, {curve.x_range[1]:.10g}], "
                f"proj_diameter={curve.proj_diameter:.3e}, residual={residual:.1e}")
    return curve


def graph_derivatives(curve: NodalCurve, sol: EigenSolution, mesh: Optional[Mesh] = None) -> NodalCurve:
    """
    g′ = −∂_y v/∂ₓv and g″ = −(v_y² v_xx − 2 v_x v_y v_xy + v_x² v_yy)/v_x³ along the curve.

    Raises:
        VanishingTransversal: |∂ₓv| < 1e-6 at an interior sample
    """
    inner = curve.interior
    field_ = sol.interpolant if mesh is None or mesh is sol.mesh else SolutionField(mesh, sol.values)
    d = field_.derivatives(curve.gs[inner], curve.ys[inner], order=2, strict=False)
    vx, vy = d['x'], d['y']
    weakest = float(np.min(np.abs(vx)))
    if weakest < MIN_TRANSVERSAL:
        raise VanishingTransversal(f"|dv/dx| = {weakest:.3e} on the nodal line", min_vx=weakest)

    g1 = np.empty_like(curve.ys)
    g2 = np.full_like(curve.ys, np.nan)
    g1[inner] = -vy / vx
    g1[0], g1[-1] = curve.end_slopes
    g2_inner = -(vy ** 2 * d['xx'] - 2 * vx * vy * d['xy'] + vx ** 2 * d['yy']) / vx ** 3
    margin = G2_EDGE_CELLS * curve.cell_height
    keep = (curve.ys[inner] - curve.ys[0] >= margin) & (curve.ys[-1] - curve.ys[inner] >= margin)
    g2[inner] = np.where(keep, g2_inner, np.nan)

    logger.debug(f"Graph derivatives: max|g'|={np.max(np.abs(g1)):.3e}, max|g''|={np.nanmax(np.abs(g2)):.3e}")
    return replace(curve, g1=g1, g2=g2)


def boundary_angles(curve: NodalCurve, spec: DomainSpec) -> Tuple[float, float]:
    """Angles between the curve's end tangents (1-sided fits) and the bottom and top tangents."""
    angles = []
    for (x_end, _), slope, boundary in zip(curve.endpoints, curve.end_slopes, (spec.bottom, spec.top)):
        t_curve = np.array([slope, 1.0])
        t_bound = np.array([1.0, float(boundary(x_end, 1))])
        cosine = abs(t_curve @ t_bound) / (np.linalg.norm(t_curve) * np.linalg.norm(t_bound))
        angles.append(float(np.arccos(np.clip(cosine, 0.0, 1.0))))
    return angles[0], angles[1]


def transversal_profile(curve: NodalCurve, sol: EigenSolution) -> np.ndarray:
    """|∂ₓv| at interior samples."""
    inner = curve.interior
    return np.abs(sol.interpolant.derivatives(curve.gs[inner], curve.ys[inner], order=1, strict=False)['x'])
