"""Transfinite map from the unit square onto Ω and the structured mesh built on it.

The map is Gordon–Hall blending of the four boundary curves,

    X(ξ,ζ) = φ₀(ξ)[L(ζ) − P_L(ζ)] + φ₁(ξ)[R(ζ) − P_R(ζ)] + (1−ζ)B(ξ) + ζT(ξ),

where P_L, P_R interpolate the corners linearly. With φ₀ = 1−ξ, φ₁ = ξ this is the
bilinear Coons patch. With a blend length ℓ the side weights are a C² smoothstep
supported on ξ < ℓ/width, so columns are straight away from the sides. Either
choice reproduces the four curves exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from core.errors import FoldedMesh, InvalidParameter, OutsideDomain
from geometry.domain import DomainSpec, corners

logger = logging.getLogger(__name__)

DEFAULT_BLEND_LENGTH = 1.0
INVERSE_TOL = 1e-13
INVERSE_MAXITER = 40
REFERENCE_SLACK = 1e-9

# 2x2 Gauss points on the local cell [0,1]^2
_G = 0.5 / math.sqrt(3.0)
GAUSS_POINTS = np.array([[0.5 - _G, 0.5 - _G], [0.5 + _G, 0.5 - _G], [0.5 + _G, 0.5 + _G], [0.5 - _G, 0.5 + _G]])
GAUSS_WEIGHTS = np.full(4, 0.25)


def _smoothstep_weight(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S(t) = 1 − 10t³ + 15t⁴ − 6t⁵ on [0,1], zero beyond; returns S, S′, S″."""
    t = np.clip(t, 0.0, 1.0)
    S = 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)
    dS = -30.0 * t ** 2 * (1.0 - t) ** 2
    d2S = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    return S, dS, d2S


@dataclass(frozen=True)
class Resolution:
    """Mesh resolution policy: nx scales with N, ny is fixed across the unit height."""

    cells_per_unit_x: float = 20.0
    ny: int = 40
    blend_length: Optional[float] = DEFAULT_BLEND_LENGTH

    def nx_for(self, N: float) -> int:
        return int(max(math.ceil(self.cells_per_unit_x * N - 1e-9), math.ceil(8 * N - 1e-9)))

    @property
    def h(self) -> float:
        return max(1.0 / self.cells_per_unit_x, 1.0 / self.ny)


class TransfiniteMap:
    """Smooth map (ξ,ζ) ∈ [0,1]² -> Ω with analytic first and second derivatives."""

    def __init__(self, spec: DomainSpec, blend_length: Optional[float] = DEFAULT_BLEND_LENGTH):
        self.spec = spec
        try:
            self.corners = corners(spec)
        except InvalidParameter as e:
            raise FoldedMesh(f"cannot locate domain corners: {e.message}")
        self.blend_length = blend_length

        self._bl = np.array(self.corners['BL'])
        self._br = np.array(self.corners['BR'])
        self._tl = np.array(self.corners['TL'])
        self._tr = np.array(self.corners['TR'])
        width = 0.5 * ((self._br[0] - self._bl[0]) + (self._tr[0] - self._tl[0]))
        if blend_length is None or width <= 0:
            self._xi_c = None
        else:
            self._xi_c = min(0.5, blend_length / width)

    # ----- blending weights -----
    def _weights(self, xi):
        if self._xi_c is None:
            one = np.ones_like(xi)
            zero = np.zeros_like(xi)
            return (1.0 - xi, -one, zero), (xi, one, zero)
        c = self._xi_c
        S0, dS0, d2S0 = _smoothstep_weight(xi / c)
        S1, dS1, d2S1 = _smoothstep_weight((1.0 - xi) / c)
        return (S0, dS0 / c, d2S0 / c ** 2), (S1, -dS1 / c, d2S1 / c ** 2)

    # ----- boundary parameterizations, returning value and two derivatives -----
    def _side(self, curve, lower, upper, zeta):
        dy = upper[1] - lower[1]
        y = lower[1] + zeta * dy
        x = curve(y)
        value = (x - (lower[0] + zeta * (upper[0] - lower[0])), np.zeros_like(zeta))
        d1 = (curve(y, 1) * dy - (upper[0] - lower[0]), np.zeros_like(zeta))
        d2 = (curve(y, 2) * dy ** 2, np.zeros_like(zeta))
        return value, d1, d2

    def _graph(self, curve, left, right, xi):
        dx = right[0] - left[0]
        x = left[0] + xi * dx
        value = (x, curve(x))
        d1 = (np.full_like(xi, dx), curve(x, 1) * dx)
        d2 = (np.zeros_like(xi), curve(x, 2) * dx ** 2)
        return value, d1, d2

    def evaluate(self, xi, zeta, derivatives: bool = False):
        """
        Map reference points to physical points.

        Returns:
            (x, y), or with ``derivatives`` a dict with keys 'x', 'y', and
            'x_xi', 'x_zeta', 'x_xixi', 'x_xizeta', 'x_zetazeta' (same for y)
        """
        xi = np.asarray(xi, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        xi, zeta = np.broadcast_arrays(xi, zeta)
        spec = self.spec

        (p0, dp0, d2p0), (p1, dp1, d2p1) = self._weights(xi)
        L, dL, d2L = self._side(spec.left, self._bl, self._tl, zeta)
        R, dR, d2R = self._side(spec.right, self._br, self._tr, zeta)
        B, dB, d2B = self._graph(spec.bottom, self._bl, self._br, xi)
        T, dT, d2T = self._graph(spec.top, self._tl, self._tr, xi)

        out: Dict[str, np.ndarray] = {}
        for c, name in ((0, 'x'), (1, 'y')):
            out[name] = p0 * L[c] + p1 * R[c] + (1 - zeta) * B[c] + zeta * T[c]
            if derivatives:
                out[f'{name}_xi'] = dp0 * L[c] + dp1 * R[c] + (1 - zeta) * dB[c] + zeta * dT[c]
                out[f'{name}_zeta'] = p0 * dL[c] + p1 * dR[c] - B[c] + T[c]
                out[f'{name}_xixi'] = d2p0 * L[c] + d2p1 * R[c] + (1 - zeta) * d2B[c] + zeta * d2T[c]
                out[f'{name}_xizeta'] = dp0 * dL[c] + dp1 * dR[c] - dB[c] + dT[c]
                out[f'{name}_zetazeta'] = p0 * d2L[c] + p1 * d2R[c]

        if derivatives:
            return out
        return out['x'], out['y']

    def __call__(self, xi, zeta):
        return self.evaluate(xi, zeta)

    def inverse(self, x, y, strict: bool = True):
        """
        Newton inversion of the map, vectorized over points.

        Returns:
            (xi, zeta, inside) where ``inside`` flags converged points in the unit square

        Raises:
            OutsideDomain: with ``strict``, if any point is outside Ω
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        spec = self.spec

        h = spec.top(x) - spec.bottom(x)
        zeta = np.clip((y - spec.bottom(x)) / h, 0.0, 1.0)
        yc = np.clip(y, *spec.left.interval)
        xl, xr = spec.left(yc), spec.right(yc)
        xi = np.clip((x - xl) / (xr - xl), 0.0, 1.0)

        converged = np.zeros(x.shape, dtype=bool)
        for _ in range(INVERSE_MAXITER):
            m = self.evaluate(xi, zeta, derivatives=True)
            rx, ry = m['x'] - x, m['y'] - y
            det = m['x_xi'] * m['y_zeta'] - m['x_zeta'] * m['y_xi']
            dxi = (m['y_zeta'] * rx - m['x_zeta'] * ry) / det
            dzeta = (-m['y_xi'] * rx + m['x_xi'] * ry) / det
            xi = xi - dxi
            zeta = zeta - dzeta
            converged = np.maximum(np.abs(dxi), np.abs(dzeta)) < INVERSE_TOL
            if np.all(converged):
                break

        inside = (
            converged
            & (xi >= -REFERENCE_SLACK) & (xi <= 1 + REFERENCE_SLACK)
            & (zeta >= -REFERENCE_SLACK) & (zeta <= 1 + REFERENCE_SLACK)
        )
        if strict and not np.all(inside):
            bad = int(np.argmin(inside))
            raise OutsideDomain(f"point ({x.flat[bad]:.6g}, {y.flat[bad]:.6g}) is outside the domain",
                                x=float(x.flat[bad]), y=float(y.flat[bad]))
        return np.clip(xi, 0.0, 1.0), np.clip(zeta, 0.0, 1.0), inside


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Structured (nx+1)×(ny+1) node grid on Ω.

    Node (i, j) sits at the image of (ξ_i, ζ_j) and has index i·(ny+1) + j.
    ``jacobians`` holds the bilinear-cell Jacobian matrices at the 2×2 Gauss
    points of each cell, relative to the local unit cell, shape (cells, 4, 2, 2).
    """

    spec: DomainSpec
    nx: int
    ny: int
    transform: TransfiniteMap
    xi: np.ndarray
    zeta: np.ndarray
    nodes: np.ndarray
    jacobians: np.ndarray
    boundary_mask: np.ndarray

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nx + 1, self.ny + 1

    def node_index(self, i, j):
        return np.asarray(i) * (self.ny + 1) + np.asarray(j)

    def grid(self, values: np.ndarray) -> np.ndarray:
        """Reshape a node vector to the (nx+1, ny+1) reference grid."""
        return np.asarray(values).reshape(self.nx + 1, self.ny + 1)

    @cached_property
    def cells(self) -> np.ndarray:
        """Node indices per cell, counter-clockwise from (i, j)."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing='ij')
        i, j = i.ravel(), j.ravel()
        return np.stack([
            self.node_index(i, j), self.node_index(i + 1, j),
            self.node_index(i + 1, j + 1), self.node_index(i, j + 1),
        ], axis=1)

    @cached_property
    def determinants(self) -> np.ndarray:
        J = self.jacobians
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def h(self) -> float:
        """Largest cell edge length."""
        X = self.nodes[:, 0].reshape(self.shape)
        Y = self.nodes[:, 1].reshape(self.shape)
        dx = np.hypot(np.diff(X, axis=0), np.diff(Y, axis=0))
        dy = np.hypot(np.diff(X, axis=1), np.diff(Y, axis=1))
        return float(max(dx.max(), dy.max()))

    def nearest_node(self, x: float, y: float) -> int:
        return int(np.argmin((self.nodes[:, 0] - x) ** 2 + (self.nodes[:, 1] - y) ** 2))

    def dump(self, path: Union[str, Path]) -> Path:
        """
        Write a plain-text node/element file.

        Format: a header line ``nodes <n> cells <m> nx <nx> ny <ny>``, then one
        line ``index x y boundary`` per node, then one line
        ``index n0 n1 n2 n3`` per cell.
        """
        path = Path(path)
        cells = self.cells
        with path.open('w', encoding='utf-8') as f:
            f.write(f"nodes {self.n_nodes} cells {len(cells)} nx {self.nx} ny {self.ny}\n")
            for k, (x, y) in enumerate(self.nodes):
                f.write(f"{k} {x:.17g} {y:.17g} {int(self.boundary_mask[k])}\n")
            for k, c in enumerate(cells):
                f.write(f"{k} {c[0]} {c[1]} {c[2]} {c[3]}\n")
        logger.info(f"Mesh dumped to {path}")
        return path


def cell_jacobians(nodes: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Jacobians of the bilinear cell maps at the Gauss points, shape (cells, 4, 2, 2)."""
    p = nodes[cells]  # (m, 4, 2)
    s = GAUSS_POINTS[:, 0][None, :, None]
    t = GAUSS_POINTS[:, 1][None, :, None]
    p0, p1, p2, p3 = (p[:, k][:, None, :] for k in range(4))
    X_s = (p1 - p0) * (1 - t) + (p2 - p3) * t
    X_t = (p3 - p0) * (1 - s) + (p2 - p1) * s
    return np.stack([X_s, X_t], axis=-1)  # [..., component, direction]


def build_mesh(spec: DomainSpec, nx: int, ny: int, blend_length: Optional[float] = DEFAULT_BLEND_LENGTH) -> Mesh:
    """
    Build the transfinite mesh of Ω.

    Raises:
        InvalidParameter: nx < 8N or ny < 16
        FoldedMesh: a cell Jacobian determinant is not positive
    """
    if nx < 8 * spec.N - 1e-9 or ny < 16:
        raise InvalidParameter(f"resolution nx={nx}, ny={ny} below floor nx >= 8N = {8 * spec.N:g}, ny >= 16")

    transform = TransfiniteMap(spec, blend_length)
    xi = np.linspace(0.0, 1.0, nx + 1)
    zeta = np.linspace(0.0, 1.0, ny + 1)
    XI, ZETA = np.meshgrid(xi, zeta, indexing='ij')
    x, y = transform(XI, ZETA)
    nodes = np.column_stack([x.ravel(), y.ravel()])

    boundary = np.zeros((nx + 1, ny + 1), dtype=bool)
    boundary[0, :] = boundary[-1, :] = boundary[:, 0] = boundary[:, -1] = True

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing='ij')
    i, j = i.ravel(), j.ravel()
    stride = ny + 1
    cells = np.stack([i * stride + j, (i + 1) * stride + j, (i + 1) * stride + j + 1, i * stride + j + 1], axis=1)
    jacobians = cell_jacobians(nodes, cells)
    det = jacobians[..., 0, 0] * jacobians[..., 1, 1] - jacobians[..., 0, 1] * jacobians[..., 1, 0]
    if not np.all(det > 0):
        worst = int(np.argmin(det.min(axis=1)))
        raise FoldedMesh(f"non-positive Jacobian determinant {det.min():.3e} in cell {worst}", cell=worst)

    mesh = Mesh(spec=spec, nx=nx, ny=ny, transform=transform, xi=xi, zeta=zeta,
                nodes=nodes, jacobians=jacobians, boundary_mask=boundary.ravel())
    logger.info(f"Built mesh {nx}x{ny} for N={spec.N} (det range {det.min():.3e}..{det.max():.3e})")
    return mesh
