"""C² spline interpolation of nodal values, chain-ruled through the transfinite map."""

from __future__ import annotations

import logging
from typing import Dict, Tuple

import numpy as np
from scipy.interpolate import RectBivariateSpline

from core.errors import DimensionMismatch, OutOfRange
from discretize.mesh import Mesh

logger = logging.getLogger(__name__)

INTERP_TOL = 1e-10
FD_STEP = 1e-4


class SolutionField:
    """
    Nodal values on a mesh seen as a function of physical (x, y).

    A bicubic interpolating spline is fitted on the reference grid (ξ_i, ζ_j);
    physical derivatives to total order 2 follow from the chain rule with the
    analytic Jacobian and Hessian of the map. Mixed third and fourth orders
    ((2,1), (1,2), (2,2)) use central differences of the analytic second
    derivatives.
    """

    def __init__(self, mesh: Mesh, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != mesh.n_nodes:
            raise DimensionMismatch(f"expected {mesh.n_nodes} nodal values, got {values.shape[0]}")
        self.mesh = mesh
        self.values = values
        self.spline = RectBivariateSpline(mesh.xi, mesh.zeta, mesh.grid(values), kx=3, ky=3, s=0)

    def reference(self, xi, zeta, dxi: int = 0, dzeta: int = 0):
        return self.spline.ev(xi, zeta, dx=dxi, dy=dzeta)

    def derivatives(self, x, y, order: int = 2, strict: bool = True) -> Dict[str, np.ndarray]:
        """
        Value and physical derivatives up to ``order`` (≤ 2).

        Returns:
            dict with 'v' and, by order, 'x', 'y', 'xx', 'xy', 'yy'

        Raises:
            OutsideDomain: with ``strict``, for points outside Ω
        """
        transform = self.mesh.transform
        xi, zeta, _ = transform.inverse(x, y, strict=strict)
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        out = {'v': self.reference(xi, zeta).reshape(shape)}
        if order == 0:
            return out

        m = transform.evaluate(xi, zeta, derivatives=True)
        u_xi = self.reference(xi, zeta, 1, 0)
        u_zeta = self.reference(xi, zeta, 0, 1)
        det = m['x_xi'] * m['y_zeta'] - m['x_zeta'] * m['y_xi']
        # A = J^{-1} = [[xi_x, xi_y], [zeta_x, zeta_y]]
        a00 = m['y_zeta'] / det
        a01 = -m['x_zeta'] / det
        a10 = -m['y_xi'] / det
        a11 = m['x_xi'] / det
        ux = a00 * u_xi + a10 * u_zeta
        uy = a01 * u_xi + a11 * u_zeta
        out['x'] = ux.reshape(shape)
        out['y'] = uy.reshape(shape)
        if order == 1:
            return out

        h_xixi = self.reference(xi, zeta, 2, 0) - ux * m['x_xixi'] - uy * m['y_xixi']
        h_xizeta = self.reference(xi, zeta, 1, 1) - ux * m['x_xizeta'] - uy * m['y_xizeta']
        h_zetazeta = self.reference(xi, zeta, 0, 2) - ux * m['x_zetazeta'] - uy * m['y_zetazeta']
        # H_p = A^T H A
        out['xx'] = (a00 * a00 * h_xixi + 2 * a00 * a10 * h_xizeta + a10 * a10 * h_zetazeta).reshape(shape)
        out['xy'] = (a00 * a01 * h_xixi + (a00 * a11 + a10 * a01) * h_xizeta
                     + a10 * a11 * h_zetazeta).reshape(shape)
        out['yy'] = (a01 * a01 * h_xixi + 2 * a01 * a11 * h_xizeta + a11 * a11 * h_zetazeta).reshape(shape)
        return out

    def __call__(self, x, y, deriv: Tuple[int, int] = (0, 0), strict: bool = True):
        dx, dy = deriv
        if dx < 0 or dy < 0 or dx > 2 or dy > 2:
            raise OutOfRange(f"derivative multi-index {deriv} outside (0..2, 0..2)", deriv=list(deriv))
        if dx + dy <= 2:
            key = {(0, 0): 'v', (1, 0): 'x', (0, 1): 'y', (2, 0): 'xx', (1, 1): 'xy', (0, 2): 'yy'}[(dx, dy)]
            return self.derivatives(x, y, order=dx + dy, strict=strict)[key]

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        step = FD_STEP
        if (dx, dy) == (2, 1):
            plus = self.derivatives(x, y + step, strict=False)['xx']
            minus = self.derivatives(x, y - step, strict=False)['xx']
            return (plus - minus) / (2 * step)
        if (dx, dy) == (1, 2):
            plus = self.derivatives(x + step, y, strict=False)['yy']
            minus = self.derivatives(x - step, y, strict=False)['yy']
            return (plus - minus) / (2 * step)
        center = self.derivatives(x, y, strict=False)['xx']
        plus = self.derivatives(x, y + step, strict=False)['xx']
        minus = self.derivatives(x, y - step, strict=False)['xx']
        return (plus - 2 * center + minus) / step ** 2


def interpolate(sol_values: np.ndarray, mesh: Mesh, x: float, y: float, deriv: Tuple[int, int] = (0, 0)) -> float:
    """
    Evaluate the spline interpolant of nodal values, or a derivative, at one point.

    Raises:
        OutsideDomain: (x, y) is not in Ω
    """
    field = SolutionField(mesh, sol_values)
    return float(np.asarray(field(x, y, deriv)).reshape(-1)[0])
