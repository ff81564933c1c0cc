"""Bilinear (Q1) stiffness and mass matrices for the Dirichlet Laplacian on a mapped mesh."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from core.errors import DimensionMismatch
from discretize.mesh import GAUSS_POINTS, GAUSS_WEIGHTS, Mesh

logger = logging.getLogger(__name__)


def _reference_basis():
    """Q1 shape functions and their gradients at the Gauss points of the unit cell."""
    s, t = GAUSS_POINTS[:, 0], GAUSS_POINTS[:, 1]
    values = np.stack([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t], axis=1)  # (q, node)
    grads = np.stack([
        np.stack([-(1 - t), -(1 - s)], axis=1),
        np.stack([1 - t, -s], axis=1),
        np.stack([t, s], axis=1),
        np.stack([-t, 1 - s], axis=1),
    ], axis=1)  # (q, node, direction)
    return values, grads


@dataclass(frozen=True, eq=False)
class SparseOperatorPair:
    """K and M restricted to the interior (Dirichlet-free) nodes."""

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    n: int
    interior: np.ndarray
    mesh: Mesh

    def extend(self, interior_values: np.ndarray) -> np.ndarray:
        """Interior dof vector -> full node vector with zero boundary values."""
        interior_values = np.asarray(interior_values)
        if interior_values.shape[0] != self.n:
            raise DimensionMismatch(f"expected {self.n} interior values, got {interior_values.shape[0]}")
        full = np.zeros(self.mesh.n_nodes, dtype=interior_values.dtype)
        full[self.interior] = interior_values
        return full

    def restrict(self, values: np.ndarray) -> np.ndarray:
        """Full node vector (or interior vector) -> interior dof vector."""
        values = np.asarray(values)
        if values.shape[0] == self.n:
            return values
        if values.shape[0] != self.mesh.n_nodes:
            raise DimensionMismatch(f"vector of length {values.shape[0]} matches neither "
                                    f"{self.n} dofs nor {self.mesh.n_nodes} nodes")
        return values[self.interior]


def element_matrices(mesh: Mesh):
    """
    Local 4x4 stiffness and mass matrices of every cell.

    Returns:
        (Ke, Me), each of shape (cells, 4, 4)
    """
    values, grads = _reference_basis()
    J = mesh.jacobians
    det = mesh.determinants
    Jinv = np.linalg.inv(J)
    # physical gradient as a row vector: grad_ref @ J^{-1}
    B = np.einsum('qnd,mqde->mqne', grads, Jinv)
    weight = GAUSS_WEIGHTS[None, :] * det
    Ke = np.einsum('mq,mqne,mqke->mnk', weight, B, B)
    Me = np.einsum('mq,qn,qk->mnk', weight, values, values)
    return Ke, Me


def assemble(mesh: Mesh) -> SparseOperatorPair:
    """
    Assemble the consistent Q1 stiffness and mass matrices with 2x2 Gauss quadrature.

    Dirichlet rows and columns are eliminated; the returned matrices act on
    interior nodes only, in increasing node order.
    """
    Ke, Me = element_matrices(mesh)
    cells = mesh.cells
    rows = np.broadcast_to(cells[:, :, None], Ke.shape).ravel()
    cols = np.broadcast_to(cells[:, None, :], Ke.shape).ravel()
    shape = (mesh.n_nodes, mesh.n_nodes)

    K = sparse.coo_matrix((Ke.ravel(), (rows, cols)), shape=shape).tocsr()
    M = sparse.coo_matrix((Me.ravel(), (rows, cols)), shape=shape).tocsr()

    interior = mesh.interior
    K = K[interior][:, interior]
    M = M[interior][:, interior]
    K = ((K + K.T) * 0.5).tocsr()
    M = ((M + M.T) * 0.5).tocsr()

    logger.info(f"Assembled Q1 operators: {len(interior)} dofs, K nnz={K.nnz}, M nnz={M.nnz}")
    return SparseOperatorPair(stiffness=K, mass=M, n=len(interior), interior=interior, mesh=mesh)


def full_mass(mesh: Mesh) -> sparse.csr_matrix:
    """Unrestricted mass matrix; its entries sum to the mesh area."""
    _, Me = element_matrices(mesh)
    cells = mesh.cells
    rows = np.broadcast_to(cells[:, :, None], Me.shape).ravel()
    cols = np.broadcast_to(cells[:, None, :], Me.shape).ravel()
    return sparse.coo_matrix((Me.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()


def symmetry_residual(matrix: sparse.spmatrix) -> float:
    """max |A − Aᵀ|."""
    diff = (matrix - matrix.T).tocoo()
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
