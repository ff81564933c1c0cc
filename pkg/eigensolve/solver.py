"""Smallest Dirichlet eigenpairs of K u = μ M u by shift-invert Lanczos."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from core import config
from core.errors import DimensionMismatch, FactorizationFailure, InvalidParameter, InvalidVector, NoConvergence
from discretize.assembly import SparseOperatorPair, assemble
from discretize.interpolation import SolutionField
from discretize.mesh import Resolution, build_mesh
from geometry.domain import DomainSpec

logger = logging.getLogger(__name__)

MAX_PAIRS = 10
MIN_LANCZOS_VECTORS = 20
START_SEED = 20240517


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """
    One discrete eigenpair on the full node set.

    ``values`` are normalized to sup-norm 1 with the sign chosen positive at the
    node nearest (N/4, ½); ``residual`` is ‖Ku − μMu‖/‖Mu‖ on interior dofs.
    """

    mu: float
    values: np.ndarray
    index: int
    residual: float
    ops: SparseOperatorPair = field(repr=False)
    lanczos_vectors: int = 0

    @property
    def mesh(self):
        return self.ops.mesh

    @cached_property
    def interpolant(self) -> SolutionField:
        return SolutionField(self.ops.mesh, self.values)

    def flipped(self) -> 'EigenSolution':
        return EigenSolution(self.mu, -self.values, self.index, self.residual, self.ops, self.lanczos_vectors)

    def summary(self) -> dict:
        return {'index': self.index, 'mu': self.mu, 'residual': self.residual,
                'lanczos_vectors': self.lanczos_vectors}


def _shift_invert_operator(ops: SparseOperatorPair) -> LinearOperator:
    try:
        lu = splu(ops.stiffness.tocsc())
    except RuntimeError as e:
        raise FactorizationFailure(f"sparse LU of the stiffness matrix failed: {e}", n=ops.n)
    return LinearOperator((ops.n, ops.n), matvec=lu.solve, dtype=float)


def _normalize(ops: SparseOperatorPair, vector: np.ndarray) -> np.ndarray:
    full = ops.extend(vector)
    peak = np.max(np.abs(full))
    full = full / peak
    mesh = ops.mesh
    ref = mesh.nearest_node(mesh.spec.N / 4, 0.5)
    sign = np.sign(full[ref])
    if sign == 0:
        sign = np.sign(full[np.argmax(np.abs(full))])
    return full * sign


def residual_of(ops: SparseOperatorPair, mu: float, vector: np.ndarray) -> float:
    u = ops.restrict(vector)
    Mu = ops.mass @ u
    return float(np.linalg.norm(ops.stiffness @ u - mu * Mu) / np.linalg.norm(Mu))


def solve_smallest(
    ops: SparseOperatorPair,
    k: int = 2,
    tol: Optional[float] = None,
    maxiter: Optional[int] = None,
) -> List[EigenSolution]:
    """
    Compute the k smallest eigenpairs.

    A single sparse LU of K at shift 0 drives ARPACK's Lanczos iteration in
    shift-invert mode with at least max(2k+1, 20) basis vectors.

    Args:
        ops: assembled operators
        k: number of pairs, 1..10
        tol: residual tolerance in (0, 1e-6], default core.config.SOLVER_TOL
        maxiter: Lanczos restarts, default core.config.SOLVER_MAXITER

    Returns:
        Pairs in nondecreasing order of μ

    Raises:
        FactorizationFailure: LU of K failed
        NoConvergence: Lanczos did not converge or a residual exceeds tol
    """
    tol = config.SOLVER_TOL if tol is None else tol
    maxiter = config.SOLVER_MAXITER if maxiter is None else maxiter
    if not 1 <= k <= MAX_PAIRS:
        raise InvalidParameter(f"number of pairs must be in 1..{MAX_PAIRS}, got {k}", parameter='k')
    if not 0 < tol <= 1e-6:
        raise InvalidParameter(f"solver tolerance must be in (0, 1e-6], got {tol}", parameter='tol')
    if k >= ops.n:
        raise InvalidParameter(f"{k} pairs requested from {ops.n} dofs", parameter='k')

    OPinv = _shift_invert_operator(ops)
    ncv = min(ops.n, max(2 * k + 1, k + 2, MIN_LANCZOS_VECTORS))
    # fixed start vector; a constant one is orthogonal to odd modes on symmetric domains
    v0 = np.random.default_rng(START_SEED).uniform(0.5, 1.5, ops.n)
    try:
        mus, vectors = eigsh(ops.stiffness, k=k, M=ops.mass, sigma=0.0, which='LM', OPinv=OPinv,
                             ncv=ncv, tol=0.0, maxiter=maxiter, v0=v0)
    except ArpackNoConvergence as e:
        raise NoConvergence(f"Lanczos did not converge in {maxiter} iterations "
                            f"({len(e.eigenvalues)} of {k} pairs)", converged=len(e.eigenvalues))

    order = np.argsort(mus)
    solutions = []
    for rank, j in enumerate(order, start=1):
        mu = float(mus[j])
        residual = residual_of(ops, mu, vectors[:, j])
        if not residual <= tol:
            raise NoConvergence(f"pair {rank} residual {residual:.3e} exceeds tolerance {tol:.1e}",
                                index=rank, residual=residual)
        solutions.append(EigenSolution(mu=mu, values=_normalize(ops, vectors[:, j]), index=rank,
                                       residual=residual, ops=ops, lanczos_vectors=ncv))
        logger.debug(f"Pair {rank}: mu={mu:.12g}, residual={residual:.3e}")

    logger.info(f"Solved {k} smallest pairs on {ops.n} dofs: "
                + ", ".join(f"mu_{s.index}={s.mu:.8g}" for s in solutions))
    return solutions


def check_residual(ops: SparseOperatorPair, sol: EigenSolution) -> float:
    """
    ‖Ku − μMu‖₂ / ‖Mu‖₂ for a stored pair.

    Raises:
        DimensionMismatch: vector length fits neither the dofs nor the nodes
        InvalidVector: zero or non-finite vector
    """
    values = np.asarray(sol.values, dtype=float)
    u = ops.restrict(values)
    if not np.all(np.isfinite(u)) or not np.any(u):
        raise InvalidVector("eigenvector is zero or not finite; residual undefined", index=sol.index)
    return residual_of(ops, sol.mu, u)


def pair(solutions: List[EigenSolution], index: int) -> EigenSolution:
    """The pair with 1-based rank ``index``."""
    for sol in solutions:
        if sol.index == index:
            return sol
    raise DimensionMismatch(f"no eigenpair of rank {index} among {len(solutions)}")


def solve_domain(spec: DomainSpec, resolution: Optional[Resolution] = None, k: int = 2,
                 tol: Optional[float] = None) -> List[EigenSolution]:
    """Mesh, assemble and solve in one call; the mesh resolution follows ``resolution``."""
    resolution = resolution or Resolution(config.CELLS_PER_UNIT_X, config.CELLS_Y)
    mesh = build_mesh(spec, resolution.nx_for(spec.N), resolution.ny, resolution.blend_length)
    return solve_smallest(assemble(mesh), k=k, tol=tol)
