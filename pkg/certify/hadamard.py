"""First-order effect of the left side on the boundary values w_k(0) when top and bottom are flat."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from adiabatic.modes import fourier_mode
from core.errors import InvalidParameter, NotFlat
from eigensolve.solver import EigenSolution
from geometry.domain import DomainSpec

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 64
# |main| <= MAIN_TERM_RTOL * max(1, |direct|) counts as a vanishing main term
MAIN_TERM_RTOL = 1e-12


@dataclass(frozen=True)
class HadamardResult:
    k: int
    direct: float
    main: float
    err: float

    @property
    def relative(self) -> float:
        if abs(self.main) <= MAIN_TERM_RTOL * max(1.0, abs(self.direct)):
            return float('nan')
        return self.err / abs(self.main)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['relative'] = self.relative
        return data


def main_term(spec: DomainSpec, k: int, n: int = QUADRATURE_POINTS) -> float:
    """(4π/N) ∫₀¹ σ_L(y) sin(πy) sin(kπy) dy by Gauss–Legendre quadrature."""
    t, weights = leggauss(n)
    y = 0.5 * (t + 1.0)
    integrand = spec.left(y) * np.sin(np.pi * y) * np.sin(k * np.pi * y)
    return float(4 * np.pi / spec.N * 0.5 * (integrand @ weights))


def hadamard_check(spec: DomainSpec, sol: EigenSolution, k: int) -> HadamardResult:
    """
    Measured w_k(0) against the main term of its first-order expansion.

    The eigenfunction is rescaled to the normalization w ≈ sin(μ₁(N−x)) sin(πy)
    of the expansion, by matching w₁ at x = N/4.

    Raises:
        NotFlat: δ ≠ 0 or the top or bottom is not flat
    """
    if spec.delta != 0 or not spec.is_flat:
        raise NotFlat(f"Hadamard check needs flat top and bottom, got delta={spec.delta}", delta=spec.delta)
    if k < 1:
        raise InvalidParameter(f"mode index must be at least 1, got {k}", parameter='k')
    N = spec.N
    if sol.mu <= np.pi ** 2:
        raise InvalidParameter(f"mu={sol.mu} does not exceed pi^2", parameter='mu')
    mu1 = np.sqrt(sol.mu - np.pi ** 2)
    reference = fourier_mode(sol, None, 1, N / 4)
    scale = np.sin(mu1 * 3 * N / 4) / reference

    direct = float(fourier_mode(sol, None, k, 0.0) * scale)
    main = main_term(spec, k)
    result = HadamardResult(k=k, direct=direct, main=main, err=abs(direct - main))
    logger.info(f"Hadamard k={k}: direct={direct:.6e}, main={main:.6e}, err={result.err:.3e}")
    return result
