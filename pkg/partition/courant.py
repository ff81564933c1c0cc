"""Courant-sharp check for the k-th eigenfunction of a long domain."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from core.errors import InvalidParameter
from discretize.mesh import Resolution
from eigensolve.solver import pair, solve_domain
from geometry.domain import DomainSpec
from nodal.domains import cut_locations, nodal_domain_count

logger = logging.getLogger(__name__)

MIN_K = 2
MAX_K = 6


@dataclass(frozen=True)
class CourantResult:
    k: int
    count: int
    mu: float
    cut_locations: List[float] = field(default_factory=list)
    expected: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.count == self.k

    @property
    def max_cut_error(self) -> float:
        if len(self.cut_locations) != len(self.expected):
            return float('inf')
        if not self.expected:
            return 0.0
        return float(np.max(np.abs(np.subtract(self.cut_locations, self.expected))))

    def to_dict(self) -> dict:
        return {'k': self.k, 'count': self.count, 'passed': self.passed, 'mu': self.mu,
                'cut_locations': self.cut_locations, 'expected': self.expected,
                'max_cut_error': self.max_cut_error}


def check_ordering(N: float, k: int) -> None:
    """
    The rectangle's k-th eigenfunction must be sin(kπx/N) sin(πy), i.e.
    π²(k²/N² + 1) below π²(1/N² + 4).
    """
    if not MIN_K <= k <= MAX_K:
        raise InvalidParameter(f"k must be in {MIN_K}..{MAX_K}, got {k}", parameter='k')
    if k ** 2 / N ** 2 + 1 >= 1 / N ** 2 + 4:
        raise InvalidParameter(f"N={N} is too short for the k={k} eigenfunction to have k-1 vertical lines",
                               parameter='N')


def courant_sharp_check(spec: DomainSpec, k: int, resolution: Optional[Resolution] = None,
                        tol: Optional[float] = None) -> CourantResult:
    """Nodal domains of the k-th eigenpair and the mean x of its k−1 nodal lines."""
    check_ordering(spec.N, k)
    sol = pair(solve_domain(spec, resolution, k=k, tol=tol), k)
    count = nodal_domain_count(sol)
    cuts = cut_locations(sol, k)
    result = CourantResult(k=k, count=count, mu=sol.mu, cut_locations=cuts,
                           expected=[j * spec.N / k for j in range(1, k)])
    log = logger.info if result.passed else logger.warning
    log(f"Courant check k={k}: {count} nodal domains, cuts {np.round(cuts, 6).tolist()}")
    return result
