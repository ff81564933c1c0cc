"""Shared domains and solved eigenpairs; solves are session-scoped so each runs once."""

import pytest

from discretize.mesh import Resolution
from eigensolve.solver import pair, solve_domain
from geometry.domain import DomainSpec, domain_from_mapping


def flat_bump(N: float, eta: float) -> DomainSpec:
    """Flat top and bottom, left side x = −(η/π²) sin(πy), so |σ_L″| ≤ η."""
    return domain_from_mapping({
        'N': str(N), 'ETA': str(eta), 'DELTA': '0',
        'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi**2',
    })


def curved(N: float, delta: float, eta: float = 0.0) -> DomainSpec:
    """Bottom (δ/N³)cos x, top 1 − (δ/N³)cos x; with η > 0 also the left bump."""
    values = {
        'N': str(N), 'ETA': str(eta), 'DELTA': str(delta),
        'BOTTOM_FAMILY': 'trig_series', 'BOTTOM_COEFFICIENTS': '0, 1, scale, 0',
        'TOP_FAMILY': 'trig_series', 'TOP_COEFFICIENTS': '1, 1, -scale, 0',
    }
    if eta > 0:
        values.update({'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi**2'})
    return domain_from_mapping(values)


@pytest.fixture(scope='session')
def resolution():
    return Resolution(20, 40)


@pytest.fixture(scope='session')
def rectangle_spec():
    return DomainSpec.rectangle(10.0)


@pytest.fixture(scope='session')
def rectangle_solutions(rectangle_spec, resolution):
    """Three smallest pairs of [0,10]×[0,1] on 200×40 cells."""
    return solve_domain(rectangle_spec, resolution, k=3)


@pytest.fixture(scope='session')
def rectangle_second(rectangle_solutions):
    return pair(rectangle_solutions, 2)


@pytest.fixture(scope='session')
def flat_spec():
    return flat_bump(10.0, 0.05)


@pytest.fixture(scope='session')
def flat_second(flat_spec, resolution):
    return pair(solve_domain(flat_spec, resolution, k=2), 2)


@pytest.fixture(scope='session')
def curved_spec():
    return curved(6.0, 0.15)


@pytest.fixture(scope='session')
def curved_second(curved_spec, resolution):
    return pair(solve_domain(curved_spec, resolution, k=2), 2)
