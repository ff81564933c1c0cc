"""Closed forms and Duhamel reconstruction of the mode equation.

For k ≥ 2 the mode equation reads w″ − μ_k² w = F with μ_k² = λ_k − μ, solved
with the Dirichlet Green kernel. For k = 1 it reads w″ + μ₁² w = F with
μ₁² = μ − λ₁, solved backwards from x = N with W₁(x) = sin(μ₁x)/μ₁.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from adiabatic.forcing import forcing_terms
from adiabatic.modes import FramedSolution, ModeProfile
from core.errors import InvalidParameter, ResonantDenominator
from eigensolve.solver import EigenSolution
from geometry.frame import RotatedDomain

logger = logging.getLogger(__name__)

RESONANCE_TOL = 1e-8
QUAD_EPSABS = 1e-10
QUAD_LIMIT = 200


def transverse_eigenvalue(k: int, height: float = 1.0, ny: Optional[int] = None) -> float:
    """
    λ_k of −d²/dy² on a cross-section of the given height.

    With ``ny`` the Q1 consistent-mass value on ny uniform cells,
    (6/Δ²)(1 − cos θ)/(2 + cos θ) with θ = kπ/ny and Δ = height/ny.
    """
    if ny is None:
        return float((np.pi * k / height) ** 2)
    theta = k * np.pi / ny
    delta = height / ny
    return float(6.0 / delta ** 2 * (1.0 - np.cos(theta)) / (2.0 + np.cos(theta)))


def W1(x, mu1: float):
    return np.sin(mu1 * np.asarray(x)) / mu1


def _sinh_ratio(a, b, c):
    """sinh(a)·sinh(b)/sinh(c) for 0 ≤ a, b ≤ c with c > 0, without overflow."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return 0.5 * np.exp(a + b - c) * (-np.expm1(-2 * a)) * (-np.expm1(-2 * b)) / (-np.expm1(-2 * c))


def _homogeneous(mu_k: float, N: float, alpha, x):
    """[α₁ sinh(μ(N−x)) + α₂ sinh(μx)] / sinh(μN)."""
    x = np.asarray(x, dtype=float)
    denom = -np.expm1(-2 * mu_k * N)
    left = np.exp(-mu_k * x) * (-np.expm1(-2 * mu_k * (N - x))) / denom
    right = np.exp(-mu_k * (N - x)) * (-np.expm1(-2 * mu_k * x)) / denom
    return alpha[0] * left + alpha[1] * right


def flat_closed_form(k: int, bvals, mu: float, N: float, x):
    """
    Mode k on a flat-topped strip with no forcing.

    k ≥ 2: v_k = [v_k(0) sinh(μ_k(N−x)) + v_k(N) sinh(μ_k x)] / sinh(μ_k N), μ_k = √(π²k² − μ).
    k = 1: v₁ = v₁(0) cos(μ₁x) + A₁ sin(μ₁x), A₁ = [v₁(N) − v₁(0) cos(μ₁N)] / sin(μ₁N), μ₁ = √(μ − π²).

    Raises:
        ResonantDenominator: |sin(μ₁N)| < 1e-8
        InvalidParameter: μ outside the range where μ₁ or μ_k is real
    """
    a, b = float(bvals[0]), float(bvals[1])
    if k == 1:
        if mu <= np.pi ** 2:
            raise InvalidParameter(f"mu={mu} must exceed pi^2 for the k=1 closed form", parameter='mu')
        mu1 = np.sqrt(mu - np.pi ** 2)
        denominator = np.sin(mu1 * N)
        if abs(denominator) < RESONANCE_TOL:
            raise ResonantDenominator(f"sin(mu1 N) = {denominator:.3e} is resonant", mu1=float(mu1), N=N)
        A1 = (b - a * np.cos(mu1 * N)) / denominator
        result = a * np.cos(mu1 * np.asarray(x, dtype=float)) + A1 * np.sin(mu1 * np.asarray(x, dtype=float))
    else:
        if np.pi ** 2 * k ** 2 <= mu:
            raise InvalidParameter(f"mu={mu} is not below pi^2 k^2 for k={k}", parameter='mu')
        mu_k = np.sqrt(np.pi ** 2 * k ** 2 - mu)
        result = _homogeneous(mu_k, N, (a, b), x)
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True, eq=False)
class DuhamelData:
    """Ingredients of one mode's Duhamel reconstruction."""

    k: int
    mu: float
    mu_k: float
    x_star: float
    xs: np.ndarray
    Fk_samples: np.ndarray
    boundary_values: tuple
    A_k: float = float('nan')
    B_k: float = float('nan')
    A1: float = float('nan')
    closure: str = 'slope'
    end_slope: float = float('nan')
    forcing: CubicSpline = field(default=None, repr=False)

    @property
    def transverse(self) -> float:
        """λ_k the reconstruction used."""
        return self.mu - self.mu_k ** 2 if self.k == 1 else self.mu + self.mu_k ** 2

    @property
    def gap_ok(self) -> bool:
        """μ_k ≥ π√(k² − 2) for k ≥ 2."""
        return self.k == 1 or self.mu_k >= np.pi * np.sqrt(self.k ** 2 - 2) - 1e-12

    def to_dict(self) -> dict:
        return {'k': self.k, 'mu': self.mu, 'mu_k': self.mu_k, 'x_star': self.x_star,
                'alpha': list(self.boundary_values), 'A_k': self.A_k, 'B_k': self.B_k, 'A1': self.A1,
                'closure': self.closure, 'gap_ok': self.gap_ok,
                'sup_Fk': float(np.max(np.abs(self.Fk_samples)))}


def _integral(f, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    value, _ = quad(f, a, b, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT)
    return value


def duhamel_data(
    sol: EigenSolution,
    profile: ModeProfile,
    frame: Optional[RotatedDomain] = None,
    x_star: Optional[float] = None,
    transverse: str = 'continuous',
    closure: str = 'slope',
) -> DuhamelData:
    """
    Sample F_k on the profile abscissae and solve for the boundary constants.

    Args:
        sol: eigenpair whose mode is reconstructed
        profile: measured w_k, supplying α₁ = w_k(0), α₂ = w_k(N) and w₁′(N)
        frame: frame of the decomposition, identity when None
        x_star: freezing point, default N/2
        transverse: 'continuous' for π²k²/h̃(x*)², 'discrete' for the Q1 value on the mesh's ny cells
        closure: for k = 1, 'slope' (A₁ = −w₁′(N)/μ₁) or 'boundary' (match w₁(0))

    Raises:
        ResonantDenominator: boundary closure with |sin(μ₁N)| < 1e-8
    """
    framed = FramedSolution(sol, frame)
    N = sol.mesh.spec.N
    x_star = N / 2 if x_star is None else float(x_star)
    k = profile.k
    if transverse not in ('continuous', 'discrete'):
        raise InvalidParameter(f"unknown transverse mode {transverse!r}", parameter='transverse')
    if closure not in ('slope', 'boundary'):
        raise InvalidParameter(f"unknown closure {closure!r}", parameter='closure')

    h_star = float(framed.frame.height(x_star))
    lam = transverse_eigenvalue(k, h_star, sol.mesh.ny if transverse == 'discrete' else None)
    parts = forcing_terms(framed, k, profile.xs, x_star, profile)
    # the detuning term is measured against λ_k(x) of the same kind as λ_k(x*)
    if transverse == 'discrete':
        heights = framed.frame.height(profile.xs)
        lam_x = np.array([transverse_eigenvalue(k, hx, sol.mesh.ny) for hx in heights])
        parts = ((lam_x - lam) * profile.wk, parts[1], parts[2])
    F = parts[0] + parts[1] + parts[2]
    spline = CubicSpline(profile.xs, F)
    alpha = profile.boundary_values
    mu = sol.mu

    if k == 1:
        if mu <= lam:
            raise InvalidParameter(f"mu={mu} does not exceed the first transverse eigenvalue {lam}", parameter='mu')
        mu1 = float(np.sqrt(mu - lam))
        end_slope = float(profile(N, 1))
        if closure == 'slope':
            A1 = -end_slope / mu1
        else:
            denominator = np.sin(mu1 * N)
            if abs(denominator) < RESONANCE_TOL:
                raise ResonantDenominator(f"sin(mu1 N) = {denominator:.3e} is resonant", mu1=mu1, N=N)
            integral = _integral(lambda t: W1(t, mu1) * spline(t), 0.0, N)
            A1 = float((alpha[0] - integral - alpha[1] * np.cos(mu1 * N)) / denominator)
            if abs(denominator) < 1e-3:
                logger.warning(f"Boundary closure near resonance: sin(mu1 N) = {denominator:.2e}")
        data = DuhamelData(k=1, mu=mu, mu_k=mu1, x_star=x_star, xs=profile.xs, Fk_samples=F,
                           boundary_values=alpha, A1=A1, closure=closure, end_slope=end_slope, forcing=spline)
    else:
        if lam <= mu:
            raise InvalidParameter(f"transverse eigenvalue {lam} does not exceed mu={mu} for k={k}", parameter='mu')
        mu_k = float(np.sqrt(lam - mu))
        # sinh(mu_k(N - t)) / sinh(mu_k N)
        ratio_integral = _integral(lambda t: np.exp(-mu_k * t) * (-np.expm1(-2 * mu_k * (N - t)))
                                   / (-np.expm1(-2 * mu_k * N)) * spline(t), 0.0, N)
        decay = np.exp(-mu_k * N)
        A_k = float(-ratio_integral / (2 * mu_k) + decay * (alpha[1] - decay * alpha[0]) / (1 - decay ** 2))
        data = DuhamelData(k=k, mu=mu, mu_k=mu_k, x_star=x_star, xs=profile.xs, Fk_samples=F,
                           boundary_values=alpha, A_k=A_k, B_k=float(alpha[0] - A_k), closure=closure,
                           forcing=spline)

    logger.debug(f"Duhamel data k={k}: mu_k={data.mu_k:.6g}, alpha=({alpha[0]:.3e}, {alpha[1]:.3e}), "
                 f"sup|F|={np.max(np.abs(F)):.3e}")
    return data


def duhamel_reconstruct(data: DuhamelData, N: float, xs: Sequence[float]) -> np.ndarray:
    """
    Evaluate the reconstructed mode at ``xs``.

    k = 1: w₁(x) = ∫_x^N W₁(t−x) F(t) dt + A₁ sin(μ₁(N−x)) + α₂ cos(μ₁(N−x)).
    k ≥ 2: w_k(x) = ∫₀^N G(x,t) F(t) dt + homogeneous part, with
    G(x,t) = −sinh(μ_k x_<) sinh(μ_k(N − x_>)) / (μ_k sinh(μ_k N)).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    F = data.forcing
    alpha = data.boundary_values
    m = data.mu_k
    out = np.empty_like(xs)

    if data.k == 1:
        for i, x in enumerate(xs):
            integral = _integral(lambda t: W1(t - x, m) * F(t), x, N)
            out[i] = integral + data.A1 * np.sin(m * (N - x)) + alpha[1] * np.cos(m * (N - x))
        return out

    for i, x in enumerate(xs):
        left = _integral(lambda t: _sinh_ratio(m * t, m * (N - x), m * N) * F(t), 0.0, x)
        right = _integral(lambda t: _sinh_ratio(m * x, m * (N - t), m * N) * F(t), x, N)
        out[i] = -(left + right) / m
    return out + _homogeneous(m, N, alpha, xs)
