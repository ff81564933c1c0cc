"""Forcing term of the mode equation w_k″ + (μ − π²k²/h̃(x*)²) w_k = F_k."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from adiabatic.modes import FramedSolution, ModeProfile, cross_section
from eigensolve.solver import EigenSolution
from geometry.domain import DomainSpec
from geometry.frame import RotatedDomain

logger = logging.getLogger(__name__)


def _beta_x_terms(frame: RotatedDomain, x: np.ndarray, y: np.ndarray):
    """∂ₓβ̃, ∂ₓ²β̃ and ∂ₓ∂_yβ̃ on cross-section points."""
    h, h1, h2 = frame.height(x), frame.height(x, 1), frame.height(x, 2)
    b, b1, b2 = frame.rhoB(x), frame.rhoB(x, 1), frame.rhoB(x, 2)
    P = b1 * h + (y - b) * h1
    P_x = b2 * h + (y - b) * h2
    beta_x = -np.pi * P / h ** 2
    beta_xx = -np.pi * P_x / h ** 2 + 2 * np.pi * P * h1 / h ** 3
    beta_xy = -np.pi * h1 / h ** 2
    return beta_x, beta_xx, beta_xy


def forcing_terms(framed: FramedSolution, k: int, xs, x_star: float, profile: Optional[ModeProfile] = None):
    """
    The three parts of F_k at ``xs``.

    Returns:
        (detuning, first_order, second_order): π²k²(h̃⁻² − h̃(x*)⁻²) w_k,
        2∫∂ₓw ∂ₓe_k dy and ∫ w ∂ₓ²e_k dy, the k²(∂ₓβ̃)² piece of the last one
        integrated by parts in y
    """
    frame = framed.frame
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    y, s, weights = cross_section(frame, xs)
    X = np.broadcast_to(xs[:, None], y.shape)
    d = framed.derivatives(X, y, order=1)
    w, w_x, w_y = d['v'], d['x'], d['y']

    h = frame.height(X)
    h1, h2 = frame.height(X, 1), frame.height(X, 2)
    beta = np.pi * s[None, :]
    sin_k, cos_k = np.sin(k * beta), np.cos(k * beta)
    beta_x, beta_xx, beta_xy = _beta_x_terms(frame, X, y)

    de_k = -(2 * h1 / h ** 2) * sin_k + (2 * k / h) * cos_k * beta_x
    smooth_part = ((-2 * h2 / h ** 2 + 4 * h1 ** 2 / h ** 3) * sin_k
                   - (4 * h1 / h ** 2) * k * cos_k * beta_x
                   + (2 * k / h) * cos_k * beta_xx)
    by_parts = -(2 * k / np.pi) * (w_y * beta_x ** 2 + 2 * w * beta_x * beta_xy) * cos_k

    jac = 0.5 * frame.height(xs)
    first_order = 2 * jac * ((w_x * de_k) @ weights)
    second_order = jac * ((w * smooth_part + by_parts) @ weights)

    if profile is not None:
        wk = profile(xs)
    else:
        wk = (w * sin_k) @ weights
    h_star = frame.height(x_star)
    detuning = np.pi ** 2 * k ** 2 * (1.0 / frame.height(xs) ** 2 - 1.0 / h_star ** 2) * wk
    return detuning, first_order, second_order


def forcing_Fk(spec: DomainSpec, frame: Optional[RotatedDomain], sol: EigenSolution, k: int, x, x_star: float):
    """
    F_k(x) with the freezing point x*.

    All cross-section integrals use 32-point Gauss–Legendre quadrature. Vectorized
    over ``x``; a scalar x gives a float.
    """
    framed = FramedSolution(sol, frame)
    parts = forcing_terms(framed, k, x, x_star)
    total = parts[0] + parts[1] + parts[2]
    return float(total[0]) if np.ndim(x) == 0 else total


def forcing_bound(frame: RotatedDomain, k: int, x, x_star: float) -> np.ndarray:
    """k·(|h̃⁻² − h̃(x*)⁻²| + |ρ_T′| + |ρ_B′| + |ρ_T″| + |ρ_B″|), the shape of the F_k estimate."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    detune = np.abs(1.0 / frame.height(x) ** 2 - 1.0 / frame.height(x_star) ** 2)
    slopes = sum(np.abs(curve(x, order)) for curve in (frame.rhoT, frame.rhoB) for order in (1, 2))
    return k * (detune + slopes)


def ode_residual(profile: ModeProfile, mu: float, frame: RotatedDomain, x_star: float, forcing: np.ndarray,
                 transverse: Optional[float] = None) -> np.ndarray:
    """
    w_k″ + (μ − λ_k) w_k − F_k on the profile abscissae.

    ``transverse`` overrides λ_k = π²k²/h̃(x*)², e.g. with the discrete value.
    """
    lam = np.pi ** 2 * profile.k ** 2 / frame.height(x_star) ** 2 if transverse is None else transverse
    return profile.wk_d2 + (mu - lam) * profile.wk - forcing
