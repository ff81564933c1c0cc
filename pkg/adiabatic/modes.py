"""Cross-section Fourier modes of an eigenfunction and the residual field E.

In a frame with bottom ρ_B, top ρ_T and height h̃ = ρ_T − ρ_B, the eigenfunction
w is expanded as w(x,y) = Σ_k w_k(x) sin(kβ̃(x,y)) with β̃ = π(y − ρ_B)/h̃ and

    w_k(x) = (2/h̃) ∫ w(x,y) sin(kβ̃) dy.

The residual is E = w − w₁ sin β̃.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RectBivariateSpline, make_interp_spline

from core import config
from core.errors import InvalidParameter, OutsideDomain
from eigensolve.solver import EigenSolution
from geometry.frame import RotatedDomain, identity_frame

logger = logging.getLogger(__name__)

CROSS_SECTION_POINTS = 32
PARSEVAL_POINTS = 128
SAMPLES_PER_UNIT = 64
RESIDUAL_S_POINTS = 65
STRIP_WIDTH = 0.25
FD_STEP_X = 1e-3
X_TOL = 1e-12


class FramedSolution:
    """An eigenfunction read in frame coordinates: w(x̃, ỹ) = v(F(x̃, ỹ))."""

    def __init__(self, sol: EigenSolution, frame: Optional[RotatedDomain] = None):
        self.sol = sol
        self.frame = frame or identity_frame(sol.mesh.spec)
        self.field = sol.interpolant

    def derivatives(self, xt, yt, order: int = 1) -> Dict[str, np.ndarray]:
        x, y = self.frame.to_physical(xt, yt)
        d = self.field.derivatives(x, y, order=order, strict=False)
        out = {'v': d['v']}
        if order >= 1:
            out['x'], out['y'] = self.frame.pull_gradient(d['x'], d['y'])
        if order >= 2:
            out['xx'], out['xy'], out['yy'] = self.frame.pull_hessian(d['xx'], d['xy'], d['yy'])
        return out

    def __call__(self, xt, yt):
        return self.derivatives(xt, yt, order=0)['v']


def cross_section(frame: RotatedDomain, x, n: int = CROSS_SECTION_POINTS):
    """
    Gauss–Legendre nodes across the frame's cross-sections at abscissae ``x``.

    Returns:
        (y, s, weights): y of shape (len(x), n) with s = (y − ρ_B)/h̃ ∈ (0,1),
        and weights summing to 2 over the reference interval
    """
    t, weights = leggauss(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
    s = 0.5 * (t + 1.0)
    y = frame.rhoB(x) + s[None, :] * frame.height(x)
    return y, s, weights


def fourier_modes(framed: FramedSolution, ks: Sequence[int], xs, n: int = CROSS_SECTION_POINTS) -> np.ndarray:
    """w_k(x) for every k in ``ks`` and x in ``xs``, shape (len(ks), len(xs))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    y, s, weights = cross_section(framed.frame, xs, n)
    w = framed(np.broadcast_to(xs[:, None], y.shape), y)
    basis = np.sin(np.pi * np.outer(np.asarray(ks, dtype=float), s))  # (k, q)
    return np.einsum('xq,q,kq->kx', w, weights, basis)


def _check_x(x, N: float) -> None:
    x = np.atleast_1d(x)
    if np.any(x < -X_TOL) or np.any(x > N + X_TOL):
        raise OutsideDomain(f"x outside [0, {N}]", x=float(x[np.argmax((x < 0) | (x > N))]))


def fourier_mode(sol: EigenSolution, frame: Optional[RotatedDomain], k: int, x: float) -> float:
    """
    w_k(x) by 32-point Gauss–Legendre quadrature over the cross-section.

    Raises:
        OutsideDomain: x outside [0, N]
    """
    if k < 1:
        raise InvalidParameter(f"mode index must be at least 1, got {k}", parameter='k')
    _check_x(x, sol.mesh.spec.N)
    return float(fourier_modes(FramedSolution(sol, frame), [k], [x])[0, 0])


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """Sampled mode w_k on ``xs`` with derivative samples from a quintic spline."""

    k: int
    xs: np.ndarray
    wk: np.ndarray
    wk_d1: np.ndarray
    wk_d2: np.ndarray
    wk_d3: np.ndarray
    boundary_values: Tuple[float, float]
    spline: object = field(repr=False, default=None)

    @classmethod
    def from_samples(cls, k: int, xs: np.ndarray, wk: np.ndarray) -> 'ModeProfile':
        spline = make_interp_spline(xs, wk, k=5)
        return cls(
            k=k, xs=xs, wk=wk,
            wk_d1=spline(xs, 1), wk_d2=spline(xs, 2), wk_d3=spline(xs, 3),
            boundary_values=(float(wk[0]), float(wk[-1])),
            spline=spline,
        )

    def __call__(self, x, order: int = 0):
        result = self.spline(np.asarray(x, dtype=float), order)
        return float(result) if np.ndim(result) == 0 else result

    def flipped(self) -> 'ModeProfile':
        return ModeProfile.from_samples(self.k, self.xs, -self.wk)

    def to_rows(self) -> List[Tuple[float, ...]]:
        """CSV rows (x, w_k, w_k′, w_k″, w_k‴)."""
        return [tuple(map(float, row)) for row in zip(self.xs, self.wk, self.wk_d1, self.wk_d2, self.wk_d3)]


def sample_abscissae(x_range: Tuple[float, float], per_unit: int = SAMPLES_PER_UNIT) -> np.ndarray:
    lo, hi = x_range
    return np.linspace(lo, hi, int(np.ceil((hi - lo) * per_unit)) + 1)


def mode_profile(sol: EigenSolution, frame: Optional[RotatedDomain], k: int,
                 xs: Optional[np.ndarray] = None) -> ModeProfile:
    framed = FramedSolution(sol, frame)
    xs = sample_abscissae((0.0, sol.mesh.spec.N)) if xs is None else np.asarray(xs, dtype=float)
    return ModeProfile.from_samples(k, xs, fourier_modes(framed, [k], xs)[0])


class ResidualField:
    """
    E(x,y) = w − w₁ sin β̃ held as a quintic spline Ê(x, s) in the stretched
    coordinate s = (y − ρ_B(x))/h̃(x); physical derivatives follow by the chain
    rule, third x-derivatives by central differences.
    """

    KEYS = ('E', 'x', 'y', 'xx', 'xy', 'yy', 'xxx', 'xxy', 'xyy', 'yyy')

    def __init__(self, frame: RotatedDomain, xs: np.ndarray, s: np.ndarray, values: np.ndarray):
        self.frame = frame
        self.xs = xs
        self.s = s
        self.values = values
        self.x_range = (float(xs[0]), float(xs[-1]))
        self.spline = RectBivariateSpline(xs, s, values, kx=5, ky=5, s=0)

    def _hat(self, x, s, dx, ds):
        return self.spline.ev(x, s, dx=dx, dy=ds)

    def _second_order(self, x, y) -> Dict[str, np.ndarray]:
        frame = self.frame
        h, h1, h2 = frame.height(x), frame.height(x, 1), frame.height(x, 2)
        b1, b2 = frame.rhoB(x, 1), frame.rhoB(x, 2)
        s = (y - frame.rhoB(x)) / h
        s_x = -(b1 + s * h1) / h
        s_xx = -(b2 + s_x * h1 + s * h2) / h + (b1 + s * h1) * h1 / h ** 2

        E = self._hat(x, s, 0, 0)
        Ex, Es = self._hat(x, s, 1, 0), self._hat(x, s, 0, 1)
        Exx, Exs, Ess = self._hat(x, s, 2, 0), self._hat(x, s, 1, 1), self._hat(x, s, 0, 2)
        Esss = self._hat(x, s, 0, 3)
        return {
            'E': E,
            'x': Ex + Es * s_x,
            'y': Es / h,
            'xx': Exx + 2 * Exs * s_x + Ess * s_x ** 2 + Es * s_xx,
            'xy': (Exs + Ess * s_x) / h - Es * h1 / h ** 2,
            'yy': Ess / h ** 2,
            'yyy': Esss / h ** 3,
        }

    def derivatives(self, x, y, order: int = 3) -> Dict[str, np.ndarray]:
        """E and its derivatives to ``order`` ≤ 3 at frame points (x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        out = self._second_order(x, y)
        if order < 3:
            out.pop('yyy')
            return out
        lo, hi = self.x_range
        xp = np.minimum(x + FD_STEP_X, hi)
        xm = np.maximum(x - FD_STEP_X, lo)
        plus, minus = self._second_order(xp, y), self._second_order(xm, y)
        width = xp - xm
        out['xxx'] = (plus['xx'] - minus['xx']) / width
        out['xxy'] = (plus['xy'] - minus['xy']) / width
        out['xyy'] = (plus['yy'] - minus['yy']) / width
        return out

    def __call__(self, x, y):
        return self._second_order(np.asarray(x, dtype=float), np.asarray(y, dtype=float))['E']

    def region_points(self, xs: np.ndarray, region: str = 'all', n: int = 33):
        """
        Sample points of the cross-sections restricted to a region.

        ``strip`` is S(x) = [ρ_B, ρ_B + ¼] ∪ [ρ_T − ¼, ρ_T], ``bottom`` its lower
        half; ``complement`` is the part of the cross-section between the two strips.
        """
        xs = np.atleast_1d(xs)[:, None]
        bottom, top = self.frame.rhoB(xs), self.frame.rhoT(xs)
        u = np.linspace(0.0, 1.0, n)[None, :]
        if region == 'all':
            y = bottom + u * (top - bottom)
        elif region == 'strip':
            y = np.concatenate([bottom + u * STRIP_WIDTH, top - u * STRIP_WIDTH], axis=1)
        elif region == 'bottom':
            y = bottom + u * STRIP_WIDTH
        elif region == 'complement':
            y = (bottom + STRIP_WIDTH) + u * (top - bottom - 2 * STRIP_WIDTH)
        else:
            raise InvalidParameter(f"unknown region {region!r}", parameter='region')
        return np.broadcast_to(xs, y.shape), y

    def cross_section_sups(self, key: str = 'E', region: str = 'all', x_range: Optional[Tuple[float, float]] = None,
                           per_unit: int = SAMPLES_PER_UNIT) -> Tuple[np.ndarray, np.ndarray]:
        """(xs, sup over the region of |∂^key E|) per cross-section."""
        lo, hi = x_range or self.x_range
        xs = sample_abscissae((max(lo, self.x_range[0]), min(hi, self.x_range[1])), per_unit)
        X, Y = self.region_points(xs, region)
        values = self.derivatives(X, Y, order=3 if len(key) == 3 else 2)[key]
        return xs, np.max(np.abs(values), axis=1)

    def sup(self, key: str = 'E', region: str = 'all', x_range: Optional[Tuple[float, float]] = None) -> float:
        return float(np.max(self.cross_section_sups(key, region, x_range)[1]))

    def sup_at(self, key: str, xs, region: str = 'all') -> float:
        """sup of |∂^key E| over the region's cross-sections at the given abscissae."""
        X, Y = self.region_points(np.clip(np.atleast_1d(xs), *self.x_range), region)
        values = self.derivatives(X, Y, order=3 if len(key) == 3 else 2)[key]
        return float(np.max(np.abs(values)))

    def gradient_sups(self, x_range: Optional[Tuple[float, float]] = None) -> Dict[str, float]:
        """sup |∇^j E| for j ≤ 3, each the largest component magnitude."""
        groups = {0: ('E',), 1: ('x', 'y'), 2: ('xx', 'xy', 'yy'), 3: ('xxx', 'xxy', 'xyy', 'yyy')}
        return {f'order{j}': max(self.sup(key, 'all', x_range) for key in keys) for j, keys in groups.items()}

    def orthogonality_defect(self, framed: FramedSolution, xs, profile: ModeProfile) -> np.ndarray:
        """|∫ E sin β̃ dy| per cross-section, E taken from the solution directly."""
        y, s, weights = cross_section(self.frame, xs)
        X = np.broadcast_to(np.atleast_1d(xs)[:, None], y.shape)
        E = framed(X, y) - profile(np.atleast_1d(xs))[:, None] * np.sin(np.pi * s)[None, :]
        h = self.frame.height(np.atleast_1d(xs))
        return np.abs(0.5 * h * np.einsum('xq,q,q->x', E, weights, np.sin(np.pi * s)))


def decompose(
    sol: EigenSolution,
    frame: Optional[RotatedDomain] = None,
    kmax: Optional[int] = None,
    x_range: Optional[Tuple[float, float]] = None,
) -> Tuple[List[ModeProfile], ResidualField]:
    """
    Fourier-mode profiles w_1..w_kmax and the residual field E.

    The identity frame is sampled on [0, N]; rotated frames on [1, N−1], where
    their cross-sections stay inside Ω.
    """
    kmax = config.KMAX if kmax is None else kmax
    if kmax < 2:
        raise InvalidParameter(f"kmax must be at least 2, got {kmax}", parameter='kmax')
    framed = FramedSolution(sol, frame)
    N = sol.mesh.spec.N
    if x_range is None:
        x_range = (0.0, N) if framed.frame.is_identity else (1.0, N - 1.0)
    xs = sample_abscissae(x_range)

    modes = fourier_modes(framed, range(1, kmax + 1), xs)
    profiles = [ModeProfile.from_samples(k, xs, modes[k - 1]) for k in range(1, kmax + 1)]

    s = np.linspace(0.0, 1.0, RESIDUAL_S_POINTS)
    frame = framed.frame
    Y = frame.rhoB(xs)[:, None] + s[None, :] * frame.height(xs)[:, None]
    X = np.broadcast_to(xs[:, None], Y.shape)
    E = framed(X, Y) - modes[0][:, None] * np.sin(np.pi * s)[None, :]
    residual = ResidualField(frame, xs, s, E)

    inner = (max(x_range[0], 1.0), min(x_range[1], N - 1.0))
    logger.info(f"Decomposed into {kmax} modes on [{x_range[0]:g}, {x_range[1]:g}]: "
                f"sup|E| on [{inner[0]:g}, {inner[1]:g}] = {residual.sup('E', 'all', inner):.3e}")
    return profiles, residual


def parseval_defect(framed: FramedSolution, profiles: Sequence[ModeProfile], xs) -> np.ndarray:
    """
    |∫w² dy − (h̃/2) Σ_k w_k²| per cross-section, relative to the largest ∫w² over ``xs``.

    The normalization keeps cross-sections through the nodal line, where ∫w²
    itself is small, from dominating the ratio.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    y, s, weights = cross_section(framed.frame, xs, PARSEVAL_POINTS)
    w = framed(np.broadcast_to(xs[:, None], y.shape), y)
    h = framed.frame.height(xs)
    mass = 0.5 * h * (w ** 2 @ weights)
    series = 0.5 * h * sum(profile(xs) ** 2 for profile in profiles)
    return np.abs(mass - series) / np.max(mass)
