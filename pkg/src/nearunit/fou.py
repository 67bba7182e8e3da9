"""Discretised limit functionals on the uniform grid ``t_i = i/m`` over [0, 1].

Paths are plain arrays of ``m + 1`` grid values; every function also accepts
a 2-D batch with one path per row.  Driver paths start at 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import DegenerateDriverError, ValidationError
from .noise import check_hurst, sample_fgn

NEGATIVE_GAMMA_WARN = -10.0


def _grid(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] < 2:
        raise ValidationError("a grid path needs at least two nodes")
    return z


def _cell_weights(c: float) -> tuple[float, float]:
    """Trapezoid-in-cell weights (per unit h) under the kernel ``e^{-c (1 - r)}``.

    ``int_0^1 e^{-c(1-r)} ((1-r) z_0 + r z_1) dr = w0 z_0 + w1 z_1``.
    """
    if abs(c) < 1e-3:
        # series of (1 - e^{-c}(1 + c)) / c^2 and (1 - e^{-c}) / c
        w0 = 0.5 - c / 3.0 + c * c / 8.0 - c**3 / 30.0 + c**4 / 144.0
        a = 1.0 - c / 2.0 + c * c / 6.0 - c**3 / 24.0 + c**4 / 120.0
    else:
        a = -math.expm1(-c) / c
        w0 = (a - math.exp(-c)) / c
    return w0, a - w0


def ou_transform(z, gamma: float) -> np.ndarray:
    """``Z_t - gamma int_0^t e^{-gamma(t-s)} Z_s ds`` on the grid, in O(m).

    The convolution integral follows ``I_{i+1} = e^{-gamma/m} I_i + cell``
    where the cell term integrates the linear interpolant of ``Z`` against the
    exponential kernel exactly.
    """
    z = _grid(z)
    gamma = float(gamma)
    if gamma == 0.0:
        return z.copy()
    if gamma < NEGATIVE_GAMMA_WARN:
        warnings.warn(
            f"gamma={gamma} < {NEGATIVE_GAMMA_WARN}: exponential growth degrades accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    m = z.shape[-1] - 1
    h = 1.0 / m
    c = gamma * h
    w0, w1 = _cell_weights(c)
    cell = h * (w0 * z[..., :-1] + w1 * z[..., 1:])
    integral = np.zeros_like(z)
    integral[..., 1:] = signal.lfilter([1.0], [1.0, -math.exp(-c)], cell, axis=-1)
    return z - gamma * integral


def trapezoid_l2(z) -> np.ndarray | float:
    """Trapezoid rule for ``int_0^1 z^2``."""
    z = _grid(z)
    m = z.shape[-1] - 1
    sq = z * z
    out = (np.sum(sq[..., 1:-1], axis=-1) + 0.5 * (sq[..., 0] + sq[..., -1])) / m
    return float(out) if np.ndim(out) == 0 else out


def theta_functional(z_gamma) -> np.ndarray:
    """``((int Z^2)^(-1/2), (int Z^2)^(-1))``; shape ``(2,)`` or ``(reps, 2)``."""
    l2 = np.asarray(trapezoid_l2(z_gamma))
    if np.any(l2 <= 0.0):
        raise DegenerateDriverError("driver path has zero L2 norm on the grid")
    inv = 1.0 / l2
    return np.stack([np.sqrt(inv), inv], axis=-1)


def limit_scalar_F(H: float, gamma: float, L: float, sigma2: float, z_gamma) -> np.ndarray | float:
    """Regime-dependent numerator ``F(H, gamma, L, sigma^2)``.

    ``z_gamma`` is the OU transform of the standard fBm driver (not of
    ``L B^H``).  For ``H < 1/2`` the value is the constant ``-(sigma/L)^2/2``.
    """
    H = check_hurst(H)
    ratio2 = sigma2 / (L * L)
    if H < 0.5:
        shape = np.shape(z_gamma)[:-1]
        return -0.5 * ratio2 if not shape else np.full(shape, -0.5 * ratio2)
    z_gamma = _grid(z_gamma)
    end2 = z_gamma[..., -1] ** 2
    f = 0.5 * end2 + gamma * np.asarray(trapezoid_l2(z_gamma))
    if H == 0.5:
        f = f - 0.5 * ratio2
    return float(f) if np.ndim(f) == 0 else f


def rs_integral(g, h, rule: str = "left") -> np.ndarray | float:
    """Riemann-Stieltjes sum of ``int g dh`` on a common grid.

    ``rule="left"`` evaluates ``g`` at the left node of each cell (required for
    Ito integrals).  ``rule="trapezoid"`` averages the two endpoints; for Young
    integrals it removes the ``sum (dh)^2 / 2`` bias of the left rule, which
    decays only like ``m^(1-2H)``.
    """
    g = _grid(g)
    h = _grid(h)
    if g.shape[-1] != h.shape[-1]:
        raise ValidationError("g and h must live on the same grid")
    dh = np.diff(h, axis=-1)
    if rule == "left":
        tags = g[..., :-1]
    elif rule == "trapezoid":
        tags = 0.5 * (g[..., :-1] + g[..., 1:])
    else:
        raise ValidationError(f"unknown rule {rule!r}")
    out = np.sum(tags * dh, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def ito_sum_tau_bar(w, gamma: float) -> np.ndarray | float:
    """``int W_gamma dW / sqrt(int W_gamma^2)`` with a left-point Ito sum."""
    w = _grid(w)
    w_gamma = ou_transform(w, gamma)
    den = np.asarray(trapezoid_l2(w_gamma))
    if np.any(den <= 0.0):
        raise DegenerateDriverError("W_gamma has zero L2 norm on the grid")
    out = np.asarray(rs_integral(w_gamma, w)) / np.sqrt(den)
    return float(out) if out.ndim == 0 else out


def unit_root_t_limit(w) -> np.ndarray | float:
    """Unit-root t-statistic limit ``(W_1^2 - 1) / 2 / sqrt(int W^2)``."""
    w = _grid(w)
    den = np.asarray(trapezoid_l2(w))
    if np.any(den <= 0.0):
        raise DegenerateDriverError("W has zero L2 norm on the grid")
    out = 0.5 * (w[..., -1] ** 2 - 1.0) / np.sqrt(den)
    return float(out) if np.ndim(out) == 0 else out


def fbm_grid_path(H: float, m: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """fBm on ``i/m``: scaled cumulative sums of exact fGn, starting at 0."""
    H = check_hurst(H)
    if m < 1:
        raise ValidationError("grid resolution m must be at least 1")
    inc = sample_fgn(H, m, rng, size=size)
    out = np.zeros(inc.shape[:-1] + (m + 1,))
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    out *= float(m) ** (-H)
    return out


@dataclass(frozen=True)
class LimitSample:
    z: np.ndarray
    z_gamma: np.ndarray
    theta: np.ndarray
    f: float
    gamma: float
    H: float
    L: float
    sigma2: float

    @property
    def vector(self) -> np.ndarray:
        """``F diag(L, 1) Theta(Z_gamma)``."""
        return np.array([self.L * self.f * self.theta[0], self.f * self.theta[1]])


def limit_vector_from_driver(H: float, gamma: float, L: float, sigma2: float, z) -> tuple[np.ndarray, np.ndarray]:
    """``(F, F diag(L, 1) Theta)`` for one driver or a batch of drivers."""
    z_gamma = ou_transform(z, gamma)
    theta = theta_functional(z_gamma)
    f = np.asarray(limit_scalar_F(H, gamma, L, sigma2, z_gamma))
    vec = np.stack([L * f * theta[..., 0], f * theta[..., 1]], axis=-1)
    return f, vec


def sample_limit_vector(H: float, gamma: float, L: float, sigma2: float, m: int, rng: np.random.Generator) -> LimitSample:
    """One draw of the limit vector ``F diag(L, 1) Theta`` on an ``m``-cell grid."""
    if m < 2:
        raise ValidationError("grid resolution m must be at least 2")
    z = fbm_grid_path(H, m, rng)
    z_gamma = ou_transform(z, gamma)
    theta = theta_functional(z_gamma)
    f = float(limit_scalar_F(H, gamma, L, sigma2, z_gamma))
    return LimitSample(z=z, z_gamma=z_gamma, theta=theta, f=f, gamma=float(gamma), H=float(H), L=float(L), sigma2=float(sigma2))
