"""Expected limit numerator ``EF(H, gamma, 1, 1)`` and related closed forms.

For ``1/2 < H < 1``::

    EF = H (2H - 1) int_0^1 int_0^s e^{-gamma u} u^{2H-2} du ds
       = H (2H - 1) int_0^1 e^{-gamma u} u^{2H-2} (1 - u) du.

The second line (order of integration swapped) is what gets evaluated.  The
substitution ``u = v^{1/(2H-1)}`` turns it into ``H int_0^1 g(v^{1/(2H-1)}) dv``
with a bounded integrand, so accuracy does not collapse as ``H -> 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

from .errors import AccuracyError, ValidationError
from .noise import check_hurst

DEFAULT_RTOL = 1e-8


def _check_long_memory(H: float) -> float:
    H = check_hurst(H)
    if not H > 0.5:
        raise ValidationError(f"EF is defined for 1/2 < H < 1, got H={H}")
    return H


def _quad(f, a: float, b: float, rtol: float, points=None) -> tuple[float, float]:
    kw = {"points": points} if points else {}
    return integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol * 1e-2, limit=1000, **kw)


def _kernel_breaks(gamma: float, p: float) -> list[float] | None:
    # v at which gamma*u = 1 and near the u -> 1 boundary layer
    pts = []
    if abs(gamma) > 1.0:
        pts.append(abs(gamma) ** (-1.0 / p))
    if p > 4.0:
        pts.append(1.0 - 1.0 / p)
    pts = sorted(x for x in pts if 0.0 < x < 1.0)
    return pts or None


def ef_mean_with_error(H: float, gamma: float, rtol: float = DEFAULT_RTOL) -> tuple[float, float]:
    """Quadrature value and absolute error estimate of ``EF(H, gamma, 1, 1)``."""
    H = _check_long_memory(H)
    gamma = float(gamma)
    p = 1.0 / (2.0 * H - 1.0)

    def f(v):
        u = v**p
        return math.exp(-gamma * u) * (1.0 - u)

    val, err = _quad(f, 0.0, 1.0, rtol, _kernel_breaks(gamma, p))
    val *= H
    err *= H
    if not err <= rtol * abs(val):
        raise AccuracyError(f"EF quadrature for H={H}, gamma={gamma} missed rtol={rtol}", val, err)
    return val, err


def ef_mean(H: float, gamma: float, rtol: float = DEFAULT_RTOL) -> float:
    """``EF(H, gamma, 1, 1)`` for ``1/2 < H < 1``.

    ``gamma = 0`` uses the elementary value 1/2 exactly; every other gamma goes
    through quadrature.
    """
    H = _check_long_memory(H)
    if gamma == 0:
        return 0.5
    return ef_mean_with_error(H, gamma, rtol)[0]


def lower_incomplete_gamma_unit(a: float, gamma: float) -> float:
    """``int_0^1 e^{-gamma u} u^{a-1} du`` for ``a > 0`` and real ``gamma``.

    Equals ``gamma^{-a} * lowergamma(a, gamma)`` for ``gamma > 0``.  Uses the
    power series ``sum_k (-gamma)^k / (k! (a + k))`` when ``gamma <= 1`` (no
    cancellation for negative gamma) and the regularised incomplete gamma
    function otherwise.
    """
    if not a > 0:
        raise ValidationError("a must be positive")
    if gamma > 1.0:
        return special.gammainc(a, gamma) * special.gamma(a) / gamma**a
    x = -gamma
    total = 0.0
    term = 1.0  # x^k / k!
    k = 0
    while True:
        add = term / (a + k)
        total += add
        k += 1
        term *= x / k
        if k > abs(x) and abs(term) < 1e-17 * abs(total):
            return total
        if k > 10_000:
            raise AccuracyError("incomplete gamma series did not converge", total, abs(term))


def ef_mean_incgamma(H: float, gamma: float) -> float:
    """``EF`` through incomplete gamma functions (independent of the quadrature)."""
    H = _check_long_memory(H)
    a = 2.0 * H - 1.0
    return H * a * (lower_incomplete_gamma_unit(a, gamma) - lower_incomplete_gamma_unit(2.0 * H, gamma))


def ef_asymptote(H: float, gamma: float, side: str | None = None) -> float:
    """Leading-order approximant of ``EF`` as ``gamma -> +inf`` or ``-inf``.

    ``plus``: ``Gamma(2H+1)/2 * gamma^(1-2H)``;
    ``minus``: ``H(2H-1) |gamma|^-2 e^|gamma|``.
    """
    H = _check_long_memory(H)
    if side is None:
        if gamma == 0:
            raise ValidationError("no asymptote side at gamma = 0")
        side = "plus" if gamma > 0 else "minus"
    if side == "plus":
        if not gamma > 0:
            raise ValidationError("plus-side asymptote needs gamma > 0")
        return math.gamma(2.0 * H + 1.0) / 2.0 * gamma ** (1.0 - 2.0 * H)
    if side == "minus":
        if not gamma < 0:
            raise ValidationError("minus-side asymptote needs gamma < 0")
        g = abs(gamma)
        return H * (2.0 * H - 1.0) * math.exp(g) / (g * g)
    raise ValidationError(f"side must be 'plus' or 'minus', got {side!r}")


def malliavin_derivative(H: float, gamma: float, s: float, rtol: float = DEFAULT_RTOL) -> float:
    """``H(2H-1) int_0^s e^{-gamma u} u^{2H-2} du``.

    With ``u = s v^{1/(2H-1)}`` this is ``H s^{2H-1} int_0^1 exp(-gamma s v^p) dv``.
    """
    H = _check_long_memory(H)
    if not 0.0 <= s <= 1.0:
        raise ValidationError("s must lie in [0, 1]")
    if s == 0.0:
        return 0.0
    lead = H * s ** (2.0 * H - 1.0)
    if gamma == 0:
        return lead
    p = 1.0 / (2.0 * H - 1.0)
    gs = gamma * s
    val, err = _quad(lambda v: math.exp(-gs * v**p), 0.0, 1.0, rtol, _kernel_breaks(gs, p))
    if not err <= rtol * abs(val):
        raise AccuracyError("Malliavin-derivative quadrature missed its tolerance", lead * val, lead * err)
    return lead * val


@dataclass(frozen=True)
class BiasTarget:
    H: float
    gamma: float
    value: float
    regime: str  # "ef_integral", "zero" or "minus_half"


def bias_target(H: float, gamma: float) -> BiasTarget:
    """Limit of ``n^{-(2H v 1)} E sum X_t eps_{t+1}`` under fGn noise."""
    H = check_hurst(H)
    if H > 0.5:
        return BiasTarget(H, float(gamma), ef_mean(H, gamma), "ef_integral")
    if H == 0.5:
        return BiasTarget(H, float(gamma), 0.0, "zero")
    return BiasTarget(H, float(gamma), -0.5, "minus_half")


def autocov_asymptote_constant(H: float) -> float:
    """``(H - 1/2) Gamma(2 - 2H) / (Gamma(3/2 - H) Gamma(H + 1/2))``.

    Multiplies ``t^{2H-2}`` in the long-lag autocovariance of fractionally
    integrated noise, before the filter-dependent factor.
    """
    H = check_hurst(H)
    if H == 0.5:
        raise ValidationError("constant is only defined for H != 1/2")
    return (H - 0.5) * math.gamma(2.0 - 2.0 * H) / (math.gamma(1.5 - H) * math.gamma(H + 0.5))
