"""Innovation sequences in the domain of attraction of fractional Brownian motion.

Four families are supported, all Gaussian:

* i.i.d. standard normal noise and finite linear filters of it (H = 1/2),
* fractionally integrated filters ``(I - B)^(1/2 - H) eta`` (ARFIMA when
  ``eta`` is ARMA),
* exact fractional Gaussian noise, the increments of fBm.

The module also evaluates the attraction constants ``L(H, alpha)`` and
``sigma^2 = E eps_0^2`` that scale the limit laws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import integrate, linalg, signal

from .errors import (
    AccuracyError,
    DegenerateEmbeddingError,
    DegenerateFilterError,
    InstabilityError,
    SpecificationError,
    ValidationError,
)

# eigenvalues in [-CLIP_TOL * max, 0) are rounding noise and get zeroed
CLIP_TOL = 1e-10
CHOLESKY_MAX_N = 4096
# neglected MA tail variance relative to the total, for the truncated sampler
MA_TAIL_TOL = 1e-6
MA_MAX_TRUNCATION = 1 << 22


def check_hurst(H: float) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        raise ValidationError(f"Hurst index must lie in (0, 1), got {H!r}")
    return H


def hurst_regime(H: float) -> str:
    """Classify H as ``"antipersistent"``, ``"brownian"`` or ``"long-memory"``."""
    H = check_hurst(H)
    if H < 0.5:
        return "antipersistent"
    if H > 0.5:
        return "long-memory"
    return "brownian"


# ---------------------------------------------------------------------------
# noise specifications


@dataclass(frozen=True)
class IidGaussian:
    """Independent standard normal innovations."""

    @property
    def hurst(self) -> float:
        return 0.5


@dataclass(frozen=True)
class LinearFilter:
    """Finite causal filter ``eta_t = sum_k alpha_k xi_{t-k}`` of i.i.d. noise.

    Only finitely many coefficients are stored, so absolute summability holds
    with a zero tail.
    """

    alpha: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        if not alpha:
            raise SpecificationError("filter needs at least one coefficient")
        if not all(math.isfinite(a) for a in alpha):
            raise SpecificationError("filter coefficients must be finite")
        object.__setattr__(self, "alpha", alpha)

    @property
    def hurst(self) -> float:
        return 0.5


@dataclass(frozen=True)
class FracIntegrated:
    """Fractionally integrated filter ``(I - B)^(1/2 - H)`` applied to ``inner``."""

    H: float
    inner: LinearFilter = field(default_factory=LinearFilter)

    def __post_init__(self):
        check_hurst(self.H)
        object.__setattr__(self, "H", float(self.H))

    @property
    def hurst(self) -> float:
        return self.H


@dataclass(frozen=True)
class ArfimaSpec:
    """ARFIMA(p, H - 1/2, q) noise.

    ``phi`` and ``theta`` are polynomial coefficients in increasing powers of
    the backshift, constant term first, e.g. ``phi=(1, -0.5)`` is
    ``1 - 0.5 z``.
    """

    H: float
    phi: tuple[float, ...] = (1.0,)
    theta: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        check_hurst(self.H)
        object.__setattr__(self, "H", float(self.H))
        phi = tuple(float(c) for c in self.phi)
        theta = tuple(float(c) for c in self.theta)
        if not phi or phi[0] == 0.0:
            raise SpecificationError("phi must have a nonzero constant term")
        if not theta or theta[0] == 0.0:
            raise SpecificationError("theta must have a nonzero constant term")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", theta)
        _check_arma(phi, theta)

    @property
    def hurst(self) -> float:
        return self.H

    def filter(self) -> LinearFilter:
        return LinearFilter(tuple(expand_arma_filter(self.phi, self.theta, _arma_truncation(self.phi, self.theta))))


@dataclass(frozen=True)
class ExactFgn:
    """Fractional Gaussian noise ``B^H_t - B^H_{t-1}`` with unit variance."""

    H: float

    def __post_init__(self):
        check_hurst(self.H)
        object.__setattr__(self, "H", float(self.H))

    @property
    def hurst(self) -> float:
        return self.H


NoiseSpec = Union[IidGaussian, LinearFilter, FracIntegrated, ArfimaSpec, ExactFgn]


# ---------------------------------------------------------------------------
# fractional Gaussian noise


def fgn_autocovariance(H: float, k) -> float | np.ndarray:
    """Autocovariance of unit-variance fGn at lag ``k >= 0``.

    ``rho(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2``.  Accepts scalars or arrays.
    """
    H = check_hurst(H)
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise ValidationError("lag must be non-negative")
    h2 = 2.0 * H
    out = 0.5 * (np.abs(k_arr + 1) ** h2 - 2.0 * np.abs(k_arr) ** h2 + np.abs(k_arr - 1) ** h2)
    if H == 0.5:
        # the formula cancels to exactly zero only up to rounding
        out = np.where(k_arr == 0, 1.0, 0.0)
    return float(out) if out.ndim == 0 else out


def _embedding_first_row(acov: np.ndarray) -> np.ndarray:
    # (c_0, ..., c_n, c_{n-1}, ..., c_1), length 2n
    return np.concatenate([acov, acov[-2:0:-1]])


def _clip_eigenvalues(lam: np.ndarray) -> np.ndarray:
    lam = np.array(lam, dtype=float)
    tol = CLIP_TOL * max(float(lam.max()), 0.0)
    bad = np.flatnonzero(lam < -tol)
    if bad.size:
        i = int(bad[np.argmin(lam[bad])])
        raise DegenerateEmbeddingError(float(lam[i]), i, tol)
    lam[lam < 0] = 0.0
    return lam


@lru_cache(maxsize=64)
def _circulant_sqrt(kind: str, H: float, n: int) -> np.ndarray:
    if kind == "fgn":
        acov = fgn_autocovariance(H, np.arange(n + 1))
    else:
        acov = arfima_autocovariance(H, n + 1)
    lam = _clip_eigenvalues(np.fft.fft(_embedding_first_row(acov)).real)
    root = np.sqrt(lam / lam.size)
    root.setflags(write=False)
    return root


def circulant_eigenvalues(H: float, n: int) -> np.ndarray:
    """Raw (unclipped) eigenvalues of the size-2n circulant embedding of fGn."""
    H = check_hurst(H)
    acov = fgn_autocovariance(H, np.arange(n + 1))
    return np.fft.fft(_embedding_first_row(acov)).real


def embedding_covariance_error(H: float, n: int) -> float:
    """Max-norm gap between the covariance the sampler realises and ``rho``."""
    root = _circulant_sqrt("fgn", check_hurst(H), int(n))
    lam = root**2 * root.size
    implied = np.fft.ifft(lam).real[: n + 1]
    return float(np.max(np.abs(implied - fgn_autocovariance(H, np.arange(n + 1)))))


def _circulant_draw(root: np.ndarray, n: int, rng: np.random.Generator, size: int | None) -> np.ndarray:
    shape = (root.size,) if size is None else (size, root.size)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.fft.fft(root * w, axis=-1).real[..., :n]


def sample_fgn(H: float, n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw fractional Gaussian noise of length ``n`` by circulant embedding.

    The law is exact (Davies-Harte).  For ``H = 1/2`` the covariance is the
    identity and the raw normal stream is returned unchanged.  With ``size``
    the result has shape ``(size, n)``.

    Raises
    ------
    DegenerateEmbeddingError
        If an embedding eigenvalue is more negative than the clipping
        tolerance; :func:`sample_fgn_cholesky` is the fallback.
    """
    H = check_hurst(H)
    n = int(n)
    if n < 1:
        raise ValidationError("n must be at least 1")
    if H == 0.5:
        return rng.standard_normal(n if size is None else (size, n))
    return _circulant_draw(_circulant_sqrt("fgn", H, n), n, rng, size)


@lru_cache(maxsize=16)
def _fgn_cholesky_factor(H: float, n: int) -> np.ndarray:
    cov = linalg.toeplitz(fgn_autocovariance(H, np.arange(n)))
    return np.linalg.cholesky(cov)


def sample_fgn_cholesky(H: float, n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Exact fGn through the Cholesky factor of the Toeplitz covariance (n <= 4096)."""
    H = check_hurst(H)
    if not 1 <= n <= CHOLESKY_MAX_N:
        raise ValidationError(f"Cholesky sampler supports 1 <= n <= {CHOLESKY_MAX_N}")
    chol = _fgn_cholesky_factor(H, int(n))
    z = rng.standard_normal(n if size is None else (size, n))
    return z @ chol.T


# ---------------------------------------------------------------------------
# fractional integration


@dataclass(frozen=True)
class FracCoeffs:
    H: float
    b: np.ndarray

    @property
    def J(self) -> int:
        return self.b.size - 1


def frac_integration_coeffs(H: float, J: int) -> FracCoeffs:
    """MA coefficients ``b_0..b_J`` of ``(I - B)^(1/2 - H)``.

    ``b_0 = 1`` and ``b_j = b_{j-1} (j - 1 + H - 1/2) / j``.
    """
    H = check_hurst(H)
    J = int(J)
    if J < 0:
        raise ValidationError("truncation J must be non-negative")
    j = np.arange(1, J + 1, dtype=float)
    ratios = (j - 1.0 + (H - 0.5)) / j
    b = np.empty(J + 1)
    b[0] = 1.0
    np.cumprod(ratios, out=b[1:])
    return FracCoeffs(H, b)


def arfima_autocovariance(H: float, nlags: int) -> np.ndarray:
    """Autocovariance of ``(I - B)^(1/2 - H) xi`` at lags ``0..nlags-1``.

    Closed form ``Gamma(1 - 2d) / Gamma(1 - d)^2`` at lag 0 with ``d = H - 1/2``,
    then the ratio recursion ``g(k) = g(k-1) (k - 1 + d) / (k - d)``.
    """
    H = check_hurst(H)
    d = H - 0.5
    k = np.arange(1, nlags, dtype=float)
    out = np.empty(nlags)
    out[0] = math.gamma(1.0 - 2.0 * d) / math.gamma(1.0 - d) ** 2
    np.cumprod((k - 1.0 + d) / (k - d), out=out[1:])
    out[1:] *= out[0]
    return out


def ma_truncation(H: float, tol: float = MA_TAIL_TOL) -> int:
    """Smallest J with ``sum_{j>J} b_j^2 < tol * sum_j b_j^2`` (identity filter)."""
    H = check_hurst(H)
    if H == 0.5:
        return 0
    d = H - 0.5
    total = math.gamma(1.0 - 2.0 * d) / math.gamma(1.0 - d) ** 2
    # b_j^2 ~ j^(2d-2) / Gamma(d)^2, tail ~ J^(2d-1) / ((1-2d) Gamma(d)^2)
    guess = (tol * total * (1.0 - 2.0 * d) * math.gamma(d) ** 2) ** (1.0 / (2.0 * d - 1.0))
    if not guess < MA_MAX_TRUNCATION:
        raise ValidationError(
            f"MA truncation for H={H} needs J ~ {guess:.3g} terms; use the exact sampler"
        )
    J = max(int(guess), 1)
    while True:
        b = frac_integration_coeffs(H, J).b
        if total - math.fsum(b * b) < tol * total:
            return J
        J *= 2
        if J > MA_MAX_TRUNCATION:
            raise ValidationError(f"MA truncation for H={H} exceeds {MA_MAX_TRUNCATION}")


# ---------------------------------------------------------------------------
# ARMA filters


def _roots(coeffs) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size <= 1:
        return np.empty(0, dtype=complex)
    return np.roots(c[::-1])


def _check_arma(phi, theta) -> None:
    rp = _roots(phi)
    if rp.size and np.min(np.abs(rp)) <= 1.0:
        z = rp[np.argmin(np.abs(rp))]
        raise InstabilityError(f"unstable AR part: phi has a zero of modulus {abs(z):.6g} <= 1 at {z:.6g}")
    rt = _roots(theta)
    if rt.size and np.min(np.abs(rt)) <= 1.0:
        z = rt[np.argmin(np.abs(rt))]
        raise SpecificationError(f"non-invertible MA part: theta has a zero of modulus {abs(z):.6g} <= 1 at {z:.6g}")
    if rp.size and rt.size:
        gap = np.abs(rp[:, None] - rt[None, :])
        if np.min(gap) <= 1e-8 * max(1.0, float(np.max(np.abs(rp)))):
            raise SpecificationError("phi and theta share a common zero")


def _arma_truncation(phi, theta, tol: float = 1e-16) -> int:
    rp = _roots(phi)
    q = len(theta) - 1
    if not rp.size:
        return q
    r = float(np.min(np.abs(rp)))
    return min(q + int(math.ceil(math.log(1.0 / tol) / math.log(r))) + len(phi), 1 << 20)


def expand_arma_filter(phi, theta, K: int) -> np.ndarray:
    """Power-series coefficients ``alpha_0..alpha_K`` of ``theta(z) / phi(z)``.

    >>> expand_arma_filter([1, -0.5], [1], 3)
    array([1.   , 0.5  , 0.25 , 0.125])
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if phi.size == 0 or phi[0] == 0.0:
        raise SpecificationError("phi must have a nonzero constant term")
    if K < 0:
        raise ValidationError("K must be non-negative")
    _check_arma(phi, theta)
    impulse = np.zeros(K + 1)
    impulse[0] = 1.0
    return signal.lfilter(theta, phi, impulse)


# ---------------------------------------------------------------------------
# sampling


def _inner_alpha(spec: NoiseSpec) -> np.ndarray:
    if isinstance(spec, LinearFilter):
        return np.asarray(spec.alpha)
    if isinstance(spec, FracIntegrated):
        return np.asarray(spec.inner.alpha)
    if isinstance(spec, ArfimaSpec):
        return np.asarray(spec.filter().alpha)
    return np.ones(1)


def _fir(alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    # valid part of the causal convolution: output length x.size - alpha.size + 1
    if alpha.size == 1:
        return alpha[0] * x if alpha[0] != 1.0 else x
    if alpha.size > 64:
        return signal.fftconvolve(x, alpha, mode="valid")
    return np.convolve(x, alpha, mode="valid")


def sample_noise(
    spec: NoiseSpec,
    n: int,
    rng: np.random.Generator,
    method: str = "exact",
    truncation: int | None = None,
) -> np.ndarray:
    """Draw ``eps_1..eps_n`` from a noise specification.

    Fractionally integrated variants default to ``method="exact"``: the
    fractional part ``(I - B)^(1/2 - H) xi`` is sampled from its exact
    stationary Gaussian law by circulant embedding, then the short-memory
    filter is applied with ``len(alpha) - 1`` presample values.
    ``method="truncated"`` instead convolves with ``b_0..b_J`` over ``J``
    presample innovations; ``J`` defaults to :func:`ma_truncation`.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n must be at least 1")
    if isinstance(spec, IidGaussian):
        return rng.standard_normal(n)
    if isinstance(spec, ExactFgn):
        return sample_fgn(spec.H, n, rng)
    alpha = _inner_alpha(spec)
    burn = alpha.size - 1
    H = spec.hurst
    if H == 0.5:
        return _fir(alpha, rng.standard_normal(n + burn))
    if method == "exact":
        u = _circulant_draw(_circulant_sqrt("arfima", H, n + burn), n + burn, rng, None)
        return _fir(alpha, u)
    if method == "truncated":
        J = ma_truncation(H) if truncation is None else int(truncation)
        b = frac_integration_coeffs(H, J).b
        eta = _fir(alpha, rng.standard_normal(n + J + burn))
        return _fir(b, eta)
    raise ValidationError(f"unknown sampling method {method!r}")


# ---------------------------------------------------------------------------
# attraction constants


def scaling_constant_L(H: float, alpha) -> float:
    """``L(H, alpha) = (Gamma(2H+1) sin(pi H))^(-1/2) |sum alpha|``."""
    H = check_hurst(H)
    s = math.fsum(np.atleast_1d(np.asarray(alpha, dtype=float)))
    if s == 0.0:
        raise DegenerateFilterError("sum of filter coefficients is zero; L(H, alpha) vanishes")
    return abs(s) / math.sqrt(math.gamma(2.0 * H + 1.0) * math.sin(math.pi * H))


def _sigma2_quad(H: float, power: Callable[[np.ndarray], np.ndarray], rtol: float) -> float:
    """``(1/pi) int_0^pi power(lam) (2 sin(lam/2))^(1-2H) dlam`` by adaptive quadrature."""
    e = 1.0 - 2.0 * H
    if H > 0.5:
        # lam = u^(1/(2-2H)) cancels the lam^(1-2H) singularity at 0
        p = 1.0 / (2.0 - 2.0 * H)

        def f(u):
            if u == 0.0:
                return p * float(power(np.array([0.0]))[0])
            lam = u**p
            return p * float(power(np.array([lam]))[0]) * (2.0 * math.sin(lam / 2.0) / lam) ** e

        upper = math.pi ** (2.0 - 2.0 * H)
    else:

        def f(u):
            return float(power(np.array([u]))[0]) * (2.0 * math.sin(u / 2.0)) ** e

        upper = math.pi
    val, err = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=rtol * 1e-2, limit=500)
    val /= math.pi
    err /= math.pi
    if not err <= rtol * abs(val):
        raise AccuracyError("sigma^2 quadrature missed its tolerance", val, err)
    return val


def _filter_power(alpha: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    k = np.arange(alpha.size)

    def power(lam):
        z = np.exp(-1j * np.outer(lam, k)) @ alpha
        return np.abs(z) ** 2

    return power


def _rational_power(phi, theta) -> Callable[[np.ndarray], np.ndarray]:
    def power(lam):
        z = np.exp(-1j * np.asarray(lam))
        num = np.polynomial.polynomial.polyval(z, theta)
        den = np.polynomial.polynomial.polyval(z, phi)
        return np.abs(num / den) ** 2

    return power


def noise_variance_sigma2(H: float, alpha, rtol: float = 1e-8) -> float:
    """``E (eps_0^H)^2`` from the spectral density, by quadrature.

    Raises :class:`AccuracyError` when the relative error estimate exceeds
    ``rtol``.
    """
    H = check_hurst(H)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if H == 0.5:
        return math.fsum(alpha * alpha)
    return _sigma2_quad(H, _filter_power(alpha), rtol)


def fracint_variance_time_domain(H: float, alpha=(1.0,), J: int = 10**6) -> float:
    """Time-domain ``E (eps_0^H)^2`` from the MA coefficients.

    ``sum_{k,l} alpha_k alpha_l g(k - l)`` with ``g(h) = sum_j b_j b_{j+h}``
    truncated at ``J`` plus the Euler-Maclaurin estimate of the power-law tail.
    """
    H = check_hurst(H)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    K = alpha.size - 1
    b = frac_integration_coeffs(H, J + K).b
    d = H - 0.5
    g = np.empty(K + 1)
    for h in range(K + 1):
        head = math.fsum(b[: J + 1] * b[h : J + 1 + h])
        # b_j b_{j+h} ~ b_J b_{J+h} (j/J)^(2d-2) beyond J
        end = b[J] * b[J + h]
        tail = end * (J / (1.0 - 2.0 * d) - 0.5) if d != 0 else 0.0
        g[h] = head + tail
    r = np.array([math.fsum(alpha[: alpha.size - h] * alpha[h:]) for h in range(K + 1)])
    return math.fsum([r[0] * g[0]] + [2.0 * r[h] * g[h] for h in range(1, K + 1)])


def attraction_constants(spec: NoiseSpec) -> tuple[float, float]:
    """``(L, sigma^2)`` such that partial sums scaled by ``n^H`` tend to ``L B^H``."""
    if isinstance(spec, (IidGaussian, ExactFgn)):
        return 1.0, 1.0
    if isinstance(spec, LinearFilter):
        return scaling_constant_L(0.5, spec.alpha), noise_variance_sigma2(0.5, spec.alpha)
    if isinstance(spec, FracIntegrated):
        return scaling_constant_L(spec.H, spec.inner.alpha), noise_variance_sigma2(spec.H, spec.inner.alpha)
    if isinstance(spec, ArfimaSpec):
        ratio = math.fsum(spec.theta) / math.fsum(spec.phi)
        L = scaling_constant_L(spec.H, [ratio])
        if spec.H == 0.5:
            return L, noise_variance_sigma2(0.5, spec.filter().alpha)
        return L, _sigma2_quad(spec.H, _rational_power(spec.phi, spec.theta), 1e-8)
    raise ValidationError(f"unknown noise specification {spec!r}")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DaDiagnostics:
    """Second-moment checks over dyadic prefixes ``n_k = 2^k``.

    ``ratio[k] = sum eps^2 / a(n_k)^2`` should vanish when squares are negligible against the scale;
    ``mean_excess[k] = mean(eps^2) - sigma^2`` should vanish when the mean square settles at sigma^2.
    """

    prefixes: np.ndarray
    ratio: np.ndarray
    mean_excess: np.ndarray


def da_diagnostics(eps, a_n: Callable[[int], float], sigma2: float) -> DaDiagnostics:
    eps = np.asarray(eps, dtype=float)
    if eps.size == 0:
        raise ValidationError("need a nonempty noise vector")
    n = eps.size
    prefixes = [1 << k for k in range(n.bit_length()) if (1 << k) <= n]
    if prefixes[-1] != n:
        prefixes.append(n)
    csum = np.cumsum(eps * eps)
    sq = np.array([csum[p - 1] for p in prefixes])
    pre = np.array(prefixes)
    scale = np.array([float(a_n(int(p))) for p in prefixes])
    if np.any(scale <= 0):
        warnings.warn("non-positive normalisation in da_diagnostics", RuntimeWarning, stacklevel=2)
    return DaDiagnostics(pre, sq / scale**2, sq / pre - sigma2)
