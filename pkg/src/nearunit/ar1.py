"""Nearly unstable AR(1): simulation, least squares, and the numerator identity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import signal

from .errors import ClassificationError, DegeneratePathError, UnsupportedCoefficientError, ValidationError
from .noise import check_hurst


@dataclass(frozen=True)
class Ar1Config:
    """``X_t = beta X_{t-1} + eps_t`` for ``t = 1..n`` from ``X_0 = x0``."""

    n: int
    beta: float
    x0: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError("n must be at least 1")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_gamma(cls, gamma: float, n: int, x0: float = 0.0) -> "Ar1Config":
        # 1 - gamma/n rounded once from the exact rational value
        beta = float(1 - Fraction(gamma) / int(n))
        return cls(n=n, beta=beta, x0=x0, gamma=float(gamma))


@dataclass(frozen=True)
class SamplePath:
    x: np.ndarray
    eps: np.ndarray
    config: Ar1Config
    a_n: float

    @property
    def n(self) -> int:
        return self.config.n


@dataclass(frozen=True)
class OlsStatistics:
    """Least-squares estimator, t-statistic and the T1..T4 auxiliaries.

    ``b_hat`` and ``beta_hat`` are the same estimator; ``b_hat`` is the
    canonical name.
    """

    b_hat: float
    tau_hat: float
    ssq: float
    num: float
    T1: float
    T2: float
    T3: float
    T4: float
    beta: float
    n: int
    a_n: float

    @property
    def beta_hat(self) -> float:
        return self.b_hat

    @property
    def bias(self) -> float:
        """``b_hat - beta`` evaluated as ``num / ssq`` (no cancellation)."""
        return self.num / self.ssq


def _recursion(beta: float, x0, eps: np.ndarray) -> np.ndarray:
    # lfilter evaluates fl(fl(beta * y[t-1]) + eps[t]), the same rounding as the loop
    zi = np.asarray(beta * np.asarray(x0, dtype=float))[..., None]
    y, _ = signal.lfilter([1.0], [1.0, -beta], eps, axis=-1, zi=zi)
    return y


def simulate_ar1(config: Ar1Config, eps, a_n: float | None = None) -> SamplePath:
    """Run the recursion over ``eps_1..eps_n``.

    ``a_n`` is the normalisation stored on the path for the T-terms; it
    defaults to ``sqrt(n)``.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (config.n,):
        raise ValidationError(f"expected {config.n} innovations, got shape {eps.shape}")
    x = np.empty(config.n + 1)
    x[0] = config.x0
    x[1:] = _recursion(config.beta, config.x0, eps)
    return SamplePath(x=x, eps=eps, config=config, a_n=math.sqrt(config.n) if a_n is None else float(a_n))


def simulate_ar1_batch(beta: float, eps: np.ndarray, x0: float = 0.0) -> np.ndarray:
    """Vectorised recursion over the rows of ``eps``; returns ``X_0..X_n`` per row."""
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    x = np.empty((eps.shape[0], eps.shape[1] + 1))
    x[:, 0] = x0
    x[:, 1:] = _recursion(beta, np.full(eps.shape[0], x0), eps)
    return x


def _fsum(values) -> float:
    try:
        return math.fsum(values)
    except (OverflowError, ValueError):
        # non-finite terms: fall back to IEEE propagation (inf or nan)
        return float(np.sum(values))


def _fsum_rows(a: np.ndarray) -> np.ndarray:
    return np.array([_fsum(row) for row in np.atleast_2d(a)])


def ols_sums(x: np.ndarray, eps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compensated ``(sum X_t eps_{t+1}, sum X_t^2, sum X_{t+1} X_t)`` per row, t < n."""
    x = np.atleast_2d(x)
    eps = np.atleast_2d(eps)
    lag = x[:, :-1]
    return _fsum_rows(lag * eps), _fsum_rows(lag * lag), _fsum_rows(x[:, 1:] * lag)


def ols_estimate(path: SamplePath) -> OlsStatistics:
    """Least-squares statistics of a path against its true coefficient."""
    num, ssq, cross = (float(v[0]) for v in ols_sums(path.x, path.eps))
    if ssq == 0.0:
        raise DegeneratePathError("sum of X_t^2 over t < n is zero")
    n, a = path.n, path.a_n
    a2 = a * a
    return OlsStatistics(
        b_hat=cross / ssq,
        tau_hat=num / math.sqrt(ssq),
        ssq=ssq,
        num=num,
        T1=num / a2,
        T2=ssq / (n * a2),
        T3=float(path.x[-1]) / a,
        T4=_fsum(path.eps * path.eps) / a2,
        beta=path.config.beta,
        n=n,
        a_n=a,
    )


def decomposition_rhs(beta: float, ssq: float, x_n: float, eps_ssq: float) -> float:
    """``(1 - beta^2)/(2 beta) ssq + X_n^2/(2 beta) - sum eps^2/(2 beta)``."""
    two_b = 2.0 * beta
    return _fsum([(1.0 - beta * beta) / two_b * ssq, x_n * x_n / two_b, -eps_ssq / two_b])


def decomposition_check(path: SamplePath) -> float:
    """Absolute residual of the squared-recursion identity for the numerator.

    Requires ``X_0 = 0`` and ``beta > 0``.  Returns ``inf`` when the path
    overflowed.
    """
    cfg = path.config
    if cfg.beta <= 0.0:
        raise UnsupportedCoefficientError(f"identity needs beta > 0, got {cfg.beta!r}")
    if cfg.x0 != 0.0:
        raise ValidationError("identity as stated assumes X_0 = 0")
    num, ssq, _ = (float(v[0]) for v in ols_sums(path.x, path.eps))
    rhs = decomposition_rhs(cfg.beta, ssq, float(path.x[-1]), _fsum(path.eps * path.eps))
    residual = abs(num - rhs)
    # an overflowed path cannot satisfy the identity in floating point
    return residual if math.isfinite(residual) else math.inf


SCALING_REGIMES = ("super", "boundary", "sub")


def scaling_regime(H: float) -> str:
    H = check_hurst(H)
    return "super" if H > 0.5 else ("sub" if H < 0.5 else "boundary")


def scaling_exponents(H: float) -> tuple[float, float]:
    """Powers of ``n`` applied to ``(tau_hat, b_hat - beta)``."""
    if H > 0.5:
        return 0.5 - H, 1.0
    if H < 0.5:
        return H - 0.5, 2.0 * H
    return 0.0, 1.0


def scaled_statistics(stats: OlsStatistics, H: float, regime: str | None = None) -> tuple[float, float]:
    """Normalise ``(tau_hat, b_hat - beta)`` for the limit theorem of regime ``H``.

    ===========  ==========================  ======================
    regime       first                       second
    ===========  ==========================  ======================
    super        ``n^(1/2-H) tau_hat``       ``n (b_hat - beta)``
    boundary     ``tau_hat``                 ``n (b_hat - beta)``
    sub          ``n^(H-1/2) tau_hat``       ``n^(2H) (b_hat - beta)``
    ===========  ==========================  ======================
    """
    expected = scaling_regime(H)
    if regime is not None and regime != expected:
        raise ClassificationError(f"regime {regime!r} does not match H={H} (expected {expected!r})")
    p_tau, p_b = scaling_exponents(H)
    n = float(stats.n)
    return n**p_tau * stats.tau_hat, n**p_b * stats.bias
