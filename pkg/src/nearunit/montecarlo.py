"""Replication engine: finite-sample and limit draws, KS distances, quantiles, bias."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ar1 import Ar1Config, _recursion, scaling_exponents, scaling_regime
from .asymptotics import BiasTarget, bias_target
from .errors import DegeneratePathError, ValidationError
from .fou import fbm_grid_path, limit_vector_from_driver
from .noise import (
    ExactFgn,
    NoiseSpec,
    attraction_constants,
    check_hurst,
    fgn_autocovariance,
    sample_fgn,
    sample_noise,
)
from .rng import derive_stream

# replicate blocks are fixed so results never depend on the thread count
CHUNK = 64
MAX_RESAMPLE_FRACTION = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    H: float
    gamma: float
    noise: NoiseSpec
    n: int
    m: int
    reps: int
    seed: int
    regime: str | None = None

    def __post_init__(self):
        check_hurst(self.H)
        if self.reps < 1:
            raise ValidationError("reps must be at least 1")
        if self.n < 2 or self.m < 2:
            raise ValidationError("n and m must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if abs(self.noise.hurst - self.H) > 1e-12:
            raise ValidationError(f"noise has H={self.noise.hurst} but experiment has H={self.H}")
        expected = scaling_regime(self.H)
        if self.regime is None:
            object.__setattr__(self, "regime", expected)
        elif self.regime != expected:
            raise ValidationError(f"regime {self.regime!r} does not match H={self.H}")


@dataclass
class EmpiricalSample:
    """``reps`` draws of the (first, second) coordinate pair, row per replicate."""

    draws: np.ndarray
    config: ExperimentConfig
    which: str
    resampled: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def tau(self) -> np.ndarray:
        return self.draws[:, 0]

    @property
    def b(self) -> np.ndarray:
        return self.draws[:, 1]


def _map_replicates(fn: Callable[[int, int], np.ndarray], reps: int, threads: int = 1) -> np.ndarray:
    bounds = [(lo, min(lo + CHUNK, reps)) for lo in range(0, reps, CHUNK)]
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return np.concatenate(parts, axis=0)


def _finite_pair(config: ExperimentConfig, beta: float, i: int) -> tuple[float, float, int]:
    n = config.n
    p_tau, p_b = scaling_exponents(config.H)
    for attempt in range(100):
        rng = derive_stream(config.seed, "finite", n, i, attempt)
        eps = sample_noise(config.noise, n, rng)
        x = _recursion(beta, 0.0, eps)
        lag = np.empty(n)
        lag[0] = 0.0
        lag[1:] = x[:-1]
        ssq = math.fsum(lag * lag)
        if ssq > 0.0:
            num = math.fsum(lag * eps)
            return n**p_tau * num / math.sqrt(ssq), n**p_b * num / ssq, attempt
    raise DegeneratePathError(f"replicate {i} stayed degenerate after 100 attempts")


def run_finite_sample(config: ExperimentConfig, threads: int = 1, beta: float | None = None) -> EmpiricalSample:
    """Scaled ``(tau_hat, b_hat - beta_n)`` pairs from simulated paths with ``X_0 = 0``.

    ``beta`` defaults to ``1 - gamma/n``.  Degenerate paths are redrawn from a
    fresh derived stream; more than 1% of them is an error.
    """
    if beta is None:
        beta = Ar1Config.from_gamma(config.gamma, config.n).beta

    def block(lo, hi):
        return np.array([_finite_pair(config, beta, i) for i in range(lo, hi)])

    rows = _map_replicates(block, config.reps, threads)
    resampled = int(np.count_nonzero(rows[:, 2]))
    if resampled > MAX_RESAMPLE_FRACTION * config.reps:
        raise DegeneratePathError(f"{resampled} of {config.reps} replicates were degenerate")
    return EmpiricalSample(rows[:, :2].copy(), config, "finite_n", resampled, {"beta": beta})


def run_limit(config: ExperimentConfig, threads: int = 1) -> EmpiricalSample:
    """Draws of ``F diag(L, 1) Theta(B^H_gamma)`` on an ``m``-cell grid."""
    L, sigma2 = attraction_constants(config.noise)

    def block(lo, hi):
        out = np.empty((hi - lo, 2))
        for j, i in enumerate(range(lo, hi)):
            z = fbm_grid_path(config.H, config.m, derive_stream(config.seed, "limit", config.m, i))
            out[j] = limit_vector_from_driver(config.H, config.gamma, L, sigma2, z)[1]
        return out

    draws = _map_replicates(block, config.reps, threads)
    return EmpiricalSample(draws, config, "limit", 0, {"L": L, "sigma2": sigma2})


def ks_two_sample(a, b) -> float:
    """Sup-distance between the empirical CDFs of ``a`` and ``b``.

    Both samples are sorted and the two step functions are evaluated at every
    merged jump point, so ties are handled exactly.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValidationError("KS distance needs two nonempty samples")
    merged = np.concatenate([a, b])
    fa = np.searchsorted(a, merged, side="right") / a.size
    fb = np.searchsorted(b, merged, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_one_sample(a, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup-distance between the empirical CDF of ``a`` and a continuous ``cdf``."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    if a.size == 0:
        raise ValidationError("KS distance needs a nonempty sample")
    f = cdf(a)
    k = np.arange(1, a.size + 1)
    return float(max(np.max(k / a.size - f), np.max(f - (k - 1) / a.size)))


def empirical_cdfs(a, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(x, F_a(x), F_b(x))`` on the merged sorted support, for plotting."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    x = np.unique(np.concatenate([a, b]))
    return x, np.searchsorted(a, x, side="right") / a.size, np.searchsorted(b, x, side="right") / b.size


@dataclass(frozen=True)
class QuantileTable:
    probs: np.ndarray
    tau: np.ndarray
    b: np.ndarray
    meta: dict


def quantile_table(sample: EmpiricalSample, probs) -> QuantileTable:
    """Empirical quantiles, linearly interpolated between order statistics.

    Position ``(reps - 1) p`` on the sorted sample, so ``p`` near 0 or 1 maps
    to the extreme order statistics.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValidationError("probs must be a nonempty 1-D list")
    if np.any((probs <= 0.0) | (probs >= 1.0)):
        raise ValidationError("probabilities must lie strictly inside (0, 1)")
    if np.any(np.diff(probs) < 0):
        raise ValidationError("probabilities must be sorted")
    if sample.draws.size == 0:
        raise ValidationError("cannot tabulate an empty sample")
    q = np.quantile(sample.draws, probs, axis=0, method="linear")
    cfg = sample.config
    meta = {
        "H": cfg.H,
        "gamma": cfg.gamma,
        "regime": cfg.regime,
        "reps": int(sample.draws.shape[0]),
        "seed": cfg.seed,
        "which": sample.which,
    }
    return QuantileTable(probs, q[:, 0], q[:, 1], meta)


@dataclass(frozen=True)
class BiasResult:
    estimate: float
    stderr: float
    target: BiasTarget
    n: int
    reps: int

    @property
    def z_score(self) -> float:
        return (self.estimate - self.target.value) / self.stderr


def bias_draws(H: float, gamma: float, n: int, reps: int, seed: int, threads: int = 1) -> np.ndarray:
    """``n^{-(2H v 1)} sum_{t<n} X_t eps_{t+1}`` per replicate, fGn noise, ``X_0 = 0``."""
    H = check_hurst(H)
    beta = Ar1Config.from_gamma(gamma, n).beta
    scale = float(n) ** (-max(2.0 * H, 1.0))

    def block(lo, hi):
        out = np.empty(hi - lo)
        for j, i in enumerate(range(lo, hi)):
            eps = sample_fgn(H, n, derive_stream(seed, "bias", n, i))
            x = _recursion(beta, 0.0, eps[:-1])
            out[j] = scale * math.fsum(x * eps[1:])
        return out

    return _map_replicates(block, reps, threads)


def bias_experiment(H: float, gamma: float, n: int, reps: int, seed: int, threads: int = 1) -> BiasResult:
    """Monte Carlo mean of the scaled numerator next to its limit target."""
    if reps < 2:
        raise ValidationError("need at least two replicates for a standard error")
    ExactFgn(H)
    d = bias_draws(H, gamma, n, reps, seed, threads)
    return BiasResult(
        estimate=math.fsum(d) / reps,
        stderr=float(np.std(d, ddof=1)) / math.sqrt(reps),
        target=bias_target(H, gamma),
        n=int(n),
        reps=int(reps),
    )


def exact_bias(H: float, gamma: float, n: int) -> float:
    """Exact finite-n value of ``n^{-(2H v 1)} E sum_{t<n} X_t eps_{t+1}`` for fGn.

    ``sum_{j=1}^{n-1} (n - j) beta^{j-1} rho(j)`` with ``beta = 1 - gamma/n``.
    """
    beta = Ar1Config.from_gamma(gamma, n).beta
    j = np.arange(1, n)
    terms = (n - j) * beta ** (j - 1.0) * fgn_autocovariance(H, j)
    return math.fsum(terms) * float(n) ** (-max(2.0 * H, 1.0))
