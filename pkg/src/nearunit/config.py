"""Flat ``section.key = value`` experiment configs.

Example::

    # long-memory unit root
    noise.type = fgn
    noise.H = 0.75
    experiment.gamma = 0
    experiment.n = 4096
    experiment.m = 4096
    experiment.reps = 5000
    experiment.seed = 20261016

``noise.type`` is one of ``iid``, ``filter`` (``noise.alpha``), ``fracint``
(``noise.H``, optional ``noise.alpha``), ``arfima`` (``noise.H``,
``noise.phi``, ``noise.theta``) or ``fgn`` (``noise.H``).  Lists are comma
separated.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, NearUnitError
from .montecarlo import ExperimentConfig
from .noise import ArfimaSpec, ExactFgn, FracIntegrated, IidGaussian, LinearFilter, NoiseSpec

NOISE_KEYS = {"type", "H", "alpha", "phi", "theta"}
NOISE_TYPES = {"iid", "filter", "fgn", "fracint", "arfima"}
EXPERIMENT_KEYS = {"H", "gamma", "n", "m", "reps", "seed"}


@dataclass(frozen=True)
class ParsedConfig:
    noise: dict[str, tuple[str, int]]
    experiment: dict[str, tuple[str, int]]
    text: str


def parse_config_text(text: str) -> ParsedConfig:
    sections: dict[str, dict[str, tuple[str, int]]] = {"noise": {}, "experiment": {}}
    allowed = {"noise": NOISE_KEYS, "experiment": EXPERIMENT_KEYS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key.count(".") != 1:
            raise ConfigError("keys must have exactly one dotted section", line=lineno, field=key)
        section, name = key.split(".")
        if section not in sections:
            raise ConfigError(f"unknown section {section!r}", line=lineno, field=key)
        if name not in allowed[section]:
            raise ConfigError(f"unknown key {name!r}", line=lineno, field=key)
        if name in sections[section]:
            raise ConfigError("duplicate key", line=lineno, field=key)
        if not value:
            raise ConfigError("empty value", line=lineno, field=key)
        sections[section][name] = (value, lineno)
    return ParsedConfig(sections["noise"], sections["experiment"], text)


def _number(entry: tuple[str, int], field: str, kind=float):
    value, line = entry
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"cannot read {value!r} as {kind.__name__}", line=line, field=field) from None


def _number_list(entry: tuple[str, int], field: str) -> tuple[float, ...]:
    value, line = entry
    try:
        return tuple(float(v) for v in value.split(","))
    except ValueError:
        raise ConfigError(f"cannot read {value!r} as a number list", line=line, field=field) from None


def _require(section: dict, name: str, prefix: str):
    if name not in section:
        raise ConfigError("missing required key", field=f"{prefix}.{name}")
    return section[name]


def build_noise(parsed: ParsedConfig) -> NoiseSpec:
    sec = parsed.noise
    kind, line = _require(sec, "type", "noise")
    if kind not in NOISE_TYPES:
        raise ConfigError(f"unknown noise type {kind!r}; expected one of {sorted(NOISE_TYPES)}", line=line, field="noise.type")
    try:
        if kind == "iid":
            return IidGaussian()
        if kind == "filter":
            return LinearFilter(_number_list(_require(sec, "alpha", "noise"), "noise.alpha"))
        H = _number(_require(sec, "H", "noise"), "noise.H")
        if kind == "fgn":
            return ExactFgn(H)
        if kind == "fracint":
            alpha = _number_list(sec["alpha"], "noise.alpha") if "alpha" in sec else (1.0,)
            return FracIntegrated(H, LinearFilter(alpha))
        if kind == "arfima":
            phi = _number_list(sec["phi"], "noise.phi") if "phi" in sec else (1.0,)
            theta = _number_list(sec["theta"], "noise.theta") if "theta" in sec else (1.0,)
            return ArfimaSpec(H, phi, theta)
    except ConfigError:
        raise
    except NearUnitError as exc:
        # keep the original class (instability, specification, ...) for the exit message
        raise type(exc)(f"noise (line {line}): {exc}") from None
    raise AssertionError(kind)


def build_experiment(parsed: ParsedConfig, seed: int | None = None) -> ExperimentConfig:
    noise = build_noise(parsed)
    sec = parsed.experiment
    H = _number(sec["H"], "experiment.H") if "H" in sec else noise.hurst
    if abs(H - noise.hurst) > 1e-12:
        raise ConfigError(f"experiment.H={H} disagrees with noise H={noise.hurst}", field="experiment.H")
    n = _number(_require(sec, "n", "experiment"), "experiment.n", int)
    m = _number(sec["m"], "experiment.m", int) if "m" in sec else n
    gamma = _number(sec.get("gamma", ("0", 0)), "experiment.gamma")
    reps = _number(sec.get("reps", ("1000", 0)), "experiment.reps", int)
    if seed is None:
        seed = _number(sec.get("seed", ("0", 0)), "experiment.seed", int)
    return ExperimentConfig(H=H, gamma=gamma, noise=noise, n=n, m=m, reps=reps, seed=seed)
