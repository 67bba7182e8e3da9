from __future__ import annotations

import pytest

from nearunit.config import build_experiment, build_noise, parse_config_text
from nearunit.errors import ConfigError, InstabilityError
from nearunit.noise import ArfimaSpec, ExactFgn, FracIntegrated, IidGaussian, LinearFilter

FULL = """
# long-memory unit root
noise.type = fgn
noise.H = 0.75      # Hurst index
experiment.gamma = 2
experiment.n = 256
experiment.m = 128
experiment.reps = 40
experiment.seed = 99
"""


def test_full_config():
    cfg = build_experiment(parse_config_text(FULL))
    assert cfg.noise == ExactFgn(0.75)
    assert (cfg.H, cfg.gamma, cfg.n, cfg.m, cfg.reps, cfg.seed) == (0.75, 2.0, 256, 128, 40, 99)
    assert cfg.regime == "super"


def test_defaults_and_seed_override():
    cfg = build_experiment(parse_config_text("noise.type = iid\nexperiment.n = 16\n"), seed=5)
    assert (cfg.H, cfg.gamma, cfg.m, cfg.reps, cfg.seed) == (0.5, 0.0, 16, 1000, 5)


@pytest.mark.parametrize(
    "text, spec",
    [
        ("noise.type = iid", IidGaussian()),
        ("noise.type = filter\nnoise.alpha = 2, -0.5", LinearFilter((2.0, -0.5))),
        ("noise.type = fracint\nnoise.H = 0.3", FracIntegrated(0.3)),
        ("noise.type = fracint\nnoise.H = 0.3\nnoise.alpha = 1, 0.2", FracIntegrated(0.3, LinearFilter((1.0, 0.2)))),
        ("noise.type = arfima\nnoise.H = 0.7\nnoise.phi = 1, -0.5", ArfimaSpec(0.7, (1.0, -0.5))),
    ],
)
def test_noise_types(text, spec):
    assert build_noise(parse_config_text(text)) == spec


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("noise.type = iid\nnoise.bogus = 1", 2, "noise.bogus"),
        ("noise.type = iid\nnoise.type = fgn", 2, "noise.type"),
        ("noise.type iid", 1, None),
        ("noise.type = iid\nfoo.bar = 1", 2, "foo.bar"),
        ("noise.type = iid\nexperiment.n = ", 2, "experiment.n"),
        ("a.b.c = 1", 1, "a.b.c"),
        ("noise.type = fgn\nnoise.H = abc", 2, "noise.H"),
        ("noise.type = weird", 1, "noise.type"),
    ],
)
def test_errors_carry_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as err:
        build_noise(parse_config_text(text))
    assert err.value.line == line
    assert err.value.field == field
    assert f"line {line}" in str(err.value)


def test_missing_required_key():
    with pytest.raises(ConfigError) as err:
        build_experiment(parse_config_text("noise.type = iid"))
    assert err.value.field == "experiment.n"


def test_experiment_H_must_match_noise():
    with pytest.raises(ConfigError):
        build_experiment(parse_config_text("noise.type = fgn\nnoise.H = 0.7\nexperiment.H = 0.6\nexperiment.n = 8"))


def test_unstable_arfima_keeps_error_class():
    with pytest.raises(InstabilityError, match="unstable"):
        build_noise(parse_config_text("noise.type = arfima\nnoise.H = 0.7\nnoise.phi = 1, -1.5"))
