"""Command-line front end.

Every command writes a CSV (17 significant digits, ``#`` metadata lines
before the header) plus a JSON manifest next to it.  ``nearunit rerun
MANIFEST`` replays a manifest and reproduces the numeric output exactly.

Exit codes: 0 success, 2 config/validation error, 3 numeric failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import ef_asymptote, ef_mean
from .config import build_experiment, parse_config_text
from .errors import NearUnitError, ValidationError
from .montecarlo import bias_experiment, empirical_cdfs, ks_two_sample, quantile_table, run_finite_sample, run_limit
from .noise import sample_noise
from .rng import derive_stream

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def config_hash(command: str, params: dict) -> str:
    blob = json.dumps({"command": command, "params": params}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_csv(path: Path, header: list[str], rows, meta: dict) -> None:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


# ---------------------------------------------------------------------------
# commands; each takes resolved params and returns the list of files written


def _experiment_meta(cfg, chash: str) -> dict:
    return {"config_hash": chash, "seed": cfg.seed, "H": fmt(cfg.H), "gamma": fmt(cfg.gamma), "regime": cfg.regime}


def cmd_simulate_noise(params: dict, out: Path, threads: int) -> list[Path]:
    cfg = build_experiment(parse_config_text(params["config_text"]), params["seed"])
    eps = sample_noise(cfg.noise, cfg.n, derive_stream(cfg.seed, "noise", cfg.n, 0))
    chash = config_hash("simulate-noise", params)
    write_csv(out, ["t", "eps"], zip(range(1, cfg.n + 1), eps), _experiment_meta(cfg, chash))
    return [out]


def cmd_limit_table(params: dict, out: Path, threads: int) -> list[Path]:
    cfg = build_experiment(parse_config_text(params["config_text"]), params["seed"])
    probs = params["probs"]
    sample = run_limit(cfg, threads=threads)
    table = quantile_table(sample, probs)
    meta = _experiment_meta(cfg, config_hash("limit-table", params))
    meta.update(m=cfg.m, L=fmt(sample.meta["L"]), sigma2=fmt(sample.meta["sigma2"]))
    if cfg.H < 0.5:
        meta["note"] = "H < 1/2: F is the constant -(sigma/L)^2/2; only Theta varies"
    rows = [
        (cfg.H, cfg.gamma, cfg.regime, p, qt, qb, cfg.reps, cfg.seed)
        for p, qt, qb in zip(table.probs, table.tau, table.b)
    ]
    write_csv(out, ["H", "gamma", "regime", "prob", "quantile_tau", "quantile_b", "reps", "seed"], rows, meta)
    return [out]


def cmd_ks_compare(params: dict, out: Path, threads: int) -> list[Path]:
    cfg = build_experiment(parse_config_text(params["config_text"]), params["seed"])
    finite = run_finite_sample(cfg, threads=threads)
    limit = run_limit(cfg, threads=threads)
    meta = _experiment_meta(cfg, config_hash("ks-compare", params))
    report, cdf_rows = [], []
    for name, col in (("tau", 0), ("b", 1)):
        a, b = finite.draws[:, col], limit.draws[:, col]
        report.append((name, ks_two_sample(a, b), cfg.n, cfg.m, cfg.reps, cfg.seed, finite.resampled))
        x, fa, fb = empirical_cdfs(a, b)
        cdf_rows.extend((name, xi, ai, bi) for xi, ai, bi in zip(x, fa, fb))
    write_csv(out, ["coordinate", "ks", "n", "m", "reps", "seed", "resampled"], report, meta)
    cdf_path = out.with_name(out.stem + "_cdf" + out.suffix)
    write_csv(cdf_path, ["coordinate", "x", "cdf_finite", "cdf_limit"], cdf_rows, meta)
    return [out, cdf_path]


def cmd_ef_table(params: dict, out: Path, threads: int) -> list[Path]:
    bad = [h for h in params["H"] if not 0.5 < h < 1.0]
    if bad:
        raise ValidationError(
            f"EF is only defined for 1/2 < H < 1 (got {bad}); the limit bias is 0 at H = 1/2 "
            "and -1/2 for H < 1/2"
        )
    rows = []
    for H in params["H"]:
        for g in params["gamma"]:
            ef = ef_mean(H, g)
            if g == 0:
                rows.append((H, g, ef, "none", math.nan, math.nan))
            else:
                side = "plus" if g > 0 else "minus"
                asym = ef_asymptote(H, g, side)
                rows.append((H, g, ef, side, asym, ef / asym))
    meta = {"config_hash": config_hash("ef-table", params)}
    write_csv(out, ["H", "gamma", "ef", "side", "asymptote", "ratio"], rows, meta)
    return [out]


def cmd_bias_check(params: dict, out: Path, threads: int) -> list[Path]:
    rows = []
    for n in params["n"]:
        res = bias_experiment(params["H"], params["gamma"], n, params["reps"], params["seed"], threads=threads)
        rows.append((n, res.estimate, res.stderr, res.target.value, res.z_score))
    meta = {
        "config_hash": config_hash("bias-check", params),
        "seed": params["seed"],
        "H": fmt(params["H"]),
        "gamma": fmt(params["gamma"]),
        "reps": params["reps"],
    }
    write_csv(out, ["n", "estimate", "stderr", "target", "z_score"], rows, meta)
    return [out]


COMMANDS = {
    "simulate-noise": cmd_simulate_noise,
    "limit-table": cmd_limit_table,
    "ks-compare": cmd_ks_compare,
    "ef-table": cmd_ef_table,
    "bias-check": cmd_bias_check,
}


def execute(command: str, params: dict, out: Path, threads: int = 1) -> dict:
    """Run a command and write its manifest; returns the manifest dict."""
    start = time.perf_counter()
    outputs = COMMANDS[command](params, out, threads)
    manifest = {
        "command": command,
        "params": params,
        "config_hash": config_hash(command, params),
        "seed": params.get("seed"),
        "version": __version__,
        "wall_time": time.perf_counter() - start,
        "outputs": [str(p.resolve()) for p in outputs],
    }
    _manifest_path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _read_config(path: str) -> str:
    return Path(path).read_text()


def _config_params(args) -> dict:
    text = _read_config(args.config)
    parsed = parse_config_text(text)
    # resolve the seed now so the manifest records the one actually used
    seed = args.seed if args.seed is not None else build_experiment(parsed).seed
    return {"config_text": text, "seed": seed}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nearunit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="flat key-value experiment config")
            p.add_argument("--seed", type=int, help="overrides experiment.seed")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    common(sub.add_parser("simulate-noise", help="write one noise sample"))
    p = sub.add_parser("limit-table", help="quantiles of the simulated limit law")
    common(p)
    p.add_argument("--probs", type=_float_list, default=[0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99])
    common(sub.add_parser("ks-compare", help="KS distance between finite-n and limit draws"))
    p = sub.add_parser("ef-table", help="EF(H, gamma, 1, 1) with its asymptotes")
    common(p, config=False)
    p.add_argument("--H", type=_float_list, required=True)
    p.add_argument("--gamma", type=_float_list, required=True)
    p = sub.add_parser("bias-check", help="Monte Carlo bias of the scaled numerator")
    common(p, config=False)
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("rerun", help="replay a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write here instead of the recorded path")
    p.add_argument("--threads", type=int, default=1)
    return parser


def _params_from_args(args) -> dict:
    if args.command in ("simulate-noise", "ks-compare"):
        return _config_params(args)
    if args.command == "limit-table":
        probs = list(args.probs)
        if any(not 0.0 < p < 1.0 for p in probs):
            raise ValidationError(f"probabilities must lie strictly inside (0, 1): {probs}")
        return {**_config_params(args), "probs": sorted(probs)}
    if args.command == "ef-table":
        return {"H": args.H, "gamma": args.gamma}
    if args.command == "bias-check":
        if args.reps < 2:
            raise ValidationError("--reps must be at least 2")
        return {"H": args.H, "gamma": args.gamma, "n": args.n, "reps": args.reps, "seed": args.seed}
    raise AssertionError(args.command)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            manifest = json.loads(Path(args.manifest).read_text())
            out = Path(args.out) if args.out else Path(manifest["outputs"][0])
            execute(manifest["command"], manifest["params"], out, args.threads)
        else:
            if args.threads < 1:
                raise ValidationError("--threads must be at least 1")
            execute(args.command, _params_from_args(args), Path(args.out), args.threads)
    except NearUnitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
