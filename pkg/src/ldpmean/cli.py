"""Command-line front end.

Subcommands:
    fisher     closed-form information and variance for a budget
    lp-verify  build and solve the staircase program, check the certificate
    simulate   run a Monte Carlo config file, write CSV plus manifest
    estimate   run one estimator on file or synthetic data, print JSON

Exit codes are a stable contract: 0 success, 1 usage, 2 verification
failure, 3 I/O, 4 budget.  All randomness flows from the --seed flag;
``simulate`` refuses to run without one.  The manifest written next to
every CSV is itself a valid config file (metadata lives in comments), so
re-running it with the recorded seed reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import EstimatorConfig, one_stage, rescaled_estimate, three_stage, two_stage
from .lp import equality_chain
from .mechanisms import privacy_params
from .quantized import build_quantized_model, embed_sign_channel, fisher_info_quantized, sign_fisher_info
from .estimators import optimal_asymptotic_variance
from .sim import BudgetError, ExperimentConfig, results_to_csv, run_experiment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3
EXIT_BUDGET = 4


class _UsageError(Exception):
    pass


class ConfigError(Exception):
    """Malformed key-value config content."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep code 1
        raise _UsageError(message)


def _json_ready(obj):
    """Make a structure JSON-safe, spelling non-finite floats as strings."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return obj


def _emit(payload: dict) -> None:
    print(json.dumps(_json_ready(payload), indent=2))


# --- config file handling ---------------------------------------------------

_SIM_KEYS = ("kind", "epsilon", "theta_true", "theta0", "h", "n", "n1", "n0",
             "bits", "range_lo", "range_hi", "sigma", "replicates", "sweep",
             "sweep_values", "max_total_draws")
_SIM_REQUIRED = ("kind", "epsilon", "theta_true", "n", "replicates", "sweep",
                 "sweep_values")
_INT_KEYS = {"n", "n1", "n0", "bits", "replicates", "max_total_draws"}
_FLOAT_KEYS = {"epsilon", "theta_true", "theta0", "h", "range_lo", "range_hi", "sigma"}


def parse_kv(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "sweep_values":
            values = tuple(float(tok) for tok in raw.split(",") if tok.strip())
            if not values:
                raise ValueError("empty list")
            return values
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    return raw


def experiment_config_from_text(text: str, master_seed: int,
                                replicates_override: int | None = None) -> ExperimentConfig:
    """Build an ``ExperimentConfig`` from config-file text plus the seed flag."""
    raw = parse_kv(text)
    unknown = set(raw) - set(_SIM_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in _SIM_REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    values = {k: _convert(k, v) for k, v in raw.items()}
    if replicates_override is not None:
        values["replicates"] = replicates_override
    kwargs = dict(
        kind=values["kind"],
        epsilon=values["epsilon"],
        theta_true=values["theta_true"],
        n=values["n"],
        replicates=values["replicates"],
        master_seed=master_seed,
        sweep_name=values["sweep"],
        sweep_values=values["sweep_values"],
    )
    for key, target in (("theta0", "theta0"), ("h", "h_over_sqrt_n"),
                        ("n1", "n1"), ("n0", "n0"), ("bits", "bits"),
                        ("range_lo", "range_lo"), ("range_hi", "range_hi"),
                        ("sigma", "sigma"), ("max_total_draws", "max_total_draws")):
        if key in values:
            kwargs[target] = values[key]
    return ExperimentConfig(**kwargs)


def manifest_text(config: ExperimentConfig, output_path: str) -> str:
    """Render the run manifest; the non-comment lines re-parse as a config."""
    meta = [
        f"# manifest written by ldpmean {__version__}",
        "# subcommand = simulate",
        f"# master_seed = {config.master_seed}",
        f"# output_csv = {output_path}",
    ]
    body = [
        f"kind = {config.kind}",
        f"epsilon = {config.epsilon!r}",
        f"theta_true = {config.theta_true!r}",
        f"theta0 = {config.theta0!r}",
        f"h = {config.h_over_sqrt_n!r}",
        f"n = {config.n}",
        f"n0 = {config.n0}",
        f"bits = {config.bits}",
        f"range_lo = {config.range_lo!r}",
        f"range_hi = {config.range_hi!r}",
        f"sigma = {config.sigma!r}",
        f"replicates = {config.replicates}",
        f"sweep = {config.sweep_name}",
        "sweep_values = " + ",".join(repr(v) for v in config.sweep_values),
        f"max_total_draws = {config.max_total_draws}",
    ]
    if config.n1 is not None:
        body.insert(6, f"n1 = {config.n1}")
    return "\n".join(meta + body) + "\n"


# --- subcommands ------------------------------------------------------------

def _cmd_fisher(args) -> int:
    params = privacy_params(args.epsilon)
    payload = {
        "epsilon": args.epsilon,
        "t_eps": params.t_eps,
        "sign_fisher_info": sign_fisher_info(params),
        "optimal_variance": optimal_asymptotic_variance(params, args.sigma),
    }
    if args.k is not None:
        model = build_quantized_model(args.k)
        payload["quantized_check"] = fisher_info_quantized(
            embed_sign_channel(params, args.k), model)
    _emit(payload)
    return EXIT_OK


def _cmd_lp_verify(args) -> int:
    params = privacy_params(args.epsilon)
    report = equality_chain(args.k, params, tol=args.tol)
    holds = report.pop("chain_holds")
    _emit(report)
    return EXIT_OK if holds else EXIT_VERIFY


def _cmd_simulate(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    config = experiment_config_from_text(text, master_seed=args.seed,
                                         replicates_override=args.replicates)
    try:
        results = run_experiment(config, workers=args.workers)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    csv_text = results_to_csv(results, config.sweep_name)
    out = Path(args.output)
    try:
        with open(out, "w", newline="\n") as fh:
            fh.write(csv_text)
        with open(f"{out}.manifest", "w", newline="\n") as fh:
            fh.write(manifest_text(config, str(out)))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _load_values(path: str) -> np.ndarray:
    with open(path) as fh:
        values = [float(line) for line in fh if line.strip()]
    return np.asarray(values)


def _cmd_estimate(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    if args.input is not None:
        try:
            data = _load_values(args.input)
        except OSError as exc:
            print(f"error: cannot read data: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        data = rng.standard_normal(args.n)
        if args.sigma != 1.0:
            data *= args.sigma
        if args.theta != 0.0:
            data += args.theta
    cfg = EstimatorConfig(epsilon=args.epsilon, theta0=args.theta0, n1=args.n1,
                          n0=args.n0, bits=args.bits, range_lo=args.range_lo,
                          range_hi=args.range_hi, sigma=args.sigma)
    if args.kind == "one":
        result = one_stage(data, cfg, rng)
    elif args.kind == "two":
        if args.sigma != 1.0:
            result = rescaled_estimate(data, args.sigma, cfg, rng)
        else:
            result = two_stage(data, cfg, rng)
    else:
        if args.sigma != 1.0:
            raise _UsageError("sigma != 1 is supported with --kind two only")
        result = three_stage(data, cfg, rng)
    _emit({
        "theta_hat": result.theta_hat,
        "stages": list(result.stage_estimates),
        "clamped_flags": list(result.clamped),
    })
    return EXIT_OK


# --- argument wiring --------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="ldpmean",
                     description="Locally private Gaussian mean estimation toolkit")
    parser.add_argument("--version", action="version", version=f"ldpmean {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fisher", help="closed-form information and variance")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--k", type=int, default=None,
                   help="also report the level-k embedded-channel information")
    p.set_defaults(func=_cmd_fisher)

    p = sub.add_parser("lp-verify", help="solve the staircase program and check the certificate")
    p.add_argument("--k", type=int, required=True, help="even quantizer level, 2..12")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_lp_verify)

    p = sub.add_parser("simulate", help="run a Monte Carlo config, write CSV + manifest")
    p.add_argument("config", help="key = value config file")
    p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    p.add_argument("--output", required=True, help="CSV output path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--replicates", type=int, default=None,
                   help="override the config's replicate count (lab downscale)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate from a data file or synthetic draws")
    p.add_argument("--kind", choices=("one", "two", "three"), default="two")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n0", type=int, default=15_000)
    p.add_argument("--bits", type=int, default=7)
    p.add_argument("--range-lo", type=float, default=0.0)
    p.add_argument("--range-hi", type=float, default=128.0)
    p.add_argument("--sigma", type=float, default=1.0)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="newline-delimited reals")
    src.add_argument("--synthetic", action="store_true", help="draw N(theta, sigma^2) data")
    p.add_argument("--theta", type=float, default=0.0, help="synthetic true mean")
    p.add_argument("--n", type=int, default=None, help="synthetic sample count")
    p.set_defaults(func=_cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "synthetic", False) and args.n is None:
            raise _UsageError("--synthetic requires --n")
        return args.func(args)
    except (_UsageError, ConfigError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
