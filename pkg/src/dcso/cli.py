"""Command-line entry points: run experiments, scan landscapes, self-test."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bench import QueueModel, QueueOracle, SeparableModel
from .harness import ConfigError, ExperimentConfig, landscape_scan, run_experiment
from .oracle import SolverFailedError
from .rng import seed_stream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _cmd_run(args) -> int:
    try:
        cfg = ExperimentConfig.from_json(args.config)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        curve, records = run_experiment(cfg)
    except SolverFailedError as e:
        print(f"solver failed: {e}", file=sys.stderr)
        return EXIT_SOLVER
    for N, mean_cost, std_cost, cov in curve.rows:
        cov_s = "n/a" if cov is None else f"{cov:.3f}"
        print(f"N={N}: mean_cost={mean_cost:.1f} std={std_cost:.1f} coverage={cov_s}")
    if cfg.output_path:
        print(f"wrote {len(records)} rows to {cfg.output_path}")
    return EXIT_OK


def _cmd_landscape(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    known = {"model", "N", "replications", "master_seed", "output_path", "points", "d", "noise_sigma"}
    unknown = set(raw) - known
    if unknown:
        print(f"config error: unknown keys {sorted(unknown)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        model_name = raw["model"]
        N = int(raw["N"])
        reps = int(raw.get("replications", 100))
        seed = int(raw.get("master_seed", 0))
        if model_name == "QUEUE":
            oracle = QueueOracle(QueueModel(N=N))
        elif model_name == "SEPARABLE":
            rng_m = seed_stream(seed, "landscape-model")
            d = int(raw.get("d", 1))
            from .bench import random_separable_model

            oracle = random_separable_model(d, N, rng_m, noise_sigma=float(raw.get("noise_sigma", 1.0))).oracle()
        else:
            print(f"config error: unknown model {model_name!r}", file=sys.stderr)
            return EXIT_CONFIG
        points = raw.get("points", list(range(1, N + 1)))
    except (KeyError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    rng = seed_stream(seed, "landscape")
    rows = landscape_scan(oracle, points, reps, rng, output_path=raw.get("output_path"))
    for x, mean, hw in rows:
        print(f"{x},{mean:.6g},{hw:.6g}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    """Fast built-in sanity checks of the core formulas and solvers."""
    import math

    from .lovasz import lovasz_value, neighbor_chain, so_sample_count
    from .onedim import adaptive_sampling, trisection_quantiles
    from .oracle import Guarantee, hoeffding_halfwidth, samples_for_width

    failures = []

    def check(name, ok):
        print(f"{'ok' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    h = hoeffding_halfwidth(100, 1.0, 0.05)
    check("hoeffding halfwidth", abs(h - math.sqrt(0.02 * math.log(40.0))) < 1e-15)
    check("halfwidth inversion", samples_for_width(h, 1.0, 0.05) == 100)
    check("separation sample count", so_sample_count(2, 50, 1.0, 1.0, 0.1) == 59915)
    check("trisection", trisection_quantiles(1, 150) == (50, 101))
    chain = neighbor_chain([1.0, 1.5], (3, 3))
    check("extension value", abs(lovasz_value([0.0, 1.0, 3.0], chain) - 0.5) < 1e-15)
    r1 = seed_stream(7, "a", 1).integers(0, 2**31, size=4)
    r2 = seed_stream(7, "a", 1).integers(0, 2**31, size=4)
    check("seed streams reproducible", bool(np.all(r1 == r2)))

    model = SeparableModel(d=1, N=20, c=np.array([1.0]), x_star=np.array([4]), noise_sigma=0.0)
    rng = seed_stream(11, "selftest")
    sol = adaptive_sampling(model.oracle(), 20, Guarantee(epsilon=0.05, delta=0.1), rng)
    check("zero-noise trisection finds optimum", model.true_value([sol]) <= 0.05)

    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return EXIT_SOLVER
    print("all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dcso", description="Discrete convex simulation optimization toolkit")
    parser.add_argument("--version", action="version", version=f"dcso {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a replication experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the experiment JSON")
    p_run.set_defaults(func=_cmd_run)

    p_land = sub.add_parser("landscape", help="scan a model landscape to CSV")
    p_land.add_argument("--config", required=True, help="path to the landscape JSON")
    p_land.set_defaults(func=_cmd_landscape)

    p_self = sub.add_parser("selftest", help="run the built-in sanity checks")
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
