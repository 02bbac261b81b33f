"""Command-line entry point.

Usage::

    stein-gpmp plan --config scene.cfg --out runs/a [--seed 7] [--particles 4]
                    [--max-iters 50] [--threads 2]

Exit codes: 0 success, 2 bad arguments or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import ConfigError, dumps, fmt, load
from .planner import PlanningError, PlanResult, PlanRequest, plan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TRACE_HEADER = "iter,v_hat,expected_cost,cost_variance,mean_update_norm"

logger = logging.getLogger("stein_gpmp")


def apply_overrides(req: PlanRequest, seed=None, particles=None, max_iters=None,
                    threads=None) -> PlanRequest:
    cfg = req.config
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    if max_iters is not None:
        cfg = dataclasses.replace(cfg, max_iters=max_iters)
    changes = {"config": cfg}
    if particles is not None:
        changes["n_particles"] = particles
    if threads is not None:
        changes["threads"] = threads
    return dataclasses.replace(req, **changes)


def trace_csv(result: PlanResult) -> str:
    rows = [TRACE_HEADER]
    for rep in result.reports:
        rows.append(",".join([str(rep.iter), fmt(rep.v_hat), fmt(rep.expected_cost),
                              fmt(rep.cost_variance), fmt(rep.mean_update_norm)]))
    return "\n".join(rows) + "\n"


def particle_csv(result: PlanResult, i: int) -> str:
    spec = result.particles.spec
    header = ["t"] + [f"q{k}" for k in range(spec.dof)] + [f"v{k}" for k in range(spec.dof)]
    rows = [",".join(header)]
    for t, state in zip(spec.times(), result.particles[i].states()):
        rows.append(",".join([fmt(t)] + [fmt(v) for v in state]))
    return "\n".join(rows) + "\n"


def weights_csv(result: PlanResult) -> str:
    rows = ["particle,weight"]
    rows += [f"{i},{fmt(w)}" for i, w in enumerate(result.reports[-1].weights)]
    return "\n".join(rows) + "\n"


def meta_txt(req: PlanRequest, result: PlanResult) -> str:
    return (
        f"termination = {result.termination}\n"
        f"iterations = {result.reports[-1].iter}\n\n"
        "# resolved configuration\n" + dumps(req)
    )


def write_outputs(out_dir, req: PlanRequest, result: PlanResult) -> None:
    """Write trace, per-particle trajectories, weights and metadata to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(trace_csv(result))
    for i in range(len(result.particles)):
        (out / f"particle_{i}.csv").write_text(particle_csv(result, i))
    (out / "weights.csv").write_text(weights_csv(result))
    (out / "meta.txt").write_text(meta_txt(req, result))


def _positive_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return val


def _seed(text):
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stein-gpmp",
                                     description="Stein variational GP motion planning")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plan", help="run the particle planner on a config file")
    p.add_argument("--config", required=True, help="scenario configuration file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--particles", type=_positive_int)
    p.add_argument("--max-iters", type=_positive_int)
    p.add_argument("--threads", type=_positive_int)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        req = load(args.config)
        req = apply_overrides(req, args.seed, args.particles, args.max_iters, args.threads)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = plan(req)
    except PlanningError as exc:
        print(f"error: numerical failure at {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        write_outputs(args.out, req, result)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{result.termination} after {result.reports[-1].iter} iterations; "
          f"V_hat = {result.reports[-1].v_hat:.6g}; wrote {args.out}")
    return EXIT_OK


def main():
    sys.exit(run_cli())
