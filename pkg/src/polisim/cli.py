"""Command line interface: batch runs, sensitivity sweeps, synthetic data export.

Exit codes: 0 ok, 2 config error, 3 runtime/integrity failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .params import ConfigError, RunConfig, SCENARIOS, load_config
from .runner import parse_sweep_spec, run_batch, summarize_sweep
from .synthpop import generate_synthetic_inputs, write_input_tables

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polisim",
        description="Deterministic metropolitan-economy simulator with policy experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("-c", "--cpus", type=int, default=1, help="worker processes")
        p.add_argument("-n", "--runs", type=int, default=1, help="runs per configuration")
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--scenario", type=str, default=None, choices=SCENARIOS)
        p.add_argument("--out", type=str, default=None,
                       help="output directory (default ./out, env POLISIM_OUT overrides)")
        p.add_argument("--horizon", type=int, default=None, help="months to simulate")
        p.add_argument("--plots", action="store_true", help="emit SVG plots")

    run_p = sub.add_parser("run", help="execute simulation runs")
    common(run_p)

    sens_p = sub.add_parser("sensitivity", help="parameter sweep or POLICIES comparison")
    sens_p.add_argument("spec", type=str,
                        help="PARAM:INITIAL_VALUE:LAST_VALUE:NUMBER_INTERVALS, or POLICIES")
    common(sens_p)

    gen_p = sub.add_parser("gen-data", help="emit synthetic input tables as CSV")
    gen_p.add_argument("--out", type=str, required=True)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--regions", type=int, default=9)
    gen_p.add_argument("--municipalities", type=int, default=3)
    gen_p.add_argument("--scale", type=int, default=400_000)
    return parser


def _resolve_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
        cfg.validate()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.scenario is not None:
        cfg.scenario = args.scenario
    if args.horizon is not None:
        cfg.horizon_months = args.horizon
    cfg.validate()
    return cfg


def _resolve_out(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("POLISIM_OUT")
    if env:
        return Path(env)
    return Path("out")


def _report(outcomes) -> int:
    failed = [o for o in outcomes if o.status != "ok"]
    for o in outcomes:
        line = f"{o.run_id}: {o.status}"
        if o.error:
            line += f" ({o.error})"
        print(line)
    if failed:
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    out = _resolve_out(args)
    outcomes = run_batch(cfg, n_runs=args.runs, cpus=args.cpus, out_dir=out)
    code = _report(outcomes)
    if code == EXIT_OK and args.plots:
        from .plots import plot_indicators
        plot_indicators(out)
    print(f"wrote {out}/manifest.json")
    return code


def cmd_sensitivity(args) -> int:
    cfg = _resolve_config(args)
    out = _resolve_out(args)
    parsed = parse_sweep_spec(args.spec)
    if parsed == "POLICIES":
        outcomes = run_batch(cfg, n_runs=args.runs, cpus=args.cpus, out_dir=out,
                             scenarios=list(SCENARIOS))
    else:
        name, values = parsed
        cfg.params.with_override(name, values[0])     # early validation of the range
        cfg.params.with_override(name, values[-1])
        points = [(name, v) for v in values]
        outcomes = run_batch(cfg, n_runs=args.runs, cpus=args.cpus, out_dir=out,
                             param_points=points)
    code = _report(outcomes)
    summarize_sweep(out)
    if code == EXIT_OK:
        from .plots import plot_indicators
        plot_indicators(out)
    print(f"wrote {out}/summary.csv")
    return code


def cmd_gen_data(args) -> int:
    specs, tables = generate_synthetic_inputs(args.seed, args.regions,
                                              args.municipalities, args.scale)
    written = write_input_tables(specs, tables, args.out)
    for path in written:
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sensitivity":
            return cmd_sensitivity(args)
        if args.command == "gen-data":
            return cmd_gen_data(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
