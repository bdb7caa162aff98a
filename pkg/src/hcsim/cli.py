"""Command-line front end: trace generation, single runs, parameter
sweeps over the experiment grid, architecture comparison, and report
aggregation.

Exit codes: 0 success, 1 simulation invariant violation, 2 usage or
configuration error.  Set HCSIM_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import logging
import math
import os
import sys
import zlib
from pathlib import Path

from . import __version__
from .metrics import CostModel
from .policy import PolicyConfig
from .presets import (CACHE_CAPACITY_PAIRS, GRID_ALPHAS, GRID_H_VALUES,
                      GRID_MEAN_SIZES, desk_trace_config)
from .simulator import (InvariantError, SimConfig, build_report, compute_cbr,
                        load_config, load_events, report_csv_row, report_json,
                        rows_to_csv, simulate_events, write_report)
from .store import GB, MB, TierConfig
from .workload import (ConfigError, TraceConfig, TraceFormatError,
                       build_catalogue, generate_trace, unique_content_bytes,
                       write_catalogue, write_trace)

log = logging.getLogger("hcsim")

_SIZE_SUFFIXES = {
    "B": 1, "KB": 10**3, "MB": 10**6, "GB": 10**9, "TB": 10**12,
    "KIB": 2**10, "MIB": 2**20, "GIB": 2**30, "TIB": 2**40,
}


def parse_size(text: str) -> float:
    """'1MB' -> 1e6; decimal and binary suffixes, or plain bytes."""
    s = str(text).strip()
    upper = s.upper()
    for suffix in sorted(_SIZE_SUFFIXES, key=len, reverse=True):
        if upper.endswith(suffix):
            return float(s[: -len(suffix)]) * _SIZE_SUFFIXES[suffix]
    return float(s)


def format_size(nbytes: float) -> str:
    for suffix, scale in (("TB", 10**12), ("GB", 10**9), ("MB", 10**6),
                          ("KB", 10**3)):
        if nbytes >= scale and nbytes % scale == 0:
            return f"{int(nbytes // scale)}{suffix}"
    return f"{int(nbytes)}B"


def _setup_logging() -> None:
    level = os.environ.get("HCSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# -- gen-trace ---------------------------------------------------------------


def _add_trace_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--requests", type=int, default=100_000)
    p.add_argument("--objects", type=int, default=10_000,
                   help="catalogue size (unique keys)")
    p.add_argument("--alpha", type=float, default=0.8, help="Zipf exponent")
    p.add_argument("--mean-size", default="1MB")
    p.add_argument("--stddev", default=None,
                   help="size stddev (default: equal to the mean)")
    p.add_argument("--read-fraction", type=float, default=0.8)
    p.add_argument("--rate", type=float, default=290.0,
                   help="aggregate request rate, req/s")
    p.add_argument("--min-size", default="4KiB")
    p.add_argument("--delete-fraction", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)


def _trace_config_from_args(args) -> TraceConfig:
    mean = parse_size(args.mean_size)
    stddev = mean if args.stddev is None else parse_size(args.stddev)
    return TraceConfig(
        catalogue_size=args.objects,
        mean_size=mean,
        size_stddev=stddev,
        zipf_alpha=args.alpha,
        read_fraction=args.read_fraction,
        total_requests=args.requests,
        total_rate=args.rate,
        seed=args.seed,
        min_size=int(parse_size(args.min_size)),
        delete_fraction=args.delete_fraction,
    )


def cmd_gen_trace(args) -> int:
    cfg = _trace_config_from_args(args)
    if args.out:
        trace_path = Path(args.out)
    else:
        trace_path = Path(f"trace_a{cfg.zipf_alpha:g}_m{format_size(cfg.mean_size)}.hctrace")
    catalogue_path = trace_path.with_suffix(".hccat")

    catalogue = build_catalogue(cfg)
    trace = generate_trace(catalogue, cfg)
    write_trace(trace, trace_path)
    write_catalogue(catalogue, catalogue_path)

    gets = sum(1 for ev in trace if ev.is_read)
    uniques = len({ev.key for ev in trace})
    frac = gets / len(trace) if trace else float("nan")
    print(f"wrote {trace_path} ({len(trace)} events, {uniques} unique keys, "
          f"read fraction {frac:.4f})")
    print(f"wrote {catalogue_path} ({len(catalogue)} objects)")
    return 0


# -- simulate ----------------------------------------------------------------


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON simulation config")
    p.add_argument("--trace", help="trace file (overrides config trace)")
    p.add_argument("--policy", default=None,
                   help="hgreedy | hgreedy-offline | lru | density-greedy | "
                        "dram-only | nvm-only")
    p.add_argument("--h", type=float, default=None, help="write exponent")
    p.add_argument("--delta", type=int, default=None,
                   help="requests between eviction batches")
    p.add_argument("--tau", default=None,
                   help="seconds between statistic resets ('inf' disables)")
    p.add_argument("--dram-capacity", default=None)
    p.add_argument("--nvm-capacity", default=None)
    p.add_argument("--cc-dram", type=float, default=None,
                   help="DRAM capacity as a fraction of trace unique bytes")
    p.add_argument("--cc-nvm", type=float, default=None)
    p.add_argument("--check-invariants", type=int, default=0, metavar="N",
                   help="audit invariants every N events")


def _sim_config_from_args(args, events=None) -> SimConfig:
    if args.config:
        config = load_config(args.config)
    else:
        if not args.trace:
            raise ConfigError("either --config or --trace is required")
        config = SimConfig(trace=args.trace,
                           dram=TierConfig(capacity=0.0),
                           nvm=TierConfig(capacity=0.0))
    if args.trace:
        config = dataclasses.replace(config, trace=args.trace)

    policy = config.policy
    if args.policy is not None:
        policy = dataclasses.replace(policy, name=args.policy)
    if args.h is not None:
        policy = dataclasses.replace(policy, write_exponent=args.h)
    if args.delta is not None:
        policy = dataclasses.replace(policy, eviction_interval=args.delta)
    if args.tau is not None:
        tau = math.inf if args.tau == "inf" else float(args.tau)
        policy = dataclasses.replace(policy, reset_interval=tau)
    config = dataclasses.replace(config, policy=policy)

    if args.dram_capacity is not None:
        config = dataclasses.replace(
            config, dram=dataclasses.replace(
                config.dram, capacity=parse_size(args.dram_capacity)))
    if args.nvm_capacity is not None:
        config = dataclasses.replace(
            config, nvm=dataclasses.replace(
                config.nvm, capacity=parse_size(args.nvm_capacity)))
    if args.cc_dram is not None or args.cc_nvm is not None:
        if events is None:
            raise ConfigError("--cc-dram/--cc-nvm need a loaded trace")
        unique = unique_content_bytes(events)
        if args.cc_dram is not None:
            config = dataclasses.replace(
                config, dram=dataclasses.replace(
                    config.dram, capacity=args.cc_dram * unique))
        if args.cc_nvm is not None:
            config = dataclasses.replace(
                config, nvm=dataclasses.replace(
                    config.nvm, capacity=args.cc_nvm * unique))
    return config


def cmd_simulate(args) -> int:
    pre = _sim_config_from_args(args)
    events = load_events(pre)
    config = _sim_config_from_args(args, events)
    metrics = simulate_events(events, config,
                              check_interval=args.check_invariants)
    report = build_report(metrics, config)
    if args.out:
        write_report(report, args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(report_json(report))
    return 0


# -- sweep -------------------------------------------------------------------


def cell_seed(base_seed: int, name: str) -> int:
    """Stable per-cell seed: base XOR CRC32 of the cell name, so adding
    cells never perturbs existing ones."""
    return base_seed ^ zlib.crc32(name.encode())


def _cell_name(alpha: float, mean_size: float, h: float) -> str:
    return f"a{alpha:g}_m{format_size(mean_size)}_h{h:g}"


def _run_sweep_cell(payload: tuple) -> tuple[str, dict | None, str | None]:
    name, trace_cfg, sim_cfg = payload
    try:
        catalogue = build_catalogue(trace_cfg)
        events = generate_trace(catalogue, trace_cfg)
        metrics = simulate_events(events, sim_cfg)
        return name, build_report(metrics, sim_cfg), None
    except Exception as exc:  # recorded per cell, sweep continues
        return name, None, f"{type(exc).__name__}: {exc}"


def cmd_sweep(args) -> int:
    alphas = [float(a) for a in args.alphas.split(",")]
    sizes = [parse_size(s) for s in args.mean_sizes.split(",")]
    h_values = [float(h) for h in args.h_values.split(",")]
    if not alphas or not sizes or not h_values:
        raise ConfigError("sweep lists must be nonempty")

    # Fixed provisioning across the grid: the reference pair applies at
    # the first mean size, larger files shrink cache capacity naturally.
    ref_bytes = args.objects * sizes[0]
    dram_cap = (parse_size(args.dram_capacity) if args.dram_capacity
                else CACHE_CAPACITY_PAIRS[0][0] * ref_bytes)
    nvm_cap = (parse_size(args.nvm_capacity) if args.nvm_capacity
               else CACHE_CAPACITY_PAIRS[0][1] * ref_bytes)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for alpha in alphas:
        for mean in sizes:
            for h in h_values:
                name = _cell_name(alpha, mean, h)
                trace_cfg = TraceConfig(
                    catalogue_size=args.objects,
                    mean_size=mean, size_stddev=mean,
                    zipf_alpha=alpha,
                    total_requests=args.requests,
                    seed=cell_seed(args.seed, name),
                )
                sim_cfg = SimConfig(
                    trace=trace_cfg,
                    dram=TierConfig(capacity=dram_cap),
                    nvm=TierConfig(capacity=nvm_cap),
                    policy=PolicyConfig(name=args.policy, write_exponent=h),
                    seed=trace_cfg.seed,
                )
                jobs.append((name, trace_cfg, sim_cfg))

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_sweep_cell, jobs))
    else:
        outcomes = [_run_sweep_cell(j) for j in jobs]

    failures = []
    rows = []
    for name, report, error in sorted(outcomes, key=lambda o: o[0]):
        if error is not None:
            (out_dir / f"cell_{name}.error.txt").write_text(error + "\n")
            failures.append((name, error))
            continue
        write_report(report, out_dir / f"cell_{name}.json")
        rows.append(report_csv_row(report))
    (out_dir / "aggregate.csv").write_text(rows_to_csv(rows))

    print(f"{len(rows)} cells ok, {len(failures)} failed -> {out_dir}")
    for name, error in failures:
        print(f"  FAILED {name}: {error}", file=sys.stderr)
    return 1 if failures else 0


# -- compare -----------------------------------------------------------------


def cmd_compare(args) -> int:
    pre = _sim_config_from_args(args)
    events = load_events(pre)
    hybrid_cfg = _sim_config_from_args(args, events)
    total = hybrid_cfg.dram.capacity + hybrid_cfg.nvm.capacity
    if total <= 0:
        raise ConfigError("compare needs nonzero dram/nvm capacities")

    # All-DRAM and all-NVM builds get the same total capacity, mirroring
    # the cost-benefit denominator.
    rows = []
    variants = [
        ("hybrid", hybrid_cfg),
        ("dram-only", dataclasses.replace(
            hybrid_cfg,
            dram=dataclasses.replace(hybrid_cfg.dram, capacity=total),
            nvm=dataclasses.replace(hybrid_cfg.nvm, capacity=0.0),
            policy=dataclasses.replace(hybrid_cfg.policy, name="dram-only"))),
        ("nvm-only", dataclasses.replace(
            hybrid_cfg,
            dram=dataclasses.replace(hybrid_cfg.dram, capacity=0.0),
            nvm=dataclasses.replace(hybrid_cfg.nvm, capacity=total),
            policy=dataclasses.replace(hybrid_cfg.policy, name="nvm-only"))),
    ]
    reports = {}
    for label, cfg in variants:
        metrics = simulate_events(events, cfg,
                                  check_interval=args.check_invariants)
        report = build_report(metrics, cfg)
        reports[label] = report
        res = report["results"]
        misses = res["reads"]["miss"] + res["writes"]["miss"]
        rows.append({
            "config": label,
            "requests": res["total_requests"],
            "avg_latency_s": res["avg_access_latency_seconds"],
            "avg_power_w": res["avg_power_watts"],
            "cbr": res["cbr"],
            "miss_rate": misses / res["total_requests"],
        })

    header = f"{'config':<10} {'requests':>9} {'avg_latency_s':>14} " \
             f"{'avg_power_w':>12} {'cbr':>8} {'miss_rate':>10}"
    print(header)
    for r in rows:
        print(f"{r['config']:<10} {r['requests']:>9} "
              f"{r['avg_latency_s']:>14.6e} {r['avg_power_w']:>12.2f} "
              f"{r['cbr']:>8.4f} {r['miss_rate']:>10.4f}")

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for label, report in reports.items():
            write_report(report, out_dir / f"compare_{label}.json")
        (out_dir / "compare.csv").write_text(
            rows_to_csv([report_csv_row(r) for _, r in sorted(reports.items())]))
        print(f"wrote {out_dir}")
    return 0


# -- report ------------------------------------------------------------------


def cmd_report(args) -> int:
    paths: list[Path] = []
    for item in args.reports:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        else:
            paths.append(p)
    if not paths:
        raise ConfigError("no report files given")
    rows = []
    for p in paths:
        report = json.loads(p.read_text())
        rows.append(report_csv_row(report))
        res = report["results"]
        print(f"{p.name}: policy={report['config']['policy']['name']} "
              f"requests={res['total_requests']} "
              f"read_miss={res['read_fractions']['miss']} "
              f"write_miss={res['write_fractions']['miss']} "
              f"avg_latency={res['avg_access_latency_seconds']}")
    if args.csv:
        Path(args.csv).write_text(rows_to_csv(rows))
        print(f"wrote {args.csv}")
    return 0


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcsim",
        description="Hybrid DRAM/NVM edge-cache simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-trace", help="generate a catalogue and trace")
    _add_trace_args(p)
    p.add_argument("--out", help="trace path (catalogue gets .hccat)")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("simulate", help="run one simulation")
    _add_sim_args(p)
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the experiment grid")
    p.add_argument("--alphas", default=",".join(str(a) for a in GRID_ALPHAS))
    p.add_argument("--mean-sizes",
                   default=",".join(format_size(s) for s in GRID_MEAN_SIZES))
    p.add_argument("--h-values",
                   default=",".join(f"{h:g}" for h in GRID_H_VALUES))
    p.add_argument("--requests", type=int, default=200_000)
    p.add_argument("--objects", type=int, default=10_000)
    p.add_argument("--policy", default="hgreedy")
    p.add_argument("--dram-capacity", default=None,
                   help="bytes (default: reference cache-capacity pair)")
    p.add_argument("--nvm-capacity", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare",
                       help="hybrid vs dram-only vs nvm-only on one trace")
    _add_sim_args(p)
    p.add_argument("--out", help="directory for per-variant reports")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="summarize report files, emit CSV")
    p.add_argument("reports", nargs="+", help="report files or directories")
    p.add_argument("--csv", help="aggregate CSV path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, TraceFormatError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
