"""Command-line entry points: generate, baseline, optimize, bench."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .baseline import schedule_trace
from .cluster import (
    load_allocation,
    load_instance,
    save_allocation,
    save_instance,
)
from .generator import DatasetGenerationError, GenerationParams, generate_dataset
from .optimizer import OptimizeFailed, OptimizeParams, optimize, plan_to_dict


def _cmd_generate(args) -> int:
    params = GenerationParams(
        num_nodes=args.nodes,
        pods_per_node=args.ppn,
        priority_tiers=args.tiers,
        usage_target=args.usage,
        seed=args.seed,
        priority_per_pod=args.priority_per_pod,
    )
    try:
        instances = generate_dataset(params, args.count)
    except DatasetGenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kept_seeds = []
    for k, instance in enumerate(instances):
        save_instance(instance, out_dir / f"instance_{k:04d}.json")
        kept_seeds.append(instance.generation["seed"])
    attempts = kept_seeds[-1] - args.seed + 1
    manifest = {
        "params": {
            "nodes": args.nodes, "ppn": args.ppn, "tiers": args.tiers,
            "usage": args.usage, "seed": args.seed,
            "priority_per_pod": args.priority_per_pod,
        },
        "count": len(instances),
        "kept_seeds": kept_seeds,
        "attempts": attempts,
        "acceptance_rate": len(instances) / attempts,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(instances)} instances to {out_dir} ({attempts} attempts)")
    return 0


def _cmd_baseline(args) -> int:
    instance = load_instance(args.instance)
    alloc, events = schedule_trace(instance)
    save_allocation(alloc, args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(event.to_dict()) + "\n")
    pending = sum(1 for e in events if not e.bound)
    print(f"placed {len(events) - pending}/{len(events)} pods ({pending} pending)")
    return 0


def _cmd_optimize(args) -> int:
    instance = load_instance(args.instance)
    current = load_allocation(args.current)
    params = OptimizeParams(
        t_total=args.timeout, alpha=args.alpha, seed=args.seed, workers=args.workers,
        line18_literal=args.line18_literal, symmetry_breaking=args.symmetry_breaking,
    )
    try:
        plan = optimize(instance, current, params)
    except OptimizeFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n", encoding="utf-8")
    placed = sum(1 for w in plan.final_allocation.where if w != 0)
    print(f"placed {placed}/{instance.num_pods} pods with {len(plan.moves)} moves, "
          f"{len(plan.evictions)} evictions (proven_optimal={plan.proven_optimal}, "
          f"{plan.wall_time:.3f}s)")
    return 0


def _cmd_bench(args) -> int:
    dataset_dir = Path(args.dataset)
    files = sorted(dataset_dir.glob("instance_*.json"))
    if not files:
        print(f"error: no instance_*.json files under {dataset_dir}", file=sys.stderr)
        return 1
    items = []
    load_errors = []
    for f in files:
        try:
            items.append((f.stem, load_instance(f)))
        except Exception as exc:
            load_errors.append((f.stem, f"{type(exc).__name__}: {exc}"))
    timeouts = [float(t) for t in args.timeouts.split(",") if t]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = bench_mod.run_experiment(
        items, timeouts, alpha=args.alpha, seed=args.seed, workers=args.workers,
        six_category=args.six_category, line18_literal=args.line18_literal,
        progress_path=out_dir / "progress.jsonl",
    )
    meta = {
        "alpha": args.alpha, "seed": args.seed, "workers": args.workers,
        "concurrency": 1, "timeouts": timeouts, "six_category": args.six_category,
    }
    bench_mod.emit_report(result.records, out_dir, plots=args.plots, meta=meta)
    print(f"wrote {len(result.records)} records to {out_dir}")
    all_errors = load_errors + list(result.errors)
    for instance_id, message in all_errors:
        print(f"error on {instance_id}: {message}", file=sys.stderr)
    return 1 if all_errors else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="podopt",
        description="Pod placement: deterministic baseline scheduling, exact "
                    "re-optimization, scenario generation, and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a dataset the baseline scheduler fails on")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--ppn", type=int, required=True, help="average pods per node")
    p.add_argument("--tiers", type=int, required=True, help="number of priority tiers")
    p.add_argument("--usage", type=int, required=True, help="target usage percent")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--priority-per-pod", action="store_true",
                   help="draw priorities per pod instead of per ReplicaSet")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("baseline", help="run the deterministic baseline scheduler")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True, help="allocation JSON output")
    p.add_argument("--trace", help="JSON-lines scheduling trace output")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("optimize", help="re-optimize an allocation under a time budget")
    p.add_argument("--instance", required=True)
    p.add_argument("--current", required=True, help="current allocation JSON")
    p.add_argument("--timeout", type=float, required=True, help="total budget in seconds")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--line18-literal", action="store_true",
                   help="carry <= instead of >= after a timed-out stability pass")
    p.add_argument("--symmetry-breaking", action="store_true")
    p.add_argument("--out", required=True, help="plan JSON output")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("bench", help="run the benchmark over a generated dataset")
    p.add_argument("--dataset", required=True, help="directory with instance_*.json")
    p.add_argument("--timeouts", default="1,10,20", help="comma-separated seconds")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--six-category", action="store_true",
                   help="report unimproved-but-unproven runs separately from failures")
    p.add_argument("--line18-literal", action="store_true")
    p.add_argument("--plots", action="store_true", help="write stacked-bar SVGs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
