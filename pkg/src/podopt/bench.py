"""Benchmark loop: baseline trace, optimizer on failures, outcome reports.

Each instance/timeout pair yields one outcome record. Categories follow the
usual reading of such experiments: the optimizer beat the baseline with or
without an optimality proof, certified the baseline as optimal, was never
invoked because the baseline placed everything, or delivered nothing before
the deadline.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .baseline import schedule_trace
from .cluster import (
    Allocation,
    Instance,
    Ordering,
    PlacementVector,
    compare_lex,
    placement_vector,
    utilization,
)
from .optimizer import (
    OptimizeFailed,
    OptimizeParams,
    Plan,
    SolveStatus,
    TierReport,
    optimize,
)


class Category(Enum):
    BETTER_AND_OPTIMAL = "BETTER_AND_OPTIMAL"
    BETTER = "BETTER"
    KWOK_OPTIMAL = "KWOK_OPTIMAL"
    NO_CALLS = "NO_CALLS"
    FAILURE = "FAILURE"
    UNIMPROVED = "UNIMPROVED"  # only emitted in six-category mode


@dataclass(frozen=True)
class OutcomeRecord:
    instance_id: str
    config: str  # generator parameters, for grouping in the summary
    timeout: float
    category: Category
    baseline_vector: PlacementVector
    optimizer_vector: PlacementVector | None
    proven_optimal: bool | None
    solver_duration: float  # wall seconds around the optimize call
    delta_cpu_util: float | None  # optimizer minus baseline, percentage points
    delta_mem_util: float | None
    moves: int | None
    evictions: int | None
    tiers: tuple[TierReport, ...] | None


@dataclass(frozen=True)
class RunResult:
    records: tuple[OutcomeRecord, ...]
    errors: tuple[tuple[str, str], ...]  # (instance_id, message)


def classify_outcome(
    baseline: Allocation,
    plan: Plan | None,
    instance: Instance,
    six_category: bool = False,
) -> Category:
    if all(w != 0 for w in baseline.where):
        return Category.NO_CALLS
    if plan is None:
        return Category.FAILURE
    base_vec = placement_vector(instance, baseline)
    plan_vec = placement_vector(instance, plan.final_allocation)
    order = compare_lex(plan_vec, base_vec)
    if order is Ordering.LESS:
        raise AssertionError("optimizer produced a lexicographically worse allocation")
    if order is Ordering.GREATER:
        return Category.BETTER_AND_OPTIMAL if plan.proven_optimal else Category.BETTER
    if plan.proven_optimal:
        return Category.KWOK_OPTIMAL
    return Category.UNIMPROVED if six_category else Category.FAILURE


def _config_label(instance: Instance) -> str:
    g = instance.generation
    if not g:
        return "custom"
    return (f"nodes={g.get('num_nodes')},ppn={g.get('pods_per_node')},"
            f"tiers={g.get('priority_tiers')},usage={g.get('usage_target')}")


def run_experiment(
    items: list[tuple[str, Instance]],
    timeouts: list[float],
    alpha: float = 0.8,
    seed: int = 0,
    workers: int = 1,
    six_category: bool = False,
    line18_literal: bool = False,
    progress_path: str | Path | None = None,
) -> RunResult:
    """Baseline each instance, optimize the failures at every timeout, classify.

    Records are appended to `progress_path` (JSON lines) as they complete, so
    a crashed run keeps everything finished so far. Per-instance exceptions
    are collected, not raised.
    """
    records: list[OutcomeRecord] = []
    errors: list[tuple[str, str]] = []
    for instance_id, instance in items:
        try:
            baseline_alloc, events = schedule_trace(instance)
            base_vec = placement_vector(instance, baseline_alloc)
            config = _config_label(instance)
            fully_placed = all(e.bound for e in events)
            for timeout in timeouts:
                if fully_placed:
                    record = OutcomeRecord(
                        instance_id, config, timeout, Category.NO_CALLS, base_vec,
                        optimizer_vector=None, proven_optimal=None, solver_duration=0.0,
                        delta_cpu_util=None, delta_mem_util=None,
                        moves=None, evictions=None, tiers=None,
                    )
                else:
                    params = OptimizeParams(
                        t_total=timeout, alpha=alpha, seed=seed, workers=workers,
                        line18_literal=line18_literal,
                    )
                    start = time.monotonic()
                    try:
                        plan = optimize(instance, baseline_alloc, params)
                    except OptimizeFailed:
                        plan = None
                    duration = time.monotonic() - start
                    category = classify_outcome(baseline_alloc, plan, instance, six_category)
                    if plan is None:
                        record = OutcomeRecord(
                            instance_id, config, timeout, category, base_vec,
                            optimizer_vector=None, proven_optimal=None,
                            solver_duration=duration, delta_cpu_util=None,
                            delta_mem_util=None, moves=None, evictions=None, tiers=None,
                        )
                    else:
                        base_util = utilization(instance, baseline_alloc)
                        plan_util = utilization(instance, plan.final_allocation)
                        record = OutcomeRecord(
                            instance_id, config, timeout, category, base_vec,
                            optimizer_vector=placement_vector(instance, plan.final_allocation),
                            proven_optimal=plan.proven_optimal,
                            solver_duration=duration,
                            delta_cpu_util=float(plan_util[0] - base_util[0]),
                            delta_mem_util=float(plan_util[1] - base_util[1]),
                            moves=len(plan.moves),
                            evictions=len(plan.evictions),
                            tiers=plan.tiers,
                        )
                records.append(record)
                if progress_path is not None:
                    with open(progress_path, "a", encoding="utf-8") as fh:
                        fh.write(json.dumps(_record_to_row(record)) + "\n")
                        fh.flush()
        except Exception as exc:  # keep going; the harness reports at the end
            errors.append((instance_id, f"{type(exc).__name__}: {exc}"))
    return RunResult(tuple(records), tuple(errors))


# --- serialization --------------------------------------------------------

CSV_COLUMNS = [
    "instance_id", "config", "timeout_s", "category", "baseline_vector",
    "optimizer_vector", "proven_optimal", "solver_duration_s",
    "delta_cpu_util", "delta_mem_util", "moves", "evictions", "tiers",
]
TIMING_COLUMNS = {"solver_duration_s", "tiers"}  # the only run-to-run varying columns


def _tiers_to_json(tiers: tuple[TierReport, ...] | None) -> str:
    if tiers is None:
        return ""
    return json.dumps([
        {"tier": t.tier, "p1": t.phase1_status.value, "placed": t.placed_count,
         "t1": t.phase1_time, "p2": t.phase2_status.value, "move": t.move_metric_value,
         "t2": t.phase2_time}
        for t in tiers
    ])


def _tiers_from_json(text: str) -> tuple[TierReport, ...] | None:
    if not text:
        return None
    return tuple(
        TierReport(d["tier"], SolveStatus(d["p1"]), d["placed"], d["t1"],
                   SolveStatus(d["p2"]), d["move"], d["t2"])
        for d in json.loads(text)
    )


def _record_to_row(r: OutcomeRecord) -> dict:
    return {
        "instance_id": r.instance_id,
        "config": r.config,
        "timeout_s": repr(r.timeout),
        "category": r.category.value,
        "baseline_vector": json.dumps(list(r.baseline_vector.counts)),
        "optimizer_vector": "" if r.optimizer_vector is None else json.dumps(list(r.optimizer_vector.counts)),
        "proven_optimal": "" if r.proven_optimal is None else str(r.proven_optimal),
        "solver_duration_s": repr(r.solver_duration),
        "delta_cpu_util": "" if r.delta_cpu_util is None else repr(r.delta_cpu_util),
        "delta_mem_util": "" if r.delta_mem_util is None else repr(r.delta_mem_util),
        "moves": "" if r.moves is None else str(r.moves),
        "evictions": "" if r.evictions is None else str(r.evictions),
        "tiers": _tiers_to_json(r.tiers),
    }


def _record_from_row(row: dict) -> OutcomeRecord:
    return OutcomeRecord(
        instance_id=row["instance_id"],
        config=row["config"],
        timeout=float(row["timeout_s"]),
        category=Category(row["category"]),
        baseline_vector=PlacementVector(tuple(json.loads(row["baseline_vector"]))),
        optimizer_vector=(None if row["optimizer_vector"] == ""
                          else PlacementVector(tuple(json.loads(row["optimizer_vector"])))),
        proven_optimal=None if row["proven_optimal"] == "" else row["proven_optimal"] == "True",
        solver_duration=float(row["solver_duration_s"]),
        delta_cpu_util=None if row["delta_cpu_util"] == "" else float(row["delta_cpu_util"]),
        delta_mem_util=None if row["delta_mem_util"] == "" else float(row["delta_mem_util"]),
        moves=None if row["moves"] == "" else int(row["moves"]),
        evictions=None if row["evictions"] == "" else int(row["evictions"]),
        tiers=_tiers_from_json(row["tiers"]),
    )


def write_outcomes(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow(_record_to_row(r))


def read_outcomes(path: str | Path) -> list[OutcomeRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [_record_from_row(row) for row in csv.DictReader(fh)]


def summarize(records, meta: dict | None = None) -> dict:
    """Per-configuration category percentages and metric means."""
    by_config: dict[tuple[str, float], list[OutcomeRecord]] = {}
    for r in records:
        by_config.setdefault((r.config, r.timeout), []).append(r)
    configs = {}
    for (config, timeout), rows in sorted(by_config.items()):
        n = len(rows)
        counts = {cat.value: 0 for cat in Category}
        for r in rows:
            counts[r.category.value] += 1
        percentages = {cat: round(100.0 * c / n, 1) for cat, c in counts.items()}
        durations = [r.solver_duration for r in rows]
        cpu_deltas = [r.delta_cpu_util for r in rows if r.delta_cpu_util is not None]
        mem_deltas = [r.delta_mem_util for r in rows if r.delta_mem_util is not None]
        configs[f"{config},timeout={timeout:g}"] = {
            "instances": n,
            "counts": counts,
            "percentages": percentages,
            "mean_solver_duration_s": sum(durations) / n if n else 0.0,
            "mean_delta_cpu_util": sum(cpu_deltas) / len(cpu_deltas) if cpu_deltas else None,
            "mean_delta_mem_util": sum(mem_deltas) / len(mem_deltas) if mem_deltas else None,
        }
    summary = {"configurations": configs, "total_records": len(list(records))}
    if meta:
        summary["run"] = meta
    return summary


def emit_report(records, out_dir: str | Path, plots: bool = False,
                meta: dict | None = None) -> dict[str, Path]:
    """Write outcomes.csv, summary.json, and (optionally) stacked-bar SVGs."""
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"outcomes": out / "outcomes.csv", "summary": out / "summary.json"}
    write_outcomes(records, paths["outcomes"])
    paths["summary"].write_text(
        json.dumps(summarize(records, meta), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if plots:
        paths["plots"] = _plot_outcomes(records, out / "plots")
    return paths


_PLOT_ORDER = [Category.BETTER_AND_OPTIMAL, Category.BETTER, Category.KWOK_OPTIMAL,
               Category.NO_CALLS, Category.UNIMPROVED, Category.FAILURE]
_PLOT_COLORS = ["#2ca02c", "#ff7f0e", "#1f77b4", "#ffdf00", "#9467bd", "#7f7f7f"]


def _plot_outcomes(records, plot_dir: Path) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dir.mkdir(parents=True, exist_ok=True)
    sizes = sorted({_gen_field(r, "nodes=") for r in records})
    timeouts = sorted({r.timeout for r in records})
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(sizes), 4.0))
    group_width = 0.8
    bar_width = group_width / max(1, len(timeouts))
    for ti, timeout in enumerate(timeouts):
        bottoms = [0.0] * len(sizes)
        xs = [si - group_width / 2 + (ti + 0.5) * bar_width for si in range(len(sizes))]
        for cat, color in zip(_PLOT_ORDER, _PLOT_COLORS):
            heights = []
            for size in sizes:
                rows = [r for r in records if _gen_field(r, "nodes=") == size and r.timeout == timeout]
                share = 100.0 * sum(r.category is cat for r in rows) / len(rows) if rows else 0.0
                heights.append(share)
            ax.bar(xs, heights, bar_width * 0.9, bottom=bottoms,
                   color=color, label=cat.value if ti == 0 else None)
            bottoms = [b + h for b, h in zip(bottoms, heights)]
    ax.set_xticks(range(len(sizes)), [str(s) for s in sizes])
    ax.set_xlabel("cluster size (bars grouped by timeout)")
    ax.set_ylabel("% of instances")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = plot_dir / "outcomes_by_size.svg"
    fig.savefig(path)
    plt.close(fig)
    return plot_dir


def _gen_field(record: OutcomeRecord, prefix: str) -> str:
    for part in record.config.split(","):
        if part.startswith(prefix):
            return part[len(prefix):]
    return "?"
