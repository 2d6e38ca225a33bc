"""Priority-tiered exact re-optimization of a cluster allocation.

One model is grown across priority tiers (highest first). Per tier, two
maximization passes run under a shared wall-clock budget: first the number of
placed pods up to the tier, then a stability metric that rewards every
currently-running pod with 3 for keeping its node, 1 for moving to another
node, and 0 for being evicted. After each pass the achieved value is locked
into the model (== when the pass proved optimality, >= otherwise), so later
tiers can never degrade earlier ones. Each solve is warm-started with the
best assignment known so far, which also guarantees the result is never
lexicographically worse than the input allocation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .cluster import (
    UNPLACED,
    Allocation,
    Instance,
    feasibility_check,
)
from .solver import (
    LinearConstraint,
    LinearExpression,
    Model,
    Relation,
    SolveParams,
    SolveStatus,
    solve_max,
)


class OptimizeFailed(RuntimeError):
    """No feasible placement could be established before the deadline."""


@dataclass(frozen=True)
class OptimizeParams:
    t_total: float  # total wall-clock budget in seconds
    alpha: float = 0.8  # fraction of the budget reserved across tiers up front
    seed: int = 0
    workers: int = 1
    line18_literal: bool = False  # carry "<=" instead of ">=" after a timed-out stability pass
    symmetry_breaking: bool = False  # order interchangeable empty nodes (off by default)

    def __post_init__(self) -> None:
        if self.t_total <= 0:
            raise ValueError("t_total must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be within [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class TierReport:
    tier: int
    phase1_status: SolveStatus
    placed_count: int  # pods placed with priority <= tier
    phase1_time: float
    phase2_status: SolveStatus
    move_metric_value: int
    phase2_time: float


@dataclass(frozen=True)
class Plan:
    final_allocation: Allocation
    moves: tuple[tuple[int, int, int], ...]  # (pod, from_node, to_node)
    evictions: tuple[int, ...]  # placed in input, unplaced in output
    newly_placed: tuple[int, ...]  # unplaced in input, placed in output
    tiers: tuple[TierReport, ...]
    proven_optimal: bool  # every placement pass returned OPTIMAL
    wall_time: float


def bin_packing_constraints(instance: Instance, tier: int) -> list[LinearConstraint]:
    """Capacity and at-most-one-node rows for pods with priority <= tier."""
    if not 0 <= tier <= instance.pr_max:
        raise ValueError(f"tier {tier} outside [0, {instance.pr_max}]")
    eligible = [p for p in instance.pods if p.priority <= tier]
    if not eligible:
        return []
    cons = []
    for node in instance.nodes:
        cons.append(LinearConstraint(
            tuple((p.id, node.id, p.request.ram) for p in eligible),
            Relation.LE, node.capacity.ram))
    for node in instance.nodes:
        cons.append(LinearConstraint(
            tuple((p.id, node.id, p.request.cpu) for p in eligible),
            Relation.LE, node.capacity.cpu))
    for p in eligible:
        cons.append(LinearConstraint(
            tuple((p.id, node.id, 1) for node in instance.nodes),
            Relation.LE, 1))
    return cons


def placement_metric(instance: Instance, tier: int) -> LinearExpression:
    """Count of placed pods with priority <= tier."""
    if not 0 <= tier <= instance.pr_max:
        raise ValueError(f"tier {tier} outside [0, {instance.pr_max}]")
    return LinearExpression(tuple(
        (p.id, node.id, 1)
        for p in instance.pods if p.priority <= tier
        for node in instance.nodes
    ))


def move_metric(instance: Instance, tier: int, current: Allocation) -> LinearExpression:
    """Stability reward over currently-placed pods: stay 3, move 1, evict 0."""
    if not 0 <= tier <= instance.pr_max:
        raise ValueError(f"tier {tier} outside [0, {instance.pr_max}]")
    if len(current.where) != instance.num_pods:
        raise ValueError("current allocation length mismatch")
    terms = []
    for p in instance.pods:
        if p.priority > tier:
            continue
        w = current.where[p.id]
        if w == UNPLACED:
            continue
        if not 1 <= w <= instance.num_nodes:
            raise ValueError(f"current allocation maps pod {p.id} to unknown node {w}")
        for node in instance.nodes:
            terms.append((p.id, node.id, 3 if node.id == w else 1))
    return LinearExpression(tuple(terms))


class TimeBudget:
    """Splits a total wall budget into per-solve grants with pooled leftovers.

    Each grant is alpha * total / (2 * tiers) plus everything previously
    granted but not consumed; the (1 - alpha) share seeds the pool up front.
    At any point the next grant never exceeds the budget minus time already
    consumed, so total solving time stays within the budget.
    """

    def __init__(self, total: float, alpha: float, tiers: int) -> None:
        if tiers < 1:
            raise ValueError("tiers must be >= 1")
        self.total = total
        self._base = alpha * total / (2 * tiers)
        self._pool = (1.0 - alpha) * total
        self._outstanding = 0.0

    def next_timeout(self) -> float:
        grant = self._base + self._pool
        self._pool = 0.0
        self._outstanding = grant
        return grant

    def settle(self, elapsed: float) -> None:
        """Return the unconsumed part of the last grant to the pool."""
        self._pool += max(0.0, self._outstanding - elapsed)
        self._outstanding = 0.0

    def skip_tier(self) -> None:
        """An empty tier runs no solves; its two grants flow to the pool."""
        self._pool += 2 * self._base


def _merged_hint(instance: Instance, best: list[int], current: Allocation, tier: int) -> list[int]:
    """Extend the carried incumbent with this tier's pods on their current nodes."""
    hint = list(best)
    cpu = [0] * instance.num_nodes
    ram = [0] * instance.num_nodes
    for p, w in zip(instance.pods, hint):
        if w != UNPLACED:
            cpu[w - 1] += p.request.cpu
            ram[w - 1] += p.request.ram
    for p in instance.pods:
        if p.priority != tier:
            continue
        w = current.where[p.id]
        if w == UNPLACED:
            continue
        node = instance.node_by_id(w)
        if (cpu[w - 1] + p.request.cpu <= node.capacity.cpu
                and ram[w - 1] + p.request.ram <= node.capacity.ram):
            hint[p.id] = w
            cpu[w - 1] += p.request.cpu
            ram[w - 1] += p.request.ram
    return hint


def _assignment_feasible(model: Model, where: list[int]) -> bool:
    for con in model.constraints:
        val = sum(coef for pod, node, coef in con.terms if where[pod] == node)
        if con.relation is Relation.LE and val > con.bound:
            return False
        if con.relation is Relation.GE and val < con.bound:
            return False
        if con.relation is Relation.EQ and val != con.bound:
            return False
    return all(w == 0 for w, a in zip(where, model.active) if not a)


def _symmetry_constraints(instance: Instance, current: Allocation) -> list[LinearConstraint]:
    """Order placement counts over identical-capacity nodes that are empty in
    the input allocation; such nodes are interchangeable for both metrics."""
    used = set(current.where) - {UNPLACED}
    groups: dict[tuple[int, int], list] = {}
    for node in instance.nodes:
        if node.id not in used:
            groups.setdefault((node.capacity.cpu, node.capacity.ram), []).append(node)
    cons = []
    for nodes in groups.values():
        nodes.sort(key=lambda n: n.name)
        for a, b in zip(nodes, nodes[1:]):
            terms = [(p.id, a.id, 1) for p in instance.pods]
            terms += [(p.id, b.id, -1) for p in instance.pods]
            cons.append(LinearConstraint(tuple(terms), Relation.GE, 0))
    return cons


def _solve_phase(model, metric, hint, budget, t_end, margin, params):
    """Run one maximization pass; fall back to the (feasible) hint when the
    deadline leaves no room to even process the root."""
    grant = budget.next_timeout()
    timeout = min(grant, t_end - margin - time.monotonic())
    start = time.monotonic()
    sol = None
    if timeout > 0.0005:
        model.maximize(metric)
        sol = solve_max(model, SolveParams(
            deadline=timeout, hint=tuple(hint), seed=params.seed, workers=params.workers))
    elapsed = time.monotonic() - start
    budget.settle(elapsed)
    if sol is not None and sol.infeasible:
        raise OptimizeFailed("model proven infeasible; carried constraints are inconsistent")
    if sol is not None and sol.status is not SolveStatus.UNKNOWN:
        return sol.status, list(sol.assignment), sol.objective_value, elapsed
    if not _assignment_feasible(model, hint):
        raise OptimizeFailed("no incumbent before the deadline and the warm-start is infeasible")
    return SolveStatus.FEASIBLE, list(hint), metric.value(hint), elapsed


def optimize(instance: Instance, current: Allocation, params: OptimizeParams) -> Plan:
    """Re-optimize `current` tier by tier under the wall-clock budget."""
    t0 = time.monotonic()
    t_end = t0 + params.t_total
    margin = min(0.02, 0.02 * params.t_total)
    if not feasibility_check(instance, current):
        raise ValueError("current allocation is infeasible")

    P, N = instance.num_pods, instance.num_nodes
    model = Model(P, N)
    model.freeze_all()
    max_cpu = max((n.capacity.cpu for n in instance.nodes), default=1)
    max_ram = max((n.capacity.ram for n in instance.nodes), default=1)
    model.branch_priority = [p.id for p in sorted(
        instance.pods,
        key=lambda p: (p.priority, -max(p.request.cpu / max_cpu, p.request.ram / max_ram), p.id),
    )]
    budget = TimeBudget(params.t_total, params.alpha, instance.pr_max + 1)

    best = [UNPLACED] * P
    reports = []
    proven = True
    sym_added = False
    for tier in range(instance.pr_max + 1):
        if not any(p.priority == tier for p in instance.pods):
            budget.skip_tier()
            continue
        for p in instance.pods:
            if p.priority == tier:
                model.unfreeze(p.id)
        model.add_constraints(bin_packing_constraints(instance, tier))
        if params.symmetry_breaking and not sym_added:
            model.add_constraints(_symmetry_constraints(instance, current))
            sym_added = True

        metric1 = placement_metric(instance, tier)
        hint = _merged_hint(instance, best, current, tier)
        status1, best, placed, time1 = _solve_phase(model, metric1, hint, budget, t_end, margin, params)
        model.add_constraint(LinearConstraint(
            metric1.terms, Relation.EQ if status1 is SolveStatus.OPTIMAL else Relation.GE, placed))
        if status1 is not SolveStatus.OPTIMAL:
            proven = False

        metric2 = move_metric(instance, tier, current)
        status2, best, stability, time2 = _solve_phase(model, metric2, best, budget, t_end, margin, params)
        if status2 is SolveStatus.OPTIMAL:
            rel2 = Relation.EQ
        else:
            rel2 = Relation.LE if params.line18_literal else Relation.GE
        model.add_constraint(LinearConstraint(metric2.terms, rel2, stability))

        reports.append(TierReport(tier, status1, placed, time1, status2, stability, time2))

    final = Allocation(tuple(best))
    assert feasibility_check(instance, final)
    moves = []
    evictions = []
    newly_placed = []
    for i in range(P):
        a, b = current.where[i], final.where[i]
        if a == b:
            continue
        if a != UNPLACED and b != UNPLACED:
            moves.append((i, a, b))
        elif a != UNPLACED:
            evictions.append(i)
        else:
            newly_placed.append(i)
    return Plan(
        final_allocation=final,
        moves=tuple(moves),
        evictions=tuple(evictions),
        newly_placed=tuple(newly_placed),
        tiers=tuple(reports),
        proven_optimal=proven,
        wall_time=time.monotonic() - t0,
    )


def plan_to_dict(plan: Plan) -> dict:
    return {
        "final_allocation": {"where": list(plan.final_allocation.where)},
        "moves": [list(m) for m in plan.moves],
        "evictions": list(plan.evictions),
        "newly_placed": list(plan.newly_placed),
        "proven_optimal": plan.proven_optimal,
        "wall_time_s": plan.wall_time,
        "tiers": [
            {
                "tier": t.tier,
                "phase1": {"status": t.phase1_status.value, "placed_count": t.placed_count,
                           "time_s": t.phase1_time},
                "phase2": {"status": t.phase2_status.value, "move_metric_value": t.move_metric_value,
                           "time_s": t.phase2_time},
            }
            for t in plan.tiers
        ],
    }
