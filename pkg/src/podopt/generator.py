"""Random cluster scenario construction.

Pods arrive as ReplicaSets: each set draws a replica count in [1, 4], one
(cpu, ram) request with both components uniform in [100, 1000], and one
priority, shared by all replicas. Sets are drawn until the pod count reaches
nodes * pods-per-node (overshoot is kept so sets stay whole). Identical node
capacities are then sized so that total demand hits the usage target.

The PRNG is Python's Mersenne Twister (`random.Random`) seeded explicitly;
draw order per ReplicaSet is fixed (replicas, cpu, ram, priority), so a given
(params, seed) pair reproduces the exact instance on every platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .baseline import schedule_trace
from .cluster import Instance, Node, Pod, ResourceVector

REQUEST_RANGE = (100, 1000)
REPLICA_RANGE = (1, 4)

# the benchmark grid; other positive values are accepted for exploration
GRID_NODES = (4, 8, 16, 32)
GRID_PODS_PER_NODE = (4, 8)
GRID_PRIORITY_TIERS = (1, 2, 4)
GRID_USAGE_TARGETS = (90, 95, 100, 105)


class DatasetGenerationError(RuntimeError):
    """Too few instances passed the baseline-failure filter."""


@dataclass(frozen=True)
class GenerationParams:
    num_nodes: int
    pods_per_node: int
    priority_tiers: int
    usage_target: int  # percent of cluster capacity the total demand should hit
    seed: int
    priority_per_pod: bool = False  # draw priority per replica instead of per set

    def __post_init__(self) -> None:
        if self.num_nodes < 1 or self.pods_per_node < 1:
            raise ValueError("num_nodes and pods_per_node must be >= 1")
        if self.priority_tiers < 1:
            raise ValueError("priority_tiers must be >= 1")
        if self.usage_target < 1:
            raise ValueError("usage_target must be >= 1")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def generate_instance(params: GenerationParams) -> Instance:
    rng = random.Random(params.seed)
    target = params.num_nodes * params.pods_per_node
    pods: list[Pod] = []
    rs_id = 0
    while len(pods) < target:
        replicas = rng.randint(*REPLICA_RANGE)
        cpu = rng.randint(*REQUEST_RANGE)
        ram = rng.randint(*REQUEST_RANGE)
        if params.priority_per_pod:
            priorities = [rng.randint(0, params.priority_tiers - 1) for _ in range(replicas)]
        else:
            priorities = [rng.randint(0, params.priority_tiers - 1)] * replicas
        for k in range(replicas):
            pods.append(Pod(
                id=len(pods),
                name=f"rs{rs_id:03d}-{k}",
                request=ResourceVector(cpu, ram),
                priority=priorities[k],
                replicaset=rs_id,
            ))
        rs_id += 1

    total_cpu = sum(p.request.cpu for p in pods)
    total_ram = sum(p.request.ram for p in pods)
    # per-node capacity = ceil(demand / (nodes * usage/100)); the ceiling keeps
    # realized usage at or below the target
    denom = params.num_nodes * params.usage_target
    cap = ResourceVector(_ceil_div(total_cpu * 100, denom), _ceil_div(total_ram * 100, denom))
    width = len(str(params.num_nodes))
    nodes = tuple(
        Node(j + 1, f"node-{j + 1:0{width}d}", cap) for j in range(params.num_nodes)
    )
    generation = {
        "seed": params.seed,
        "num_nodes": params.num_nodes,
        "pods_per_node": params.pods_per_node,
        "priority_tiers": params.priority_tiers,
        "usage_target": params.usage_target,
        "priority_per_pod": params.priority_per_pod,
    }
    return Instance(nodes, tuple(pods), params.priority_tiers - 1, generation)


def generate_dataset(
    params: GenerationParams, count: int, max_attempts_factor: int = 100
) -> list[Instance]:
    """First `count` instances (seeds params.seed, +1, ...) that the baseline
    scheduler fails to place completely; fully-placeable ones are discarded."""
    if count < 1:
        raise ValueError("count must be >= 1")
    kept: list[Instance] = []
    attempts = 0
    limit = max_attempts_factor * count
    seed = params.seed
    while len(kept) < count:
        if attempts >= limit:
            raise DatasetGenerationError(
                f"gave up after {attempts} attempts with {len(kept)}/{count} kept "
                f"(acceptance rate {len(kept) / attempts:.3f}); raise the usage target "
                "or max_attempts_factor"
            )
        instance = generate_instance(replace(params, seed=seed))
        attempts += 1
        seed += 1
        _, events = schedule_trace(instance)
        if any(not e.bound for e in events):
            kept.append(instance)
    return kept
