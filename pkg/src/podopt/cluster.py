"""Cluster domain model: nodes, pods, allocations, and the arithmetic on them.

Node ids are 1-based; id 0 is reserved as the "unplaced" sentinel, so an
allocation is a plain vector mapping pod id -> node id (or 0). All quantities
are integers and all types are immutable values, safe to share across tasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from pathlib import Path
from typing import Any

UNPLACED = 0


class MalformedAllocationError(ValueError):
    """Allocation vector cannot belong to the instance it is paired with."""


@dataclass(frozen=True)
class ResourceVector:
    """A (cpu, ram) pair of non-negative integer quantities."""

    cpu: int
    ram: int

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.cpu + other.cpu, self.ram + other.ram)

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.cpu - other.cpu, self.ram - other.ram)

    def fits_within(self, other: ResourceVector) -> bool:
        return self.cpu <= other.cpu and self.ram <= other.ram


@dataclass(frozen=True)
class Node:
    id: int  # 1-based; 0 means "unplaced"
    name: str
    capacity: ResourceVector


@dataclass(frozen=True)
class Pod:
    id: int  # dense 0-based index within the instance
    name: str
    request: ResourceVector
    priority: int  # lower value = higher priority
    replicaset: int


@dataclass(frozen=True)
class Instance:
    """Immutable problem description: nodes, pods, and generation provenance."""

    nodes: tuple[Node, ...]
    pods: tuple[Pod, ...]
    pr_max: int
    generation: dict[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.pr_max < 0:
            raise ValueError("pr_max must be >= 0")
        names = set()
        for k, node in enumerate(self.nodes):
            if node.id != k + 1:
                raise ValueError(f"node ids must be dense 1..N, got {node.id} at {k}")
            if node.capacity.cpu <= 0 or node.capacity.ram <= 0:
                raise ValueError(f"node {node.name!r} must have positive capacity")
            if node.name in names:
                raise ValueError(f"duplicate node name {node.name!r}")
            names.add(node.name)
        for k, pod in enumerate(self.pods):
            if pod.id != k:
                raise ValueError(f"pod ids must be dense 0..P-1, got {pod.id} at {k}")
            if pod.request.cpu < 1 or pod.request.ram < 1:
                raise ValueError(f"pod {pod.name!r} must request at least 1 of each resource")
            if not 0 <= pod.priority <= self.pr_max:
                raise ValueError(f"pod {pod.name!r} priority {pod.priority} outside [0, {self.pr_max}]")

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_pods(self) -> int:
        return len(self.pods)

    def node_by_id(self, node_id: int) -> Node:
        return self.nodes[node_id - 1]


@dataclass(frozen=True)
class Allocation:
    """Total map pod id -> node id, with 0 meaning unplaced."""

    where: tuple[int, ...]

    @classmethod
    def empty(cls, num_pods: int) -> Allocation:
        return cls((UNPLACED,) * num_pods)


@dataclass(frozen=True)
class PlacementVector:
    """Number of placed pods per priority tier, index 0 = highest priority."""

    counts: tuple[int, ...]


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _check_allocation(instance: Instance, alloc: Allocation) -> None:
    if len(alloc.where) != instance.num_pods:
        raise MalformedAllocationError(
            f"allocation has {len(alloc.where)} entries for {instance.num_pods} pods"
        )
    for i, w in enumerate(alloc.where):
        if not 0 <= w <= instance.num_nodes:
            raise MalformedAllocationError(f"pod {i} mapped to node {w} outside [0, {instance.num_nodes}]")


def node_loads(instance: Instance, alloc: Allocation) -> list[ResourceVector]:
    """Componentwise demand currently placed on each node (index 0 = node id 1)."""
    _check_allocation(instance, alloc)
    cpu = [0] * instance.num_nodes
    ram = [0] * instance.num_nodes
    for pod, w in zip(instance.pods, alloc.where):
        if w != UNPLACED:
            cpu[w - 1] += pod.request.cpu
            ram[w - 1] += pod.request.ram
    return [ResourceVector(c, r) for c, r in zip(cpu, ram)]


def feasibility_check(instance: Instance, alloc: Allocation) -> bool:
    """True iff every node's load fits its capacity componentwise."""
    loads = node_loads(instance, alloc)
    return all(load.fits_within(node.capacity) for load, node in zip(loads, instance.nodes))


def placement_vector(instance: Instance, alloc: Allocation) -> PlacementVector:
    _check_allocation(instance, alloc)
    counts = [0] * (instance.pr_max + 1)
    for pod, w in zip(instance.pods, alloc.where):
        if w != UNPLACED:
            counts[pod.priority] += 1
    return PlacementVector(tuple(counts))


def compare_lex(a: PlacementVector, b: PlacementVector) -> Ordering:
    """Lexicographic comparison from the highest-priority tier downward."""
    if len(a.counts) != len(b.counts):
        raise ValueError(f"vector lengths differ: {len(a.counts)} vs {len(b.counts)}")
    if a.counts > b.counts:
        return Ordering.GREATER
    if a.counts < b.counts:
        return Ordering.LESS
    return Ordering.EQUAL


def utilization(instance: Instance, alloc: Allocation) -> tuple[Fraction, Fraction]:
    """Placed demand as a percentage of total cluster capacity, per resource."""
    _check_allocation(instance, alloc)
    cap_cpu = sum(n.capacity.cpu for n in instance.nodes)
    cap_ram = sum(n.capacity.ram for n in instance.nodes)
    if cap_cpu == 0 or cap_ram == 0:
        raise ValueError("cannot compute utilization of a cluster with zero capacity")
    used_cpu = sum(p.request.cpu for p, w in zip(instance.pods, alloc.where) if w != UNPLACED)
    used_ram = sum(p.request.ram for p, w in zip(instance.pods, alloc.where) if w != UNPLACED)
    return Fraction(used_cpu * 100, cap_cpu), Fraction(used_ram * 100, cap_ram)


# --- JSON file formats ---------------------------------------------------
#
# Instance: {"nodes": [{"name", "cpu", "ram"}...],
#            "pods":  [{"name", "cpu", "ram", "priority", "replicaset"}...],
#            "pr_max": int, "generation": {...}?}
# Allocation: {"where": [int, ...]}
# Unknown fields are rejected; ids are derived from list order.

_NODE_FIELDS = {"name", "cpu", "ram"}
_POD_FIELDS = {"name", "cpu", "ram", "priority", "replicaset"}
_INSTANCE_FIELDS = {"nodes", "pods", "pr_max", "generation"}


def _require_fields(obj: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown {what} fields: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValueError(f"missing {what} fields: {sorted(missing)}")


def instance_from_dict(data: dict) -> Instance:
    _require_fields(data, _INSTANCE_FIELDS, _INSTANCE_FIELDS - {"generation"}, "instance")
    nodes = []
    for k, nd in enumerate(data["nodes"]):
        _require_fields(nd, _NODE_FIELDS, _NODE_FIELDS, "node")
        nodes.append(Node(k + 1, nd["name"], ResourceVector(int(nd["cpu"]), int(nd["ram"]))))
    pods = []
    for k, pd in enumerate(data["pods"]):
        _require_fields(pd, _POD_FIELDS, _POD_FIELDS, "pod")
        pods.append(
            Pod(k, pd["name"], ResourceVector(int(pd["cpu"]), int(pd["ram"])),
                int(pd["priority"]), int(pd["replicaset"]))
        )
    return Instance(tuple(nodes), tuple(pods), int(data["pr_max"]), data.get("generation"))


def instance_to_dict(instance: Instance) -> dict:
    data: dict[str, Any] = {
        "nodes": [{"name": n.name, "cpu": n.capacity.cpu, "ram": n.capacity.ram} for n in instance.nodes],
        "pods": [
            {"name": p.name, "cpu": p.request.cpu, "ram": p.request.ram,
             "priority": p.priority, "replicaset": p.replicaset}
            for p in instance.pods
        ],
        "pr_max": instance.pr_max,
    }
    if instance.generation is not None:
        data["generation"] = instance.generation
    return data


def allocation_from_dict(data: dict) -> Allocation:
    _require_fields(data, {"where"}, {"where"}, "allocation")
    return Allocation(tuple(int(w) for w in data["where"]))


def allocation_to_dict(alloc: Allocation) -> dict:
    return {"where": list(alloc.where)}


def load_instance(path: str | Path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8")


def load_allocation(path: str | Path) -> Allocation:
    with open(path, encoding="utf-8") as fh:
        return allocation_from_dict(json.load(fh))


def save_allocation(alloc: Allocation, path: str | Path) -> None:
    Path(path).write_text(json.dumps(allocation_to_dict(alloc), indent=2) + "\n", encoding="utf-8")
