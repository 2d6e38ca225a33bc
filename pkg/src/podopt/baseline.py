"""Deterministic emulation of the default scheduler's filter/score pass.

Mirrors the deterministic configuration used for reproducible simulation runs:
pods are processed one at a time in queue order, nodes are filtered on
remaining capacity, ranked by a least-allocated score, and ties are broken by
lexicographic node name. Pods with no feasible node stay pending for the rest
of the trace; there is no preemption and no retry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cluster import UNPLACED, Allocation, Instance

PENDING = None


@dataclass(frozen=True)
class SchedulingEvent:
    """One queue step: the pod was either bound to a node or left pending."""

    pod_id: int
    node_id: int | None  # None = pending

    @property
    def bound(self) -> bool:
        return self.node_id is not None

    def to_dict(self) -> dict:
        if self.node_id is None:
            return {"pod": self.pod_id, "result": "PENDING"}
        return {"pod": self.pod_id, "result": "BOUND", "node": self.node_id}


def queue_order(instance: Instance) -> list[int]:
    """Pod ids sorted by priority (highest first), then replicaset, then id."""
    return [p.id for p in sorted(instance.pods, key=lambda p: (p.priority, p.replicaset, p.id))]


def filter_nodes(instance: Instance, alloc: Allocation, pod_id: int) -> set[int]:
    """Node ids whose remaining capacity fits the pod's request componentwise."""
    pod = instance.pods[pod_id]
    loads = _loads(instance, alloc)
    out = set()
    for node in instance.nodes:
        free_cpu, free_ram = loads[node.id - 1]
        if pod.request.cpu <= node.capacity.cpu - free_cpu and pod.request.ram <= node.capacity.ram - free_ram:
            out.add(node.id)
    return out


def score_least_allocated(instance: Instance, alloc: Allocation, pod_id: int, node_id: int) -> Fraction:
    """Mean free-capacity fraction after placement, times 100; higher is better."""
    pod = instance.pods[pod_id]
    node = instance.node_by_id(node_id)
    load_cpu, load_ram = _loads(instance, alloc)[node_id - 1]
    return _score(pod.request.cpu, pod.request.ram, load_cpu, load_ram, node.capacity.cpu, node.capacity.ram)


def _score(req_cpu: int, req_ram: int, load_cpu: int, load_ram: int, cap_cpu: int, cap_ram: int) -> Fraction:
    cpu_part = Fraction(cap_cpu - load_cpu - req_cpu, cap_cpu)
    ram_part = Fraction(cap_ram - load_ram - req_ram, cap_ram)
    return (cpu_part + ram_part) * 50  # mean of the two fractions, scaled to percent


def _loads(instance: Instance, alloc: Allocation) -> list[tuple[int, int]]:
    loads = [(0, 0)] * instance.num_nodes
    for pod, w in zip(instance.pods, alloc.where):
        if w != UNPLACED:
            c, r = loads[w - 1]
            loads[w - 1] = (c + pod.request.cpu, r + pod.request.ram)
    return loads


def schedule_trace(instance: Instance) -> tuple[Allocation, list[SchedulingEvent]]:
    """Run the full queue once and return the final allocation plus the trace."""
    where = [UNPLACED] * instance.num_pods
    loads = [(0, 0)] * instance.num_nodes
    events = []
    for pod_id in queue_order(instance):
        pod = instance.pods[pod_id]
        best_node = None
        best_key = None
        for node in instance.nodes:
            load_cpu, load_ram = loads[node.id - 1]
            if (pod.request.cpu > node.capacity.cpu - load_cpu
                    or pod.request.ram > node.capacity.ram - load_ram):
                continue
            score = _score(pod.request.cpu, pod.request.ram, load_cpu, load_ram,
                           node.capacity.cpu, node.capacity.ram)
            # highest score wins; ties broken by lexicographically first name
            key = (-score, node.name)
            if best_key is None or key < best_key:
                best_key = key
                best_node = node
        if best_node is None:
            events.append(SchedulingEvent(pod_id, PENDING))
        else:
            where[pod_id] = best_node.id
            c, r = loads[best_node.id - 1]
            loads[best_node.id - 1] = (c + pod.request.cpu, r + pod.request.ram)
            events.append(SchedulingEvent(pod_id, best_node.id))
    return Allocation(tuple(where)), events
