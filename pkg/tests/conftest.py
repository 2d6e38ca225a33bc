from __future__ import annotations

import pytest

from podopt import Instance, Node, Pod, ResourceVector


def make_instance(node_caps, pod_specs, pr_max=None, generation=None) -> Instance:
    """Build an instance from (cpu, ram) node capacities and
    (cpu, ram, priority, replicaset) pod specs; ids follow list order."""
    nodes = tuple(
        Node(j + 1, f"node-{j + 1}", ResourceVector(cpu, ram))
        for j, (cpu, ram) in enumerate(node_caps)
    )
    pods = tuple(
        Pod(i, f"pod-{i}", ResourceVector(cpu, ram), priority, replicaset)
        for i, (cpu, ram, priority, replicaset) in enumerate(pod_specs)
    )
    if pr_max is None:
        pr_max = max((p.priority for p in pods), default=0)
    return Instance(nodes, pods, pr_max, generation)


@pytest.fixture
def fig1() -> Instance:
    """Two 4096-RAM nodes; three same-priority pods of 2048/2048/3072 RAM.

    The spread-first baseline binds the first two pods to separate nodes and
    leaves the third pending even though consolidating would fit all three.
    """
    return make_instance(
        node_caps=[(10, 4096), (10, 4096)],
        pod_specs=[(1, 2048, 0, 0), (1, 2048, 0, 1), (1, 3072, 0, 2)],
    )
