from fractions import Fraction

from conftest import make_instance
from podopt import (
    Allocation,
    GenerationParams,
    feasibility_check,
    filter_nodes,
    generate_instance,
    queue_order,
    schedule_trace,
    score_least_allocated,
)


class TestQueueOrder:
    def test_priority_first(self):
        instance = make_instance(
            [(10, 10)], [(1, 1, 1, 0), (1, 1, 0, 1), (1, 1, 0, 2)], pr_max=1)
        assert queue_order(instance) == [1, 2, 0]

    def test_same_priority_keeps_id_order(self):
        instance = make_instance([(10, 10)], [(1, 1, 0, 0)] * 4)
        assert queue_order(instance) == [0, 1, 2, 3]

    def test_interleaved_replicasets_grouped(self):
        # replicaset ids [1, 0, 1, 0]: queue groups by replicaset, then pod id
        instance = make_instance(
            [(10, 10)], [(1, 1, 0, 1), (1, 1, 0, 0), (1, 1, 0, 1), (1, 1, 0, 0)])
        order = queue_order(instance)
        expected = sorted(range(4), key=lambda i: (instance.pods[i].replicaset, i))
        assert order == expected == [1, 3, 0, 2]


class TestFilterNodes:
    def test_no_room_for_large_pod(self, fig1):
        assert filter_nodes(fig1, Allocation((1, 2, 0)), 2) == set()

    def test_empty_cluster_accepts_everywhere(self, fig1):
        assert filter_nodes(fig1, Allocation.empty(3), 0) == {1, 2}

    def test_oversized_pod_fits_nowhere(self):
        instance = make_instance([(10, 10), (10, 10)], [(11, 1, 0, 0)])
        assert filter_nodes(instance, Allocation.empty(1), 0) == set()


class TestScore:
    def test_half_consumption_scores_fifty(self):
        instance = make_instance([(10, 100)], [(5, 50, 0, 0)])
        assert score_least_allocated(instance, Allocation.empty(1), 0, 1) == 50

    def test_exact_fill_scores_zero(self):
        instance = make_instance([(10, 100)], [(10, 100, 0, 0)])
        assert score_least_allocated(instance, Allocation.empty(1), 0, 1) == 0

    def test_emptier_node_preferred(self, fig1):
        # with pod 0 on node 1, pod 1 scores node 2 higher and lands there
        state = Allocation((1, 0, 0))
        assert (score_least_allocated(fig1, state, 1, 2)
                > score_least_allocated(fig1, state, 1, 1))

    def test_score_is_exact_rational(self):
        instance = make_instance([(3, 7)], [(1, 1, 0, 0)])
        score = score_least_allocated(instance, Allocation.empty(1), 0, 1)
        assert score == (Fraction(2, 3) + Fraction(6, 7)) * 50


class TestScheduleTrace:
    def test_spread_then_stuck(self, fig1):
        alloc, events = schedule_trace(fig1)
        assert alloc == Allocation((1, 2, 0))
        assert [e.to_dict() for e in events] == [
            {"pod": 0, "result": "BOUND", "node": 1},
            {"pod": 1, "result": "BOUND", "node": 2},
            {"pod": 2, "result": "PENDING"},
        ]

    def test_tie_broken_by_node_name(self):
        instance = make_instance([(10, 10), (10, 10)], [(1, 1, 0, 0)])
        alloc, events = schedule_trace(instance)
        assert alloc.where == (1,)  # identical empty nodes tie; first name wins

    def test_low_usage_places_everything(self):
        params = GenerationParams(num_nodes=4, pods_per_node=4, priority_tiers=2,
                                  usage_target=50, seed=11)
        _, events = schedule_trace(generate_instance(params))
        assert all(e.bound for e in events)

    def test_determinism(self, fig1):
        first = schedule_trace(fig1)
        second = schedule_trace(fig1)
        assert first == second

    def test_random_traces_feasible_and_consistent(self):
        for seed in range(12):
            params = GenerationParams(num_nodes=3, pods_per_node=4, priority_tiers=3,
                                      usage_target=100, seed=seed)
            instance = generate_instance(params)
            alloc, events = schedule_trace(instance)
            assert feasibility_check(instance, alloc)
            # priority respect: all tier-t pods attempted before any lower tier
            priorities = [instance.pods[e.pod_id].priority for e in events]
            assert priorities == sorted(priorities)
            # a pending event means no node could host the pod at that point
            partial = [0] * instance.num_pods
            for event in events:
                if event.bound:
                    partial[event.pod_id] = event.node_id
                else:
                    feasible = filter_nodes(instance, Allocation(tuple(partial)), event.pod_id)
                    assert feasible == set()
