import math
import random
import time

import pytest

from conftest import make_instance
from podopt import (
    LinearConstraint,
    LinearExpression,
    Model,
    Relation,
    SolveParams,
    SolveStatus,
    bin_packing_constraints,
    brute_force_oracle,
    placement_metric,
    schedule_trace,
    solve_max,
)


def build_random_model(rng: random.Random, max_pods: int = 5, max_nodes: int = 3) -> Model:
    """Small arbitrary model: mixed relations, occasional negative coefficients,
    occasional frozen pods and at-most-one rows."""
    num_pods = rng.randint(1, max_pods)
    num_nodes = rng.randint(1, max_nodes)
    model = Model(num_pods, num_nodes)
    for i in range(num_pods):
        if rng.random() < 0.7:
            model.add_constraint(LinearConstraint(
                tuple((i, j, 1) for j in range(1, num_nodes + 1)), Relation.LE, 1))
        if rng.random() < 0.15:
            model.freeze(i)
    for _ in range(rng.randint(1, 4)):
        terms = tuple(
            (i, j, rng.randint(-3, 6))
            for i in range(num_pods)
            for j in range(1, num_nodes + 1)
            if rng.random() < 0.5
        )
        if not terms:
            continue
        relation = rng.choice([Relation.LE, Relation.LE, Relation.GE, Relation.EQ])
        bound = rng.randint(-2, 8)
        model.add_constraint(LinearConstraint(terms, relation, bound))
    model.maximize(LinearExpression(tuple(
        (i, j, rng.randint(-2, 7))
        for i in range(num_pods)
        for j in range(1, num_nodes + 1)
        if rng.random() < 0.6
    )))
    return model


def assignment_satisfies(model: Model, assignment) -> bool:
    for con in model.constraints:
        value = sum(coef for pod, node, coef in con.terms if assignment[pod] == node)
        if con.relation is Relation.LE and value > con.bound:
            return False
        if con.relation is Relation.GE and value < con.bound:
            return False
        if con.relation is Relation.EQ and value != con.bound:
            return False
    return all(assignment[i] == 0 for i in range(model.num_pods) if not model.active[i])


def random_hint(rng: random.Random, model: Model):
    return tuple(rng.randint(0, model.num_nodes) for _ in range(model.num_pods))


def fig1_model(fig1):
    model = Model(fig1.num_pods, fig1.num_nodes)
    model.add_constraints(bin_packing_constraints(fig1, 0))
    model.maximize(placement_metric(fig1, 0))
    return model


class TestModel:
    def test_unknown_pod_rejected(self):
        model = Model(2, 2)
        with pytest.raises(ValueError, match="unknown pod"):
            model.add_constraint(LinearConstraint(((5, 1, 1),), Relation.LE, 1))

    def test_unknown_node_rejected(self):
        model = Model(2, 2)
        with pytest.raises(ValueError, match="unknown node"):
            model.add_constraint(LinearConstraint(((0, 3, 1),), Relation.LE, 1))

    def test_objective_validation(self):
        model = Model(1, 1)
        with pytest.raises(ValueError):
            model.maximize(LinearExpression(((0, 2, 1),)))

    def test_lp_dump_mentions_everything(self):
        model = Model(2, 1)
        model.add_constraint(LinearConstraint(((0, 1, 2), (1, 1, 2)), Relation.LE, 3))
        model.maximize(LinearExpression(((0, 1, 1),)))
        model.freeze(1)
        text = model.to_lp_text()
        assert "max:" in text and "<= 3" in text and "frozen" in text


class TestSolveMax:
    def test_contradiction_detected_at_root(self):
        model = Model(1, 1)
        model.add_constraint(LinearConstraint((), Relation.GE, 1))  # 0 >= 1
        sol = solve_max(model, SolveParams(deadline=1.0))
        assert sol.status is SolveStatus.UNKNOWN
        assert sol.infeasible
        assert sol.best_bound == -math.inf

    def test_zero_pods(self):
        model = Model(0, 3)
        sol = solve_max(model, SolveParams(deadline=1.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == 0

    def test_consolidation_scenario_all_placed(self, fig1):
        sol = solve_max(fig1_model(fig1), SolveParams(deadline=2.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == 3
        assert sol.best_bound == 3

    def test_generated_placements_match_oracle(self):
        for seed in range(25):
            rng = random.Random(1000 + seed)
            instance = make_instance(
                [(rng.randint(4, 9), rng.randint(4, 9)) for _ in range(3)],
                [(rng.randint(1, 5), rng.randint(1, 5), 0, i) for i in range(8)],
            )
            model = Model(8, 3)
            model.add_constraints(bin_packing_constraints(instance, 0))
            model.maximize(placement_metric(instance, 0))
            sol = solve_max(model, SolveParams(deadline=5.0))
            expected, _ = brute_force_oracle(model)
            assert sol.status is SolveStatus.OPTIMAL
            assert sol.objective_value == expected

    def test_feasible_hint_floors_the_result(self, fig1):
        baseline, _ = schedule_trace(fig1)
        sol = solve_max(fig1_model(fig1), SolveParams(deadline=2.0, hint=baseline.where))
        assert sol.objective_value >= 2
        assert sol.incumbent_trace[0] == 2  # the hint seeded the first incumbent

    def test_infeasible_hint_discarded(self, fig1):
        sol = solve_max(fig1_model(fig1), SolveParams(deadline=2.0, hint=(1, 1, 1)))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == 3

    def test_hint_must_cover_every_pod(self, fig1):
        with pytest.raises(ValueError, match="hint assigns"):
            solve_max(fig1_model(fig1), SolveParams(deadline=1.0, hint=(1, 2)))

    def test_determinism(self, fig1):
        a = solve_max(fig1_model(fig1), SolveParams(deadline=2.0))
        b = solve_max(fig1_model(fig1), SolveParams(deadline=2.0))
        assert a.assignment == b.assignment
        assert a.objective_value == b.objective_value
        assert a.stats.nodes_explored == b.stats.nodes_explored
        assert a.incumbent_trace == b.incumbent_trace


class TestRandomModelProperties:
    def test_against_oracle(self):
        rng = random.Random(7)
        optimal = 0
        infeasible = 0
        for _ in range(150):
            model = build_random_model(rng)
            hint = random_hint(rng, model) if rng.random() < 0.5 else None
            sol = solve_max(model, SolveParams(deadline=5.0, hint=hint))
            oracle = brute_force_oracle(model)
            if oracle is None:
                infeasible += 1
                assert sol.status is SolveStatus.UNKNOWN
                assert sol.infeasible
                continue
            optimal += 1
            assert sol.status is SolveStatus.OPTIMAL
            assert sol.objective_value == oracle[0]
            assert assignment_satisfies(model, sol.assignment)
            assert sol.best_bound >= oracle[0]
            trace = sol.incumbent_trace
            assert all(a < b for a, b in zip(trace, trace[1:]))  # anytime monotone
            if hint is not None and assignment_satisfies(model, hint):
                hint_value = model.objective.value(hint)
                assert sol.objective_value >= hint_value
        assert optimal > 50  # the generator should produce mostly feasible models
        assert infeasible > 5


class TestDeadline:
    def test_wall_time_respected_on_hard_model(self):
        # many equal pods over equal nodes: a worst case for plain DFS
        rng = random.Random(3)
        pods = [(rng.randint(3, 5), rng.randint(3, 5), 0, i) for i in range(30)]
        instance = make_instance([(14, 14)] * 6, pods)
        model = Model(30, 6)
        model.add_constraints(bin_packing_constraints(instance, 0))
        model.maximize(placement_metric(instance, 0))
        start = time.monotonic()
        sol = solve_max(model, SolveParams(deadline=0.15))
        wall = time.monotonic() - start
        assert wall <= 0.15 + 0.05
        assert sol.stats.wall_time <= 0.15 + 0.05
        if sol.status is SolveStatus.FEASIBLE:
            assert sol.objective_value <= sol.best_bound
            assert assignment_satisfies(model, sol.assignment)


class TestBruteForceOracle:
    def test_consolidation_scenario(self, fig1):
        value, assignment = brute_force_oracle(fig1_model(fig1))
        assert value == 3
        assert all(assignment)

    def test_all_forced_to_zero(self):
        model = Model(2, 2)
        for i in range(2):
            model.add_constraint(LinearConstraint(
                ((i, 1, 1), (i, 2, 1)), Relation.LE, 0))
        model.maximize(LinearExpression(((0, 1, 1), (1, 1, 1))))
        value, assignment = brute_force_oracle(model)
        assert value == 0
        assert assignment == (0, 0)

    def test_size_guard(self):
        model = Model(30, 30)
        with pytest.raises(ValueError, match="exceeds limit"):
            brute_force_oracle(model)

    def test_infeasible_returns_none(self):
        model = Model(1, 1)
        model.add_constraint(LinearConstraint(((0, 1, 1),), Relation.GE, 2))
        assert brute_force_oracle(model) is None
