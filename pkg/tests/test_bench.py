import json

import pytest

import oracles
from conftest import make_instance
from podopt import (
    Allocation,
    Category,
    GenerationParams,
    OutcomeRecord,
    Plan,
    PlacementVector,
    SolveStatus,
    TierReport,
    classify_outcome,
    generate_dataset,
    generate_instance,
    read_outcomes,
    run_experiment,
    summarize,
)
from podopt.bench import emit_report, write_outcomes


def _plan(final, proven, moves=(), evictions=()):
    return Plan(
        final_allocation=Allocation(final), moves=moves, evictions=evictions,
        newly_placed=(), tiers=(), proven_optimal=proven, wall_time=0.01,
    )


@pytest.fixture
def duo():
    """Two nodes, three same-priority pods; baseline leaves pod 2 pending."""
    instance = make_instance(
        [(10, 4096), (10, 4096)],
        [(1, 2048, 0, 0), (1, 2048, 0, 1), (1, 3072, 0, 2)])
    return instance, Allocation((1, 2, 0))


class TestClassify:
    def test_better_and_optimal(self, duo):
        instance, baseline = duo
        plan = _plan((1, 1, 2), proven=True, moves=((1, 2, 1),))
        assert classify_outcome(baseline, plan, instance) is Category.BETTER_AND_OPTIMAL

    def test_better_without_proof(self, duo):
        instance, baseline = duo
        plan = _plan((1, 1, 2), proven=False, moves=((1, 2, 1),))
        assert classify_outcome(baseline, plan, instance) is Category.BETTER

    def test_baseline_certified_optimal(self, duo):
        instance, baseline = duo
        plan = _plan((1, 2, 0), proven=True)
        assert classify_outcome(baseline, plan, instance) is Category.KWOK_OPTIMAL

    def test_equal_without_proof_is_failure_by_default(self, duo):
        instance, baseline = duo
        plan = _plan((1, 2, 0), proven=False)
        assert classify_outcome(baseline, plan, instance) is Category.FAILURE
        assert classify_outcome(baseline, plan, instance, six_category=True) \
            is Category.UNIMPROVED

    def test_no_plan_is_failure(self, duo):
        instance, baseline = duo
        assert classify_outcome(baseline, None, instance) is Category.FAILURE

    def test_fully_placed_baseline_means_no_calls(self, duo):
        instance, _ = duo
        assert classify_outcome(Allocation((1, 1, 2)), None, instance) is Category.NO_CALLS

    def test_worse_plan_is_rejected(self, duo):
        instance, baseline = duo
        plan = _plan((1, 0, 0), proven=False, evictions=(1,))
        with pytest.raises(AssertionError):
            classify_outcome(baseline, plan, instance)


class TestRunExperiment:
    def test_consolidation_scenario_record(self, duo):
        instance, _ = duo
        result = run_experiment([("fig", instance)], [1.0])
        assert result.errors == ()
        (record,) = result.records
        assert record.category is Category.BETTER_AND_OPTIMAL
        assert record.baseline_vector == PlacementVector((2,))
        assert record.optimizer_vector == PlacementVector((3,))
        assert record.delta_mem_util == pytest.approx(37.5)
        assert record.delta_cpu_util == pytest.approx(5.0)
        assert record.moves == 1 and record.evictions == 0
        assert record.solver_duration > 0

    def test_solvable_dataset_is_all_no_calls(self):
        instances = [
            generate_instance(GenerationParams(3, 3, 1, 60, seed=s)) for s in range(3)]
        items = [(f"i{k}", inst) for k, inst in enumerate(instances)]
        result = run_experiment(items, [0.5, 1.0])
        assert len(result.records) == 6
        assert all(r.category is Category.NO_CALLS for r in result.records)
        assert all(r.solver_duration == 0.0 for r in result.records)

    def test_certifies_stuck_baseline_as_optimal(self):
        # three equal pods of 6/6 on two 10/10 nodes: two placed is provably best
        instance = make_instance([(10, 10)] * 2, [(6, 6, 0, i) for i in range(3)])
        assert oracles.best_placement_count(instance, 0) == 2
        result = run_experiment([("tight", instance)], [2.0])
        (record,) = result.records
        assert record.category is Category.KWOK_OPTIMAL
        assert record.moves == 0 and record.evictions == 0

    def test_timeout_rank_never_degrades(self):
        items = [
            (f"i{k}", inst)
            for k, inst in enumerate(generate_dataset(GenerationParams(3, 4, 2, 105, seed=40), 6))
        ]
        result = run_experiment(items, [0.1, 1.5])
        rank = {Category.FAILURE: 0, Category.UNIMPROVED: 0, Category.BETTER: 1,
                Category.KWOK_OPTIMAL: 2, Category.BETTER_AND_OPTIMAL: 2,
                Category.NO_CALLS: 2}
        by_instance = {}
        for r in result.records:
            by_instance.setdefault(r.instance_id, {})[r.timeout] = r.category
        for cats in by_instance.values():
            assert rank[cats[1.5]] >= rank[cats[0.1]]

    def test_progress_file_is_appended(self, tmp_path, duo):
        instance, _ = duo
        progress = tmp_path / "progress.jsonl"
        result = run_experiment([("fig", instance)], [0.5, 1.0], progress_path=progress)
        lines = progress.read_text().splitlines()
        assert len(lines) == len(result.records) == 2
        assert json.loads(lines[0])["category"] == "BETTER_AND_OPTIMAL"

    def test_broken_instance_is_recorded_not_raised(self, duo):
        instance, _ = duo
        result = run_experiment([("bad", object()), ("fig", instance)], [0.5])
        assert len(result.records) == 1
        assert len(result.errors) == 1
        assert result.errors[0][0] == "bad"


class TestReports:
    def _records(self, duo):
        instance, _ = duo
        return list(run_experiment([("fig", instance)], [0.5, 1.0]).records)

    def test_csv_round_trip(self, tmp_path, duo):
        records = self._records(duo)
        records.append(OutcomeRecord(
            instance_id="failed", config="custom", timeout=1.0,
            category=Category.FAILURE, baseline_vector=PlacementVector((1, 0)),
            optimizer_vector=None, proven_optimal=None, solver_duration=1.0,
            delta_cpu_util=None, delta_mem_util=None, moves=None, evictions=None,
            tiers=None))
        records.append(OutcomeRecord(
            instance_id="tiered", config="nodes=2,ppn=2,tiers=2,usage=100", timeout=2.0,
            category=Category.BETTER, baseline_vector=PlacementVector((1, 1)),
            optimizer_vector=PlacementVector((2, 1)), proven_optimal=False,
            solver_duration=0.25, delta_cpu_util=1.5, delta_mem_util=0.0,
            moves=2, evictions=1,
            tiers=(TierReport(0, SolveStatus.OPTIMAL, 2, 0.1, SolveStatus.FEASIBLE, 5, 0.2),)))
        path = tmp_path / "outcomes.csv"
        write_outcomes(records, path)
        assert read_outcomes(path) == records

    def test_summary_percentages(self, duo):
        records = self._records(duo)
        summary = summarize(records)
        configs = summary["configurations"]
        assert len(configs) == 2  # one per timeout
        for entry in configs.values():
            assert sum(entry["percentages"].values()) == pytest.approx(100.0, abs=0.1)
            assert entry["percentages"]["BETTER_AND_OPTIMAL"] == 100.0
            assert entry["percentages"]["FAILURE"] == 0.0  # zero rows still present
            assert entry["mean_delta_mem_util"] == pytest.approx(37.5)

    def test_emit_report_writes_files(self, tmp_path, duo):
        records = self._records(duo)
        paths = emit_report(records, tmp_path, meta={"workers": 1, "concurrency": 1})
        assert paths["outcomes"].exists()
        summary = json.loads(paths["summary"].read_text())
        assert summary["run"]["workers"] == 1
        assert summary["total_records"] == 2

    def test_emit_report_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path)
