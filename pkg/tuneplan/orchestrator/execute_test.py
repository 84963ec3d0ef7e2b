# Copyright 2026 The Tuneplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import threading

import numpy as np
import pytest

from tuneplan.analysis import InfluenceMatrix
from tuneplan.enums import Strategy
from tuneplan.errors import (
    ConfigMismatchError,
    FactorizationError,
    SchemaMismatchError,
    StageFailureError,
)
from tuneplan.objectives import (
    ConstantObjective,
    EvaluationRecord,
    FunctionObjective,
    SyntheticCase,
)
from tuneplan.orchestrator import (
    FINAL_SEARCH_ID,
    CampaignConfig,
    EvaluationDb,
    ObjectiveBinding,
    compare_strategies,
    execute_plan,
    independent_plan,
    joint_plan,
    resume,
    search_seed,
    warm_start,
)
from tuneplan.planner import PlannerSettings, SearchDef, SearchPlan
from tuneplan.search import runner
from tuneplan.space import Configuration, ParameterSpec, RoutineDecl, SearchSpace
from tuneplan.surrogate import SurrogateSettings

FAST = SurrogateSettings(starts=2, max_iterations=60)
SMALL = PlannerSettings(budget_multiplier=3, budget_floor=6, init_samples=3)


def ab_space(constraints=(), measured=True) -> SearchSpace:
    return SearchSpace(
        parameters=(
            ParameterSpec.real("a1", 0.0, 2.0, default=0.0, owner="a"),
            ParameterSpec.real("a2", 0.0, 2.0, default=0.0, owner="a"),
            ParameterSpec.real("b1", 0.0, 2.0, default=0.0, owner="b"),
        ),
        routines=(RoutineDecl("a", measured=measured), RoutineDecl("b")),
        constraints=constraints,
    )


def bowl(config):
    return {
        "a": (config["a1"] - 1.0) ** 2 + (config["a2"] - 1.0) ** 2,
        "b": (config["b1"] - 1.5) ** 2,
    }


def make_campaign(space=None, parallel=1, seed=0) -> CampaignConfig:
    return CampaignConfig(
        name="ab",
        space=space or ab_space(),
        objective=ObjectiveBinding(synthetic=SyntheticCase(1)),
        routines=("a", "b"),
        planner=SMALL,
        surrogate=FAST,
        candidate_pool=200,
        seed=seed,
        parallel=parallel,
    )


class Recording(FunctionObjective):
    def __init__(self, func=bowl):
        super().__init__(func, routines=("a", "b"))
        self.seen = []
        self._lock = threading.Lock()

    def evaluate(self, config, *, search_id="", index=0):
        with self._lock:
            self.seen.append((search_id, config))
        return super().evaluate(config, search_id=search_id, index=index)

    def configs_of(self, search_id):
        return [c for s, c in self.seen if s == search_id]


def search_a(budget=12, **kw) -> SearchDef:
    kw.setdefault("targets", ("a",))
    return SearchDef("a", ("a1", "a2"), budget=budget, init_samples=4, **kw)


def search_b(budget=8, parameters=("b1",), **kw) -> SearchDef:
    return SearchDef(
        "b", parameters, targets=("b",), budget=budget, init_samples=3, **kw
    )


def test_one_stage_runs_every_search_and_the_final_configuration():
    plan = SearchPlan(stages=((search_a(), search_b()),))
    objective = Recording()
    report = execute_plan(plan, make_campaign(), objective)

    assert report.evaluations == 20
    assert len(objective.seen) == 21
    assert len(objective.configs_of("a")) == 12
    assert len(objective.configs_of("b")) == 8
    assert report.final_record.search_id == FINAL_SEARCH_ID
    state_a, state_b = report.stages[0]
    assert report.final_config["a1"] == state_a.best_config["a1"]
    assert report.final_config["a2"] == state_a.best_config["a2"]
    assert report.final_config["b1"] == state_b.best_config["b1"]
    slowest = max(state_a.elapsed_seconds, state_b.elapsed_seconds)
    assert report.stage_seconds[0] == slowest
    assert report.minimum == report.final_record.total


def test_later_stages_start_from_earlier_bests():
    plan = SearchPlan(stages=((search_a(),), (search_b(),)))
    objective = Recording()
    report = execute_plan(plan, make_campaign(), objective)
    best_a = report.stages[0][0].best_config
    for config in objective.configs_of("b"):
        assert config["a1"] == best_a["a1"]
        assert config["a2"] == best_a["a2"]
    assert report.total_seconds == pytest.approx(sum(report.stage_seconds))


def test_parallel_stage_matches_sequential():
    plan = SearchPlan(stages=((search_a(), search_b()),))
    sequential = execute_plan(plan, make_campaign(parallel=1), Recording())
    parallel = execute_plan(plan, make_campaign(parallel=2), Recording())
    assert sequential.final_config == parallel.final_config
    for one, two in zip(sequential.stages[0], parallel.stages[0]):
        assert [r.config for r in one.history] == [r.config for r in two.history]


def test_dropped_values_are_held_and_kept():
    search = SearchDef(
        "a", ("a1",), targets=("a",), budget=6, init_samples=3, dropped={"a2": 0.5}
    )
    plan = SearchPlan(stages=((search,),))
    objective = Recording()
    report = execute_plan(plan, make_campaign(), objective)
    assert all(c["a2"] == 0.5 for c in objective.configs_of("a"))
    assert report.final_config["a2"] == 0.5
    assert report.final_config["b1"] == 0.0


def test_owner_search_decides_duplicated_parameters():
    plan = SearchPlan(
        stages=(
            (
                search_a(),
                search_b(parameters=("b1", "a1"), duplicates=("a1",)),
            ),
        )
    )
    report = execute_plan(plan, make_campaign(), Recording())
    state_a, state_b = report.stages[0]
    assert report.final_config["a1"] == state_a.best_config["a1"]
    assert report.final_config["b1"] == state_b.best_config["b1"]


def test_invalid_combination_falls_back_to_the_best_evaluated():
    space = ab_space(constraints=("a1 + b1 <= 2",))
    plan = SearchPlan(
        stages=(
            (
                SearchDef("a", ("a1",), budget=20, init_samples=20),
                SearchDef("b", ("b1",), budget=20, init_samples=20),
            ),
        )
    )
    objective = FunctionObjective(
        lambda c: {"a": -c["a1"], "b": -c["b1"]}, routines=("a", "b")
    )
    report = execute_plan(plan, make_campaign(space), objective, random_search=True)
    assert any("violate" in note for note in report.notes)
    assert space.validate(report.final_config)
    evaluated = [r for s in report.stages[0] for r in s.history]
    assert report.final_config == min(evaluated, key=lambda r: r.total).config


def test_failing_stage_is_reported():
    def broken(_):
        raise RuntimeError("no device")

    plan = SearchPlan(stages=((search_a(),), (search_b(),)))
    with pytest.raises(StageFailureError, match="Stage 1"):
        execute_plan(plan, make_campaign(), FunctionObjective(broken, ("a", "b")))


def test_database_resumes_without_reevaluating(tmp_path):
    plan = SearchPlan(stages=((search_a(),), (search_b(),)))
    campaign = make_campaign()
    path = tmp_path / "evals.db"
    first = execute_plan(
        plan, campaign, Recording(), db=EvaluationDb(path, campaign.digest)
    )
    assert len(EvaluationDb(path, campaign.digest)) == 20

    objective = Recording()
    second = resume(plan, campaign, path, objective)
    assert [s for s, _ in objective.seen] == [FINAL_SEARCH_ID]
    assert second.final_config == first.final_config


def test_interrupted_search_continues_exactly(tmp_path):
    plan = SearchPlan(stages=((search_a(),),))
    campaign = make_campaign()
    full = execute_plan(plan, campaign, Recording())

    path = tmp_path / "evals.db"
    db = EvaluationDb(path, campaign.digest)
    for record in full.stages[0][0].history[:7]:
        db.append(record)
    objective = Recording()
    resumed = resume(plan, campaign, path, objective)
    assert len(objective.configs_of("a")) == 5
    assert [r.config for r in resumed.stages[0][0].history] == [
        r.config for r in full.stages[0][0].history
    ]


def test_resume_refuses_another_campaign(tmp_path):
    path = tmp_path / "evals.db"
    EvaluationDb(path, "someone-else").append(
        EvaluationRecord(Configuration({"a1": 0.0}), {"a": 1.0}, 1.0, search_id="a")
    )
    plan = SearchPlan(stages=((search_a(),),))
    with pytest.raises(ConfigMismatchError):
        resume(plan, make_campaign(), path, Recording())


def test_search_seed_is_stable_and_distinct():
    assert search_seed(0, "a") == search_seed(0, "a")
    assert search_seed(0, "a") != search_seed(0, "b")
    assert search_seed(0, "a") != search_seed(1, "a")


def prior_record(a1, metrics=None, **extra):
    values = {"a1": a1, "a2": 1.0, "b1": 0.0, **extra}
    metrics = metrics if metrics is not None else {"a": 0.1, "b": 0.2}
    return EvaluationRecord(Configuration(values), metrics, sum(metrics.values()))


def test_warm_start_selects_usable_records():
    space = ab_space()
    plan = SearchPlan(stages=((search_a(), search_b()),))
    records = [
        prior_record(0.5),
        prior_record(3.0),
        prior_record(1.5, metrics={"a": 0.3}),
    ]
    start = warm_start(space, plan, records)
    assert len(start.priors["a"]) == 2
    assert len(start.priors["b"]) == 1
    assert any("violate" in note for note in start.notes)
    assert any("lack metrics of b" in note for note in start.notes)


def test_warm_start_rejects_other_parameter_sets():
    with pytest.raises(SchemaMismatchError):
        warm_start(
            ab_space(),
            SearchPlan(stages=((search_a(),),)),
            [prior_record(0.5, c1=3.0)],
        )


def test_prior_records_do_not_count_against_the_budget():
    plan = SearchPlan(stages=((search_a(),),))
    space = ab_space()
    records = [prior_record(x) for x in np.linspace(0.1, 1.9, 6)]
    report = execute_plan(
        plan, make_campaign(space), Recording(), prior=warm_start(space, plan, records)
    )
    assert report.evaluations == 12


def test_joint_plan_covers_every_parameter():
    plan = joint_plan(ab_space(), SMALL)
    (search,) = plan.searches()
    assert search.id == "joint"
    assert search.parameters == ("a1", "a2", "b1")
    assert search.targets == ()
    assert search.budget == 9


def test_independent_plan_has_one_search_per_routine():
    plan = independent_plan(ab_space(measured=False), SMALL)
    assert len(plan.stages) == 1
    a, b = plan.searches()
    assert (a.id, a.parameters, a.targets, a.budget) == ("a", ("a1", "a2"), (), 6)
    assert (b.id, b.parameters, b.targets, b.budget) == ("b", ("b1",), ("b",), 6)


def separable_matrix() -> InfluenceMatrix:
    return InfluenceMatrix(
        routines=("a", "b"),
        parameters=("a1", "a2", "b1"),
        variability=[[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    )


def test_compare_strategies_runs_every_strategy():
    comparison = compare_strategies(
        make_campaign(), repeats=2, matrix=separable_matrix(), objective=Recording()
    )
    assert [r.strategy for r in comparison.results] == list(Strategy)
    for result in comparison.results:
        assert not result.failed
        assert len(result.minima) == 2
        assert all(np.isfinite(result.minima))
    evaluations = {r.strategy: r.evaluations for r in comparison.results}
    assert evaluations[Strategy.RANDOM] == evaluations[Strategy.FULLY_JOINT] == (9, 9)
    assert evaluations[Strategy.PLANNED] == (12, 12)
    assert comparison.plan.total_budget == 12
    table = comparison.format_table()
    assert "fully-independent" in table
    assert "Means over 2 repeat(s)" in table
    json.dumps(comparison.to_dict())


def test_compare_strategies_reports_failures():
    def broken(_):
        raise RuntimeError("no device")

    comparison = compare_strategies(
        make_campaign(),
        repeats=1,
        matrix=separable_matrix(),
        objective=FunctionObjective(broken, ("a", "b")),
        strategies=(Strategy.RANDOM, Strategy.PLANNED),
    )
    assert all(r.failed for r in comparison.results)
    assert "failed" in comparison.format_table()
    assert comparison.result(Strategy.PLANNED).to_dict()["mean_minimum"] is None


def test_a_surrogate_failure_only_fails_its_strategy(monkeypatch):
    def singular(*args, **kwargs):
        raise FactorizationError("covariance stayed indefinite")

    monkeypatch.setattr(runner, "fit", singular)
    comparison = compare_strategies(
        make_campaign(),
        repeats=1,
        matrix=separable_matrix(),
        objective=Recording(),
        strategies=(Strategy.FULLY_JOINT, Strategy.RANDOM),
    )
    joint = comparison.result(Strategy.FULLY_JOINT)
    assert joint.failed
    assert "indefinite" in joint.error
    assert not comparison.result(Strategy.RANDOM).failed
    assert comparison.result(Strategy.RANDOM).evaluations == (9,)


def test_compare_strategies_continues_from_the_database():
    db = EvaluationDb(None, "ab")
    first = compare_strategies(
        make_campaign(),
        repeats=2,
        matrix=separable_matrix(),
        objective=Recording(),
        db=db,
    )
    assert len(db) == sum(sum(r.evaluations) for r in first.results)
    assert "planned/r1/a" in db.search_ids
    assert "random/r0/random" in db.search_ids

    objective = Recording()
    again = compare_strategies(
        make_campaign(),
        repeats=2,
        matrix=separable_matrix(),
        objective=objective,
        db=db,
    )
    assert {s for s, _ in objective.seen} == {FINAL_SEARCH_ID}
    assert [r.minima for r in again.results] == [r.minima for r in first.results]


def test_compare_needs_a_repeat():
    with pytest.raises(ValueError):
        compare_strategies(make_campaign(), repeats=0, matrix=separable_matrix())


def test_report_is_serializable_and_readable():
    plan = SearchPlan(stages=((search_a(), search_b()),))
    report = execute_plan(plan, make_campaign(), Recording())
    data = json.loads(json.dumps(report.to_dict()))
    assert data["evaluations"] == 20
    assert len(data["stages"][0]["searches"]) == 2
    text = report.format_report()
    assert text.startswith("Stage 1")
    assert "a: 12 evaluations against a" in text
    assert "Final objective" in text
    assert "a1 = " in text


def test_flat_landscape_gives_every_strategy_the_same_minimum():
    comparison = compare_strategies(
        make_campaign(),
        repeats=1,
        matrix=separable_matrix(),
        objective=ConstantObjective(2.0, routines=("a", "b")),
    )
    minima = {r.strategy: r.minima for r in comparison.results}
    assert set(minima.values()) == {(2.0,)}
