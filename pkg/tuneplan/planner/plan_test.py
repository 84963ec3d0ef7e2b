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

import pytest

from tuneplan.enums import Aggregation
from tuneplan.planner import PlannerSettings, SearchDef, SearchPlan
from tuneplan.space import ParameterSpec, RoutineDecl, SearchSpace


def small_space() -> SearchSpace:
    return SearchSpace(
        parameters=(
            ParameterSpec.integer(
                "a", 1, 8, default=2, owner="r", shared_value_required=True
            ),
            ParameterSpec.integer("b", 1, 8, default=3, owner="s"),
            ParameterSpec.real("c", 0.0, 1.0, default=0.5, owner="s"),
        ),
        routines=(RoutineDecl("r"), RoutineDecl("s")),
    )


@pytest.mark.parametrize(
    "dims,expected", [(0, 10), (1, 10), (2, 20), (3, 30), (10, 100)]
)
def test_budget_is_ten_per_dimension_with_a_floor(dims, expected):
    assert PlannerSettings().budget(dims) == expected


def test_budget_rounds_up():
    settings = PlannerSettings(budget_multiplier=2.5, budget_floor=1)
    assert settings.budget(3) == 8


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(cutoff=-0.1),
        dict(dim_cap=0),
        dict(budget_multiplier=0),
        dict(budget_floor=0),
        dict(init_samples=0),
    ],
)
def test_settings_reject_bad_values(kwargs):
    with pytest.raises(ValueError):
        PlannerSettings(**kwargs)


def test_settings_accept_aggregation_names():
    settings = PlannerSettings(aggregation="sum")
    assert settings.aggregation == Aggregation.SUM
    assert PlannerSettings.from_dict(settings.to_dict()) == settings


def test_search_def_basics():
    s = SearchDef("r+s", ("a", "b"), targets=("r", "s"), budget=20)
    assert s.dims == 2
    assert s.target_label == "r+s"
    assert SearchDef("app", ("a",)).target_label == "total"
    with pytest.raises(ValueError, match="positive budget"):
        SearchDef("x", ("a",), budget=0)


def test_plan_drops_empty_stages_and_finds_searches():
    first = SearchDef("r", ("a",), targets=("r",), budget=10)
    second = SearchDef(
        "s", ("b", "c", "a"), targets=("s",), budget=30, duplicates=("a",)
    )
    plan = SearchPlan(stages=((), (first, second)))
    assert len(plan.stages) == 1
    assert plan.search("s") is second
    assert plan.stage_of("s") == 0
    assert plan.total_budget == 40
    assert plan.authority("a") == "r"
    assert plan.authority("c") == "s"
    assert plan.authority("missing") is None
    with pytest.raises(KeyError):
        plan.search("t")


def test_authority_falls_back_to_first_duplicate():
    plan = SearchPlan(
        stages=(
            (SearchDef("s", ("b",), duplicates=("b",)),),
            (SearchDef("t", ("b",), duplicates=("b",)),),
        )
    )
    assert plan.authority("b") == "s"


def test_plan_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="unique"):
        SearchPlan(stages=((SearchDef("r", ("a",)),), (SearchDef("r", ("b",)),)))


def test_violations_are_reported():
    space = small_space()
    plan = SearchPlan(
        stages=(
            (
                SearchDef("r", ("a",)),
                SearchDef("s", ("a", "b")),
            ),
        ),
        settings=PlannerSettings(dim_cap=1),
    )
    problems = plan.violations(space)
    assert any("cap is 1" in p for p in problems)
    assert any(p.startswith("c is neither tuned") for p in problems)
    assert any(p.startswith("a must take one value") for p in problems)
    with pytest.raises(ValueError, match="Inconsistent search plan"):
        plan.check_invariants(space)


def test_sound_plan_has_no_violations():
    plan = SearchPlan(
        stages=(
            (SearchDef("r", ("a",)), SearchDef("s", ("b",), dropped={"c": 0.5})),
        )
    )
    assert plan.violations(small_space()) == []


def test_format_table_lists_every_search():
    plan = SearchPlan(
        stages=(
            (SearchDef("app", ("a",), budget=10),),
            (
                SearchDef(
                    "s",
                    ("b", "a"),
                    targets=("s",),
                    budget=20,
                    duplicates=("a",),
                    dropped={"c": 0.5},
                ),
            ),
        ),
        notes=("something to know",),
    )
    table = plan.format_table()
    lines = table.splitlines()
    header = ["Stage", "Search", "Target", "Dims", "Budget", "Parameters"]
    assert lines[0].split() == header
    assert set(lines[1]) == {"-"}
    assert lines[2].split() == ["1", "app", "total", "1", "10", "a"]
    assert lines[3].split() == ["2", "s", "s", "2", "20", "b,", "a*"]
    assert "s: dropped by the dimension cap, fixed at c=0.5" in table
    assert "note: something to know" in table
    assert lines[-1] == "Total budget: 30 evaluations"


def test_plan_dict_round_trip():
    plan = SearchPlan(
        stages=(
            (SearchDef("app", ("a",), budget=10),),
            (SearchDef("s", ("b",), targets=("s",), dropped={"c": 0.5}),),
        ),
        settings=PlannerSettings(cutoff=0.1),
        notes=("n",),
    )
    assert SearchPlan.from_dict(plan.to_dict()) == plan
