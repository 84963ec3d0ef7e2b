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

import datetime

import pytest

from tuneplan.enums import Status
from tuneplan.errors import SingularityError
from tuneplan.objectives import (
    PENALTY,
    ConstantObjective,
    EvaluationRecord,
    FunctionObjective,
)
from tuneplan.space import Configuration


def sphere(config):
    return sum(v * v for v in config.values())


def test_function_objective_single_value():
    objective = FunctionObjective(sphere)
    record = objective.evaluate({"a": 1.0, "b": -2.0}, search_id="s", index=2)
    assert record.ok
    assert record.total == 5.0
    assert record.routine_metrics == {"total": 5.0}
    assert record.metric("") == 5.0
    assert (record.search_id, record.index) == ("s", 2)


def test_function_objective_routine_metrics():
    objective = FunctionObjective(
        lambda c: {"g1": c["a"], "g2": 2 * c["a"]}, routines=("g1", "g2")
    )
    record = objective({"a": 1.5})
    assert record.routine_metrics == {"g1": 1.5, "g2": 3.0}
    assert record.total == 4.5
    assert record.metric("g2") == 3.0


def test_function_objective_failures():
    def singular(config):
        raise SingularityError("1/0")

    def broken(config):
        raise RuntimeError("boom")

    record = FunctionObjective(singular).evaluate({"a": 0})
    assert record.status == Status.INVALID
    assert record.total == PENALTY
    record = FunctionObjective(broken).evaluate({"a": 0})
    assert record.status == Status.CRASH
    assert "boom" in record.message


@pytest.mark.parametrize(
    "value",
    [float("inf"), float("nan"), {"g1": 1e308, "g2": 1e308}, {"g1": -float("inf")}],
)
def test_function_objective_non_finite_is_a_crash(value):
    record = FunctionObjective(lambda c: value, routines=("g1", "g2")).evaluate(
        {"a": 1}
    )
    assert record.status == Status.CRASH
    assert record.total == PENALTY
    assert "Non-finite" in record.message


def test_constant_objective():
    objective = ConstantObjective(3.0, routines=("g1", "g2"))
    assert objective({"a": 1}).total == 3.0
    assert objective({"a": 2}).routine_metrics == {"g1": 1.5, "g2": 1.5}


def test_record_invariants():
    with pytest.raises(ValueError, match="finite"):
        EvaluationRecord(Configuration({"a": 1}), {"g": 1.0}, float("inf"))
    with pytest.raises(ValueError, match="metrics"):
        EvaluationRecord(Configuration({"a": 1}), {}, 1.0)
    with pytest.raises(ValueError, match="Non-finite"):
        EvaluationRecord(Configuration({"a": 1}), {"g": float("inf")}, 5.0)
    with pytest.raises(ValueError, match="PENALTY"):
        EvaluationRecord(Configuration({"a": 1}), {}, 1.0, status=Status.CRASH)


def test_record_serialization():
    stamp = datetime.datetime(2024, 5, 1, 12, 0, tzinfo=datetime.timezone.utc)
    record = EvaluationRecord(
        config=Configuration({"nstb": 8, "layout": "row", "alpha": 0.5}),
        routine_metrics={"group1": 1.25},
        total=1.25,
        wall_seconds=0.5,
        search_id="Group1",
        index=7,
        timestamp=stamp,
    )
    data = record.to_dict()
    assert data["assignments"] == {"nstb": 8, "layout": "row", "alpha": 0.5}
    assert data["status"] == "ok"
    assert data["timestamp"] == "2024-05-01T12:00:00+00:00"
    assert EvaluationRecord.from_dict(data) == record
    relabeled = record.relabeled("prior", 0)
    assert (relabeled.search_id, relabeled.index) == ("prior", 0)
    assert relabeled.config == record.config
