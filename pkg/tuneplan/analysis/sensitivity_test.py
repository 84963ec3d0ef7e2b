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

import math

import numpy as np
import pytest

from tuneplan.analysis import (
    InfluenceMatrix,
    SensitivitySettings,
    relative_variability,
    run_sensitivity,
    variation_values,
)
from tuneplan.enums import Status, VariationStrategy
from tuneplan.errors import BaselineFailureError, CoverageError, ZeroBaselineError
from tuneplan.objectives import (
    EvaluationRecord,
    FunctionObjective,
    SyntheticCase,
    SyntheticObjective,
    synthetic_baseline,
)
from tuneplan.space import (
    Configuration,
    ParameterSpec,
    RoutineDecl,
    SearchSpace,
    synthetic_space,
)


class CountingObjective(FunctionObjective):
    def __init__(self, func, routines):
        super().__init__(func, routines)
        self.calls = 0

    def evaluate(self, config, *, search_id="", index=0):
        self.calls += 1
        return super().evaluate(config, search_id=search_id, index=index)


def three_reals() -> SearchSpace:
    return SearchSpace(
        parameters=tuple(
            ParameterSpec.real(n, 0.1, 100.0, default=1.0, owner="r") for n in "abc"
        ),
        routines=(RoutineDecl("r"), RoutineDecl("s")),
    )


def metrics(config):
    return {"r": 1 + config["a"] ** 2 + config["b"], "s": 2 + config["c"]}


def test_variability_formula():
    value = relative_variability(10.0, [11.0, 9.0, 10.5, 9.5, 10.0])
    assert value == pytest.approx(0.06)
    assert relative_variability(10.0, [10.0] * 5) == 0.0
    assert math.isnan(relative_variability(10.0, []))
    with pytest.raises(ZeroBaselineError):
        relative_variability(0.0, [1.0])


def test_call_count_and_orthogonality():
    objective = CountingObjective(metrics, ("r", "s"))
    settings = SensitivitySettings(
        variations=4, baseline=Configuration(a=1.0, b=1.0, c=1.0)
    )
    matrix = run_sensitivity(three_reals(), ["r", "s"], settings, objective)
    assert objective.calls == 1 + 4 * 3
    assert len(matrix.sample_records) == 12
    assert matrix.entry("r", "a") > matrix.entry("r", "b") > 0
    assert matrix.entry("r", "c") == 0
    assert matrix.entry("s", "a") == matrix.entry("s", "b") == 0
    assert matrix.entry("s", "c") > 0
    assert matrix.ranked("r")[0][0] == "a"


def test_scale_invariance():
    settings = SensitivitySettings(
        variations=3, baseline=Configuration(a=2.0, b=3.0, c=4.0)
    )
    scaled = FunctionObjective(
        lambda c: {k: 7.5 * v for k, v in metrics(c).items()}, ("r", "s")
    )
    objective = FunctionObjective(metrics, ("r", "s"))
    first = run_sensitivity(three_reals(), ["r", "s"], settings, objective)
    second = run_sensitivity(three_reals(), ["r", "s"], settings, scaled)
    np.testing.assert_allclose(first.variability, second.variability, rtol=1e-12)


def test_parallel_matches_sequential():
    settings = SensitivitySettings(
        variations=3, baseline=Configuration(a=2.0, b=3.0, c=4.0)
    )
    objective = FunctionObjective(metrics, ("r", "s"))
    sequential = run_sensitivity(three_reals(), ["r", "s"], settings, objective)
    parallel = run_sensitivity(
        three_reals(),
        ["r", "s"],
        SensitivitySettings(
            variations=3, baseline=Configuration(a=2.0, b=3.0, c=4.0), parallel=4
        ),
        objective,
    )
    np.testing.assert_array_equal(sequential.variability, parallel.variability)
    assert [r.index for r in parallel.sample_records] == list(range(1, 10))


def test_random_baseline_is_reproducible():
    objective = FunctionObjective(metrics, ("r", "s"))
    settings = SensitivitySettings(seed=4)
    first = run_sensitivity(three_reals(), ["r"], settings, objective)
    second = run_sensitivity(three_reals(), ["r"], settings, objective)
    assert first.baseline_record.config == second.baseline_record.config
    np.testing.assert_array_equal(first.variability, second.variability)


def test_invalid_variations_are_skipped():
    space = SearchSpace(
        parameters=(
            ParameterSpec.real("a", 0.1, 10.0, default=1.0, owner="r"),
            ParameterSpec.real("b", 0.1, 10.0, default=1.0, owner="r"),
        ),
        routines=(RoutineDecl("r"),),
        constraints=("a <= 1.15",),
    )
    objective = CountingObjective(lambda c: {"r": 10 * c["a"] + c["b"]}, ("r",))
    settings = SensitivitySettings(variations=3, baseline=Configuration(a=1.0, b=1.0))
    matrix = run_sensitivity(space, ["r"], settings, objective)
    # only a=1.1 passes the constraint
    assert objective.calls == 1 + 1 + 3
    assert matrix.entry("r", "a") == pytest.approx(1.0 / 11.0)
    assert sum("violates" in n for n in matrix.notes) == 2


def test_failed_variations_give_unknown_influence():
    def fragile(config):
        if config["b"] != 1.0:
            raise RuntimeError("crashed")
        return {"r": config["a"]}

    settings = SensitivitySettings(
        variations=2, baseline=Configuration(a=1.0, b=1.0, c=1.0)
    )
    matrix = run_sensitivity(
        three_reals(), ["r"], settings, FunctionObjective(fragile, ("r",))
    )
    assert math.isnan(matrix.entry("r", "b"))
    assert matrix.entry("r", "c") == 0
    assert matrix.ranked("r")[-1][0] == "b"
    assert any("unknown" in n for n in matrix.notes)
    assert all(
        r.status == Status.CRASH
        for r in matrix.sample_records
        if r.config["b"] != 1.0
    )


def test_baseline_errors():
    settings = SensitivitySettings(baseline=Configuration(a=1.0, b=1.0, c=1.0))
    with pytest.raises(ZeroBaselineError):
        run_sensitivity(
            three_reals(),
            ["r"],
            settings,
            FunctionObjective(lambda c: {"r": 0.0}, ("r",)),
        )

    def broken(config):
        raise RuntimeError("no license")

    with pytest.raises(BaselineFailureError):
        run_sensitivity(
            three_reals(), ["r"], settings, FunctionObjective(broken, ("r",))
        )
    with pytest.raises(BaselineFailureError):
        run_sensitivity(
            three_reals(),
            ["r"],
            SensitivitySettings(baseline=Configuration(a=1000.0, b=1.0, c=1.0)),
            FunctionObjective(metrics, ("r", "s")),
        )


def test_discrete_variations():
    settings = SensitivitySettings(variations=5)
    tb = ParameterSpec.integer("tb", 32, 1024, step=32, default=64, owner="r")
    assert variation_values(tb, 64, settings) == [96, 128, 160, 192, 224]
    unroll = ParameterSpec.ordinal("u", (1, 2, 4), default=1, owner="r")
    assert variation_values(unroll, 1, settings) == [2, 4]
    assert variation_values(unroll, 4, settings) == [2, 1]
    layout = ParameterSpec.categorical(
        "l", ("row", "col", "tile"), default="row", owner="r"
    )
    assert variation_values(layout, "col", settings) == ["row", "tile"]


def test_real_variations_are_clipped_not_dropped():
    x = ParameterSpec.real("x", -50, 50, default=1.0, owner="r")
    values = variation_values(x, 45.0, SensitivitySettings(variations=4))
    assert values == pytest.approx([49.5, 50.0, 50.0, 50.0])
    values = variation_values(x, 1.0, SensitivitySettings(variations=3, factor=2.0))
    assert values == pytest.approx([2.0, 4.0, 8.0])


def test_explicit_and_random_strategies():
    settings = SensitivitySettings(
        variations=2,
        strategy=VariationStrategy.EXPLICIT,
        explicit={"a": [2.0, 3.0], "b": [0.5, 0.5], "c": [1.0, 1.0]},
        baseline=Configuration(a=1.0, b=1.0, c=1.0),
    )
    matrix = run_sensitivity(
        three_reals(), ["r"], settings, FunctionObjective(metrics, ("r",))
    )
    # r = 1 + a**2 + b = 3 at baseline; a=2 -> 6, a=3 -> 11
    assert matrix.entry("r", "a") == pytest.approx((1.0 + 8.0 / 3.0) / 2)
    with pytest.raises(ValueError):
        SensitivitySettings(
            variations=3, strategy=VariationStrategy.EXPLICIT, explicit={"a": [1]}
        )
    with pytest.raises(CoverageError):
        run_sensitivity(
            three_reals(),
            ["r"],
            SensitivitySettings(
                variations=1,
                strategy=VariationStrategy.EXPLICIT,
                explicit={"a": [2.0]},
                baseline=Configuration(a=1.0, b=1.0, c=1.0),
            ),
            FunctionObjective(metrics, ("r",)),
        )
    random_settings = SensitivitySettings(
        variations=4, strategy=VariationStrategy.RANDOM, seed=3
    )
    spec = three_reals().parameter("a")
    values = variation_values(spec, 1.0, random_settings, np.random.default_rng([3, 0]))
    assert len(values) == 4 and all(0.1 <= v <= 100 for v in values)


def group3_ranking(case_id, variations=5):
    settings = SensitivitySettings(
        variations=variations, factor=1.10, baseline=synthetic_baseline()
    )
    objective = SyntheticObjective(SyntheticCase(case_id, noise_stddev=0.0))
    matrix = run_sensitivity(
        synthetic_space(), ["G1", "G2", "G3", "G4"], settings, objective
    )
    return matrix, [p for p, _ in matrix.ranked("G3")]


GROUP3 = {f"x_{i}" for i in range(10, 15)}
GROUP4 = {f"x_{i}" for i in range(15, 20)}


@pytest.mark.parametrize("variations", [5, 100])
@pytest.mark.parametrize("case_id", [4, 5])
def test_group4_dominates_group3_when_coupled(case_id, variations):
    _, ranking = group3_ranking(case_id, variations)
    assert set(ranking[:5]) == GROUP4
    assert set(ranking[5:10]) == GROUP3


@pytest.mark.parametrize("variations", [5, 100])
@pytest.mark.parametrize("case_id", [1, 2])
def test_group3_dominates_itself_when_weakly_coupled(case_id, variations):
    _, ranking = group3_ranking(case_id, variations)
    assert set(ranking[:5]) == GROUP3
    assert set(ranking[5:10]) == GROUP4


@pytest.mark.parametrize("variations", [5, 100])
def test_medium_influence_case(variations):
    matrix, ranking = group3_ranking(3, variations)
    assert set(ranking[:10]) == GROUP3 | GROUP4
    assert matrix.entry("G3", "x_15") > 0


@pytest.mark.parametrize("case_id", [1, 3, 5])
def test_other_groups_see_only_their_own_variables(case_id):
    matrix, _ = group3_ranking(case_id)
    for i, group in enumerate(["G1", "G2"]):
        own = {f"x_{j}" for j in range(5 * i, 5 * i + 5)}
        for name, value in matrix.row(group).items():
            assert (value > 0) == (name in own), (group, name)
    for name, value in matrix.row("G4").items():
        assert (value > 0) == (name in GROUP4)


def test_matrix_serialization_and_table():
    matrix = InfluenceMatrix(
        routines=("g1", "g2"),
        parameters=("a", "b"),
        variability=np.array([[0.5, math.nan], [0.0, 0.25]]),
        notes=("b failed",),
    )
    data = matrix.to_dict()
    assert data["variability"] == [[0.5, None], [0.0, 0.25]]
    again = InfluenceMatrix.from_dict(data)
    np.testing.assert_array_equal(again.variability, matrix.variability)
    assert again.notes == ("b failed",)
    table = matrix.format_table()
    assert "g1" in table and "a 50.00%" in table and "b unknown" in table
    assert matrix.global_ranking() == [
        ("g1", "a", 0.5),
        ("g2", "b", 0.25),
        ("g2", "a", 0.0),
    ]


def test_matrix_validation():
    with pytest.raises(ValueError, match="shape"):
        InfluenceMatrix(("g1",), ("a", "b"), np.zeros((2, 2)))
    with pytest.raises(ValueError, match="non-negative"):
        InfluenceMatrix(("g1",), ("a",), np.array([[-0.1]]))
    matrix = InfluenceMatrix(("g1",), ("x_0",), np.array([[0.1]]))
    with pytest.raises(CoverageError):
        matrix.check_covers(synthetic_space())


def test_records_keep_their_status():
    record = EvaluationRecord.failure(Configuration(a=1), Status.TIMEOUT)
    assert not record.ok
