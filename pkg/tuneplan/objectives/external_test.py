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

import shlex
import sys
import textwrap

import pytest

from tuneplan.enums import Status
from tuneplan.errors import UnknownParameterError
from tuneplan.objectives import (
    PENALTY,
    ExternalCommandSpec,
    ExternalObjective,
    eval_external,
    parse_metrics,
)
from tuneplan.space import ParameterSpec, RoutineDecl, SearchSpace


def script(tmp_path, body: str) -> str:
    path = tmp_path / "app.py"
    path.write_text(textwrap.dedent(body))
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(path))}"


def block_space() -> SearchSpace:
    return SearchSpace(
        parameters=(
            ParameterSpec.integer("block", 32, 256, step=32, default=64, owner="g1"),
            ParameterSpec.real("alpha", 0.0, 1.0, default=0.5, owner="g2"),
        ),
        routines=(RoutineDecl("g1"), RoutineDecl("g2")),
        constraints=("block * alpha <= 100",),
    )


def test_parse_metrics():
    stdout = "\n".join(
        [
            "starting",
            "metric a=1",
            "metric \tb=-2.5e3",
            "metric c.d_e=0.125",
            "metrics x=1",
            " metric y=1",
            "metric z=1.0 ",
            "metric w=abc",
            "metric v=1.",
            "metric a=4\r",
        ]
    )
    assert parse_metrics(stdout) == {"a": 4.0, "b": -2500.0, "c.d_e": 0.125}


def test_total_metric(tmp_path):
    spec = ExternalCommandSpec(script(tmp_path, 'print("metric total=12.5")'))
    record = eval_external(spec, None, {"block": 64})
    assert record.status == Status.OK
    assert record.total == 12.5
    assert record.routine_metrics == {"total": 12.5}


def test_total_falls_back_to_sum(tmp_path):
    spec = ExternalCommandSpec(
        script(
            tmp_path,
            'print("metric g1=1.0")\nprint("noise")\nprint("metric g2=2.0")',
        )
    )
    record = eval_external(spec, None, {"block": 64}, routines=("g1", "g2"))
    assert record.status == Status.OK
    assert record.total == 3.0
    assert record.routine_metrics == {"g1": 1.0, "g2": 2.0}


def test_reported_total_wins(tmp_path):
    spec = ExternalCommandSpec(
        script(tmp_path, 'print("metric g1=1.0")\nprint("metric total=7")')
    )
    record = eval_external(spec, None, {})
    assert record.total == 7.0
    assert record.routine_metrics == {"g1": 1.0}


def test_timeout(tmp_path):
    spec = ExternalCommandSpec(
        script(tmp_path, 'import time\ntime.sleep(2)\nprint("metric total=1")'),
        timeout_seconds=0.5,
    )
    record = eval_external(spec, None, {})
    assert record.status == Status.TIMEOUT
    assert record.total == PENALTY
    assert record.wall_seconds < 2


def test_nonzero_exit_is_a_crash(tmp_path):
    spec = ExternalCommandSpec(
        script(
            tmp_path,
            """
            import sys
            print("metric total=1")
            print("out of memory", file=sys.stderr)
            sys.exit(3)
            """,
        )
    )
    record = eval_external(spec, None, {})
    assert record.status == Status.CRASH
    assert record.total == PENALTY
    assert "out of memory" in record.message


def test_no_metrics_is_a_crash(tmp_path):
    spec = ExternalCommandSpec(script(tmp_path, 'print("done")'))
    assert eval_external(spec, None, {}).status == Status.CRASH


def test_missing_routine_metric_is_a_crash(tmp_path):
    spec = ExternalCommandSpec(script(tmp_path, 'print("metric g1=1.0")'))
    record = eval_external(spec, None, {}, routines=("g1", "g2"))
    assert record.status == Status.CRASH
    assert "g2" in record.message


@pytest.mark.parametrize(
    "lines",
    [
        ["metric total=1e999"],
        ["metric g1=1e308", "metric g2=1e308"],
        ["metric g1=1e999", "metric total=5"],
    ],
)
def test_non_finite_metrics_are_a_crash(tmp_path, lines):
    body = "\n".join(f"print({line!r})" for line in lines)
    spec = ExternalCommandSpec(script(tmp_path, body))
    record = eval_external(spec, None, {})
    assert record.status == Status.CRASH
    assert record.total == PENALTY
    assert "Non-finite" in record.message


def test_parameters_reach_the_command(tmp_path):
    command = script(
        tmp_path,
        """
        import os, sys
        print(f"metric g1={sys.argv[1]}")
        print(f"metric g2={os.environ['TUNE_ALPHA']}")
        """,
    )
    spec = ExternalCommandSpec(command + " {block}")
    record = eval_external(spec, block_space(), {"block": 96, "alpha": 0.25})
    assert record.status == Status.OK
    assert record.routine_metrics == {"g1": 96.0, "g2": 0.25}


def test_env_prefix(tmp_path):
    command = script(
        tmp_path, 'import os\nprint("metric total=" + os.environ["APP_BLOCK"])'
    )
    spec = ExternalCommandSpec(command, env_prefix="APP_")
    assert eval_external(spec, None, {"block": 128}).total == 128.0


def test_invalid_configuration_is_not_run(tmp_path):
    marker = tmp_path / "ran"
    command = script(
        tmp_path, f'open({str(marker)!r}, "w").close()\nprint("metric total=1")'
    )
    record = eval_external(
        ExternalCommandSpec(command), block_space(), {"block": 256, "alpha": 1.0}
    )
    assert record.status == Status.INVALID
    assert not marker.exists()


def test_repeat_averages_runs(tmp_path):
    counter = tmp_path / "count"
    command = script(
        tmp_path,
        f"""
        with open({str(counter)!r}, "a") as f:
            f.write("x")
        with open({str(counter)!r}) as f:
            runs = len(f.read())
        print(f"metric g1={{runs}}")
        print(f"metric g2={{2 * runs}}")
        """,
    )
    spec = ExternalCommandSpec(command, repeat=3)
    record = eval_external(spec, None, {})
    assert record.routine_metrics == {"g1": 2.0, "g2": 4.0}
    assert record.total == 6.0


def test_unknown_placeholder(tmp_path):
    spec = ExternalCommandSpec(script(tmp_path, 'print("metric total=1")') + " {nope}")
    with pytest.raises(UnknownParameterError):
        eval_external(spec, None, {"block": 1})


def test_spec_validation():
    with pytest.raises(ValueError):
        ExternalCommandSpec("app", timeout_seconds=0)
    with pytest.raises(ValueError):
        ExternalCommandSpec("app", repeat=0)


def test_objective_wrapper(tmp_path):
    spec = ExternalCommandSpec(
        script(tmp_path, 'print("metric g1=2")\nprint("metric g2=3")')
    )
    objective = ExternalObjective(spec, routines=("g1", "g2"))
    record = objective.evaluate({}, search_id="joint", index=3)
    assert objective.routines == ("g1", "g2")
    assert (record.search_id, record.index, record.total) == ("joint", 3, 5.0)
