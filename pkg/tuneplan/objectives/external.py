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

"""Runs an external command per evaluation and reads metrics off its stdout.

The command reports metrics with lines of the form

    metric <name>=<number>

Every other line is ignored. A metric named `total` is the overall objective;
without it the total is the sum of the other metrics.
"""

import logging
import math
import os
import re
import shlex
import signal
import subprocess
import time
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from tuneplan.enums import Status
from tuneplan.errors import UnknownParameterError
from tuneplan.objectives.base import Objective
from tuneplan.objectives.records import TOTAL, EvaluationRecord
from tuneplan.space import Configuration, SearchSpace, canonical_value

logger = logging.getLogger(__name__)

METRIC_RE = re.compile(
    r"^metric[ \t]+([A-Za-z0-9_.]+)=(-?[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?)$"
)

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
_STDERR_TAIL = 400


@dataclass(frozen=True)
class ExternalCommandSpec:
    """How to launch the application under tuning.

    Args:
        command_template: command line with `{name}` placeholders.
        env_prefix: every parameter is also exported as
            `<env_prefix><NAME>`.
        timeout_seconds: a run taking longer is killed and marked timed out.
        working_dir: directory the command runs in.
        repeat: number of runs per evaluation; metrics are averaged.
    """

    command_template: str
    env_prefix: str = "TUNE_"
    timeout_seconds: float = 900.0
    working_dir: Optional[str] = None
    repeat: int = 1

    def __post_init__(self):
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")
        if self.repeat < 1:
            raise ValueError("repeat must be at least 1")
        if not self.command_template.strip():
            raise ValueError("command_template is empty")

    def command(self, config: Mapping[str, object]) -> List[str]:
        """The argument vector with every placeholder substituted."""

        def substitute(match: re.Match) -> str:
            name = match.group(1)
            if name not in config:
                raise UnknownParameterError(
                    f"Command placeholder {{{name}}} names no parameter"
                )
            return canonical_value(config[name])

        return shlex.split(_PLACEHOLDER_RE.sub(substitute, self.command_template))

    def environment(self, config: Mapping[str, object]) -> Dict[str, str]:
        env = dict(os.environ)
        for name, value in config.items():
            env[f"{self.env_prefix}{name.upper()}"] = canonical_value(value)
        return env


def parse_metrics(stdout: str) -> Dict[str, float]:
    """Metrics printed by a run; later lines win for repeated names."""
    metrics: Dict[str, float] = {}
    for line in stdout.splitlines():
        match = METRIC_RE.match(line.rstrip("\r"))
        if match:
            metrics[match.group(1)] = float(match.group(2))
    return metrics


class _RunFailure(Exception):
    def __init__(self, status: Status, message: str):
        super().__init__(message)
        self.status = status


def _run_once(spec: ExternalCommandSpec, config: Configuration) -> Dict[str, float]:
    args = spec.command(config)
    logger.debug("Running %s", args)
    try:
        proc = subprocess.Popen(  # pylint: disable=consider-using-with
            args,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            cwd=spec.working_dir,
            env=spec.environment(config),
            start_new_session=True,
        )
    except OSError as e:
        raise _RunFailure(Status.CRASH, f"Cannot start {args[0]}: {e}") from e
    try:
        stdout, stderr = proc.communicate(timeout=spec.timeout_seconds)
    except subprocess.TimeoutExpired:
        # kill the whole process group, children included
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.communicate()
        raise _RunFailure(
            Status.TIMEOUT, f"Timed out after {spec.timeout_seconds} seconds"
        ) from None
    if proc.returncode != 0:
        raise _RunFailure(
            Status.CRASH,
            f"Exit status {proc.returncode}: {stderr[-_STDERR_TAIL:].strip()}",
        )
    metrics = parse_metrics(stdout)
    if not metrics:
        raise _RunFailure(Status.CRASH, "The command printed no metric lines")
    return metrics


def _split_total(
    metrics: Mapping[str, float], routines: Sequence[str]
) -> Tuple[Dict[str, float], float]:
    routine_metrics = {k: v for k, v in metrics.items() if k != TOTAL}
    missing = [r for r in routines if r not in routine_metrics]
    if missing:
        raise _RunFailure(
            Status.CRASH, f"The command reported no metric for {', '.join(missing)}"
        )
    if TOTAL in metrics:
        total = metrics[TOTAL]
    else:
        total = sum(routine_metrics.values())
    if not routine_metrics:
        # only a total was printed
        routine_metrics = {TOTAL: total}
    bad = [k for k, v in routine_metrics.items() if not math.isfinite(v)]
    if bad or not math.isfinite(total):
        names = ", ".join(bad) or TOTAL
        raise _RunFailure(Status.CRASH, f"Non-finite metrics: {names}")
    return routine_metrics, total


def eval_external(
    spec: ExternalCommandSpec,
    space: Optional[SearchSpace],
    config: Mapping[str, object],
    *,
    routines: Sequence[str] = (),
    search_id: str = "",
    index: int = 0,
) -> EvaluationRecord:
    """Evaluates a configuration by running the external command.

    Args:
        spec: the command to run.
        space: if given, the configuration is checked against it first and
            invalid configurations are not run.
        config: the configuration to evaluate.
        routines: metrics the command must report.
        search_id: search the evaluation belongs to.
        index: position within the search.
    """
    config = Configuration(config)
    label = dict(search_id=search_id, index=index)
    if space is not None and not space.validate(config):
        return EvaluationRecord.failure(
            config, Status.INVALID, "Configuration violates the search space", **label
        )
    start = time.perf_counter()
    runs: List[Dict[str, float]] = []
    try:
        for _ in range(spec.repeat):
            runs.append(_run_once(spec, config))
        if any(set(run) != set(runs[0]) for run in runs):
            raise _RunFailure(Status.CRASH, "Repeated runs reported different metrics")
        averaged = {
            name: sum(run[name] for run in runs) / len(runs) for name in runs[0]
        }
        routine_metrics, total = _split_total(averaged, routines)
    except _RunFailure as e:
        logger.warning("Evaluation %s/%d failed: %s", search_id, index, e)
        return EvaluationRecord.failure(
            config,
            e.status,
            str(e),
            wall_seconds=time.perf_counter() - start,
            **label,
        )
    return EvaluationRecord(
        config=config,
        routine_metrics=routine_metrics,
        total=total,
        wall_seconds=time.perf_counter() - start,
        **label,
    )


class ExternalObjective(Objective):
    def __init__(
        self,
        spec: ExternalCommandSpec,
        space: Optional[SearchSpace] = None,
        routines: Sequence[str] = (),
    ):
        self.spec = spec
        self.space = space
        self._routines = tuple(routines)

    @property
    def routines(self) -> Tuple[str, ...]:
        return self._routines

    def evaluate(
        self, config: Configuration, *, search_id: str = "", index: int = 0
    ) -> EvaluationRecord:
        return eval_external(
            self.spec,
            self.space,
            config,
            routines=self._routines,
            search_id=search_id,
            index=index,
        )
