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

"""Objectives turn configurations into evaluation records."""

import abc
import logging
import math
import time
from typing import Callable, Mapping, Sequence, Tuple, Union

from tuneplan.enums import Status
from tuneplan.errors import SingularityError
from tuneplan.objectives.records import TOTAL, EvaluationRecord
from tuneplan.space import Configuration

logger = logging.getLogger(__name__)

MetricFunction = Callable[[Configuration], Union[float, Mapping[str, float]]]


class Objective(abc.ABC):
    """Something that can be evaluated at a configuration.

    Implementations must be safe to call from several threads at once;
    `search_id` and `index` identify the evaluation so that any randomness can
    be derived from them instead of from shared state.
    """

    @property
    @abc.abstractmethod
    def routines(self) -> Tuple[str, ...]:
        """Routines whose metric every ok evaluation reports."""

    @abc.abstractmethod
    def evaluate(
        self, config: Configuration, *, search_id: str = "", index: int = 0
    ) -> EvaluationRecord:
        """Evaluates one configuration."""

    def __call__(self, config: Configuration) -> EvaluationRecord:
        return self.evaluate(config)


class FunctionObjective(Objective):
    """Wraps a python callable.

    The callable returns either one number (reported for the single routine)
    or a metric per routine, whose sum is the total. A SingularityError marks
    the evaluation invalid; any other exception marks it crashed.
    """

    def __init__(self, func: MetricFunction, routines: Sequence[str] = (TOTAL,)):
        if not routines:
            raise ValueError("FunctionObjective needs at least one routine")
        self._func = func
        self._routines = tuple(routines)

    @property
    def routines(self) -> Tuple[str, ...]:
        return self._routines

    def evaluate(
        self, config: Configuration, *, search_id: str = "", index: int = 0
    ) -> EvaluationRecord:
        config = Configuration(config)
        start = time.perf_counter()
        label = dict(search_id=search_id, index=index)
        try:
            value = self._func(config)
        except SingularityError as e:
            return EvaluationRecord.failure(config, Status.INVALID, str(e), **label)
        except Exception as e:  # pylint: disable=broad-except
            logger.warning("Objective raised at %s: %s", config, e)
            return EvaluationRecord.failure(config, Status.CRASH, repr(e), **label)
        if isinstance(value, Mapping):
            metrics = {str(k): float(v) for k, v in value.items()}
        else:
            metrics = {self._routines[0]: float(value)}
        total = sum(metrics.values())
        if not all(math.isfinite(v) for v in [total, *metrics.values()]):
            logger.warning("Objective returned non-finite metrics at %s", config)
            return EvaluationRecord.failure(
                config, Status.CRASH, f"Non-finite metrics: {metrics}", **label
            )
        return EvaluationRecord(
            config=config,
            routine_metrics=metrics,
            total=total,
            wall_seconds=time.perf_counter() - start,
            **label,
        )


class ConstantObjective(FunctionObjective):
    """A flat landscape: every configuration scores `value`."""

    def __init__(self, value: float = 1.0, routines: Sequence[str] = (TOTAL,)):
        routines = tuple(routines)
        share = value / len(routines)
        super().__init__(lambda _: {r: share for r in routines}, routines)
        self.value = value
