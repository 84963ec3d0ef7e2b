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

"""The outcome of evaluating one configuration."""

import datetime
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

from tuneplan.enums import Status
from tuneplan.space import Configuration

# Stands in for the objective of failed evaluations. Searches never train a
# surrogate on it.
PENALTY = 1e9

# Name under which the overall objective can be measured like a routine.
TOTAL = "total"


def utc_now() -> datetime.datetime:
    return datetime.datetime.now(datetime.timezone.utc)


@dataclass(frozen=True)
class EvaluationRecord:
    """Metrics of one evaluated configuration.

    Args:
        config: the evaluated configuration.
        routine_metrics: metric per measured routine.
        total: the overall objective; PENALTY unless status is OK.
        status: how the evaluation ended.
        wall_seconds: time spent evaluating.
        search_id: the search the evaluation belongs to.
        index: position of the evaluation within its search.
        timestamp: when the evaluation finished, in UTC.
        message: diagnostic of failed evaluations.
    """

    config: Configuration
    routine_metrics: Mapping[str, float]
    total: float
    status: Status = Status.OK
    wall_seconds: float = 0.0
    search_id: str = ""
    index: int = 0
    timestamp: datetime.datetime = field(default_factory=utc_now)
    message: str = ""

    def __post_init__(self):
        if not isinstance(self.config, Configuration):
            object.__setattr__(self, "config", Configuration(self.config))
        object.__setattr__(
            self,
            "routine_metrics",
            {str(k): float(v) for k, v in self.routine_metrics.items()},
        )
        if self.status == Status.OK:
            if not math.isfinite(self.total):
                raise ValueError("An ok evaluation needs a finite total")
            if not self.routine_metrics:
                raise ValueError("An ok evaluation needs routine metrics")
            bad = [k for k, v in self.routine_metrics.items() if not math.isfinite(v)]
            if bad:
                raise ValueError(f"Non-finite metrics in an ok evaluation: {bad}")
        elif self.total != PENALTY:
            raise ValueError(f"A {self.status.value} evaluation must carry PENALTY")
        if self.wall_seconds < 0:
            raise ValueError("wall_seconds must be non-negative")

    @property
    def ok(self) -> bool:
        return self.status == Status.OK

    @classmethod
    def failure(
        cls,
        config: Mapping[str, Any],
        status: Status,
        message: str = "",
        **kwargs,
    ) -> "EvaluationRecord":
        """A non-ok record carrying the penalty total and no metrics."""
        return cls(
            config=Configuration(config),
            routine_metrics={},
            total=PENALTY,
            status=status,
            message=message,
            **kwargs,
        )

    def metric(self, routine: str) -> float:
        """The routine's metric; the total for "" or an unreported "total"."""
        if routine in self.routine_metrics:
            return self.routine_metrics[routine]
        if routine in ("", TOTAL):
            return self.total
        raise KeyError(f"No metric for routine {routine}")

    def relabeled(self, search_id: str, index: int) -> "EvaluationRecord":
        return EvaluationRecord(
            config=self.config,
            routine_metrics=self.routine_metrics,
            total=self.total,
            status=self.status,
            wall_seconds=self.wall_seconds,
            search_id=search_id,
            index=index,
            timestamp=self.timestamp,
            message=self.message,
        )

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "search_id": self.search_id,
            "index": self.index,
            "assignments": self.config.to_dict(),
            "routine_metrics": dict(self.routine_metrics),
            "total": self.total,
            "status": self.status.value,
            "wall_seconds": self.wall_seconds,
            "timestamp": self.timestamp.isoformat(),
        }
        if self.message:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationRecord":
        return cls(
            config=Configuration(data["assignments"]),
            routine_metrics=data.get("routine_metrics", {}),
            total=float(data["total"]),
            status=Status(data["status"]),
            wall_seconds=float(data.get("wall_seconds", 0.0)),
            search_id=str(data.get("search_id", "")),
            index=int(data.get("index", 0)),
            timestamp=datetime.datetime.fromisoformat(data["timestamp"]),
            message=str(data.get("message", "")),
        )
