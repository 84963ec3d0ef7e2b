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

"""Budgets and running state of one search."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from tuneplan.objectives import PENALTY, EvaluationRecord
from tuneplan.planner import SearchDef
from tuneplan.space import Configuration

DEFAULT_CANDIDATE_POOL = 1000


@dataclass(frozen=True)
class SearchBudget:
    """How many evaluations a search gets and how it spends them.

    Args:
        init_samples: random evaluations before the surrogate is used; they
            count toward max_evaluations.
        max_evaluations: evaluations of the whole search.
        candidate_pool: random candidates scored by the acquisition per
            iteration.
    """

    init_samples: int = 5
    max_evaluations: int = 10
    candidate_pool: int = DEFAULT_CANDIDATE_POOL

    def __post_init__(self):
        if min(self.init_samples, self.max_evaluations, self.candidate_pool) < 1:
            raise ValueError("Search budget entries must be positive")

    @classmethod
    def for_search(
        cls, search: SearchDef, candidate_pool: int = DEFAULT_CANDIDATE_POOL
    ) -> "SearchBudget":
        return cls(
            init_samples=search.init_samples,
            max_evaluations=search.budget,
            candidate_pool=candidate_pool,
        )


def search_value(record: EvaluationRecord, targets: Sequence[str] = ()) -> float:
    """What a search minimizes: the summed target metrics, or the total.

    Failed evaluations are worth PENALTY.
    """
    if not record.ok:
        return PENALTY
    if not targets:
        return record.total
    return float(sum(record.metric(t) for t in targets))


@dataclass
class SearchState:
    """History and best result of a search."""

    search_id: str
    targets: Tuple[str, ...] = ()
    history: List[EvaluationRecord] = field(default_factory=list)
    rng_seed: int = 0
    elapsed_seconds: float = 0.0
    notes: List[str] = field(default_factory=list)

    def value(self, record: EvaluationRecord) -> float:
        return search_value(record, self.targets)

    @property
    def ok_records(self) -> List[EvaluationRecord]:
        return [r for r in self.history if r.ok]

    @property
    def best(self) -> Optional[EvaluationRecord]:
        """The first ok record of minimal value; None before any succeeded."""
        ok = self.ok_records
        if not ok:
            return None
        return min(ok, key=self.value)

    @property
    def best_value(self) -> float:
        best = self.best
        return math.inf if best is None else self.value(best)

    @property
    def best_config(self) -> Optional[Configuration]:
        best = self.best
        return None if best is None else best.config

    def trace(self) -> List[float]:
        """Best value after each evaluation; PENALTY until one succeeds."""
        out, current = [], PENALTY
        for record in self.history:
            current = min(current, self.value(record))
            out.append(current)
        return out

    def to_dict(self):
        best = self.best
        return {
            "search_id": self.search_id,
            "targets": list(self.targets),
            "evaluations": len(self.history),
            "failures": len(self.history) - len(self.ok_records),
            "best_value": None if best is None else self.value(best),
            "best_assignments": None if best is None else best.config.to_dict(),
            "elapsed_seconds": self.elapsed_seconds,
            "trace": self.trace(),
            "notes": list(self.notes),
        }
