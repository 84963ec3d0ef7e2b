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

"""Search plans: which parameters get searched together, against what."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

from tuneplan.enums import Aggregation
from tuneplan.objectives import TOTAL
from tuneplan.space import SearchSpace, Value, canonical_value


@dataclass(frozen=True)
class PlannerSettings:
    """Knobs of the planner.

    Args:
        cutoff: cross edges with smaller influence are ignored (0.25 = 25%).
        dim_cap: most parameters one search may tune.
        budget_multiplier: evaluations per tuned parameter.
        budget_floor: fewest evaluations of any search.
        init_samples: random evaluations before the surrogate takes over.
        aggregation: how influence on a merged group is scored for the cap.
    """

    cutoff: float = 0.25
    dim_cap: int = 10
    budget_multiplier: float = 10
    budget_floor: int = 10
    init_samples: int = 5
    aggregation: Aggregation = Aggregation.MAX

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        if self.dim_cap < 1:
            raise ValueError("dim_cap must be at least 1")
        if self.budget_multiplier <= 0:
            raise ValueError("budget_multiplier must be positive")
        if self.budget_floor < 1 or self.init_samples < 1:
            raise ValueError("budget_floor and init_samples must be at least 1")
        if not isinstance(self.aggregation, Aggregation):
            object.__setattr__(self, "aggregation", Aggregation(self.aggregation))

    def budget(self, dims: int) -> int:
        """Evaluations granted to a search over `dims` parameters."""
        return max(self.budget_floor, math.ceil(self.budget_multiplier * dims))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cutoff": self.cutoff,
            "dim_cap": self.dim_cap,
            "budget_multiplier": self.budget_multiplier,
            "budget_floor": self.budget_floor,
            "init_samples": self.init_samples,
            "aggregation": self.aggregation.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PlannerSettings":
        return cls(**dict(data))


@dataclass(frozen=True)
class SearchDef:
    """One search of a plan.

    Args:
        id: unique name, e.g. "group2+group3".
        parameters: the tuned parameters.
        targets: routines whose summed metric is minimized; empty means the
            total objective.
        budget: evaluations, initial random samples included.
        dropped: parameters cut by the dimension cap, with the default they
            are held at.
        duplicates: tuned parameters owned by a routine searched elsewhere;
            the owner's search decides their final value.
        init_samples: random evaluations before the surrogate is used.
    """

    id: str
    parameters: Tuple[str, ...]
    targets: Tuple[str, ...] = ()
    budget: int = 10
    dropped: Mapping[str, Value] = field(default_factory=dict)
    duplicates: Tuple[str, ...] = ()
    init_samples: int = 5

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "duplicates", tuple(self.duplicates))
        object.__setattr__(self, "dropped", dict(self.dropped))
        if self.budget < 1:
            raise ValueError(f"Search {self.id} needs a positive budget")

    @property
    def target_label(self) -> str:
        return "+".join(self.targets) or TOTAL

    @property
    def dims(self) -> int:
        return len(self.parameters)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "parameters": list(self.parameters),
            "targets": list(self.targets),
            "budget": self.budget,
            "dropped": dict(self.dropped),
            "duplicates": list(self.duplicates),
            "init_samples": self.init_samples,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchDef":
        return cls(
            id=str(data["id"]),
            parameters=tuple(data["parameters"]),
            targets=tuple(data.get("targets", ())),
            budget=int(data["budget"]),
            dropped=dict(data.get("dropped", {})),
            duplicates=tuple(data.get("duplicates", ())),
            init_samples=int(data.get("init_samples", 5)),
        )


@dataclass(frozen=True)
class SearchPlan:
    """Stages of searches; the searches of one stage run side by side.

    Later stages start from the best values found by earlier ones.
    """

    stages: Tuple[Tuple[SearchDef, ...], ...]
    settings: PlannerSettings = field(default_factory=PlannerSettings)
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "stages", tuple(tuple(stage) for stage in self.stages if stage)
        )
        object.__setattr__(self, "notes", tuple(self.notes))
        ids = [s.id for s in self.searches()]
        if len(set(ids)) != len(ids):
            raise ValueError("Search ids must be unique within a plan")

    def searches(self) -> Iterator[SearchDef]:
        for stage in self.stages:
            yield from stage

    def search(self, search_id: str) -> SearchDef:
        for s in self.searches():
            if s.id == search_id:
                return s
        raise KeyError(f"No search {search_id} in the plan")

    def stage_of(self, search_id: str) -> int:
        for i, stage in enumerate(self.stages):
            if any(s.id == search_id for s in stage):
                return i
        raise KeyError(f"No search {search_id} in the plan")

    @property
    def total_budget(self) -> int:
        return sum(s.budget for s in self.searches())

    def authority(self, parameter: str) -> Optional[str]:
        """Id of the search whose best value the final configuration uses.

        That is the search tuning the parameter as its own; failing that, the
        first search tuning it as a duplicate. None for untuned parameters.
        """
        fallback = None
        for s in self.searches():
            if parameter not in s.parameters:
                continue
            if parameter not in s.duplicates:
                return s.id
            fallback = fallback or s.id
        return fallback

    def violations(self, space: SearchSpace) -> List[str]:
        """Broken plan invariants, described; empty for a sound plan."""
        problems = []
        tuned: Dict[str, List[str]] = {}
        dropped = set()
        for s in self.searches():
            if s.dims > self.settings.dim_cap:
                problems.append(
                    f"{s.id} tunes {s.dims} parameters, cap is {self.settings.dim_cap}"
                )
            for name in s.parameters:
                space.parameter(name)
                tuned.setdefault(name, []).append(s.id)
            dropped.update(s.dropped)
        for p in space.parameters:
            if p.name not in tuned and p.name not in dropped:
                problems.append(f"{p.name} is neither tuned nor fixed at a default")
            if p.shared_value_required and len(tuned.get(p.name, [])) > 1:
                problems.append(
                    f"{p.name} must take one value but is tuned in "
                    f"{', '.join(tuned[p.name])}"
                )
        return problems

    def check_invariants(self, space: SearchSpace) -> None:
        problems = self.violations(space)
        if problems:
            raise ValueError("Inconsistent search plan: " + "; ".join(problems))

    def format_table(self) -> str:
        """One row per search: stage, name, target, budget and parameters."""
        header = ("Stage", "Search", "Target", "Dims", "Budget", "Parameters")
        rows = []
        for i, stage in enumerate(self.stages, start=1):
            for s in stage:
                params = ", ".join(
                    f"{p}*" if p in s.duplicates else p for p in s.parameters
                )
                rows.append(
                    (str(i), s.id, s.target_label, str(s.dims), str(s.budget), params)
                )
        widths = [max(len(r[c]) for r in rows + [header]) for c in range(5)]
        lines = []
        for row in [header] + rows:
            cells = [row[c].ljust(widths[c]) for c in range(5)] + [row[5]]
            lines.append("  ".join(cells).rstrip())
        lines.insert(1, "-" * len(lines[0]))
        for s in self.searches():
            if s.dropped:
                fixed = ", ".join(
                    f"{k}={canonical_value(v)}" for k, v in s.dropped.items()
                )
                lines.append(f"{s.id}: dropped by the dimension cap, fixed at {fixed}")
        if any(s.duplicates for s in self.searches()):
            lines.append("* tuned again as a duplicate; the owner's search decides it")
        lines.extend(f"note: {n}" for n in self.notes)
        lines.append(f"Total budget: {self.total_budget} evaluations")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "settings": self.settings.to_dict(),
            "stages": [[s.to_dict() for s in stage] for stage in self.stages],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchPlan":
        return cls(
            stages=tuple(
                tuple(SearchDef.from_dict(s) for s in stage) for stage in data["stages"]
            ),
            settings=PlannerSettings.from_dict(data.get("settings", {})),
            notes=tuple(data.get("notes", ())),
        )
