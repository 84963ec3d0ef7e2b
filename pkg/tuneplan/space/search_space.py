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

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from tuneplan.errors import (
    MissingParameterError,
    SamplingExhaustedError,
    UnknownParameterError,
)
from tuneplan.space.constraints import ConstraintExpr
from tuneplan.space.parameters import Configuration, ParameterSpec, RoutineDecl

SeedLike = Union[int, Sequence[int]]

DEFAULT_REJECTION_BUDGET = 10_000


@dataclass(frozen=True)
class SearchSpace:
    """Parameters, the routines that own them, and validity constraints.

    The space is immutable, so it can be shared between concurrent searches.
    """

    parameters: Tuple[ParameterSpec, ...]
    routines: Tuple[RoutineDecl, ...]
    constraints: Tuple[ConstraintExpr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "routines", tuple(self.routines))
        object.__setattr__(
            self,
            "constraints",
            tuple(
                c if isinstance(c, ConstraintExpr) else ConstraintExpr(c)
                for c in self.constraints
            ),
        )
        routine_names = [r.name for r in self.routines]
        if len(set(routine_names)) != len(routine_names):
            raise ValueError("Routine names must be unique")
        param_names = [p.name for p in self.parameters]
        if len(set(param_names)) != len(param_names):
            raise ValueError("Parameter names must be unique within a search space")
        known = set(routine_names)
        for routine in self.routines:
            if routine.parent is not None and routine.parent not in known:
                raise ValueError(
                    f"Routine {routine.name} has undeclared parent {routine.parent}"
                )
        self._check_forest()
        for param in self.parameters:
            if param.owner not in known:
                raise ValueError(
                    f"Parameter {param.name} is owned by undeclared routine "
                    f"{param.owner}"
                )
            for user in param.users:
                if user not in known:
                    raise ValueError(
                        f"Parameter {param.name} lists undeclared user routine {user}"
                    )
        by_name = {p.name: p for p in self.parameters}
        object.__setattr__(self, "_by_name", by_name)
        for constraint in self.constraints:
            for name in constraint.parameters:
                if name not in by_name:
                    raise ValueError(
                        f"Constraint {constraint.expression!r} references "
                        f"undeclared parameter {name}"
                    )
                if not by_name[name].is_numeric:
                    raise ValueError(
                        f"Constraint {constraint.expression!r} uses categorical "
                        f"parameter {name} in arithmetic"
                    )

    def _check_forest(self) -> None:
        parents = {r.name: r.parent for r in self.routines}
        for start in parents:
            seen = {start}
            node = parents[start]
            while node is not None:
                if node in seen:
                    raise ValueError(f"Routine parent links form a cycle at {node}")
                seen.add(node)
                node = parents[node]

    @property
    def parameter_names(self) -> List[str]:
        return [p.name for p in self.parameters]

    @property
    def routine_names(self) -> List[str]:
        return [r.name for r in self.routines]

    def parameter(self, name: str) -> ParameterSpec:
        try:
            return self._by_name[name]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownParameterError(name) from None

    def routine(self, name: str) -> RoutineDecl:
        for r in self.routines:
            if r.name == name:
                return r
        raise KeyError(f"Unknown routine {name}")

    def owned_by(self, routine: str) -> List[str]:
        """Names of the parameters owned by a routine, in declaration order."""
        return [p.name for p in self.parameters if p.owner == routine]

    def children(self, routine: str) -> List[str]:
        return [r.name for r in self.routines if r.parent == routine]

    def is_parent(self, routine: str) -> bool:
        return any(r.parent == routine for r in self.routines)

    def leaf_routines(self) -> List[str]:
        """Measured routines that enclose no other routine."""
        return [
            r.name
            for r in self.routines
            if r.measured and not self.is_parent(r.name)
        ]

    def defaults(self) -> Configuration:
        return Configuration({p.name: p.default for p in self.parameters})

    def subspace_defaults(self, tuned: Iterable[str]) -> Dict[str, Any]:
        """Defaults of the parameters a search over `tuned` holds fixed."""
        tuned = set(tuned)
        for name in tuned:
            self.parameter(name)
        return {p.name: p.default for p in self.parameters if p.name not in tuned}

    def check_names(self, config: Mapping[str, Any]) -> None:
        """Raises if config names unknown parameters or misses declared ones."""
        for name in config:
            if name not in self._by_name:  # type: ignore[attr-defined]
                raise UnknownParameterError(f"Undeclared parameter {name}")
        for p in self.parameters:
            if p.name not in config:
                raise MissingParameterError(f"Parameter {p.name} is unassigned")

    def validate(self, config: Mapping[str, Any]) -> bool:
        """True iff every value is in-domain and every constraint holds."""
        self.check_names(config)
        return self._is_valid(config)

    def _is_valid(self, config: Mapping[str, Any]) -> bool:
        if not all(p.contains(config[p.name]) for p in self.parameters):
            return False
        return all(c(config) for c in self.constraints)

    def sample_random(
        self,
        count: int,
        seed: SeedLike,
        fixed: Optional[Mapping[str, Any]] = None,
        rejection_budget: int = DEFAULT_REJECTION_BUDGET,
    ) -> List[Configuration]:
        """Draws `count` valid configurations, uniformly per parameter.

        Args:
            count: number of configurations to return.
            seed: seed (or seed sequence) of the generator; equal seeds give
                equal lists.
            fixed: assignments held constant; only the other parameters are
                drawn.
            rejection_budget: consecutive constraint-violating draws tolerated
                before giving up.

        Raises:
            SamplingExhaustedError: if the rejection budget is exhausted.
        """
        if count < 0:
            raise ValueError("count must be non-negative")
        fixed = dict(fixed or {})
        for name in fixed:
            self.parameter(name)
        free = [p for p in self.parameters if p.name not in fixed]
        rng = np.random.default_rng(seed)
        out: List[Configuration] = []
        rejected = 0
        while len(out) < count:
            draw: Dict[str, Any] = dict(fixed)
            for p in free:
                draw[p.name] = p.sample(rng)
            if self._is_valid(draw):
                out.append(
                    Configuration({p.name: draw[p.name] for p in self.parameters})
                )
                rejected = 0
                continue
            rejected += 1
            if rejected >= rejection_budget:
                raise SamplingExhaustedError(
                    f"{rejected} consecutive draws violated the constraints; "
                    "the search space looks over-constrained"
                )
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "routines": [r.to_dict() for r in self.routines],
            "parameters": [p.to_dict() for p in self.parameters],
            "constraints": [c.expression for c in self.constraints],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchSpace":
        return cls(
            parameters=tuple(ParameterSpec.from_dict(p) for p in data["parameters"]),
            routines=tuple(RoutineDecl.from_dict(r) for r in data["routines"]),
            constraints=tuple(ConstraintExpr(c) for c in data.get("constraints", ())),
        )


def validate(space: SearchSpace, config: Mapping[str, Any]) -> bool:
    """True iff config is in-domain and satisfies every constraint of space.

    Raises:
        UnknownParameterError: config names an undeclared parameter.
        MissingParameterError: a declared parameter is unassigned.
    """
    return space.validate(config)


def sample_random(
    space: SearchSpace,
    count: int,
    seed: SeedLike,
    fixed: Optional[Mapping[str, Any]] = None,
    rejection_budget: int = DEFAULT_REJECTION_BUDGET,
) -> List[Configuration]:
    """See `SearchSpace.sample_random`."""
    return space.sample_random(
        count, seed, fixed=fixed, rejection_budget=rejection_budget
    )
