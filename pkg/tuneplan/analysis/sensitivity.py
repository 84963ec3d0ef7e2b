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

"""One-at-a-time sensitivity analysis.

Starting from a baseline configuration, every parameter is varied on its own
while all others keep their baseline value. The influence of parameter p on
routine r is the mean relative change of r's metric:

    variability[r][p] = mean_i |(m_r(baseline) - m_r(variation_i)) / m_r(baseline)|

Comparing the rows of the resulting matrix shows which routines can be tuned
independently of each other.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from tuneplan.enums import ParameterKind, VariationStrategy
from tuneplan.errors import (
    BaselineFailureError,
    CoverageError,
    ZeroBaselineError,
)
from tuneplan.execution import run_in_queue
from tuneplan.objectives import EvaluationRecord, Objective
from tuneplan.space import Configuration, ParameterSpec, SearchSpace, Value

logger = logging.getLogger(__name__)

SENSITIVITY_SEARCH_ID = "sensitivity"
DEFAULT_FACTOR = 1.10
DEFAULT_VARIATIONS = 5


@dataclass(frozen=True)
class SensitivitySettings:
    """How variations are generated.

    Args:
        variations: number V of variations per parameter.
        strategy: how variation values are chosen.
        factor: growth per step of the multiplicative strategy.
        explicit: V values per parameter for the explicit strategy.
        baseline: the baseline; None draws a random valid one from `seed`.
        seed: seed of random baselines and random variations.
        parallel: number of variations evaluated concurrently.
    """

    variations: int = DEFAULT_VARIATIONS
    strategy: VariationStrategy = VariationStrategy.MULTIPLICATIVE
    factor: float = DEFAULT_FACTOR
    explicit: Mapping[str, Sequence[Value]] = field(default_factory=dict)
    baseline: Optional[Configuration] = None
    seed: int = 0
    parallel: int = 1

    def __post_init__(self):
        if self.variations < 1:
            raise ValueError("At least one variation per parameter is needed")
        if self.factor <= 0 or self.factor == 1:
            raise ValueError("factor must be positive and different from 1")
        if self.strategy == VariationStrategy.EXPLICIT:
            for name, values in self.explicit.items():
                if len(values) != self.variations:
                    raise ValueError(
                        f"Parameter {name} lists {len(values)} variations, "
                        f"expected {self.variations}"
                    )
        if self.baseline is not None and not isinstance(self.baseline, Configuration):
            object.__setattr__(self, "baseline", Configuration(self.baseline))


def _next_grid_value(
    spec: ParameterSpec, target: float, seen: List[Value]
) -> Optional[Value]:
    """Snaps target onto the grid; moves past values already used."""
    value = spec.snap(target)
    if value not in seen:
        return value
    grid = sorted(spec.grid())
    above = [v for v in grid if v > max(seen) and v not in seen]
    if above:
        return above[0]
    below = [v for v in grid if v < min(seen) and v not in seen]
    if below:
        return below[-1]
    return None


def variation_values(
    spec: ParameterSpec,
    baseline_value: Value,
    settings: SensitivitySettings,
    rng: Optional[np.random.Generator] = None,
) -> List[Value]:
    """The values a parameter takes during its variations.

    The multiplicative strategy grows the baseline by `factor` per step. Real
    values are clipped to the bounds and kept even when they repeat. Integer
    and ordinal values are snapped to the domain and never repeat, so small
    domains may yield fewer than V values. Categorical parameters enumerate
    their other labels.
    """
    count = settings.variations
    if settings.strategy == VariationStrategy.EXPLICIT:
        if spec.name not in settings.explicit:
            raise CoverageError(f"No explicit variations for parameter {spec.name}")
        return list(settings.explicit[spec.name])
    if settings.strategy == VariationStrategy.RANDOM:
        rng = rng or np.random.default_rng(settings.seed)
        return [spec.sample(rng) for _ in range(count)]
    if spec.kind == ParameterKind.CATEGORICAL:
        return [v for v in spec.values if v != baseline_value][:count]
    if spec.kind == ParameterKind.REAL:
        return [
            spec.snap(float(baseline_value) * settings.factor**k)
            for k in range(1, count + 1)
        ]
    values: List[Value] = []
    seen: List[Value] = [baseline_value]
    current = float(baseline_value)
    for _ in range(count):
        value = _next_grid_value(spec, current * settings.factor, seen)
        if value is None:
            break
        values.append(value)
        seen.append(value)
        current = float(value)
    return values


@dataclass(frozen=True)
class InfluenceMatrix:
    """Variability of every measured routine under every parameter.

    Entries are fractions (1.0 is a 100% change). NaN marks an entry whose
    variations all failed: its influence is unknown, not zero.
    """

    routines: Tuple[str, ...]
    parameters: Tuple[str, ...]
    variability: np.ndarray
    baseline_record: Optional[EvaluationRecord] = None
    sample_records: Tuple[EvaluationRecord, ...] = ()
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "routines", tuple(self.routines))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        matrix = np.array(self.variability, dtype=float, copy=True)
        if matrix.size == 0:
            matrix = matrix.reshape(len(self.routines), len(self.parameters))
        if matrix.shape != (len(self.routines), len(self.parameters)):
            raise ValueError(
                f"Variability shape {matrix.shape} does not match "
                f"{len(self.routines)} routines x {len(self.parameters)} parameters"
            )
        if np.any(matrix[~np.isnan(matrix)] < 0):
            raise ValueError("Variability entries must be non-negative")
        matrix.setflags(write=False)
        object.__setattr__(self, "variability", matrix)
        object.__setattr__(self, "sample_records", tuple(self.sample_records))
        object.__setattr__(self, "notes", tuple(self.notes))

    def entry(self, routine: str, parameter: str) -> float:
        return float(
            self.variability[
                self.routines.index(routine), self.parameters.index(parameter)
            ]
        )

    def row(self, routine: str) -> Dict[str, float]:
        i = self.routines.index(routine)
        return {p: float(v) for p, v in zip(self.parameters, self.variability[i])}

    def ranked(self, routine: str) -> List[Tuple[str, float]]:
        """Parameters by decreasing influence on routine; unknown entries last."""
        values = list(self.row(routine).items())
        order = sorted(
            range(len(values)),
            key=lambda j: (math.isnan(values[j][1]), -_nan_to_zero(values[j][1]), j),
        )
        return [values[j] for j in order]

    def global_ranking(self) -> List[Tuple[str, str, float]]:
        """(routine, parameter, variability) over the whole matrix, largest first."""
        cells = [
            (r, p, float(self.variability[i, j]))
            for i, r in enumerate(self.routines)
            for j, p in enumerate(self.parameters)
            if not np.isnan(self.variability[i, j])
        ]
        return sorted(cells, key=lambda c: -c[2])

    def check_covers(self, space: SearchSpace) -> None:
        """Raises CoverageError unless every parameter of space has a column."""
        missing = [p for p in space.parameter_names if p not in self.parameters]
        if missing:
            raise CoverageError(
                f"Influence matrix has no column for {', '.join(missing)}"
            )

    def format_table(self, top_k: int = 10) -> str:
        """Per-routine top-k rankings side by side, in percent."""
        columns = []
        for routine in self.routines:
            ranked = self.ranked(routine)[:top_k]
            columns.append([routine] + [f"{p} {_percent(v)}" for p, v in ranked])
        width = max((len(cell) for col in columns for cell in col), default=0) + 2
        depth = max((len(col) for col in columns), default=0)
        lines = []
        for i in range(depth):
            cells = [col[i] if i < len(col) else "" for col in columns]
            lines.append("".join(cell.ljust(width) for cell in cells).rstrip())
        if lines:
            lines.insert(1, "-" * (width * len(columns)))
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "routines": list(self.routines),
            "parameters": list(self.parameters),
            "variability": [
                [None if np.isnan(v) else float(v) for v in row]
                for row in self.variability
            ],
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.baseline_record is not None:
            out["baseline"] = self.baseline_record.to_dict()
        if self.sample_records:
            out["samples"] = [r.to_dict() for r in self.sample_records]
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "InfluenceMatrix":
        rows = [
            [math.nan if v is None else float(v) for v in row]
            for row in data["variability"]
        ]
        baseline = data.get("baseline")
        return cls(
            routines=tuple(data["routines"]),
            parameters=tuple(data["parameters"]),
            variability=np.array(rows, dtype=float),
            baseline_record=(
                EvaluationRecord.from_dict(baseline) if baseline is not None else None
            ),
            sample_records=tuple(
                EvaluationRecord.from_dict(r) for r in data.get("samples", ())
            ),
            notes=tuple(data.get("notes", ())),
        )


def _nan_to_zero(value: float) -> float:
    return 0.0 if math.isnan(value) else value


def _percent(value: float) -> str:
    if math.isnan(value):
        return "unknown"
    return f"{100 * value:.2f}%"


def relative_variability(baseline: float, variations: Sequence[float]) -> float:
    """Mean absolute relative change; NaN without variations."""
    if baseline == 0:
        raise ZeroBaselineError("Relative change from a zero baseline is undefined")
    if not variations:
        return math.nan
    return float(np.mean([abs((baseline - v) / baseline) for v in variations]))


def _resolve_baseline(
    space: SearchSpace, settings: SensitivitySettings
) -> Configuration:
    if settings.baseline is not None:
        if not space.validate(settings.baseline):
            raise BaselineFailureError(
                f"Baseline {settings.baseline} violates the search space"
            )
        return settings.baseline
    return space.sample_random(1, seed=settings.seed)[0]


def run_sensitivity(
    space: SearchSpace,
    routines: Sequence[str],
    settings: SensitivitySettings,
    objective: Objective,
) -> InfluenceMatrix:
    """Measures how much every parameter moves every routine's metric.

    Evaluates the baseline once and each variation once: 1 + V * d
    evaluations unless small discrete domains offer fewer distinct values.
    Variations that violate the space, or whose evaluation fails, are left
    out of their entry's mean and reported in the notes.

    Raises:
        BaselineFailureError: the baseline is invalid or its evaluation failed.
        ZeroBaselineError: a measured routine is exactly zero at baseline.
    """
    routines = tuple(routines)
    baseline = _resolve_baseline(space, settings)
    base = objective.evaluate(baseline, search_id=SENSITIVITY_SEARCH_ID, index=0)
    if not base.ok:
        raise BaselineFailureError(
            f"Baseline evaluation ended with status {base.status.value}: {base.message}"
        )
    try:
        base_metrics = {r: base.metric(r) for r in routines}
    except KeyError as e:
        raise BaselineFailureError(f"Baseline did not report {e}") from e
    zero = [r for r, v in base_metrics.items() if v == 0]
    if zero:
        raise ZeroBaselineError(
            f"Metric of {', '.join(zero)} is zero at baseline; "
            "relative variability is undefined"
        )
    logger.info(
        "Sensitivity analysis of %d parameters on %s", len(space.parameters), routines
    )

    notes: List[str] = []
    tasks: List[Tuple[str, Configuration]] = []
    for j, spec in enumerate(space.parameters):
        rng = np.random.default_rng([settings.seed, j])
        for value in variation_values(spec, baseline[spec.name], settings, rng):
            config = baseline.updated({spec.name: value})
            if space.validate(config):
                tasks.append((spec.name, config))
            else:
                notes.append(f"{spec.name}={value} violates the search space; skipped")

    def evaluate(item: Tuple[int, Tuple[str, Configuration]]) -> EvaluationRecord:
        index, (_, config) = item
        return objective.evaluate(
            config, search_id=SENSITIVITY_SEARCH_ID, index=index + 1
        )

    records = run_in_queue(evaluate, list(enumerate(tasks)), settings.parallel)

    observed: Dict[str, Dict[str, List[float]]] = {
        p: {r: [] for r in routines} for p in space.parameter_names
    }
    for (name, _), record in zip(tasks, records):
        if not record.ok:
            notes.append(
                f"{name} variation #{record.index} ended with {record.status.value}; "
                "left out"
            )
            continue
        for r in routines:
            observed[name][r].append(record.metric(r))

    matrix = np.full((len(routines), len(space.parameters)), math.nan)
    for j, name in enumerate(space.parameter_names):
        for i, r in enumerate(routines):
            matrix[i, j] = relative_variability(base_metrics[r], observed[name][r])
        if routines and not observed[name][routines[0]]:
            notes.append(f"Every variation of {name} failed; its influence is unknown")
    logger.info("Sensitivity analysis used %d evaluations", 1 + len(records))
    return InfluenceMatrix(
        routines=routines,
        parameters=tuple(space.parameter_names),
        variability=matrix,
        baseline_record=base,
        sample_records=tuple(records),
        notes=tuple(notes),
    )
