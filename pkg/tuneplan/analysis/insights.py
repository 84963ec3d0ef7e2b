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

"""Statistical insights drawn from evaluated configurations.

Pearson correlations expose linear relationships between parameters and a
target metric; a random forest ranks parameters by the variance reduction
their splits achieve. Both hint at which parameters deserve a search of
their own and which can be left at their defaults.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from tuneplan.errors import InsufficientDataError
from tuneplan.objectives import TOTAL, EvaluationRecord
from tuneplan.space import SearchSpace

logger = logging.getLogger(__name__)

MIN_PEARSON_RECORDS = 3
MIN_FOREST_RECORDS = 10
# observations wanted per parameter
ONE_IN_TEN = 10

FOREST_TREES = 100
FOREST_DEPTH = 8


def _ok_records(
    records: Sequence[EvaluationRecord], target: str
) -> List[EvaluationRecord]:
    return [
        r
        for r in records
        if r.ok and (target in r.routine_metrics or target in ("", TOTAL))
    ]


def _parameter_names(
    records: Sequence[EvaluationRecord], parameters: Optional[Sequence[str]]
) -> List[str]:
    if parameters is not None:
        return list(parameters)
    return list(records[0].config) if records else []


def _is_numeric_column(records: Sequence[EvaluationRecord], name: str) -> bool:
    return all(
        isinstance(r.config[name], (int, float))
        and not isinstance(r.config[name], bool)
        for r in records
    )


@dataclass(frozen=True)
class Correlations:
    """Pairwise Pearson coefficients over parameters and the target metric.

    The target is the last name. Columns that never change get coefficient 0
    everywhere, their diagonal included.
    """

    names: Tuple[str, ...]
    matrix: np.ndarray
    notes: Tuple[str, ...] = ()

    def __getitem__(self, pair: Tuple[str, str]) -> float:
        a, b = pair
        return float(self.matrix[self.names.index(a), self.names.index(b)])

    @property
    def target(self) -> str:
        return self.names[-1]

    def with_target(self) -> Dict[str, float]:
        """Correlation of every parameter with the target."""
        return {n: self[n, self.target] for n in self.names[:-1]}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "names": list(self.names),
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "notes": list(self.notes),
        }


def pearson_matrix(
    records: Sequence[EvaluationRecord],
    target: str,
    parameters: Optional[Sequence[str]] = None,
) -> Correlations:
    """Sample Pearson coefficients between parameters and the target metric.

    Categorical parameters are left out. Failed records are ignored.

    Raises:
        InsufficientDataError: fewer than 3 ok records.
    """
    ok = _ok_records(records, target)
    if len(ok) < MIN_PEARSON_RECORDS:
        raise InsufficientDataError(
            f"Pearson correlation needs {MIN_PEARSON_RECORDS} ok records, got {len(ok)}"
        )
    notes = []
    names = []
    for name in _parameter_names(ok, parameters):
        if _is_numeric_column(ok, name):
            names.append(name)
        else:
            notes.append(f"{name} is categorical; left out of the correlations")
    columns = [[float(r.config[n]) for r in ok] for n in names]
    columns.append([r.metric(target) for r in ok])
    names.append(target or TOTAL)
    data = np.array(columns, dtype=float)

    spread = data.std(axis=1)
    live = spread > 0
    for name, alive in zip(names, live):
        if not alive:
            notes.append(
                f"{name} is constant (degenerate column); coefficient set to 0"
            )
    matrix = np.zeros((len(names), len(names)))
    if live.sum() == 1:
        matrix[np.ix_(live, live)] = 1.0
    elif live.any():
        matrix[np.ix_(live, live)] = np.clip(np.corrcoef(data[live]), -1.0, 1.0)
    return Correlations(names=tuple(names), matrix=matrix, notes=tuple(notes))


def _design_matrix(
    records: Sequence[EvaluationRecord], names: Sequence[str]
) -> np.ndarray:
    """Numeric columns as-is, labels as their index of first appearance."""
    columns = []
    for name in names:
        raw = [r.config[name] for r in records]
        if _is_numeric_column(records, name):
            columns.append([float(v) for v in raw])
        else:
            codes: Dict[Any, int] = {}
            columns.append([float(codes.setdefault(v, len(codes))) for v in raw])
    return np.array(columns, dtype=float).T


def _forest_importance(
    x: np.ndarray, y: np.ndarray, seed: int
) -> Tuple[np.ndarray, bool]:
    """Normalized variance-reduction importance and whether it was degenerate."""
    d = x.shape[1]
    if np.ptp(y) == 0:
        return np.full(d, 1.0 / d), True
    forest = RandomForestRegressor(
        n_estimators=FOREST_TREES,
        max_depth=FOREST_DEPTH,
        max_features=math.ceil(math.sqrt(d)),
        bootstrap=True,
        random_state=seed,
    )
    forest.fit(x, y)
    importance = np.nan_to_num(np.asarray(forest.feature_importances_, dtype=float))
    total = importance.sum()
    if total <= 0:
        return np.full(d, 1.0 / d), True
    return importance / total, False


def feature_importance(
    records: Sequence[EvaluationRecord],
    target: str,
    seed: int = 0,
    parameters: Optional[Sequence[str]] = None,
) -> Dict[str, float]:
    """Random-forest importance of every parameter for the target metric.

    Importances are non-negative and sum to one. A target that never changes
    leaves nothing to explain; every parameter then gets the same share.

    Raises:
        InsufficientDataError: fewer than 10 ok records.
    """
    ok = _ok_records(records, target)
    if len(ok) < MIN_FOREST_RECORDS:
        raise InsufficientDataError(
            f"Feature importance needs {MIN_FOREST_RECORDS} ok records, got {len(ok)}"
        )
    names = _parameter_names(ok, parameters)
    y = np.array([r.metric(target) for r in ok], dtype=float)
    importance, degenerate = _forest_importance(_design_matrix(ok, names), y, seed)
    if degenerate:
        logger.warning("Target %s is constant; importance is uniform", target)
    if len(ok) < ONE_IN_TEN * len(names):
        logger.warning(
            "%d records for %d parameters: fewer than %d per parameter",
            len(ok),
            len(names),
            ONE_IN_TEN,
        )
    return {n: float(v) for n, v in zip(names, importance)}


@dataclass(frozen=True)
class InsightReport:
    target: str
    pearson: Correlations
    importance: Mapping[str, float]
    sample_count: int
    one_in_ten_satisfied: bool
    notes: Tuple[str, ...] = field(default=())

    def ranked_importance(self) -> List[Tuple[str, float]]:
        return sorted(self.importance.items(), key=lambda kv: -kv[1])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "sample_count": self.sample_count,
            "one_in_ten_satisfied": self.one_in_ten_satisfied,
            "importance": dict(self.importance),
            "pearson": self.pearson.to_dict(),
            "notes": list(self.notes),
        }

    def format_report(self, top_k: int = 10) -> str:
        lines = [
            f"Insights for {self.target or 'total'} from {self.sample_count} records",
        ]
        if not self.one_in_ten_satisfied:
            lines.append(
                f"WARNING: fewer than {ONE_IN_TEN} records per parameter; "
                "treat the rankings as rough"
            )
        lines.append("")
        lines.append("Feature importance:")
        for name, value in self.ranked_importance()[:top_k]:
            lines.append(f"  {name:<16} {value:.4f}")
        lines.append("")
        lines.append(f"Pearson correlation with {self.pearson.target}:")
        by_strength = sorted(
            self.pearson.with_target().items(), key=lambda kv: -abs(kv[1])
        )
        for name, value in by_strength[:top_k]:
            lines.append(f"  {name:<16} {value:+.4f}")
        if self.notes:
            lines.append("")
            lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def summarize_insights(
    records: Sequence[EvaluationRecord],
    target: str,
    seed: int = 0,
    space: Optional[SearchSpace] = None,
) -> InsightReport:
    """Pearson correlations, forest importance and the one-in-ten check."""
    parameters = space.parameter_names if space is not None else None
    ok = _ok_records(records, target)
    names = _parameter_names(ok, parameters)
    pearson = pearson_matrix(ok, target, parameters)
    importance = feature_importance(ok, target, seed, parameters)
    notes = list(pearson.notes)
    if np.ptp([r.metric(target) for r in ok]) == 0:
        notes.append("Importance is uniform: the target never changed (degenerate)")
    satisfied = len(ok) >= ONE_IN_TEN * len(names)
    if not satisfied:
        notes.append(
            f"One-in-ten rule not met: {len(ok)} records for {len(names)} parameters"
        )
    skipped = len(records) - len(ok)
    if skipped:
        notes.append(f"{skipped} failed records ignored")
    return InsightReport(
        target=target,
        pearson=pearson,
        importance=importance,
        sample_count=len(ok),
        one_in_ten_satisfied=satisfied,
        notes=tuple(notes),
    )
