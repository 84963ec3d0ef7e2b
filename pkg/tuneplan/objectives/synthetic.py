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

"""The 20-variable synthetic benchmark functions.

The objective is the sum of four group values, each the log of the absolute
value of a group formula:

    G1: sum (x_i - x_{i+1})^2 over i=0..3 plus A_0..A_4
    G2: sum (x_k - x_{k+1})^4 over k=5..8 plus A_5..A_9
    G3: one of five case formulas over x_10..x_19
    G4: sum 1/x_v over v=15..19, plus noise

with A_i = 10 cos(2 pi (x_i - 1)) + noise. Group 3 is where the cases differ:
the larger the case number, the stronger the pull of the Group 4 variables on
the Group 3 value.
"""

import time
import zlib
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np

from tuneplan.enums import Status
from tuneplan.errors import MissingParameterError, SingularityError
from tuneplan.objectives.base import Objective
from tuneplan.objectives.records import EvaluationRecord
from tuneplan.space import SYNTHETIC_GROUPS, Configuration

LOG_FLOOR = 1e-12
SINGULARITY_THRESHOLD = 1e-6
DEFAULT_NOISE_STDDEV = 0.1

NUM_VARIABLES = 20
_G3 = slice(10, 15)
_G4 = slice(15, 20)
# one draw per A_i term, then one each for the Group 3 and Group 4 tails
_NUM_DRAWS = 12


@dataclass(frozen=True)
class SyntheticCase:
    """Selects the Group 3 formula and the noise of a synthetic objective.

    Args:
        case_id: 1 (very low Group 4 influence) to 5 (extremely high).
        noise_stddev: standard deviation of every noise term; 0 disables
            noise.
        rng_seed: seed of the noise; equal seeds replay equal noise.
    """

    case_id: int
    noise_stddev: float = DEFAULT_NOISE_STDDEV
    rng_seed: int = 0

    def __post_init__(self):
        if self.case_id not in (1, 2, 3, 4, 5):
            raise ValueError(f"Synthetic case must be 1..5, got {self.case_id}")
        if self.noise_stddev < 0:
            raise ValueError("noise_stddev must be non-negative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")

    def noise(self, search_id: str = "", index: int = 0) -> np.ndarray:
        """The noise terms of one evaluation.

        They depend only on the seed, the search and the position in it, so
        evaluations can run in any order or be replayed after a restart.
        """
        if self.noise_stddev == 0:
            return np.zeros(_NUM_DRAWS)
        rng = np.random.default_rng(
            [self.rng_seed, zlib.crc32(search_id.encode()), index]
        )
        return rng.normal(0.0, self.noise_stddev, size=_NUM_DRAWS)


def _variables(config: Mapping[str, float]) -> np.ndarray:
    try:
        return np.array([float(config[f"x_{i}"]) for i in range(NUM_VARIABLES)])
    except KeyError as e:
        raise MissingParameterError(f"Synthetic objective needs {e.args[0]}") from e


def _group3(case_id: int, x: np.ndarray, eps: float) -> float:
    u, v = x[_G3], x[_G4]
    if case_id == 1:
        return float(np.sum(u) + np.sum(np.cos(2 * np.pi * v)) + eps)
    if case_id == 2:
        return float(np.sum(u**2) + np.sum(v) + eps)
    if case_id == 3:
        return float(np.sum(u**2) + np.sum(v**2) + eps)
    # cases 4 and 5 pair x_10 with x_15, x_11 with x_16, and so on
    power = 4 if case_id == 4 else 8
    return float(np.sum((u * v**power) ** 2) + eps)


def group_values(
    case_id: int, config: Mapping[str, float], noise: np.ndarray
) -> Dict[str, float]:
    """The four log-transformed group values.

    Raises:
        SingularityError: if a Group 4 variable is within 1e-6 of zero.
    """
    x = _variables(config)
    near_zero = np.abs(x[_G4]) < SINGULARITY_THRESHOLD
    if near_zero.any():
        bad = [f"x_{15 + i}" for i in np.flatnonzero(near_zero)]
        raise SingularityError(f"1/x is singular at {', '.join(bad)}")
    a_terms = 10.0 * np.cos(2 * np.pi * (x[:10] - 1.0)) + noise[:10]
    raw = {
        "G1": np.sum(np.diff(x[0:5]) ** 2) + np.sum(a_terms[0:5]),
        "G2": np.sum(np.diff(x[5:10]) ** 4) + np.sum(a_terms[5:10]),
        "G3": _group3(case_id, x, noise[10]),
        "G4": np.sum(1.0 / x[_G4]) + noise[11],
    }
    return {g: float(np.log(abs(value) + LOG_FLOOR)) for g, value in raw.items()}


def eval_synthetic(
    case: SyntheticCase,
    config: Mapping[str, float],
    *,
    search_id: str = "",
    index: int = 0,
) -> EvaluationRecord:
    """Evaluates a synthetic case; singular configurations come back invalid."""
    config = Configuration(config)
    start = time.perf_counter()
    try:
        metrics = group_values(case.case_id, config, case.noise(search_id, index))
    except SingularityError as e:
        return EvaluationRecord.failure(
            config, Status.INVALID, str(e), search_id=search_id, index=index
        )
    return EvaluationRecord(
        config=config,
        routine_metrics=metrics,
        total=sum(metrics.values()),
        wall_seconds=time.perf_counter() - start,
        search_id=search_id,
        index=index,
    )


def synthetic_baseline() -> Configuration:
    """Sensitivity baseline of the synthetic campaigns.

    Group 3 variables sit at 5, all others at 1.
    """
    values = {f"x_{i}": 1.0 for i in range(NUM_VARIABLES)}
    values.update({f"x_{i}": 5.0 for i in range(10, 15)})
    return Configuration(values)


class SyntheticObjective(Objective):
    def __init__(self, case: SyntheticCase):
        self.case = case

    @property
    def routines(self) -> Tuple[str, ...]:
        return SYNTHETIC_GROUPS

    def evaluate(
        self, config: Configuration, *, search_id: str = "", index: int = 0
    ) -> EvaluationRecord:
        return eval_synthetic(self.case, config, search_id=search_id, index=index)
