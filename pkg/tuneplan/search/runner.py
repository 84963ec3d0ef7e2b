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

"""Bayesian-optimization and random searches over the parameters of a SearchDef.

A search tunes `search.parameters`; every other parameter is held at the
value given by `base` (defaults, then the values fixed by the dimension cap).
All randomness of evaluation i derives from (seed, i), so a search resumed
from its first k records continues exactly as the uninterrupted run would.
"""

import logging
import time
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from tuneplan.enums import Status
from tuneplan.errors import AllFailuresError
from tuneplan.execution import run_in_queue
from tuneplan.objectives import EvaluationRecord, Objective
from tuneplan.planner import SearchDef
from tuneplan.search.state import SearchBudget, SearchState, search_value
from tuneplan.space import Configuration, SearchSpace, Value
from tuneplan.surrogate import (
    SpaceEncoder,
    SurrogateSettings,
    expected_improvement,
    fit,
)

logger = logging.getLogger(__name__)

HistorySink = Callable[[EvaluationRecord], None]

# streams of the per-evaluation seed sequence
_SAMPLE_STREAM = 0
_POOL_STREAM = 1
_FIT_STREAM = 2


def fixed_assignments(
    search: SearchDef, space: SearchSpace, base: Optional[Mapping[str, Value]] = None
) -> Dict[str, Value]:
    """Values of the parameters the search does not tune."""
    values = space.subspace_defaults(search.parameters)
    values.update({k: v for k, v in search.dropped.items() if k in values})
    for name, value in (base or {}).items():
        if name in values and name not in search.dropped:
            values[name] = value
    return values


def _draw(
    space: SearchSpace, seed: int, index: int, fixed: Mapping[str, Value]
) -> Configuration:
    return space.sample_random(1, [seed, index, _SAMPLE_STREAM], fixed=fixed)[0]


class _Driver:
    """Evaluates configurations for one search and keeps its state."""

    def __init__(
        self,
        search: SearchDef,
        space: SearchSpace,
        objective: Objective,
        seed: int,
        resume_from: Sequence[EvaluationRecord],
        history_sink: Optional[HistorySink],
    ):
        self.search = search
        self.space = space
        self.objective = objective
        self.sink = history_sink
        self.state = SearchState(
            search_id=search.id,
            targets=search.targets,
            history=list(resume_from),
            rng_seed=seed,
        )
        if resume_from:
            logger.info(
                "Search %s resumes after %d recorded evaluations",
                search.id,
                len(resume_from),
            )

    def evaluate(self, config: Configuration, index: int) -> EvaluationRecord:
        record = self.objective.evaluate(config, search_id=self.search.id, index=index)
        if record.search_id != self.search.id or record.index != index:
            record = record.relabeled(self.search.id, index)
        if record.ok:
            try:
                search_value(record, self.search.targets)
            except KeyError as e:
                record = EvaluationRecord.failure(
                    config,
                    Status.CRASH,
                    f"objective reported no metric for {e.args[0]}",
                    wall_seconds=record.wall_seconds,
                    search_id=self.search.id,
                    index=index,
                )
        logger.debug(
            "%s[%d] %s -> %s %g",
            self.search.id,
            index,
            config.restricted(self.search.parameters),
            record.status.value,
            search_value(record, self.search.targets),
        )
        if self.sink is not None:
            self.sink(record)
        return record

    def require_success(self) -> None:
        if not self.state.ok_records:
            raise AllFailuresError(
                f"Every one of the {len(self.state.history)} evaluations of "
                f"search {self.search.id} failed"
            )


def run_random(
    search: SearchDef,
    space: SearchSpace,
    objective: Objective,
    max_evaluations: Optional[int] = None,
    seed: int = 0,
    *,
    resume_from: Sequence[EvaluationRecord] = (),
    base: Optional[Mapping[str, Value]] = None,
    history_sink: Optional[HistorySink] = None,
    parallel: int = 1,
) -> SearchState:
    """Evaluates `max_evaluations` valid random configurations.

    Up to `parallel` evaluations run at once; the history keeps index order.

    Raises:
        AllFailuresError: no evaluation succeeded.
    """
    max_evaluations = max_evaluations or search.budget
    start = time.monotonic()
    done = {r.index: r for r in resume_from}
    driver = _Driver(
        search, space, objective, seed, [done[i] for i in sorted(done)], history_sink
    )
    fixed = fixed_assignments(search, space, base)
    missing = [i for i in range(max_evaluations) if i not in done]
    todo = [(i, _draw(space, seed, i, fixed)) for i in missing]
    records = run_in_queue(
        lambda item: driver.evaluate(item[1], item[0]), todo, num_workers=parallel
    )
    driver.state.history = sorted(driver.state.history + records, key=lambda r: r.index)
    driver.state.elapsed_seconds = time.monotonic() - start
    driver.require_success()
    logger.info(
        "Random search %s finished: %d evaluations, best %g",
        search.id,
        len(driver.state.history),
        driver.state.best_value,
    )
    return driver.state


def _contiguous(records: Sequence[EvaluationRecord]) -> List[EvaluationRecord]:
    """Records with indices 0, 1, ... up to the first gap."""
    by_index = {r.index: r for r in records}
    out: List[EvaluationRecord] = []
    while len(out) in by_index:
        out.append(by_index[len(out)])
    return out


def _training_data(
    records: Sequence[EvaluationRecord],
    encoder: SpaceEncoder,
    targets: Sequence[str],
):
    usable = [
        r
        for r in records
        if r.ok and all(name in r.config for name in encoder.parameters)
    ]
    x = encoder.encode_many(r.config for r in usable)
    y = np.array([search_value(r, targets) for r in usable], dtype=float)
    finite = np.isfinite(y)
    return x[finite], y[finite]


def run_bo(
    search: SearchDef,
    space: SearchSpace,
    objective: Objective,
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
    *,
    resume_from: Sequence[EvaluationRecord] = (),
    base: Optional[Mapping[str, Value]] = None,
    prior: Sequence[EvaluationRecord] = (),
    history_sink: Optional[HistorySink] = None,
    surrogate: Optional[SurrogateSettings] = None,
) -> SearchState:
    """Bayesian optimization with a GP surrogate and expected improvement.

    After `init_samples` random evaluations, each iteration fits the GP to
    the successful evaluations (and the `prior` records of a warm start),
    scores a pool of random valid candidates by EI and evaluates the best one
    not evaluated before. Evaluations run one at a time. Failed evaluations
    stay in the history but never reach the surrogate.

    Raises:
        AllFailuresError: no evaluation succeeded in the initial phase.
        SamplingExhaustedError: the space is too constrained to sample.
    """
    budget = budget or SearchBudget.for_search(search)
    start = time.monotonic()
    driver = _Driver(
        search, space, objective, seed, _contiguous(resume_from), history_sink
    )
    state = driver.state
    fixed = fixed_assignments(search, space, base)
    encoder = SpaceEncoder(space, search.parameters)
    prior = [r for r in prior if r.ok]

    init_end = min(budget.init_samples, budget.max_evaluations)
    while len(state.history) < init_end:
        i = len(state.history)
        state.history.append(driver.evaluate(_draw(space, seed, i, fixed), i))
    driver.require_success()

    while len(state.history) < budget.max_evaluations:
        i = len(state.history)
        config = _next_candidate(
            state, space, encoder, fixed, prior, budget, seed, i, surrogate
        )
        state.history.append(driver.evaluate(config, i))

    state.elapsed_seconds = time.monotonic() - start
    logger.info(
        "Search %s finished: %d evaluations, best %g",
        search.id,
        len(state.history),
        state.best_value,
    )
    return state


def _next_candidate(
    state: SearchState,
    space: SearchSpace,
    encoder: SpaceEncoder,
    fixed: Mapping[str, Value],
    prior: Sequence[EvaluationRecord],
    budget: SearchBudget,
    seed: int,
    index: int,
    surrogate: Optional[SurrogateSettings],
) -> Configuration:
    x, y = _training_data(list(prior) + state.ok_records, encoder, state.targets)
    if len(y) < 2:
        state.notes.append(f"evaluation {index} drawn at random: too little data")
        return _draw(space, seed, index, fixed)
    model = fit(x, y, seed=[seed, index, _FIT_STREAM], settings=surrogate)

    pool = space.sample_random(
        budget.candidate_pool, [seed, index, _POOL_STREAM], fixed=fixed
    )
    seen = {r.config.restricted(encoder.parameters) for r in state.history}
    fresh = [c for c in pool if c.restricted(encoder.parameters) not in seen]
    if not fresh:
        state.notes.append(f"evaluation {index} repeats a configuration")
        fresh = pool
    scores = expected_improvement(
        model, encoder.encode_many(fresh), model.standardize(float(np.min(y)))
    )
    return fresh[int(np.argmax(scores))]
