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

"""Runs search plans end to end and compares search strategies."""

import dataclasses
import logging
import math
import statistics
import time
import zlib
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from tuneplan.analysis import InfluenceMatrix, run_sensitivity
from tuneplan.enums import Strategy
from tuneplan.errors import (
    SEARCH_FAILURES,
    AllFailuresError,
    SchemaMismatchError,
    StageFailureError,
)
from tuneplan.execution import run_in_queue
from tuneplan.objectives import PENALTY, EvaluationRecord, Objective
from tuneplan.orchestrator.campaign import CampaignConfig
from tuneplan.orchestrator.db import EvaluationDb, ScopedDb
from tuneplan.planner import PlannerSettings, SearchDef, SearchPlan, emit_plan
from tuneplan.search import SearchBudget, SearchState, run_bo, run_random
from tuneplan.space import Configuration, SearchSpace, canonical_value

logger = logging.getLogger(__name__)

FINAL_SEARCH_ID = "final"


def search_seed(campaign_seed: int, search_id: str) -> int:
    return campaign_seed * 1_000_003 + zlib.crc32(search_id.encode())


@dataclasses.dataclass(frozen=True)
class CampaignReport:
    """Outcome of executing a plan.

    Args:
        final_config: the combined best configuration.
        final_record: its single evaluation.
        stages: the searches of every stage, in plan order.
        stage_seconds: wall time of each stage (its slowest search).
        notes: anything worth telling the user.
    """

    final_config: Configuration
    final_record: EvaluationRecord
    stages: Tuple[Tuple[SearchState, ...], ...]
    stage_seconds: Tuple[float, ...]
    notes: Tuple[str, ...] = ()

    @property
    def total_seconds(self) -> float:
        return float(sum(self.stage_seconds))

    @property
    def evaluations(self) -> int:
        return sum(len(s.history) for stage in self.stages for s in stage)

    @property
    def minimum(self) -> float:
        return self.final_record.total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "final_assignments": self.final_config.to_dict(),
            "final_evaluation": self.final_record.to_dict(),
            "stages": [
                {"seconds": seconds, "searches": [s.to_dict() for s in stage]}
                for stage, seconds in zip(self.stages, self.stage_seconds)
            ],
            "evaluations": self.evaluations,
            "total_seconds": self.total_seconds,
            "notes": list(self.notes),
        }

    def format_report(self, trace_points: int = 10) -> str:
        lines = []
        for i, (stage, seconds) in enumerate(zip(self.stages, self.stage_seconds), 1):
            lines.append(f"Stage {i} ({seconds:.1f} s)")
            for s in stage:
                target = "+".join(s.targets) or "total"
                lines.append(
                    f"  {s.search_id}: {len(s.history)} evaluations against {target}, "
                    f"best {_number(s.best_value)}"
                )
                lines.append(f"    best so far: {_trace(s.trace(), trace_points)}")
        lines.append("Final configuration:")
        for name, value in self.final_config.items():
            lines.append(f"  {name} = {canonical_value(value)}")
        lines.append(
            f"Final objective: {_number(self.final_record.total)} "
            f"({self.final_record.status.value})"
        )
        lines.append(
            f"{self.evaluations} evaluations, {self.total_seconds:.1f} s search time"
        )
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _number(value: float) -> str:
    if value >= PENALTY or math.isinf(value):
        return "none"
    return f"{value:.6g}"


def _trace(values: Sequence[float], points: int) -> str:
    if len(values) > points:
        step = (len(values) - 1) / (points - 1)
        picked = sorted({round(i * step) for i in range(points)})
    else:
        picked = list(range(len(values)))
    return ", ".join(f"{i + 1}:{_number(values[i])}" for i in picked)


@dataclasses.dataclass(frozen=True)
class WarmStart:
    """Prior evaluations handed to each search of a plan."""

    priors: Mapping[str, Tuple[EvaluationRecord, ...]]
    notes: Tuple[str, ...] = ()


def warm_start(
    space: SearchSpace, plan: SearchPlan, records: Sequence[EvaluationRecord]
) -> WarmStart:
    """Selects the prior records usable by each search of the plan.

    Failed records are ignored. Records invalid in the current space, or
    lacking a metric the search minimizes, are skipped with a note.

    Raises:
        SchemaMismatchError: a record assigns other parameters than the space.
    """
    names = set(space.parameter_names)
    usable = []
    invalid = 0
    for record in records:
        if not record.ok:
            continue
        if set(record.config) != names:
            raise SchemaMismatchError(
                f"Prior record {record.search_id}[{record.index}] assigns "
                f"{sorted(set(record.config) ^ names)} differently from the space"
            )
        if space.validate(record.config):
            usable.append(record)
        else:
            invalid += 1
    notes = []
    if invalid:
        notes.append(f"{invalid} prior records violate the current space; skipped")
    priors = {}
    for search in plan.searches():
        chosen = tuple(
            r for r in usable if all(t in r.routine_metrics for t in search.targets)
        )
        if len(chosen) < len(usable):
            notes.append(
                f"{len(usable) - len(chosen)} prior records lack metrics of "
                f"{search.id}; skipped"
            )
        priors[search.id] = chosen
    logger.info("Warm start with %d usable prior records", len(usable))
    return WarmStart(priors=priors, notes=tuple(notes))


def execute_plan(
    plan: SearchPlan,
    campaign: CampaignConfig,
    objective: Optional[Objective] = None,
    *,
    db: Optional[Union[EvaluationDb, ScopedDb]] = None,
    prior: Optional[WarmStart] = None,
    random_search: bool = False,
) -> CampaignReport:
    """Runs the stages of a plan in order, the searches of a stage in parallel.

    Searches start from the defaults, overridden by the best values of
    earlier stages. A parameter tuned by several searches takes the value of
    the search owning it. Searches found in `db` continue where they
    stopped; completed ones are not run again.

    Raises:
        StageFailureError: a search had no successful evaluation.
    """
    space = campaign.space
    objective = objective or campaign.build_objective()
    priors = prior.priors if prior is not None else {}
    notes: List[str] = list(prior.notes) if prior is not None else []
    base: Dict[str, Any] = dict(space.defaults())
    for search in plan.searches():
        for name, value in search.dropped.items():
            if plan.authority(name) is None:
                base[name] = value
    stages: List[Tuple[SearchState, ...]] = []
    stage_seconds: List[float] = []

    for number, stage in enumerate(plan.stages, start=1):
        logger.info(
            "Stage %d: %s", number, ", ".join(f"{s.id} ({s.budget})" for s in stage)
        )
        stage_base = dict(base)

        def run_one(search: SearchDef) -> SearchState:
            common = dict(
                resume_from=db.records_for(search.id) if db is not None else (),
                base=stage_base,
                history_sink=db.append if db is not None else None,
            )
            seed = search_seed(campaign.seed, search.id)
            if random_search:
                return run_random(
                    search,
                    space,
                    objective,
                    search.budget,
                    seed,
                    parallel=campaign.parallel,
                    **common,
                )
            return run_bo(
                search,
                space,
                objective,
                SearchBudget.for_search(search, campaign.candidate_pool),
                seed,
                prior=priors.get(search.id, ()),
                surrogate=campaign.surrogate,
                **common,
            )

        try:
            states = run_in_queue(run_one, stage, num_workers=campaign.parallel)
        except AllFailuresError as e:
            raise StageFailureError(f"Stage {number} failed: {e}") from e
        stages.append(tuple(states))
        stage_seconds.append(max(s.elapsed_seconds for s in states))
        for search, state in zip(stage, states):
            best = state.best_config
            for name in search.parameters:
                if plan.authority(name) == search.id:
                    base[name] = best[name]

    final = Configuration(base)
    if not space.validate(final):
        fallback = min(
            (r for stage in stages for s in stage for r in s.ok_records),
            key=lambda r: r.total,
        )
        notes.append(
            "the combined best values violate the space constraints; "
            f"using the best evaluated configuration ({fallback.search_id})"
        )
        final = fallback.config
    record = objective.evaluate(final, search_id=FINAL_SEARCH_ID, index=0)
    if not record.ok:
        notes.append(f"the final configuration failed: {record.message}")
    logger.info("Plan finished; final objective %s", _number(record.total))
    return CampaignReport(
        final_config=final,
        final_record=record,
        stages=tuple(stages),
        stage_seconds=tuple(stage_seconds),
        notes=tuple(notes),
    )


def resume(
    plan: SearchPlan,
    campaign: CampaignConfig,
    db_path,
    objective: Optional[Objective] = None,
) -> CampaignReport:
    """Continues an interrupted campaign from its evaluation database.

    Raises:
        ConfigMismatchError: the database belongs to another campaign digest.
    """
    db = EvaluationDb(db_path, campaign.digest)
    logger.info("Resuming from %s with %d recorded evaluations", db_path, len(db))
    return execute_plan(plan, campaign, objective, db=db)


def joint_plan(
    space: SearchSpace, settings: PlannerSettings, search_id: str = "joint"
) -> SearchPlan:
    """One search over every parameter, against the total."""
    dims = len(space.parameters)
    settings = dataclasses.replace(settings, dim_cap=max(settings.dim_cap, dims))
    search = SearchDef(
        search_id,
        tuple(space.parameter_names),
        budget=settings.budget(dims),
        init_samples=settings.init_samples,
    )
    return SearchPlan(stages=((search,),), settings=settings)


def independent_plan(space: SearchSpace, settings: PlannerSettings) -> SearchPlan:
    """One search per routine over the parameters it owns, all in one stage.

    Measured routines are searched against their own metric, the others
    against the total.
    """
    searches = []
    for routine in space.routines:
        owned = space.owned_by(routine.name)
        if not owned:
            continue
        searches.append(
            SearchDef(
                routine.name,
                tuple(owned),
                targets=(routine.name,) if routine.measured else (),
                budget=settings.budget(len(owned)),
                init_samples=settings.init_samples,
            )
        )
    widest = max(s.dims for s in searches)
    settings = dataclasses.replace(settings, dim_cap=max(settings.dim_cap, widest))
    return SearchPlan(stages=(tuple(searches),), settings=settings)


@dataclasses.dataclass(frozen=True)
class StrategyResult:
    strategy: Strategy
    minima: Tuple[float, ...] = ()
    seconds: Tuple[float, ...] = ()
    evaluations: Tuple[int, ...] = ()
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def mean_minimum(self) -> float:
        return statistics.fmean(self.minima) if self.minima else math.nan

    @property
    def mean_seconds(self) -> float:
        return statistics.fmean(self.seconds) if self.seconds else math.nan

    @property
    def mean_evaluations(self) -> float:
        return statistics.fmean(self.evaluations) if self.evaluations else math.nan

    def to_dict(self) -> Dict[str, Any]:
        return {
            "strategy": self.strategy.value,
            "minima": list(self.minima),
            "seconds": list(self.seconds),
            "evaluations": list(self.evaluations),
            "mean_minimum": None if self.failed else self.mean_minimum,
            "mean_seconds": None if self.failed else self.mean_seconds,
            "mean_evaluations": None if self.failed else self.mean_evaluations,
            "error": self.error,
        }


@dataclasses.dataclass(frozen=True)
class StrategyComparison:
    """Minima and search time per strategy, averaged over repeats."""

    campaign: str
    repeats: int
    results: Tuple[StrategyResult, ...]
    plan: Optional[SearchPlan] = None

    def result(self, strategy: Strategy) -> StrategyResult:
        for r in self.results:
            if r.strategy == strategy:
                return r
        raise KeyError(strategy)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "campaign": self.campaign,
            "repeats": self.repeats,
            "strategies": [r.to_dict() for r in self.results],
        }
        if self.plan is not None:
            out["planned"] = self.plan.to_dict()
        return out

    def format_table(self) -> str:
        header = ("Strategy", "Minimum", "Time (s)", "Evaluations")
        rows = []
        for r in self.results:
            if r.failed:
                rows.append((r.strategy.value, "failed", "-", "-"))
                continue
            rows.append(
                (
                    r.strategy.value,
                    f"{r.mean_minimum:.4g}",
                    f"{r.mean_seconds:.2f}",
                    f"{r.mean_evaluations:.0f}",
                )
            )
        widths = [max(len(row[c]) for row in rows + [header]) for c in range(4)]
        lines = [
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            for row in [header] + rows
        ]
        lines.insert(1, "-" * len(lines[0]))
        lines.append(f"Means over {self.repeats} repeat(s) of campaign {self.campaign}")
        lines.extend(f"{r.strategy.value}: {r.error}" for r in self.results if r.failed)
        return "\n".join(lines)


def strategy_plans(
    space: SearchSpace, matrix: InfluenceMatrix, settings: PlannerSettings
) -> Dict[Strategy, SearchPlan]:
    """Budget-matched plans of the four strategies.

    Random search gets the evaluations of the fully-joint search.
    """
    return {
        Strategy.RANDOM: joint_plan(space, settings, search_id="random"),
        Strategy.FULLY_JOINT: joint_plan(space, settings),
        Strategy.PLANNED: emit_plan(space, matrix, settings),
        Strategy.FULLY_INDEPENDENT: independent_plan(space, settings),
    }


def compare_strategies(
    campaign: CampaignConfig,
    repeats: int = 5,
    matrix: Optional[InfluenceMatrix] = None,
    objective: Optional[Objective] = None,
    strategies: Sequence[Strategy] = tuple(Strategy),
    db: Optional[EvaluationDb] = None,
) -> StrategyComparison:
    """Runs every strategy `repeats` times with seeds campaign.seed + r.

    The influence matrix comes from the argument, the campaign, or a fresh
    sensitivity analysis, in that order; its evaluations are not counted.
    A failing strategy is reported as failed; the others are still compared.
    With a `db`, repeat r of a strategy stores its searches under
    "<strategy>/r<r>/", so an interrupted comparison continues where it
    stopped.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    objective = objective or campaign.build_objective()
    matrix = matrix or campaign.load_influence()
    if matrix is None:
        settings = dataclasses.replace(campaign.sensitivity, parallel=campaign.parallel)
        matrix = run_sensitivity(campaign.space, campaign.routines, settings, objective)
    plans = strategy_plans(campaign.space, matrix, campaign.planner)

    results = []
    for strategy in strategies:
        minima, seconds, evaluations = [], [], []
        error = None
        for r in range(repeats):
            repeat = dataclasses.replace(campaign, seed=campaign.seed + r)
            start = time.monotonic()
            try:
                report = execute_plan(
                    plans[strategy],
                    repeat,
                    objective,
                    db=None if db is None else db.scoped(f"{strategy.value}/r{r}/"),
                    random_search=strategy == Strategy.RANDOM,
                )
            except SEARCH_FAILURES as e:
                logger.warning("%s repeat %d failed: %s", strategy.value, r, e)
                error = str(e) or type(e).__name__
                break
            logger.info(
                "%s repeat %d: minimum %s in %.1f s",
                strategy.value,
                r,
                _number(report.minimum),
                time.monotonic() - start,
            )
            minima.append(report.minimum)
            seconds.append(report.total_seconds)
            evaluations.append(report.evaluations)
        if error is not None:
            results.append(StrategyResult(strategy, error=error))
        else:
            results.append(
                StrategyResult(
                    strategy, tuple(minima), tuple(seconds), tuple(evaluations)
                )
            )
    return StrategyComparison(
        campaign=campaign.name,
        repeats=repeats,
        results=tuple(results),
        plan=plans[Strategy.PLANNED],
    )
