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

"""Turns an influence matrix into a staged plan of low-dimensional searches.

The pipeline:

1. stage_globals: parameters of routines without a metric of their own are
   searched against the total, and parameters owned by (or strongly tied to)
   an enclosing region are searched against that region's metric. These run
   first; their best values seed the later stage.
2. partition: the measured leaf routines are grouped through the surviving
   cross edges of the interdependence graph.
3. resolve_shared_kernels: a kernel called from several groups is tuned only
   in the group it influences most.
4. apply_dim_cap: the least influential parameters of oversized searches are
   fixed at their defaults.
5. every search gets a budget of max(floor, multiplier * dims) evaluations.
"""

import dataclasses
import logging
import math
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from tuneplan.analysis import InfluenceMatrix
from tuneplan.enums import Aggregation
from tuneplan.planner.graph import Partition, build_graph, partition
from tuneplan.planner.plan import PlannerSettings, SearchDef, SearchPlan
from tuneplan.space import SearchSpace

logger = logging.getLogger(__name__)


def group_influence(
    matrix: InfluenceMatrix,
    parameter: str,
    routines: Sequence[str],
    aggregation: Aggregation = Aggregation.MAX,
) -> float:
    """Influence of a parameter on a set of routines; NaN if none is known."""
    values = [
        matrix.entry(r, parameter)
        for r in routines
        if r in matrix.routines and not math.isnan(matrix.entry(r, parameter))
    ]
    if not values:
        return math.nan
    if aggregation == Aggregation.SUM:
        return float(sum(values))
    return float(max(values))


def _at_least(value: float, cutoff: float) -> bool:
    return not math.isnan(value) and value >= cutoff


def stage_globals(
    matrix: InfluenceMatrix, space: SearchSpace, settings: PlannerSettings
) -> Tuple[List[SearchDef], FrozenSet[str]]:
    """Searches that must finish before the routine groups are searched.

    Parameters owned by a routine with no metric of its own get a search
    against the total objective. A measured routine enclosing others gets a
    search against its own metric over the parameters it owns, plus every
    parameter reaching the cut-off on it and on at least two of its
    children.

    Returns:
        The stage-one searches (budgets not yet assigned) and the names of
        the parameters left for the routine groups.
    """
    staged: List[str] = []
    searches: List[SearchDef] = []
    for routine in space.routines:
        if routine.measured:
            continue
        owned = space.owned_by(routine.name)
        if owned:
            searches.append(SearchDef(id=routine.name, parameters=tuple(owned)))
            staged.extend(owned)

    for routine in space.routines:
        if not routine.measured or not space.is_parent(routine.name):
            continue
        children = [c for c in space.children(routine.name) if c in matrix.routines]
        params = []
        for p in space.parameters:
            if p.name in staged:
                continue
            if p.owner == routine.name:
                params.append(p.name)
                continue
            if routine.name not in matrix.routines:
                continue
            on_parent = _at_least(matrix.entry(routine.name, p.name), settings.cutoff)
            on_children = sum(
                _at_least(matrix.entry(c, p.name), settings.cutoff) for c in children
            )
            if on_parent and on_children >= 2:
                params.append(p.name)
        if params:
            searches.append(
                SearchDef(
                    id=routine.name, parameters=tuple(params), targets=(routine.name,)
                )
            )
            staged.extend(params)

    remaining = frozenset(space.parameter_names) - frozenset(staged)
    return searches, remaining


def resolve_shared_kernels(
    groups: Partition,
    matrix: InfluenceMatrix,
    space: SearchSpace,
    settings: Optional[PlannerSettings] = None,
) -> Tuple[Dict[str, Tuple[str, ...]], List[str]]:
    """Picks the one group that tunes each kernel called from several groups.

    The winner is the group the parameter influences most. Ties go to the
    group whose first routine sorts first and are reported in the notes.

    Returns:
        The chosen group per shared-kernel parameter, and notes.
    """
    aggregation = (settings or PlannerSettings()).aggregation
    home: Dict[str, Tuple[str, ...]] = {}
    notes: List[str] = []
    for name, candidates in groups.kernel_candidates.items():
        scores = [group_influence(matrix, name, g, aggregation) for g in candidates]
        known = [s for s in scores if not math.isnan(s)]
        best = max(known) if known else math.nan
        winners = [
            g
            for g, s in zip(candidates, scores)
            if (math.isnan(best) and math.isnan(s)) or s == best
        ]
        winners.sort()
        home[name] = winners[0]
        if len(winners) > 1:
            notes.append(
                f"{name} influences {', '.join('+'.join(g) for g in winners)} "
                f"equally; tuned in {'+'.join(winners[0])}"
            )
        logger.debug("Shared kernel parameter %s goes to %s", name, home[name])
    return home, notes


def apply_dim_cap(
    search: SearchDef,
    matrix: InfluenceMatrix,
    settings: PlannerSettings,
    space: SearchSpace,
) -> SearchDef:
    """Keeps the `dim_cap` most influential parameters of a search.

    Influence is measured on the search's target routines (every measured
    routine for searches against the total) and aggregated as configured.
    Unknown influence ranks last; ties keep declaration order. Dropped
    parameters are held at their defaults, except duplicates, which their
    owner's search still tunes.
    """
    if search.dims <= settings.dim_cap:
        return search
    routines = search.targets or matrix.routines
    order = {name: i for i, name in enumerate(space.parameter_names)}

    def rank(name: str) -> Tuple[bool, float, int]:
        score = group_influence(matrix, name, routines, settings.aggregation)
        if math.isnan(score):
            return (True, 0.0, order[name])
        return (False, -score, order[name])

    keep = set(sorted(search.parameters, key=rank)[: settings.dim_cap])
    dropped = dict(search.dropped)
    for name in search.parameters:
        if name not in keep and name not in search.duplicates:
            dropped[name] = space.parameter(name).default
    logger.info(
        "Search %s: %d parameters over the cap of %d, dropping %s",
        search.id,
        search.dims,
        settings.dim_cap,
        sorted(set(search.parameters) - keep),
    )
    return dataclasses.replace(
        search,
        parameters=tuple(p for p in search.parameters if p in keep),
        duplicates=tuple(p for p in search.duplicates if p in keep),
        dropped=dropped,
    )


def _group_searches(
    groups: Partition,
    home: Dict[str, Tuple[str, ...]],
    remaining: FrozenSet[str],
    space: SearchSpace,
    notes: List[str],
) -> List[SearchDef]:
    searches = []
    for group in groups.groups:
        own = [
            p.name
            for p in space.parameters
            if p.name in remaining
            and (home[p.name] == group if p.name in home else p.owner in group)
        ]
        extra = {
            d
            for r in group
            for d in groups.duplicates.get(r, ())
            if d in remaining and d not in own
        }
        params = [p for p in space.parameter_names if p in own or p in extra]
        if not params:
            notes.append(f"{'+'.join(group)} has no parameters to tune")
            continue
        searches.append(
            SearchDef(
                id="+".join(group),
                parameters=tuple(params),
                targets=group,
                duplicates=tuple(p for p in params if p in extra),
            )
        )
    return searches


def emit_plan(
    space: SearchSpace,
    matrix: InfluenceMatrix,
    settings: Optional[PlannerSettings] = None,
) -> SearchPlan:
    """Derives the staged search plan; a pure function of its inputs.

    Raises:
        CoverageError: the matrix misses a parameter of the space.
    """
    settings = settings or PlannerSettings()
    graph = build_graph(matrix, space)
    outer, remaining = stage_globals(matrix, space, settings)
    staged = frozenset(space.parameter_names) - remaining
    groups = partition(graph, settings, space, staged=staged)
    home, notes = resolve_shared_kernels(groups, matrix, space, settings)
    inner = _group_searches(groups, home, remaining, space, notes)

    if outer and inner:
        for s in outer:
            if not s.targets:
                notes.append(
                    f"{s.id} is tuned against the total with the other parameters "
                    "at their defaults; later stages start from its best values"
                )

    def finalize(search: SearchDef) -> SearchDef:
        search = apply_dim_cap(search, matrix, settings, space)
        return dataclasses.replace(
            search,
            budget=settings.budget(search.dims),
            init_samples=settings.init_samples,
        )

    plan = SearchPlan(
        stages=(
            tuple(finalize(s) for s in outer),
            tuple(finalize(s) for s in inner),
        ),
        settings=settings,
        notes=tuple(notes),
    )
    plan.check_invariants(space)
    logger.info(
        "Plan with %d stage(s), %d searches, %d evaluations",
        len(plan.stages),
        sum(len(stage) for stage in plan.stages),
        plan.total_budget,
    )
    return plan
