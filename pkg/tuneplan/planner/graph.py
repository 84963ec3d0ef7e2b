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

"""The interdependence graph between routines and its partition.

Vertices are routines. Every parameter contributes one edge from its owner to
each measured routine, weighted by the parameter's influence on that
routine. Cross edges (owner != target) that survive the cut-off either merge
the two routines into one search or copy the parameter into the target's
search.
"""

import math
from dataclasses import dataclass, field
from typing import Collection, Dict, List, Mapping, Optional, Tuple

from tuneplan.analysis import InfluenceMatrix
from tuneplan.planner.plan import PlannerSettings
from tuneplan.planner.union_find import UnionFind
from tuneplan.space import SearchSpace


@dataclass(frozen=True)
class Edge:
    parameter: str
    source: str
    target: str
    weight: float

    @property
    def is_self_edge(self) -> bool:
        return self.source == self.target

    def survives(self, cutoff: float) -> bool:
        """Unknown weights survive any cut-off."""
        return math.isnan(self.weight) or self.weight >= cutoff


@dataclass(frozen=True)
class InterdependenceGraph:
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    def cross_edges(self) -> List[Edge]:
        return [e for e in self.edges if not e.is_self_edge]

    def edges_into(self, routine: str) -> List[Edge]:
        return [e for e in self.edges if e.target == routine]

    def format_dag(self, cutoff: float) -> str:
        """Cross edges, strongest first, with the pruned ones marked."""
        lines = [f"Interdependence graph (cut-off {100 * cutoff:.1f}%)"]
        edges = sorted(self.cross_edges(), key=_strongest_first)
        for e in edges:
            weight = "unknown" if math.isnan(e.weight) else f"{100 * e.weight:.2f}%"
            mark = "" if e.survives(cutoff) else "  (pruned)"
            lines.append(f"  {e.source} --{e.parameter}--> {e.target}  {weight}{mark}")
        return "\n".join(lines)


def _strongest_first(edge: Edge) -> Tuple[bool, float]:
    if math.isnan(edge.weight):
        return (True, 0.0)
    return (False, -edge.weight)


def build_graph(matrix: InfluenceMatrix, space: SearchSpace) -> InterdependenceGraph:
    """One edge per (parameter, measured routine), sourced at the owner.

    Raises:
        CoverageError: a parameter of the space has no column in the matrix.
    """
    matrix.check_covers(space)
    routines = tuple(r for r in matrix.routines if r in space.routine_names)
    edges = tuple(
        Edge(p.name, p.owner, r, matrix.entry(r, p.name))
        for p in space.parameters
        for r in routines
    )
    vertices = tuple(
        dict.fromkeys(list(routines) + [p.owner for p in space.parameters])
    )
    return InterdependenceGraph(vertices=vertices, edges=edges)


@dataclass(frozen=True)
class Partition:
    """Routine groups that get one search each.

    Args:
        groups: merged routines, members sorted by name, groups by first member.
        duplicates: per target routine, parameters of other routines that are
            tuned again in the target's search.
        kernel_candidates: per shared-kernel parameter, the groups that call
            the kernel.
    """

    groups: Tuple[Tuple[str, ...], ...]
    duplicates: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    kernel_candidates: Mapping[str, Tuple[Tuple[str, ...], ...]] = field(
        default_factory=dict
    )

    def group_of(self, routine: str) -> Optional[Tuple[str, ...]]:
        for group in self.groups:
            if routine in group:
                return group
        return None


def partition(
    graph: InterdependenceGraph,
    settings: PlannerSettings,
    space: SearchSpace,
    staged: Collection[str] = (),
) -> Partition:
    """Splits the measured leaf routines into groups to search together.

    Cross edges below the cut-off are dropped. A surviving edge merges its two
    routines if the parameter must take one value everywhere; otherwise the
    parameter is duplicated into the target's search. Edges of shared-kernel
    parameters between the routines calling the kernel never merge; those
    parameters are settled by `resolve_shared_kernels`.

    Args:
        graph: the interdependence graph.
        settings: planner settings; only the cut-off is used.
        space: the search space the graph was built for.
        staged: parameters already searched in an outer stage; ignored here.
    """
    leaves = space.leaf_routines()
    uf: UnionFind[str] = UnionFind(sorted(leaves))
    duplicated: Dict[str, List[str]] = {}
    for edge in graph.cross_edges():
        if edge.parameter in staged or not edge.survives(settings.cutoff):
            continue
        if edge.target not in leaves or edge.source not in leaves:
            continue
        spec = space.parameter(edge.parameter)
        if spec.is_shared_kernel and edge.target in spec.users:
            continue
        if spec.shared_value_required:
            uf.union(edge.source, edge.target)
        else:
            duplicated.setdefault(edge.target, []).append(edge.parameter)

    groups = tuple(sorted(tuple(sorted(g)) for g in uf.groups()))
    order = {name: i for i, name in enumerate(space.parameter_names)}
    duplicates = {
        target: tuple(sorted(set(names), key=order.__getitem__))
        for target, names in sorted(duplicated.items())
    }

    def group_of(routine):
        return next(g for g in groups if routine in g)

    candidates = {}
    for spec in space.parameters:
        if spec.name in staged or not spec.is_shared_kernel:
            continue
        callers = [spec.owner] + [u for u in spec.users if u in leaves]
        if spec.owner not in leaves:
            continue
        found = tuple(dict.fromkeys(group_of(r) for r in callers))
        if len(found) > 1:
            candidates[spec.name] = found
    return Partition(groups=groups, duplicates=duplicates, kernel_candidates=candidates)
