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

from tuneplan.planner.union_find import UnionFind

from tuneplan.planner.plan import (
    PlannerSettings,
    SearchDef,
    SearchPlan,
)

from tuneplan.planner.graph import (
    Edge,
    InterdependenceGraph,
    Partition,
    build_graph,
    partition,
)

from tuneplan.planner.planner import (
    apply_dim_cap,
    emit_plan,
    group_influence,
    resolve_shared_kernels,
    stage_globals,
)
