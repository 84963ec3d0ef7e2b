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

from tuneplan._version import __version__

from tuneplan.execution import (
    execute_in_queue,
    run_in_queue,
)

from tuneplan.space import (
    Configuration,
    ParameterSpec,
    RoutineDecl,
    SearchSpace,
)

from tuneplan.objectives import (
    EvaluationRecord,
    Objective,
)

from tuneplan.analysis import (
    InfluenceMatrix,
    run_sensitivity,
)

from tuneplan.planner import (
    PlannerSettings,
    SearchPlan,
    emit_plan,
)

from tuneplan.search import (
    run_bo,
    run_random,
)

from tuneplan.orchestrator import (
    CampaignConfig,
    compare_strategies,
    execute_plan,
)
