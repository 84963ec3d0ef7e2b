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

from tuneplan.objectives.records import (
    PENALTY,
    TOTAL,
    EvaluationRecord,
)

from tuneplan.objectives.base import (
    ConstantObjective,
    FunctionObjective,
    Objective,
)

from tuneplan.objectives.synthetic import (
    DEFAULT_NOISE_STDDEV,
    LOG_FLOOR,
    SyntheticCase,
    SyntheticObjective,
    eval_synthetic,
    group_values,
    synthetic_baseline,
)

from tuneplan.objectives.external import (
    METRIC_RE,
    ExternalCommandSpec,
    ExternalObjective,
    eval_external,
    parse_metrics,
)
