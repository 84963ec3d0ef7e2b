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

from tuneplan.analysis.sensitivity import (
    SENSITIVITY_SEARCH_ID,
    InfluenceMatrix,
    SensitivitySettings,
    relative_variability,
    run_sensitivity,
    variation_values,
)

from tuneplan.analysis.insights import (
    Correlations,
    InsightReport,
    feature_importance,
    pearson_matrix,
    summarize_insights,
)
