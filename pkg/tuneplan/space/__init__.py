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

from tuneplan.space.parameters import (
    Configuration,
    ParameterSpec,
    RoutineDecl,
    Value,
    canonical_value,
    divisors,
)

from tuneplan.space.constraints import (
    ConstraintExpr,
)

from tuneplan.space.search_space import (
    DEFAULT_REJECTION_BUDGET,
    SearchSpace,
    SeedLike,
    sample_random,
    validate,
)

from tuneplan.space.catalog import (
    RT_TDDFT_KERNELS,
    SYNTHETIC_GROUPS,
    rt_tddft_space,
    synthetic_space,
)
