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

import enum


class ParameterKind(enum.Enum):
    INTEGER = "integer"
    REAL = "real"
    ORDINAL = "ordinal"
    CATEGORICAL = "categorical"


class Status(enum.Enum):
    OK = "ok"
    TIMEOUT = "timeout"
    CRASH = "crash"
    INVALID = "invalid"


class VariationStrategy(enum.Enum):
    MULTIPLICATIVE = "multiplicative"  # baseline * factor**k
    EXPLICIT = "explicit"  # values listed per parameter
    RANDOM = "random"  # uniform draws from the parameter domain


class Aggregation(enum.Enum):
    """How the influence on a merged group is scored for the dimension cap."""

    MAX = "max"
    SUM = "sum"


class Strategy(enum.Enum):
    RANDOM = "random"
    FULLY_JOINT = "fully-joint"
    PLANNED = "planned"
    FULLY_INDEPENDENT = "fully-independent"
