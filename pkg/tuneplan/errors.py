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

"""Exceptions raised across tuneplan.

Each one subclasses the builtin that would otherwise have been raised, so
callers catching ValueError / KeyError / RuntimeError keep working.
"""

import numpy as np


class UnknownParameterError(KeyError):
    """A configuration names a parameter the search space does not declare."""


class MissingParameterError(KeyError):
    """A configuration leaves a declared parameter unassigned."""


class SamplingExhaustedError(RuntimeError):
    """Rejection sampling gave up; the space is probably over-constrained."""


class SingularityError(ValueError):
    """A synthetic objective was asked to divide by (nearly) zero."""


class BaselineFailureError(RuntimeError):
    """The sensitivity baseline could not be evaluated successfully."""


class ZeroBaselineError(ValueError):
    """A routine metric is exactly zero at baseline; relative change undefined."""


class InsufficientDataError(ValueError):
    """Not enough successful records to compute a statistic."""


class CoverageError(ValueError):
    """An influence matrix does not cover every parameter of the space."""


class AllFailuresError(RuntimeError):
    """A search finished its initial phase without a single ok evaluation."""


class StageFailureError(RuntimeError):
    """A search inside a plan stage failed; results so far are persisted."""


class ConfigMismatchError(ValueError):
    """An evaluation database belongs to a different campaign configuration."""


class SchemaMismatchError(ValueError):
    """Prior evaluation records do not share the parameter names of a search."""


class CampaignError(ValueError):
    """A campaign document or a command-line override is invalid."""


class FactorizationError(np.linalg.LinAlgError):
    """A covariance matrix stayed indefinite after jitter escalation."""


# Failures of a search or stage, as opposed to mistakes in the campaign.
SEARCH_FAILURES = (
    AllFailuresError,
    StageFailureError,
    SamplingExhaustedError,
    InsufficientDataError,
    FactorizationError,
)
