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

"""Expected improvement for minimization."""

import numpy as np
import scipy.stats

from tuneplan.surrogate.gp import GpModel


def expected_improvement_from_moments(
    mean: np.ndarray, std: np.ndarray, best: float
) -> np.ndarray:
    """EI = (best - mean) * Phi(z) + std * phi(z), z = (best - mean) / std.

    Where std is 0 the improvement is certain: max(best - mean, 0).
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    std = np.broadcast_to(np.asarray(std, dtype=float), mean.shape)
    gain = best - mean
    out = np.maximum(gain, 0.0)
    positive = std > 0
    g, s = gain[positive], std[positive]
    z = g / s
    out[positive] = g * scipy.stats.norm.cdf(z) + s * scipy.stats.norm.pdf(z)
    return np.maximum(out, 0.0)


def expected_improvement(model: GpModel, x: np.ndarray, best: float) -> np.ndarray:
    """EI of the points x under the model; `best` is in the model's units."""
    mean, variance = model.predict(x)
    return expected_improvement_from_moments(mean, np.sqrt(variance), best)
