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

"""Maps configurations of a search onto the unit cube the surrogate works in."""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from tuneplan.enums import ParameterKind
from tuneplan.space import Configuration, ParameterSpec, SearchSpace


class SpaceEncoder:
    """Encodes the tuned parameters of a search as a point of [0,1]^d.

    Numeric parameters (integers, reals and ordinals) are mapped affinely
    from their bounds; a parameter with a single value maps to 0.5.
    Categorical parameters are one-hot encoded, one dimension per label.

    Args:
        space: the search space.
        parameters: names of the encoded parameters; all of them by default.
    """

    def __init__(self, space: SearchSpace, parameters: Optional[Sequence[str]] = None):
        names = space.parameter_names if parameters is None else list(parameters)
        self._specs: Tuple[ParameterSpec, ...] = tuple(
            space.parameter(n) for n in names
        )
        self._slices: List[slice] = []
        offset = 0
        for spec in self._specs:
            width = len(spec.values) if spec.kind == ParameterKind.CATEGORICAL else 1
            self._slices.append(slice(offset, offset + width))
            offset += width
        self._dims = offset

    @property
    def parameters(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self._specs)

    @property
    def dims(self) -> int:
        return self._dims

    def encode(self, config: Configuration) -> np.ndarray:
        point = np.zeros(self._dims)
        for spec, where in zip(self._specs, self._slices):
            value = config[spec.name]
            if spec.kind == ParameterKind.CATEGORICAL:
                point[where.start + spec.values.index(str(value))] = 1.0
                continue
            lo, hi = spec.bounds
            point[where.start] = 0.5 if hi == lo else (float(value) - lo) / (hi - lo)
        return point

    def encode_many(self, configs: Iterable[Configuration]) -> np.ndarray:
        rows = [self.encode(c) for c in configs]
        if not rows:
            return np.zeros((0, self._dims))
        return np.vstack(rows)
