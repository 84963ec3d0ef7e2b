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

"""Campaign documents and data files shipped with tuneplan."""

import importlib.resources
import pathlib


def bundled(name: str) -> pathlib.Path:
    """Path of a file shipped in this package, e.g. "rt_tddft.yaml"."""
    path = importlib.resources.files(__name__) / name
    if not path.is_file():
        raise FileNotFoundError(f"No bundled campaign file named {name}")
    return pathlib.Path(str(path))
