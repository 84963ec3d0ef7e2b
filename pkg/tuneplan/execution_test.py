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

import threading
import time

import pytest

from tuneplan.execution import run_in_queue


def test_inline_preserves_order():
    assert run_in_queue(lambda x: x * x, [3, 1, 2]) == [9, 1, 4]


def test_parallel_preserves_order():
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    assert run_in_queue(slow_square, range(5), num_workers=3) == [0, 1, 4, 9, 16]


def test_parallel_uses_several_threads():
    seen = set()
    lock = threading.Lock()

    def record(_):
        with lock:
            seen.add(threading.get_ident())
        time.sleep(0.05)

    run_in_queue(record, range(6), num_workers=3)
    assert len(seen) > 1


def test_first_failure_is_raised_after_all_tasks():
    attempted = []

    def maybe_fail(x):
        attempted.append(x)
        if x in (1, 3):
            raise ValueError(f"bad {x}")
        return x

    with pytest.raises(ValueError, match="bad 1"):
        run_in_queue(maybe_fail, range(5), num_workers=2)
    assert sorted(attempted) == [0, 1, 2, 3, 4]


def test_empty_task_list():
    assert run_in_queue(lambda x: x, [], num_workers=4) == []
