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

"""Small worker queue used wherever independent evaluations can overlap."""

import asyncio
import logging
from typing import Any, Callable, Iterable, List, Tuple, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


async def execute_in_queue(
    func: Callable[[T], R], tasks: Iterable[T], num_workers: int
) -> List[R]:
    """Maintain a respectful queue of work.

    Args:
        func: This (synchronous) function will be called on each task in a
            worker thread.
        tasks: Call func on each of these
        num_workers: The number of async workers. This corresponds roughly
            to the maintained queue depth.

    Returns:
        The results of func, in the order of `tasks`.

    Raises:
        The exception of the lowest-indexed failing task, after every task has
        been attempted.
    """
    queue: asyncio.Queue[Tuple[int, Any]] = asyncio.Queue()
    task_list = list(tasks)
    results: List[Any] = [None] * len(task_list)
    failures: List[Tuple[int, BaseException]] = []

    async def worker():
        while True:
            index, task = await queue.get()
            logger.debug(
                "Processing task %d. Current queue size: %d", index, queue.qsize()
            )
            try:
                results[index] = await asyncio.to_thread(func, task)
            except Exception as e:  # pylint: disable=broad-except
                failures.append((index, e))
            finally:
                queue.task_done()

    worker_jobs = [asyncio.create_task(worker()) for _ in range(max(1, num_workers))]
    for item in enumerate(task_list):
        await queue.put(item)
    logger.debug(
        "Added everything to the queue. Current queue size: %d", queue.qsize()
    )
    await queue.join()
    for wjob in worker_jobs:
        wjob.cancel()
    await asyncio.gather(*worker_jobs, return_exceptions=True)
    if failures:
        raise min(failures, key=lambda f: f[0])[1]
    return results


def run_in_queue(
    func: Callable[[T], R], tasks: Iterable[T], num_workers: int = 1
) -> List[R]:
    """Blocking front end of `execute_in_queue`.

    A width of one (or a single task) runs inline, in order, on the calling
    thread.
    """
    task_list = list(tasks)
    if num_workers <= 1 or len(task_list) <= 1:
        return [func(task) for task in task_list]
    return asyncio.run(execute_in_queue(func, task_list, num_workers))
