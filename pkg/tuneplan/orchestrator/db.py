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

"""Append-only evaluation database, one JSON object per line."""

import json
import logging
import os
import pathlib
import threading
from typing import Dict, List, Optional

from tuneplan.errors import ConfigMismatchError
from tuneplan.objectives import EvaluationRecord

logger = logging.getLogger(__name__)

DIGEST_KEY = "campaign_digest"


class EvaluationDb:
    """Every evaluation of a campaign, in the order it finished.

    Records are appended under a lock, so concurrent searches may share one
    database. A database belongs to one campaign digest; opening it with
    another raises ConfigMismatchError. Without a path the database lives in
    memory only.

    Args:
        path: the JSON-lines file; created on first append.
        campaign_digest: digest of the campaign writing the records.
    """

    def __init__(self, path: Optional[os.PathLike], campaign_digest: str):
        self.path = None if path is None else pathlib.Path(path)
        self.campaign_digest = campaign_digest
        self._lock = threading.Lock()
        self._by_search: Dict[str, Dict[int, EvaluationRecord]] = {}
        self._count = 0
        if self.path is not None and self.path.exists():
            self._drop_partial_tail()
            for record in self.replay():
                self._remember(record)

    def _drop_partial_tail(self) -> None:
        data = self.path.read_bytes()
        if data and not data.endswith(b"\n"):
            keep = data.rfind(b"\n") + 1
            logger.warning(
                "%s ends in an incomplete record; dropping %d bytes",
                self.path,
                len(data) - keep,
            )
            with open(self.path, "r+b") as f:
                f.truncate(keep)

    def _remember(self, record: EvaluationRecord) -> None:
        by_index = self._by_search.setdefault(record.search_id, {})
        if record.index not in by_index:
            self._count += 1
        by_index[record.index] = record

    def __len__(self) -> int:
        return self._count

    @property
    def search_ids(self) -> List[str]:
        return sorted(self._by_search)

    def append(self, record: EvaluationRecord) -> None:
        """Stores a record unless its (search_id, index) is already stored."""
        line = json.dumps({DIGEST_KEY: self.campaign_digest, **record.to_dict()})
        with self._lock:
            if record.index in self._by_search.get(record.search_id, {}):
                logger.warning(
                    "%s[%d] is already recorded; not storing it again",
                    record.search_id,
                    record.index,
                )
                return
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(line + "\n")
                    f.flush()
                    os.fsync(f.fileno())
            self._remember(record)

    def records_for(self, search_id: str) -> List[EvaluationRecord]:
        """The search's records in index order, gaps included."""
        with self._lock:
            by_index = dict(self._by_search.get(search_id, {}))
        return [by_index[i] for i in sorted(by_index)]

    def scoped(self, prefix: str) -> "ScopedDb":
        return ScopedDb(self, prefix)

    def replay(self) -> List[EvaluationRecord]:
        """Reads every record back from the file.

        Raises:
            ConfigMismatchError: a record was written by another campaign.
        """
        if self.path is None:
            with self._lock:
                return [
                    r
                    for records in self._by_search.values()
                    for r in records.values()
                ]
        out = []
        with open(self.path, encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                data = json.loads(line)
                digest = data.pop(DIGEST_KEY, None)
                if digest != self.campaign_digest:
                    raise ConfigMismatchError(
                        f"{self.path}:{number} belongs to campaign digest "
                        f"{digest}, not {self.campaign_digest}"
                    )
                out.append(EvaluationRecord.from_dict(data))
        return out


class ScopedDb:
    """A view of a database that stores search `s` under `prefix + s`.

    Lets several runs of the same plan share one database, each under its
    own prefix, while records keep the search ids the runs use.
    """

    def __init__(self, db: EvaluationDb, prefix: str):
        self.db = db
        self.prefix = prefix

    def __len__(self) -> int:
        return sum(len(self.records_for(s)) for s in self.search_ids)

    @property
    def search_ids(self) -> List[str]:
        n = len(self.prefix)
        return [s[n:] for s in self.db.search_ids if s.startswith(self.prefix)]

    def append(self, record: EvaluationRecord) -> None:
        self.db.append(record.relabeled(self.prefix + record.search_id, record.index))

    def records_for(self, search_id: str) -> List[EvaluationRecord]:
        return [
            r.relabeled(search_id, r.index)
            for r in self.db.records_for(self.prefix + search_id)
        ]


def load_records(path: os.PathLike) -> List[EvaluationRecord]:
    """Every complete record of a database file, whatever campaign wrote it."""
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.endswith("\n") or not line.strip():
                continue
            data = json.loads(line)
            data.pop(DIGEST_KEY, None)
            out.append(EvaluationRecord.from_dict(data))
    return out
