"""Untrusted-side state: central index, blob storage, shards and search.

``SearchServer`` is the in-process service object; ``securesearch.api``
wraps it in HTTP.  State lives in a directory::

    index.json  shards/shard_<id>.json  abstracts.json  blobs/<doc_id>

Ingest is serialized by a writer lock.  Clustering runs on the current
index while uploads are refused, then swaps in the new shard set in one
assignment, so searches already running finish on the old set.
"""
from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass
from pathlib import Path

from . import crypto
from .cluster import ClusterParams, ClusterResult, build_shards, load_shards, save_shards
from .extract import KeyFile
from .index import CentralIndex, ValidationError
from .ranking import RankParams, compile_candidates, rank

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 10
_SAFE_ID = re.compile(r"^[A-Za-z0-9_-]{1,128}$")


class ServerError(Exception):
    status = 500
    code = "internal"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class BadRequest(ServerError):
    status = 400
    code = "invalid_request"


class NotFound(ServerError):
    status = 404
    code = "not_found"


class Conflict(ServerError):
    status = 409
    code = "conflict"


def _check_id(doc_id):
    if not isinstance(doc_id, str) or not _SAFE_ID.match(doc_id):
        raise BadRequest(f"invalid doc_id {doc_id!r}")


class BlobStore:
    """Blobs keyed by doc_id, on disk when given a directory, else in memory."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[str, bytes] = {}
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def put(self, doc_id: str, data: bytes) -> None:
        _check_id(doc_id)
        if self.directory is None:
            self._mem[doc_id] = bytes(data)
            return
        tmp = self.directory / f".{doc_id}.tmp"
        tmp.write_bytes(data)
        tmp.replace(self.directory / doc_id)

    def get(self, doc_id: str) -> bytes:
        _check_id(doc_id)
        if self.directory is None:
            try:
                return self._mem[doc_id]
            except KeyError:
                raise NotFound(f"unknown document {doc_id}") from None
        path = self.directory / doc_id
        if not path.is_file():
            raise NotFound(f"unknown document {doc_id}")
        return path.read_bytes()

    def total_bytes(self) -> int:
        if self.directory is None:
            return sum(len(b) for b in self._mem.values())
        return sum(p.stat().st_size for p in self.directory.iterdir() if not p.name.startswith("."))

    def __len__(self):
        if self.directory is None:
            return len(self._mem)
        return sum(1 for p in self.directory.iterdir() if not p.name.startswith("."))


@dataclass(frozen=True)
class ShardSet:
    shards: dict
    abstracts: list
    doc_lengths: dict


class SearchServer:
    def __init__(self, state_dir=None, rank_params: RankParams = RankParams()):
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.rank_params = rank_params
        self._write_lock = threading.Lock()
        self._cluster_lock = threading.Lock()
        self._clustering = False
        self.index = CentralIndex()
        self.active: ShardSet | None = None
        if self.state_dir is None:
            self.blobs = BlobStore()
            return
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.blobs = BlobStore(self.state_dir / "blobs")
        if (self.state_dir / "index.json").is_file():
            self.index = CentralIndex.load(self.state_dir / "index.json")
        if (self.state_dir / "abstracts.json").is_file():
            shards, abstracts = load_shards(self.state_dir)
            self.active = ShardSet({s.shard_id: s for s in shards}, abstracts, dict(self.index.docs))

    # -- upload ---------------------------------------------------------------

    def upload(self, kf: KeyFile, blob: bytes) -> str:
        _check_id(kf.doc_id)
        with self._write_lock:
            if self._clustering:
                raise Conflict("clustering in progress; retry later", "clustering_in_progress")
            try:
                self.index.ingest(kf)
            except ValidationError as exc:
                raise BadRequest(str(exc)) from exc
            self.blobs.put(kf.doc_id, blob)
            if self.state_dir is not None:
                self.index.save(self.state_dir / "index.json")
        return kf.doc_id

    def fetch_blob(self, doc_id: str) -> bytes:
        return self.blobs.get(doc_id)

    # -- clustering -----------------------------------------------------------

    def cluster(self, params: ClusterParams) -> ClusterResult:
        if not self._cluster_lock.acquire(blocking=False):
            raise Conflict("clustering already running", "clustering_in_progress")
        try:
            with self._write_lock:
                self._clustering = True
            if len(self.index) < params.k:
                raise BadRequest(f"k={params.k} exceeds the {len(self.index)} indexed terms")
            result = build_shards(self.index, params)
            if self.state_dir is not None:
                save_shards(self.state_dir, result.shards, result.abstracts)
            self.active = ShardSet({s.shard_id: s for s in result.shards},
                                   result.abstracts, dict(self.index.docs))
            log.info("clustered %d terms into %d shards in %d iterations",
                     len(self.index), params.k, result.iterations)
            return result
        finally:
            with self._write_lock:
                self._clustering = False
            self._cluster_lock.release()

    def abstracts(self):
        active = self.active
        if active is None:
            raise Conflict("index has not been clustered", "not_clustered")
        return active.abstracts

    # -- search ---------------------------------------------------------------

    def candidates(self, trapdoor, shard_ids):
        active = self.active
        if active is None:
            raise Conflict("index has not been clustered", "not_clustered")
        if not shard_ids:
            raise BadRequest("shard_ids must not be empty")
        missing = [s for s in shard_ids if s not in active.shards]
        if missing:
            raise NotFound(f"unknown shard ids {missing}")
        chosen = [active.shards[s] for s in dict.fromkeys(shard_ids)]
        return compile_candidates(chosen, trapdoor, active.doc_lengths)

    def search(self, trapdoor, shard_ids, limit: int = DEFAULT_LIMIT):
        """Rank documents in the chosen shards against ``(token, weight)`` pairs."""
        cands = self.candidates(trapdoor, shard_ids)
        return rank(cands, trapdoor, self.rank_params, limit)

    def stats(self) -> dict:
        terms, docs, size = self.index.stats()
        blob_bytes = self.blobs.total_bytes()
        active = self.active
        return {
            "terms": terms,
            "docs": docs,
            "index_bytes": size,
            "corpus_bytes": max(blob_bytes - crypto.BLOB_OVERHEAD * len(self.blobs), 0),
            "shard_sizes": [] if active is None else
                           [len(active.shards[s]) for s in sorted(active.shards)],
        }
