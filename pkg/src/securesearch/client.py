"""Trusted-side client: everything that touches plaintext or the key."""
from __future__ import annotations

import base64
import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import httpx

from .crypto import Blob, DecryptionError, TermKey, decrypt_blob, detokenize, encrypt_blob
from .extract import DEFAULT_MAX_KEYWORDS, Document, build_key_file, load_stopwords
from .query import (DEFAULT_SHARDS_TO_SEARCH, choose_shards, expand_query, make_trapdoor,
                    parse_query)
from .semantics import SemanticGraph

ENV_PREFIX = "CS_"


class ClientError(Exception):
    def __init__(self, message, status=None, code=None):
        super().__init__(message)
        self.status = status
        self.code = code


@dataclass
class ClientConfig:
    server_url: str = "http://127.0.0.1:8350"
    key_path: str = "securesearch.key"
    stopwords_path: str | None = None
    taxonomy_path: str | None = None
    related_terms_path: str | None = None
    shards_to_search: int = DEFAULT_SHARDS_TO_SEARCH
    max_keywords: int = DEFAULT_MAX_KEYWORDS

    @classmethod
    def load(cls, path=None, environ=None) -> "ClientConfig":
        """JSON file values, then ``CS_<FIELD>`` environment overrides."""
        environ = os.environ if environ is None else environ
        values = {}
        if path is not None:
            values.update(json.loads(Path(path).read_text("utf-8")))
        known = {f.name: f for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for name in known:
            env = environ.get(ENV_PREFIX + name.upper())
            if env is not None:
                values[name] = env
        for name in ("shards_to_search", "max_keywords"):
            if name in values:
                values[name] = int(values[name])
        cfg = cls(**values)
        if cfg.shards_to_search < 1 or cfg.max_keywords < 1:
            raise ValueError("shards_to_search and max_keywords must be >= 1")
        return cfg

    def to_dict(self):
        return asdict(self)


class Client:
    """Talks to the server over ``http`` (any ``httpx.Client``-like object)."""

    def __init__(self, key: TermKey, http, stopwords=frozenset(), graph=None,
                 max_keywords=DEFAULT_MAX_KEYWORDS, shards_to_search=DEFAULT_SHARDS_TO_SEARCH):
        self.key = key
        self.http = http
        self.stopwords = stopwords
        self.graph = graph if graph is not None else SemanticGraph()
        self.max_keywords = max_keywords
        self.shards_to_search = shards_to_search

    @classmethod
    def from_config(cls, cfg: ClientConfig, http=None) -> "Client":
        if http is None:
            http = httpx.Client(base_url=cfg.server_url, timeout=60.0)
        return cls(
            key=TermKey.load(cfg.key_path),
            http=http,
            stopwords=load_stopwords(cfg.stopwords_path),
            graph=SemanticGraph.load(cfg.taxonomy_path, cfg.related_terms_path),
            max_keywords=cfg.max_keywords,
            shards_to_search=cfg.shards_to_search,
        )

    def _call(self, method, path, body=None):
        try:
            resp = self.http.request(method, path, json=body)
        except httpx.HTTPError as exc:
            raise ClientError(f"cannot reach server: {exc}") from exc
        try:
            data = resp.json()
        except ValueError:
            data = None
        if resp.status_code != 200:
            err = (data or {}).get("error", {}) if isinstance(data, dict) else {}
            raise ClientError(err.get("message", resp.text), resp.status_code, err.get("code"))
        return data

    # -- upload and fetch ------------------------------------------------------

    def upload_document(self, doc: Document, raw: bytes | None = None) -> str:
        raw = doc.text.encode("utf-8") if raw is None else raw
        kf = build_key_file(doc, self.key, self.max_keywords, self.stopwords)
        blob = encrypt_blob(self.key, raw).to_bytes()
        body = {"key_file": kf.to_dict(), "blob": base64.b64encode(blob).decode("ascii")}
        return self._call("POST", "/docs", body)["doc_id"]

    def upload_file(self, path) -> str:
        raw = Path(path).read_bytes()
        return self.upload_document(Document.from_file(path), raw)

    def get(self, doc_id: str) -> bytes:
        data = self._call("GET", f"/docs/{doc_id}")
        blob = Blob.from_bytes(base64.b64decode(data["blob"]))
        return decrypt_blob(self.key, blob)

    # -- clustering and search -------------------------------------------------

    def cluster(self, k: int, **params) -> dict:
        return self._call("POST", "/admin/cluster", {"k": k, **params})

    def abstracts(self) -> list[tuple[int, list[str]]]:
        out = []
        for a in self._call("GET", "/abstracts"):
            terms = []
            for token in a["tokens"]:
                try:
                    terms.append(detokenize(self.key, token))
                except DecryptionError:
                    continue
            out.append((a["shard_id"], terms))
        return out

    def plan(self, query: str, s: int | None = None):
        """Build the query set, pick shards and encrypt the trapdoor."""
        qs = expand_query(parse_query(query, self.stopwords), self.graph)
        choice = choose_shards(qs, self.abstracts(), self.graph, s or self.shards_to_search)
        return qs, choice, make_trapdoor(qs, self.key)

    def search(self, query: str, s: int | None = None, limit: int = 10):
        _, choice, trapdoor = self.plan(query, s)
        body = {"trapdoor": trapdoor.to_wire(), "shard_ids": choice.selected, "limit": limit}
        return [(r["doc_id"], r["score"]) for r in self._call("POST", "/search", body)["results"]]

    def stats(self) -> dict:
        return self._call("GET", "/stats")
