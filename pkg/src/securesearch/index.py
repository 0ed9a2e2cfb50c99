"""Server-side encrypted inverted index.

Maps each token to its postings ``(doc_id, frequency)`` and keeps a table of
document lengths.  Frequencies are stored in the clear; only the terms are
encrypted.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .extract import KeyFile


class ValidationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Posting:
    doc_id: str
    frequency: int


class CentralIndex:
    """Hash-addressed inverted index with per-document upsert.

    ``terms`` maps token -> {doc_id: frequency}.  A reverse map of each
    document's tokens makes re-ingesting a document replace its old postings.
    """

    def __init__(self):
        self.terms: dict[str, dict[str, int]] = {}
        self.docs: dict[str, int] = {}
        self._doc_terms: dict[str, list[str]] = {}

    def __len__(self):
        return len(self.terms)

    def __contains__(self, token):
        return token in self.terms

    def __eq__(self, other):
        if not isinstance(other, CentralIndex):
            return NotImplemented
        return self.terms == other.terms and self.docs == other.docs

    def ingest(self, kf: KeyFile) -> None:
        if not isinstance(kf.doc_length, int) or kf.doc_length <= 0:
            raise ValidationError(f"doc_length must be a positive integer, got {kf.doc_length!r}")
        seen = set()
        for token, freq in kf.entries:
            if not isinstance(freq, int) or freq <= 0:
                raise ValidationError(f"frequency must be a positive integer, got {freq!r}")
            if token in seen:
                raise ValidationError(f"duplicate token in key file for {kf.doc_id}")
            seen.add(token)

        self._remove(kf.doc_id)
        for token, freq in kf.entries:
            self.terms.setdefault(token, {})[kf.doc_id] = freq
        self.docs[kf.doc_id] = kf.doc_length
        self._doc_terms[kf.doc_id] = [t for t, _ in kf.entries]

    def _remove(self, doc_id):
        for token in self._doc_terms.pop(doc_id, ()):
            plist = self.terms[token]
            del plist[doc_id]
            if not plist:
                del self.terms[token]
        self.docs.pop(doc_id, None)

    def lookup(self, token: str) -> list[Posting]:
        plist = self.terms.get(token)
        if not plist:
            return []
        return [Posting(d, f) for d, f in sorted(plist.items())]

    def doc_terms(self, doc_id: str) -> dict[str, int]:
        """Tokens recorded for one document with their frequencies."""
        return {t: self.terms[t][doc_id] for t in self._doc_terms.get(doc_id, ())}

    def total_frequency(self, token: str) -> int:
        return sum(self.terms[token].values())

    def stats(self) -> tuple[int, int, int]:
        """(term count, document count, size in bytes of the persisted JSON)."""
        return len(self.terms), len(self.docs), len(self.to_json().encode("utf-8"))

    def to_dict(self) -> dict:
        return {
            "docs": dict(sorted(self.docs.items())),
            "terms": {t: [[d, f] for d, f in sorted(self.terms[t].items())]
                      for t in sorted(self.terms)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "CentralIndex":
        index = cls()
        index.docs = {d: int(n) for d, n in data["docs"].items()}
        for token, plist in data["terms"].items():
            index.terms[token] = {d: int(f) for d, f in plist}
            for d, _ in plist:
                if d not in index.docs:
                    raise ValidationError(f"posting references unknown document {d}")
                index._doc_terms.setdefault(d, []).append(token)
        return index

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.to_json(), "utf-8")
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "CentralIndex":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))
