"""Client-side keyword extraction and key file construction.

Candidates are contiguous 1-3 word phrases that do not cross a stopword.
Each candidate scores ``frequency * words``, so repeated phrases beat their
single words.  The best phrases are kept and every multi-word phrase is also
split into its words, so the index holds both the phrase and its parts.
"""
from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .crypto import TermKey, tokenize

DEFAULT_MAX_KEYWORDS = 20
MAX_PHRASE_WORDS = 3
DOC_ID_HEX = 16

_WORD = re.compile(r"[^\W_]+")


def words(text: str) -> list[str]:
    """Lowercased word tokens: maximal runs of Unicode letters and digits."""
    return _WORD.findall(text.lower())


def load_stopwords(path=None) -> frozenset[str]:
    """Read a newline-delimited stopword file; ``None`` loads the bundled list."""
    if path is None:
        text = resources.files("securesearch.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:DOC_ID_HEX]


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    length: int

    @classmethod
    def from_text(cls, text: str) -> "Document":
        return cls(doc_id=content_hash(text.encode("utf-8")), text=text, length=len(words(text)))

    @classmethod
    def from_file(cls, path) -> "Document":
        raw = Path(path).read_bytes()
        text = raw.decode("utf-8")
        return cls(doc_id=content_hash(raw), text=text, length=len(words(text)))


def _ngram_counts(tokens: list[str], stopwords) -> Counter:
    counts: Counter = Counter()
    run: list[str] = []
    for tok in tokens + [None]:
        if tok is not None and tok not in stopwords:
            run.append(tok)
            continue
        for n in range(1, MAX_PHRASE_WORDS + 1):
            for i in range(len(run) - n + 1):
                counts[" ".join(run[i:i + n])] += 1
        run = []
    return counts


def extract_keywords(doc: Document, max_keywords: int = DEFAULT_MAX_KEYWORDS,
                     stopwords=frozenset()) -> list[tuple[str, int]]:
    """Pick up to ``max_keywords`` phrases plus the words of multi-word phrases.

    Returns ``(term, frequency)`` pairs where frequency is the number of times
    the term occurs as a contiguous word sequence in the document.  Phrases
    come first in score order, followed by split components not already listed.
    """
    if max_keywords < 1:
        raise ValueError("max_keywords must be >= 1")
    counts = _ngram_counts(words(doc.text), stopwords)
    if not counts:
        return []
    ranked = sorted(counts, key=lambda p: (-counts[p] * (p.count(" ") + 1), p))
    chosen = ranked[:max_keywords]

    out = {p: counts[p] for p in chosen}
    components = sorted({w for p in chosen if " " in p for w in p.split(" ")} - out.keys())
    for w in components:
        out[w] = counts[w]
    return list(out.items())


@dataclass
class KeyFile:
    doc_id: str
    doc_length: int
    entries: list[tuple[str, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "doc_length": self.doc_length,
            "entries": [{"token": t, "freq": f} for t, f in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "KeyFile":
        return cls(
            doc_id=data["doc_id"],
            doc_length=data["doc_length"],
            entries=[(e["token"], e["freq"]) for e in data["entries"]],
        )


def build_key_file(doc: Document, key: TermKey, max_keywords: int = DEFAULT_MAX_KEYWORDS,
                   stopwords=frozenset()) -> KeyFile:
    entries = [(tokenize(key, term), freq)
               for term, freq in extract_keywords(doc, max_keywords, stopwords)]
    return KeyFile(doc_id=doc.doc_id, doc_length=doc.length, entries=entries)
