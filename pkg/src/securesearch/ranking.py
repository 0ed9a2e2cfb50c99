"""Weighted Okapi BM25 over the union of searched shards.

    score(d) = sum_i  idf(q_i) * f(q_i, d) * (k1 + 1) / (f(q_i, d) + k1 * dln(d)) * w_i

N, document frequencies and the mean length are taken over the candidate set
(documents in the searched shards matching at least one trapdoor token), not
over the whole corpus.  IDF is not clamped, so very common terms score
negatively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class RankParams:
    bm25_k1: float = 1.2
    bm25_b: float = 0.75

    def __post_init__(self):
        if not self.bm25_k1 > 0:
            raise ValueError("bm25_k1 must be > 0")
        if not 0 <= self.bm25_b <= 1:
            raise ValueError("bm25_b must be in [0, 1]")


@dataclass
class Candidates:
    docs: dict[str, dict[str, int]] = field(default_factory=dict)
    lengths: dict[str, int] = field(default_factory=dict)
    doc_freq: dict[str, int] = field(default_factory=dict)
    # postings held by the searched shards; a proxy for search work
    touched: int = 0

    @property
    def N(self) -> int:
        return len(self.docs)

    @property
    def delta(self) -> float:
        return sum(self.lengths[d] for d in self.docs) / len(self.docs)


def compile_candidates(shards, trapdoor, doc_lengths) -> Candidates:
    """Match trapdoor tokens against the union of ``shards``.

    ``trapdoor`` is an iterable of ``(token, weight)``; ``doc_lengths`` maps
    doc_id to length.  A token held by more than one shard is merged by the
    per-document max frequency.
    """
    union: dict[str, dict[str, int]] = {}
    touched = 0
    for shard in shards:
        for token, plist in shard.members.items():
            touched += len(plist)
            merged = union.setdefault(token, {})
            for p in plist:
                if p.frequency > merged.get(p.doc_id, 0):
                    merged[p.doc_id] = p.frequency

    cands = Candidates(touched=touched)
    for token, _ in trapdoor:
        plist = union.get(token)
        if not plist:
            continue
        cands.doc_freq[token] = len(plist)
        for doc_id, freq in plist.items():
            cands.docs.setdefault(doc_id, {})[token] = freq
    cands.lengths = {d: doc_lengths[d] for d in cands.docs}
    return cands


def idf(N: int, n: int) -> float:
    if N <= 0:
        raise ValueError("idf undefined for an empty collection")
    return math.log((N - n + 0.5) / (n + 0.5))


def dln(doc_len, delta, b) -> float:
    return 1 - b + b * doc_len / delta


def rank(cands: Candidates, trapdoor, params: RankParams = RankParams(), limit=None):
    """Score every candidate; returns ``[(doc_id, score)]`` best first."""
    if cands.N == 0:
        return []
    k1, b = params.bm25_k1, params.bm25_b
    N, delta = cands.N, cands.delta
    weights = [(t, w, idf(N, cands.doc_freq[t])) for t, w in trapdoor if t in cands.doc_freq]
    scored = []
    for doc_id in sorted(cands.docs):
        tf = cands.docs[doc_id]
        norm = k1 * dln(cands.lengths[doc_id], delta, b)
        score = 0.0
        for token, weight, token_idf in weights:
            f = tf.get(token, 0)
            if f:
                score += token_idf * (f * (k1 + 1)) / (f + norm) * weight
        scored.append((doc_id, score))
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored if limit is None else scored[:limit]
