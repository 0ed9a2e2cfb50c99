"""Topic-based sharding of the encrypted index.

The server never sees plaintext, so relatedness between two tokens comes from
how their frequencies co-occur across documents.  ``similarity`` gives the
co-occurrence score of a term against a centroid term: it is 0 for the
centroid itself, drops when the two share documents, and grows toward
``log10(1 + total(centroid) / total(term))`` when they share none.  A term
joins the centroid it is *closest* to (smallest score).

Shards are built in three steps:

1. nominate ``k`` centroids with little document overlap;
2. assign every term to its closest centroid, with each shard capped at
   ``ceil(growth * |I| / k)`` members (the furthest member is evicted and
   moves to its next closest shard with room);
3. re-center each shard on its "average term" (the member whose score is
   closest to the shard's mean score) and reassign, until nothing moves or
   ``max_iterations`` is reached.

The score is a KL divergence between the term's document distribution and
its mixture with the centroid's, so a centroid with little total frequency
looks close to everything.  By default re-centering therefore only
considers members spread over at least as many documents as the shard's
current centroid, and no term is adopted twice as a centroid (by any
shard), which rules out cycles; ``recenter="literal"`` drops the spread
restriction.

Each shard then gets an *abstract*: the most frequent term of every document
that contains the centroid.  The client decrypts abstracts to route queries.
"""
from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .index import CentralIndex, Posting

DEFAULT_K = 30
DEFAULT_GROWTH = 2.0
DEFAULT_MAX_ITERATIONS = 5


class ClusterError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterParams:
    k: int = DEFAULT_K
    shard_growth_factor: float = DEFAULT_GROWTH
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    abstract_terms_per_doc: int = 1
    recenter: str = "eligible"

    def __post_init__(self):
        if self.recenter not in ("eligible", "literal"):
            raise ClusterError("recenter must be 'eligible' or 'literal'")
        if self.k < 1:
            raise ClusterError("k must be >= 1")
        if not self.shard_growth_factor > 1:
            raise ClusterError("shard_growth_factor must be > 1")
        if self.max_iterations < 1:
            raise ClusterError("max_iterations must be >= 1")
        if self.abstract_terms_per_doc != 1:
            raise ClusterError("abstract_terms_per_doc is fixed at 1")

    def capacity(self, n_terms: int) -> float:
        """Per-shard member cap; ``inf`` when the growth factor is unbounded."""
        if math.isinf(self.shard_growth_factor):
            return math.inf
        return math.ceil(self.shard_growth_factor * n_terms / self.k)


@dataclass
class Shard:
    shard_id: int
    centroid: str
    members: dict[str, list[Posting]] = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "shard_id": self.shard_id,
            "centroid": self.centroid,
            "terms": {t: [[p.doc_id, p.frequency] for p in self.members[t]]
                      for t in sorted(self.members)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Shard":
        return cls(
            shard_id=int(data["shard_id"]),
            centroid=data["centroid"],
            members={t: [Posting(d, int(f)) for d, f in plist]
                     for t, plist in data["terms"].items()},
        )


@dataclass
class Abstract:
    shard_id: int
    tokens: list[str]

    def to_dict(self) -> dict:
        return {"shard_id": self.shard_id, "tokens": list(self.tokens)}


@dataclass
class Nomination:
    centroids: list[str]
    covered: set[str]
    # slots filled by plain size order after the uniqueness scan ran dry
    filled: int = 0


@dataclass
class ClusterResult:
    shards: list[Shard]
    abstracts: list[Abstract]
    nomination: Nomination
    iterations: int
    moved_last_iteration: int

    @property
    def converged(self) -> bool:
        return self.moved_last_iteration == 0


# -- equations --------------------------------------------------------------

def contribution(theta_tf, total_t) -> float:
    """Share of a term's total frequency that comes from one file."""
    if total_t <= 0:
        raise ClusterError("term total frequency must be positive")
    return theta_tf / total_t


def cluster_contribution(theta_tf, theta_gf, total_t, total_g) -> float:
    """Joint share of file ``f`` in the combined frequency of a term and a centroid."""
    if total_t + total_g <= 0:
        raise ClusterError("term and centroid totals are both zero")
    return (theta_tf + theta_gf) / (total_t + total_g)


def uniqueness(docs, covered) -> float:
    """Ratio of a term's documents outside ``covered`` to those inside it.

    With no overlap at all the ratio is infinite, which lets the very first
    candidate (when nothing is covered yet) be nominated.
    """
    dup = sum(1 for d in docs if d in covered)
    if dup == 0:
        return math.inf
    return (len(docs) - dup) / dup


def similarity(term: str, centroid: str, index: CentralIndex) -> float:
    """Co-occurrence score of ``term`` against ``centroid``; smaller is closer."""
    t_post = index.terms.get(term)
    g_post = index.terms.get(centroid)
    if not t_post:
        raise ClusterError("term has no postings")
    if not g_post:
        raise ClusterError("centroid has no postings")
    total_t = sum(t_post.values())
    total_g = sum(g_post.values())
    d = 0.0
    for f, theta in t_post.items():
        kappa = contribution(theta, total_t)
        joint = cluster_contribution(theta, g_post.get(f, 0), total_t, total_g)
        d += kappa * math.log10(kappa / joint)
    return d


# -- centroid nomination ------------------------------------------------------

def _size_order(index: CentralIndex) -> list[str]:
    return sorted(index.terms, key=lambda t: (-len(index.terms[t]), t))


def nominate_centroids(index: CentralIndex, k: int) -> Nomination:
    """Scan terms by descending document count and keep the ones whose
    documents are mostly not yet covered by earlier centroids."""
    if not index.terms:
        raise ClusterError("index has no terms")
    if k > len(index.terms):
        raise ClusterError(f"k={k} exceeds term count {len(index.terms)}")
    covered: set[str] = set()
    centroids: list[str] = []
    order = _size_order(index)
    for term in order:
        docs = index.terms[term]
        if uniqueness(docs, covered) >= 1:
            centroids.append(term)
            covered.update(docs)
            if len(centroids) >= k:
                return Nomination(centroids, covered)
    chosen = set(centroids)
    filled = 0
    for term in order:
        if len(centroids) >= k:
            break
        if term not in chosen:
            centroids.append(term)
            covered.update(index.terms[term])
            filled += 1
    return Nomination(centroids, covered, filled)


# -- vectorized scoring -------------------------------------------------------

class _Matrix:
    """Sparse term x document frequency table for batch similarity."""

    def __init__(self, index: CentralIndex):
        self.tokens = sorted(index.terms)
        self.tid = {t: i for i, t in enumerate(self.tokens)}
        doc_ids = sorted(index.docs)
        did = {d: i for i, d in enumerate(doc_ids)}
        rows, cols, vals = [], [], []
        for i, t in enumerate(self.tokens):
            for d, f in index.terms[t].items():
                rows.append(i)
                cols.append(did[d])
                vals.append(f)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=np.float64)
        self.n_terms = len(self.tokens)
        self.n_docs = len(doc_ids)
        self.totals = np.bincount(self.rows, weights=self.vals, minlength=self.n_terms)
        self.doc_count = np.bincount(self.rows, minlength=self.n_terms)
        self.kappa = self.vals / self.totals[self.rows]
        self.starts = np.searchsorted(self.rows, np.arange(self.n_terms + 1))

    def distances(self, g: int) -> np.ndarray:
        """Score of every term against centroid term ``g``."""
        dense = np.zeros(self.n_docs)
        lo, hi = self.starts[g], self.starts[g + 1]
        dense[self.cols[lo:hi]] = self.vals[lo:hi]
        joint = (self.vals + dense[self.cols]) / (self.totals[self.rows] + self.totals[g])
        terms = self.kappa * np.log10(self.kappa / joint)
        return np.bincount(self.rows, weights=terms, minlength=self.n_terms)


def _assign(order, centroids, dist, cap):
    """Capped closest-centroid assignment.  Returns shard index per term.

    ``dist`` is (k, n_terms).  Centroids are pinned to their own shards and
    never evicted.  When a term's closest shard is full it displaces that
    shard's furthest member if it is strictly closer; the displaced term is
    placed again right away.  Otherwise the term goes to the closest shard
    that still has room.
    """
    k, n = dist.shape
    shard_of = np.full(n, -1, dtype=np.int64)
    size = [0] * k
    heaps: list[list] = [[] for _ in range(k)]
    pinned = set(centroids)
    for s, c in enumerate(centroids):
        shard_of[c] = s
        size[s] = 1
    prefs = np.argsort(dist, axis=0, kind="stable")

    def place(t, pending):
        best = prefs[0, t]
        if size[best] < cap:
            target = best
        else:
            heap = heaps[best]
            while heap and shard_of[heap[0][2]] != best:
                heapq.heappop(heap)
            if heap and dist[best, t] < -heap[0][0]:
                _, _, out = heapq.heappop(heap)
                shard_of[out] = -1
                size[best] -= 1
                pending.append(out)
                target = best
            else:
                target = next(s for s in prefs[1:, t] if size[s] < cap)
        shard_of[t] = target
        size[target] += 1
        # max-heap on (distance, term order) so ties evict the later term
        heapq.heappush(heaps[target], (-dist[target, t], -t, t))

    for t in order:
        if t in pinned:
            continue
        pending = deque([t])
        while pending:
            place(pending.popleft(), pending)
    return shard_of


def _recenter(members, dist_row, tokens, eligible):
    """Member whose score is closest to the shard's mean score."""
    mean = dist_row[members].mean()
    pool = members[eligible[members]]
    gap = np.abs(dist_row[pool] - mean)
    best = min(range(len(pool)), key=lambda i: (gap[i], tokens[pool[i]]))
    return int(pool[best])


def _abstract(index: CentralIndex, centroid: str) -> list[str]:
    out: dict[str, None] = {}
    for doc in sorted(index.terms[centroid]):
        freqs = index.doc_terms(doc)
        top = min(freqs, key=lambda t: (-freqs[t], t))
        out.setdefault(top, None)
    return list(out)


def build_shards(index: CentralIndex, params: ClusterParams = ClusterParams()) -> ClusterResult:
    n_terms = len(index.terms)
    if n_terms < params.k:
        raise ClusterError(f"k={params.k} exceeds term count {n_terms}")
    nomination = nominate_centroids(index, params.k)
    cap = params.capacity(n_terms)

    m = _Matrix(index)
    order = [m.tid[t] for t in _size_order(index)]
    centroids = [m.tid[t] for t in nomination.centroids]
    dist = np.vstack([m.distances(g) for g in centroids])
    shard_of = _assign(order, centroids, dist, cap)

    literal = params.recenter == "literal"
    everything = np.ones(m.n_terms, dtype=bool)
    used = set(centroids)
    iterations = moved = 0
    while iterations < params.max_iterations:
        iterations += 1
        new = []
        for s in range(params.k):
            members = np.flatnonzero(shard_of == s)
            eligible = everything if literal else m.doc_count >= m.doc_count[centroids[s]]
            g = _recenter(members, dist[s], m.tokens, eligible)
            # never re-adopt a term that already served as a centroid of any
            # shard: breaks A -> B -> A cycles and shards trading centroids
            fresh = g not in used and g not in new
            new.append(g if g == centroids[s] or fresh else centroids[s])
        used.update(new)
        for s, g in enumerate(new):
            if g != centroids[s]:
                dist[s] = m.distances(g)
        centroids = new
        reassigned = _assign(order, centroids, dist, cap)
        moved = int(np.count_nonzero(reassigned != shard_of))
        shard_of = reassigned
        if moved == 0:
            break

    shards = []
    for s in range(params.k):
        members = {m.tokens[t]: index.lookup(m.tokens[t]) for t in np.flatnonzero(shard_of == s)}
        shards.append(Shard(shard_id=s, centroid=m.tokens[centroids[s]], members=members))
    abstracts = [Abstract(sh.shard_id, _abstract(index, sh.centroid)) for sh in shards]
    return ClusterResult(shards, abstracts, nomination, iterations, moved)


def shard_size_variance(shards) -> float:
    """Population variance of shard member counts."""
    sizes = np.array([len(s) for s in shards], dtype=np.float64)
    if sizes.size == 0:
        return 0.0
    return float(sizes.var())


# -- persistence ------------------------------------------------------------

def save_shards(directory, shards, abstracts) -> None:
    """Write ``shards/shard_<id>.json`` and ``abstracts.json`` under ``directory``."""
    directory = Path(directory)
    shard_dir = directory / "shards"
    shard_dir.mkdir(parents=True, exist_ok=True)
    for old in shard_dir.glob("shard_*.json"):
        old.unlink()
    for sh in shards:
        (shard_dir / f"shard_{sh.shard_id}.json").write_text(
            json.dumps(sh.to_dict(), separators=(",", ":")), "utf-8")
    (directory / "abstracts.json").write_text(
        json.dumps([a.to_dict() for a in abstracts], separators=(",", ":")), "utf-8")


def load_shards(directory):
    directory = Path(directory)
    shards = [Shard.from_dict(json.loads(p.read_text("utf-8")))
              for p in (directory / "shards").glob("shard_*.json")]
    shards.sort(key=lambda s: s.shard_id)
    raw = json.loads((directory / "abstracts.json").read_text("utf-8"))
    abstracts = [Abstract(int(a["shard_id"]), list(a["tokens"])) for a in raw]
    return shards, abstracts
