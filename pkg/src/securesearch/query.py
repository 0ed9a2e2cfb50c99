"""Client-side query pipeline: parse, expand, weight, encrypt, route.

Weights: the cleaned query gets 1; each of its sub-phrases gets ``1/n`` for
an ``n``-word query; each term related to an element ``e`` gets
``weight(e) / m`` where ``m`` is how many related terms ``e`` has.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .crypto import TermKey, tokenize
from .extract import words
from .semantics import SemanticGraph, related_terms, wu_palmer

ORIGINAL, PART, DERIVED = "original", "part", "derived"
DEFAULT_SHARDS_TO_SEARCH = 3


class InvalidQueryError(ValueError):
    pass


@dataclass(frozen=True)
class QueryElement:
    text: str
    weight: float
    origin: str


@dataclass
class QuerySet:
    elements: list[QueryElement] = field(default_factory=list)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def original(self) -> QueryElement:
        return next(e for e in self.elements if e.origin == ORIGINAL)

    def routing_words(self) -> list[str]:
        """Single-word elements of the query itself (not expansions)."""
        return [e.text for e in self.elements if e.origin != DERIVED and " " not in e.text]


@dataclass(frozen=True)
class Trapdoor:
    entries: tuple[tuple[str, float], ...]

    def __len__(self):
        return len(self.entries)

    def to_wire(self) -> list[dict]:
        return [{"token": t, "weight": w} for t, w in self.entries]


@dataclass
class ShardChoice:
    ranked: list[tuple[int, float]]
    selected: list[int]


def parse_query(q: str, stopwords=frozenset()) -> list[str]:
    """Cleaned query followed by all of its contiguous proper sub-phrases."""
    content = [w for w in words(q) if w not in stopwords]
    if not content:
        raise InvalidQueryError("query is empty after stopword removal")
    n = len(content)
    out = [" ".join(content)]
    for size in range(1, n):
        for i in range(n - size + 1):
            phrase = " ".join(content[i:i + size])
            if phrase not in out:
                out.append(phrase)
    return out


def expand_query(parsed: list[str], g: SemanticGraph | None = None) -> QuerySet:
    q, parts = parsed[0], parsed[1:]
    n = q.count(" ") + 1
    weights: dict[str, tuple[float, str]] = {q: (1.0, ORIGINAL)}

    def add(text, weight, origin):
        old = weights.get(text)
        if old is None or weight > old[0]:
            weights[text] = (weight, origin)

    for p in parts:
        add(p, 1.0 / n, PART)
    if g is not None:
        for base, base_weight in [(q, 1.0)] + [(p, 1.0 / n) for p in parts]:
            rel = related_terms(g, base)
            for r in rel:
                if r != q:
                    add(r, base_weight / len(rel), DERIVED)
    return QuerySet([QueryElement(t, w, o) for t, (w, o) in weights.items()])


def make_trapdoor(qs: QuerySet, key: TermKey) -> Trapdoor:
    return Trapdoor(tuple((tokenize(key, e.text), e.weight) for e in qs))


def choose_shards(qs: QuerySet, abstracts, g: SemanticGraph, s: int = DEFAULT_SHARDS_TO_SEARCH) -> ShardChoice:
    """Rank shards by how close their decrypted abstracts are to the query.

    ``abstracts`` is a sequence of ``(shard_id, terms)``.  A shard's score is
    the mean, over the query's single words, of the best Wu-Palmer match
    among the abstract's terms.
    """
    abstracts = list(abstracts)
    if not abstracts:
        raise ValueError("no abstracts to choose from")
    if s < 1:
        raise ValueError("s must be >= 1")
    qwords = qs.routing_words()
    scored = []
    for shard_id, terms in abstracts:
        terms = list(terms)
        if not qwords or not terms:
            scored.append((shard_id, 0.0))
            continue
        best = [max(wu_palmer(g, w, a) for a in terms) for w in qwords]
        scored.append((shard_id, sum(best) / len(best)))
    scored.sort(key=lambda x: (-x[1], x[0]))
    return ShardChoice(ranked=scored, selected=[sid for sid, _ in scored[:s]])
