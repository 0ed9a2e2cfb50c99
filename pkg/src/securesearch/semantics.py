"""Offline semantic graph: a term taxonomy plus a related-terms table.

The taxonomy is a forest hung under a virtual root ``entity`` and drives
Wu-Palmer similarity for matching queries against shard abstracts.  The
related-terms table feeds query expansion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .crypto import normalize_term

ROOT = "entity"
MAX_DEPTH = 64


class GraphError(ValueError):
    pass


def _read(path, default_name):
    if path is None:
        return resources.files("securesearch.data").joinpath(default_name).read_text("utf-8")
    return Path(path).read_text("utf-8")


@dataclass
class SemanticGraph:
    parent: dict[str, str] = field(default_factory=dict)
    related: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.parent = {normalize_term(c): normalize_term(p) for c, p in self.parent.items()}
        self.related = {normalize_term(t): _clean_related(t, rel) for t, rel in self.related.items()}
        self._nodes = {ROOT} | set(self.parent) | set(self.parent.values())
        self._paths: dict[str, list[str]] = {}
        for term in self.parent:
            self._chain(term)

    @classmethod
    def load(cls, taxonomy_path=None, related_path=None) -> "SemanticGraph":
        """Load the two TSV files; ``None`` selects the bundled fixtures."""
        parent = {}
        for n, line in enumerate(_read(taxonomy_path, "taxonomy.tsv").splitlines(), 1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise GraphError(f"taxonomy line {n}: expected child<TAB>parent")
            parent[cols[0]] = cols[1]
        related = {}
        for n, line in enumerate(_read(related_path, "related.tsv").splitlines(), 1):
            if not line.strip():
                continue
            term, _, rest = line.partition("\t")
            related[term] = [r for r in rest.split(",") if r.strip()]
        return cls(parent, related)

    def _chain(self, term):
        """Path from ``term`` up to the root, inclusive.  Validates acyclicity."""
        if term in self._paths:
            return self._paths[term]
        path = [term]
        node = term
        while node != ROOT:
            node = self.parent.get(node, ROOT)
            if node in path:
                raise GraphError(f"cycle in taxonomy through {node!r}")
            path.append(node)
            if len(path) > MAX_DEPTH:
                raise GraphError(f"{term!r} is deeper than {MAX_DEPTH}")
        self._paths[term] = path
        return path

    def __contains__(self, term):
        return term in self._nodes

    def depth(self, term: str) -> int:
        return len(self._chain(term))

    def lcs(self, a: str, b: str) -> str:
        """Lowest common subsumer of two known terms."""
        ancestors = set(self._chain(a))
        return next(n for n in self._chain(b) if n in ancestors)

    def _word_similarity(self, a, b):
        if a not in self or b not in self:
            return 0.0
        if a == b:
            return 1.0
        common = self.lcs(a, b)
        return 2.0 * self.depth(common) / (self.depth(a) + self.depth(b))


def _clean_related(term, rel):
    key = normalize_term(term)
    out = []
    for r in rel:
        r = normalize_term(r)
        if r and r != key and r not in out:
            out.append(r)
    return out


def wu_palmer(g: SemanticGraph, a: str, b: str) -> float:
    """Wu-Palmer similarity with root depth 1; unknown terms score 0.

    A multi-word input that is not itself in the taxonomy is scored as the
    best match over its individual words.
    """
    a, b = normalize_term(a), normalize_term(b)
    left = [a] if a in g or " " not in a else a.split(" ")
    right = [b] if b in g or " " not in b else b.split(" ")
    return max(g._word_similarity(x, y) for x in left for y in right)


def related_terms(g: SemanticGraph, term: str) -> list[str]:
    return list(g.related.get(normalize_term(term), ()))
