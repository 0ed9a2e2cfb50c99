"""TREC-style average precision at 10 and small file readers for benchmarks."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

CUTOFF = 10
LEVELS = {"high": 1.0, "some": 0.5, "none": 0.0}


def tsap_at_10(ranked, judgments, query) -> float:
    """Sum of per-rank credit over the top 10, divided by 10.

    A highly relevant document at rank i earns 1/i, a somewhat relevant one
    1/(2i), anything else nothing.  Unjudged documents count as irrelevant.
    """
    total = 0.0
    for i, doc_id in enumerate(list(ranked)[:CUTOFF], 1):
        total += LEVELS[judgments.get((query, doc_id), "none")] / i
    return total / CUTOFF


def load_judgments(path) -> dict[tuple[str, str], str]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3 or row[2].strip() not in LEVELS:
                raise ValueError(f"{path}:{n}: expected query<TAB>doc_id<TAB>high|some|none")
            out[(row[0].strip(), row[1].strip())] = row[2].strip()
    return out


def load_queries(path) -> list[str]:
    return [q.strip() for q in Path(path).read_text("utf-8").splitlines() if q.strip()]


def pearson(x, y) -> float:
    return float(np.corrcoef(np.asarray(x, float), np.asarray(y, float))[0, 1])
