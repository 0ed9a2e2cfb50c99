"""
Splitting the index into topic shards
=====================================

Terms that appear in the same documents end up in the same shard.  Nothing
here needs the plaintext: clustering only looks at which documents each
token occurs in and how often.
"""
import collections
import math

from securesearch import (ClusterParams, CentralIndex, Document, TermKey, build_key_file,
                          build_shards, detokenize, extract_keywords, load_stopwords,
                          shard_size_variance)
from securesearch.synth import two_topic_corpus

key, stopwords = TermKey.generate(), load_stopwords()
corpus = two_topic_corpus(60, seed=2, noise=0.02)
index = CentralIndex()
topic_of = collections.defaultdict(collections.Counter)
for topic, text in corpus:
    index.ingest(build_key_file(Document.from_text(text), key, 20, stopwords))
    for term, _ in extract_keywords(Document.from_text(text), 20, stopwords):
        topic_of[term][topic] += 1
print(len(index), "terms")

result = build_shards(index, ClusterParams(k=4))
print("nominated centroids:", [detokenize(key, t) for t in result.nomination.centroids])
print(f"stopped after {result.iterations} iteration(s), converged={result.converged}")

# which topic dominates each shard (the server never sees these labels)
for shard in result.shards:
    votes = collections.Counter()
    for tok in shard.members:
        votes.update(topic_of[detokenize(key, tok)])
    print(f"shard {shard.shard_id}: {len(shard):4d} terms, centroid "
          f"{detokenize(key, shard.centroid)!r:28} {dict(votes)}")

# the size cap keeps shards from swallowing the whole index
free = build_shards(index, ClusterParams(k=4, shard_growth_factor=math.inf))
print("sizes capped:  ", [len(s) for s in result.shards],
      f"variance {shard_size_variance(result.shards):.1f}")
print("sizes uncapped:", [len(s) for s in free.shards],
      f"variance {shard_size_variance(free.shards):.1f}")

# abstracts: the client decrypts these to decide where to search
for ab in result.abstracts:
    print(ab.shard_id, sorted({detokenize(key, t) for t in ab.tokens})[:8])
