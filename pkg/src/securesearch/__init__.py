"""Searchable encrypted document store with topic-sharded indexing.

The client extracts keywords, encrypts them into deterministic tokens and
uploads them with the randomized-encrypted document.  The server builds an
inverted index over tokens, clusters it into topic shards by term
co-occurrence, and ranks documents with a weighted BM25 restricted to the
shards the client picked from decrypted shard abstracts.
"""
from .cluster import (Abstract, ClusterParams, ClusterResult, Shard, build_shards,
                      cluster_contribution, contribution, nominate_centroids,
                      shard_size_variance, similarity)
from .crypto import (Blob, DecryptionError, TermKey, decrypt_blob, detokenize, encrypt_blob,
                     normalize_term, tokenize)
from .evaluation import tsap_at_10
from .extract import Document, KeyFile, build_key_file, extract_keywords, load_stopwords
from .index import CentralIndex, Posting
from .query import (QuerySet, ShardChoice, Trapdoor, choose_shards, expand_query, make_trapdoor,
                    parse_query)
from .ranking import Candidates, RankParams, compile_candidates, dln, idf, rank
from .semantics import SemanticGraph, related_terms, wu_palmer
from .server import SearchServer

__version__ = "0.1.0"
