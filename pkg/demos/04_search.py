"""
Query expansion, shard choice and ranking
=========================================

The client turns a query into weighted phrases, picks the shards whose
abstracts look most like the query, and sends only encrypted tokens.  The
server ranks documents with a weighted BM25 over those shards alone.
"""
from securesearch import (ClusterParams, Document, SearchServer, SemanticGraph, TermKey,
                          build_key_file, choose_shards, detokenize, expand_query, extract_keywords,
                          load_stopwords, make_trapdoor, parse_query)
from securesearch.synth import two_topic_corpus

key, stopwords, graph = TermKey.generate(), load_stopwords(), SemanticGraph.load()

qs = expand_query(parse_query("the armed robbery", stopwords), graph)
for e in qs:
    print(f"{e.weight:6.3f}  {e.origin:8} {e.text}")

server = SearchServer()
corpus = two_topic_corpus(120, seed=5, noise=0.02)
for _, text in corpus:
    server.upload(build_key_file(Document.from_text(text), key, 20, stopwords), b"")
server.cluster(ClusterParams(k=6))

# ask about the two most frequent words of one crime report
top = [t for t, _ in extract_keywords(Document.from_text(corpus[0][1]), 20, stopwords)
       if " " not in t][:2]
query = " ".join(top)
print("query:", query)

abstracts = [(a.shard_id, [detokenize(key, t) for t in a.tokens]) for a in server.abstracts()]
qs = expand_query(parse_query(query, stopwords), graph)
choice = choose_shards(qs, abstracts, graph, s=2)
print("shard scores:", [(sid, round(score, 3)) for sid, score in choice.ranked])

trapdoor = make_trapdoor(qs, key).entries
pruned = server.candidates(trapdoor, choice.selected)
full = server.candidates(trapdoor, list(range(6)))
print(f"searched {pruned.touched} of {full.touched} postings, "
      f"{pruned.N} of {full.N} matching documents")
# scores are negative when a query word occurs in most matching documents
for doc_id, score in server.search(trapdoor, choice.selected, limit=5):
    print(f"  {doc_id}  {score:8.4f}")
