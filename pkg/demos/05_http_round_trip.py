"""
Client and server over HTTP
===========================

The same flow the command line tool runs: upload files, cluster, search,
fetch and decrypt, then score the results with TSAP@10.  The server runs
in-process here; ``securesearch serve STATE_DIR`` runs it for real.
"""
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from securesearch import SearchServer, SemanticGraph, TermKey, load_stopwords, tsap_at_10
from securesearch.api import create_app
from securesearch.client import Client
from securesearch.synth import two_topic_corpus

state = Path(tempfile.mkdtemp())
http = TestClient(create_app(SearchServer(state / "server")))
client = Client(TermKey.generate(), http, stopwords=load_stopwords(), graph=SemanticGraph.load())

topics = {}
for i, (topic, text) in enumerate(two_topic_corpus(30, seed=8)):
    path = state / f"report{i:02d}.txt"
    path.write_text(text)
    topics[client.upload_file(path)] = (topic, path)
print(len(topics), "documents uploaded;", sorted(p.name for p in (state / "server").iterdir()))

print(client.cluster(3))
# idf is taken over the matching documents only; a word found in more than
# half of them gets a negative weight, which flips the usual preference for
# documents that use it often
results = client.search("patrol officer", limit=10)
for doc_id, score in results:
    print(f"  {doc_id}  {score:8.4f}  {topics[doc_id][0]}")

# download and decrypt the best hit
best = results[0][0]
assert client.get(best) == topics[best][1].read_bytes()
print("decrypted", best, "matches the original file")

# judge crime documents as highly relevant and score the list
judgments = {("patrol officer", d): "high" for d, (t, _) in topics.items() if t == "crime"}
print("TSAP@10:", round(tsap_at_10([d for d, _ in results], judgments, "patrol officer"), 4))
# a fixed cost per document, so the ratio shrinks as documents get longer
stats = client.stats()
print("index overhead:", round(stats["index_bytes"] / stats["corpus_bytes"], 4))
