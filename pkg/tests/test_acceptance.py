"""Exit criteria.  Each test prints one ``ACn PASS|FAIL: ...`` line.

Run just these with ``pytest -m acceptance -s`` (the lines are printed even
without ``-s``).
"""
import collections
import math
import random
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn

from securesearch import cli
from securesearch.api import create_app
from securesearch.cluster import (ClusterParams, build_shards, nominate_centroids,
                                  shard_size_variance, similarity, uniqueness)
from securesearch.crypto import (DecryptionError, TermKey, decrypt_blob, detokenize,
                                 encrypt_blob, tokenize)
from securesearch.evaluation import pearson, tsap_at_10
from securesearch.extract import Document, KeyFile, build_key_file, extract_keywords
from securesearch.index import CentralIndex
from securesearch.query import choose_shards, expand_query, make_trapdoor, parse_query
from securesearch.ranking import dln, idf
from securesearch.semantics import ROOT, SemanticGraph
from securesearch.server import SearchServer
from securesearch.synth import CRIME, NETWORK, topic_document, two_topic_corpus

from oracle import reference_rank

pytestmark = pytest.mark.acceptance


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nAC{n} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def random_queries(rng, count):
    out = []
    for i in range(count):
        vocab = CRIME if i % 2 else NETWORK
        size = rng.randint(1, 3)
        out.append(" ".join(rng.sample(vocab, size)))
    return out


@pytest.fixture(scope="module")
def big(key, stopwords):
    """200 two-topic documents, about 50 distinct terms each, on one server."""
    texts = [t for _, t in two_topic_corpus(200, seed=1, noise=0.02)]
    kfs = [build_key_file(Document.from_text(t), key, 45, stopwords) for t in texts]
    return kfs


# 1 -------------------------------------------------------------------------

def test_ac1_oracle_equivalence(capsys, key, stopwords, graph, big):
    start = time.perf_counter()
    server = SearchServer()
    for kf in big:
        server.upload(kf, b"")
    result = server.cluster(ClusterParams(k=10))
    all_ids = [s.shard_id for s in result.shards]
    worst, mismatched = 0.0, 0
    queries = random_queries(random.Random(2024), 20)
    for q in queries:
        td = make_trapdoor(expand_query(parse_query(q, stopwords), graph), key).entries
        got = server.search(td, all_ids, limit=len(big))
        want = reference_rank(server.index, td)
        if [d for d, _ in got] != [d for d, _ in want]:
            mismatched += 1
            continue
        worst = max([worst] + [abs(x - y) for (_, x), (_, y) in zip(got, want)])
    elapsed = time.perf_counter() - start
    per_doc = np.mean([len(kf.entries) for kf in big])
    ok = mismatched == 0 and worst <= 1e-9 and elapsed < 5.0
    report(capsys, 1, ok, f"{len(queries)} queries, {mismatched} order mismatches, "
           f"max |score diff| {worst:.2e}, {per_doc:.1f} terms/doc, {elapsed:.2f}s")


# 2 -------------------------------------------------------------------------

def test_ac2_pruning(capsys, key, stopwords, graph, big):
    server = SearchServer()
    for kf in big:
        server.upload(kf, b"")
    result = server.cluster(ClusterParams(k=10))
    all_ids = [s.shard_id for s in result.shards]
    full = sum(len(p) for p in server.index.terms.values())
    abstracts = [(a.shard_id, [detokenize(key, t) for t in a.tokens]) for a in server.abstracts()]
    ratios, subset_ok = [], True
    for q in random_queries(random.Random(7), 20):
        qs = expand_query(parse_query(q, stopwords), graph)
        td = make_trapdoor(qs, key).entries
        chosen = choose_shards(qs, abstracts, graph, 3).selected
        part = server.candidates(td, chosen)
        whole = server.candidates(td, all_ids)
        subset_ok &= set(part.docs) <= set(whole.docs)
        ratios.append(part.touched / full)
    mean = float(np.mean(ratios))
    report(capsys, 2, subset_ok and mean < 0.5,
           f"candidates subset: {subset_ok}; touched postings {mean:.1%} of {full} on average")


# 3 -------------------------------------------------------------------------

AC3_FIXTURES = [(n_docs, mk, seed) for n_docs, mk in [(12, 20), (60, 20), (240, 26)]
                for seed in range(10)]


def test_ac3_clustering_invariants(capsys, key, stopwords):
    problems = collections.Counter()
    sizes, runs = [], 0
    for n_docs, mk, seed in AC3_FIXTURES:
        idx = CentralIndex()
        for _, text in two_topic_corpus(n_docs, seed=seed, noise=0.02):
            idx.ingest(build_key_file(Document.from_text(text), key, mk, stopwords))
        n = len(idx)
        sizes.append(n)
        if not 100 <= n <= 1000:
            problems["fixture size"] += 1
        for k in (2, 5, 10):
            runs += 1
            capped = build_shards(idx, ClusterParams(k=k, shard_growth_factor=2.0))
            free = build_shards(idx, ClusterParams(k=k, shard_growth_factor=math.inf))
            seen = collections.Counter(t for s in capped.shards for t in s.members)
            if set(seen) != set(idx.terms) or max(seen.values()) != 1:
                problems["partition"] += 1
            if max(len(s) for s in capped.shards) > math.ceil(2 * n / k):
                problems["cap"] += 1
            if shard_size_variance(capped.shards) > shard_size_variance(free.shards):
                problems["variance"] += 1
            if not capped.converged or capped.iterations > 5:
                problems["convergence"] += 1
    detail = (f"{runs} runs on {len(AC3_FIXTURES)} fixtures of {min(sizes)}-{max(sizes)} terms; "
              f"violations {dict(problems) or 'none'}")
    report(capsys, 3, not problems, detail)


# 4 -------------------------------------------------------------------------

def _index(postings):
    per_doc = collections.defaultdict(list)
    for term, docs in postings.items():
        for d in docs:
            per_doc[d].append((term, 1))
    idx = CentralIndex()
    for d, entries in sorted(per_doc.items()):
        idx.ingest(KeyFile(d, 5, entries))
    return idx


def test_ac4_nomination(capsys):
    traced = nominate_centroids(_index({"w1": "abcd", "w2": "cd", "w3": "ef"}), 2).centroids
    first = uniqueness(dict.fromkeys("abcd", 1), set())
    boundary = uniqueness(dict.fromkeys("abcd", 1), set("cde"))
    edge = nominate_centroids(_index({"big": "cdegh", "edge": "abcd", "tail": "c"}), 2).centroids
    ok = (traced == ["w1", "w3"] and first == math.inf and boundary == 1.0
          and edge == ["big", "edge"])
    report(capsys, 4, ok, f"traced {traced}, first omega {first}, boundary omega {boundary} "
           f"-> {edge}")


# 5 -------------------------------------------------------------------------

def test_ac5_ranking_units(capsys, big):
    idx = CentralIndex()
    for kf in big:
        idx.ingest(kf)
    centroids = set()
    for k in (2, 5, 10):
        res = build_shards(idx, ClusterParams(k=k))
        centroids |= {s.centroid for s in res.shards} | set(res.nomination.centroids)
    self_d = max(abs(similarity(g, g, idx)) for g in centroids)
    a, b, c = idf(10, 5), idf(10, 3), dln(20.0, 10.0, 0.75)
    ok = a == 0.0 and abs(b - 0.762140) <= 1e-6 and c == 1.75 and self_d <= 1e-12
    report(capsys, 5, ok, f"idf(10,5)={a}, idf(10,3)={b:.6f}, dln={c}, "
           f"max |d(g,g)|={self_d:.1e} over {len(centroids)} centroids")


# 6 -------------------------------------------------------------------------

def test_ac6_tsap(capsys):
    ranked = [f"d{i}" for i in range(10)]
    all_high = tsap_at_10(ranked, {("q", d): "high" for d in ranked}, "q")
    top_one = tsap_at_10(ranked, {("q", "d0"): "high"}, "q")
    rng = random.Random(6)
    levels = ["none", "some", "high"]
    violations = 0
    for _ in range(1000):
        judged = {("q", d): rng.choice(levels) for d in ranked}
        before = tsap_at_10(ranked, judged, "q")
        d = rng.choice(ranked)
        judged[("q", d)] = levels[min(levels.index(judged[("q", d)]) + 1, 2)]
        violations += tsap_at_10(ranked, judged, "q") < before
    ok = abs(all_high - 0.2928968) <= 1e-6 and top_one == 0.1 and violations == 0
    report(capsys, 6, ok, f"all-high {all_high:.7f}, top-1 {top_one}, "
           f"{violations} monotonicity violations in 1000 upgrades")


# 7 -------------------------------------------------------------------------

def test_ac7_crypto(capsys):
    rng = random.Random(77)
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 -'éüßжπ中文"
    k1, k2 = TermKey.generate(), TermKey.generate()
    terms = {"".join(rng.choice(alphabet) for _ in range(rng.randint(1, 40))) for _ in range(10_500)}
    terms = sorted(terms)[:10_000]
    tokens = [tokenize(k1, t) for t in terms]
    round_trip = sum(detokenize(k1, tok) == t for tok, t in zip(tokens, terms))
    distinct_tokens = len(set(tokens))
    cross = 0
    for tok in tokens:
        try:
            detokenize(k2, tok)
        except DecryptionError:
            cross += 1
    blobs_ok, cts = 0, set()
    for _ in range(1000):
        data = rng.randbytes(rng.randint(0, 4096))
        blob = encrypt_blob(k1, data)
        cts.add(blob.ciphertext)
        blobs_ok += decrypt_blob(k1, blob) == data
    ok = (len(terms) == 10_000 and round_trip == 10_000 and distinct_tokens == 10_000
          and cross == 10_000 and blobs_ok == 1000 and len(cts) == 1000)
    report(capsys, 7, ok, f"term round-trips {round_trip}/10000, distinct tokens "
           f"{distinct_tokens}, cross-key errors {cross}/10000, blob round-trips {blobs_ok}/1000, "
           f"distinct ciphertexts {len(cts)}")


# 8 -------------------------------------------------------------------------

def test_ac8_index_overhead(capsys, key, stopwords):
    corpus_sizes, index_sizes = [], []
    for i, mb in enumerate((1, 2, 4, 8)):
        rng = np.random.default_rng(800 + i)
        idx, total, n = CentralIndex(), 0, 0
        while total < mb * 1_000_000:
            vocab, other = (CRIME, NETWORK) if n % 2 else (NETWORK, CRIME)
            text = topic_document(rng, vocab, n_words=8000, noise_vocab=other, noise=0.02)
            total += len(text.encode("utf-8"))
            idx.ingest(build_key_file(Document.from_text(text), key, 20, stopwords))
            n += 1
        corpus_sizes.append(total)
        index_sizes.append(idx.stats()[2])
    ratios = [i / c for i, c in zip(index_sizes, corpus_sizes)]
    r = pearson(corpus_sizes, index_sizes)
    ok = r >= 0.98 and max(ratios) <= 0.02
    report(capsys, 8, ok, f"pearson r={r:.4f}, overhead "
           + ", ".join(f"{c / 1e6:.1f}MB:{x:.2%}" for c, x in zip(corpus_sizes, ratios)))


# 9 -------------------------------------------------------------------------

def test_ac9_shard_choice(capsys, key, stopwords):
    graph = SemanticGraph(parent={"crime": ROOT, "network": ROOT,
                                  **{w: "crime" for w in CRIME if w != "crime"},
                                  **{w: "network" for w in NETWORK if w != "network"}})
    rng = random.Random(9)
    hits = 0
    for seed in range(100):
        idx, label = CentralIndex(), collections.defaultdict(collections.Counter)
        for topic, text in two_topic_corpus(40, seed=1000 + seed, noise=0.02):
            kf = build_key_file(Document.from_text(text), key, 20, stopwords)
            idx.ingest(kf)
            for tok, _ in kf.entries:
                label[tok][topic] += 1
        res = build_shards(idx, ClusterParams(k=2))
        mass = {s.shard_id: sum(label[t]["crime"] for t in s.members) for s in res.shards}
        target = max(mass, key=mass.get)
        abstracts = [(a.shard_id, [detokenize(key, t) for t in a.tokens]) for a in res.abstracts]
        qs = expand_query(parse_query(rng.choice(CRIME), stopwords), graph)
        hits += choose_shards(qs, abstracts, graph, 1).selected[0] == target
    report(capsys, 9, hits >= 95, f"topic shard chosen first in {hits}/100 regenerations")


# 10 ------------------------------------------------------------------------

def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_ac10_end_to_end(capsys, tmp_path, monkeypatch, stopwords):
    port = _free_port()
    config = uvicorn.Config(create_app(SearchServer(tmp_path / "state")), host="127.0.0.1",
                            port=port, log_level="warning")
    srv = uvicorn.Server(config)
    thread = threading.Thread(target=srv.run, daemon=True)

    docs = tmp_path / "docs"
    docs.mkdir()
    originals = {}
    for i, (_, text) in enumerate(two_topic_corpus(20, seed=10)):
        raw = (text + f"\nCase {i}: naïve café résumé\r\n").encode("utf-8")
        (docs / f"{i:02d}.txt").write_bytes(raw)
        originals[i] = raw
    first_text = originals[0].decode("utf-8")
    monkeypatch.setenv("CS_KEY_PATH", str(tmp_path / "key"))
    monkeypatch.setenv("CS_SERVER_URL", f"http://127.0.0.1:{port}")
    cli.main(["keygen", str(tmp_path / "key")])

    start = time.perf_counter()
    thread.start()
    while not srv.started:
        time.sleep(0.01)
    try:
        capsys.readouterr()
        steps = [cli.main(["upload", str(docs)])]
        ids = capsys.readouterr().out.split()
        steps.append(cli.main(["cluster", "--k", "3"]))
        capsys.readouterr()
        query = next(t for t, _ in extract_keywords(Document.from_text(first_text), 20, stopwords)
                     if " " not in t)
        steps.append(cli.main(["search", query]))
        found = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()
                 if "\t" in line]
        exact = 0
        for doc_id, i in zip(ids, sorted(originals)):
            out = tmp_path / f"got_{doc_id}"
            steps.append(cli.main(["get", doc_id, "--out", str(out)]))
            exact += out.read_bytes() == originals[i]
        elapsed = time.perf_counter() - start
    finally:
        srv.should_exit = True
        thread.join(timeout=5)
    ok = (all(s == 0 for s in steps) and len(ids) == 20 and exact == 20
          and ids[0] in found and set(found) <= set(ids) and elapsed < 10.0)
    report(capsys, 10, ok, f"all exit codes 0: {all(s == 0 for s in steps)}, {len(ids)} uploaded, "
           f"{len(found)} hits for {query!r}, "
           f"{exact}/20 byte-exact, {elapsed:.2f}s")
