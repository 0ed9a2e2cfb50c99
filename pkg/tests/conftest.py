import pytest
from fastapi.testclient import TestClient

from securesearch import CentralIndex, TermKey, build_key_file, load_stopwords
from securesearch.api import create_app
from securesearch.client import Client
from securesearch.extract import Document
from securesearch.semantics import SemanticGraph
from securesearch.server import SearchServer
from securesearch.synth import two_topic_corpus


@pytest.fixture(scope="session")
def key():
    return TermKey(b"\x07" * 32)


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture(scope="session")
def graph():
    return SemanticGraph.load()


def build_index(texts, key, stopwords, max_keywords=20):
    idx = CentralIndex()
    for text in texts:
        idx.ingest(build_key_file(Document.from_text(text), key, max_keywords, stopwords))
    return idx


@pytest.fixture(scope="session")
def corpus():
    return two_topic_corpus(40, seed=3, noise=0.02)


@pytest.fixture(scope="session")
def corpus_index(corpus, key, stopwords):
    return build_index([t for _, t in corpus], key, stopwords)


@pytest.fixture
def server(tmp_path):
    return SearchServer(tmp_path / "state")


@pytest.fixture
def http(server):
    with TestClient(create_app(server)) as c:
        yield c


@pytest.fixture
def client(key, http, stopwords, graph):
    return Client(key, http, stopwords=stopwords, graph=graph)
