"""
Keywords, key files and the central index
=========================================

Each document is reduced to a short list of phrases with their counts.  Only
the encrypted phrases and the plain counts reach the server, which folds them
into one inverted index.
"""
from securesearch import CentralIndex, Document, build_key_file, extract_keywords, load_stopwords
from securesearch import TermKey
from securesearch.synth import two_topic_corpus

stopwords = load_stopwords()
text = ("Armed robbery at the bank. The armed robbery suspect fled. "
        "Police report the robbery suspect was armed.")
doc = Document.from_text(text)
print("doc_id:", doc.doc_id, " length:", doc.length)

# phrases score by count times length; multi-word ones are also split into words
for term, freq in extract_keywords(doc, max_keywords=4, stopwords=stopwords):
    print(f"  {freq:2d}  {term}")

key = TermKey.generate()
kf = build_key_file(doc, key, 4, stopwords)
print(kf.to_json()[:160], "...")

# a small corpus: the index holds one posting per (token, document)
index = CentralIndex()
for _, body in two_topic_corpus(50, seed=0):
    index.ingest(build_key_file(Document.from_text(body), key, 20, stopwords))
terms, docs, size = index.stats()
print(f"{docs} documents, {terms} distinct tokens, index.json is {size} bytes")

# ingesting the same key file a second time changes nothing
index.ingest(kf)
once = index.to_json()
index.ingest(kf)
print("unchanged after re-upload:", index.to_json() == once)
