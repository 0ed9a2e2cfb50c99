"""
Term tokens and document blobs
==============================

Two kinds of ciphertext leave the client.  Keywords become deterministic
tokens so the server can match them without learning the words; whole
documents become randomized blobs that only the key holder can open.
"""
from securesearch import TermKey, decrypt_blob, detokenize, encrypt_blob, tokenize
from securesearch.crypto import DecryptionError

key = TermKey.generate()

# the same word always maps to the same token, different words never collide
for word in ["police", "police", "report", "armed robbery"]:
    print(f"{word!r:18} -> {tokenize(key, word)}")

# tokens decrypt back to the term
tok = tokenize(key, "armed robbery")
print("round trip:", detokenize(key, tok))

# a different key cannot read them
try:
    detokenize(TermKey.generate(), tok)
except DecryptionError as exc:
    print("other key:", exc)

# blobs are randomized: encrypting twice gives different bytes
doc = "Suspect fled the bank on foot.".encode()
a, b = encrypt_blob(key, doc), encrypt_blob(key, doc)
print("same ciphertext twice?", a.ciphertext == b.ciphertext)
print("decrypted:", decrypt_blob(key, a).decode())

# flipping one bit is caught by the authentication tag
raw = bytearray(a.to_bytes())
raw[-1] ^= 1
try:
    decrypt_blob(key, type(a).from_bytes(bytes(raw)))
except DecryptionError as exc:
    print("tampered:", exc)
