"""Keyed term tokens and document blob encryption.

Terms are turned into *tokens* with AES-SIV, a deterministic authenticated
cipher: the same term under the same key always gives the same token, so the
server can match tokens by equality, and only the key holder can invert them.
Document blobs use AES-GCM with a fresh random nonce per encryption.

Both sub-keys are derived from one master secret with HKDF, so a user only
has to keep a single key file.
"""
from __future__ import annotations

import base64
import binascii
import os
import re
import unicodedata
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, AESSIV
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

MIN_KEY_BYTES = 32
NONCE_BYTES = 12
TAG_BYTES = 16
# nonce + GCM tag; a stored blob is exactly this much larger than its plaintext
BLOB_OVERHEAD = NONCE_BYTES + TAG_BYTES
_PAD_BLOCK = 16

_WS = re.compile(r"\s+")
_TOKEN_CHARS = re.compile(r"^[A-Za-z0-9_-]+$")


class CryptoError(Exception):
    """Base class for key and cipher failures."""


class InvalidInputError(CryptoError, ValueError):
    pass


class DecryptionError(CryptoError):
    """A token or blob could not be decrypted (bad encoding, wrong key, tampering)."""


def normalize_term(term: str) -> str:
    """Lowercase, collapse whitespace runs to one space, and trim."""
    term = unicodedata.normalize("NFC", term)
    return _WS.sub(" ", term.lower()).strip()


@dataclass(frozen=True)
class TermKey:
    secret: bytes

    def __post_init__(self):
        if not isinstance(self.secret, (bytes, bytearray)):
            raise InvalidInputError("key secret must be bytes")
        if len(self.secret) < MIN_KEY_BYTES:
            raise InvalidInputError(f"key secret must be at least {MIN_KEY_BYTES} bytes")

    @classmethod
    def generate(cls) -> "TermKey":
        return cls(os.urandom(MIN_KEY_BYTES))

    @classmethod
    def load(cls, path) -> "TermKey":
        return cls(Path(path).read_bytes())

    def save(self, path) -> None:
        path = Path(path)
        path.write_bytes(self.secret)
        try:
            path.chmod(0o600)
        except OSError:
            pass

    def _derive(self, info: bytes, length: int) -> bytes:
        return HKDF(algorithm=hashes.SHA256(), length=length, salt=None, info=info).derive(
            bytes(self.secret)
        )

    @cached_property
    def _siv(self) -> AESSIV:
        return AESSIV(self._derive(b"securesearch/term-token", 64))

    @cached_property
    def _gcm(self) -> AESGCM:
        return AESGCM(self._derive(b"securesearch/document-blob", 32))

    def __repr__(self):
        return "TermKey(<secret>)"


@dataclass(frozen=True)
class Blob:
    ciphertext: bytes
    nonce: bytes

    def to_bytes(self) -> bytes:
        return self.nonce + self.ciphertext

    @classmethod
    def from_bytes(cls, data: bytes) -> "Blob":
        if len(data) < BLOB_OVERHEAD:
            raise DecryptionError("blob too short")
        return cls(ciphertext=bytes(data[NONCE_BYTES:]), nonce=bytes(data[:NONCE_BYTES]))


def _pad(data: bytes) -> bytes:
    # PKCS#7 to a 16-byte boundary so token length only reveals a length bucket
    n = _PAD_BLOCK - len(data) % _PAD_BLOCK
    return data + bytes([n]) * n


def _unpad(data: bytes) -> bytes:
    if not data or len(data) % _PAD_BLOCK:
        raise DecryptionError("bad padding")
    n = data[-1]
    if not 1 <= n <= _PAD_BLOCK or data[-n:] != bytes([n]) * n:
        raise DecryptionError("bad padding")
    return data[:-n]


def _b64encode(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def _b64decode(text: str) -> bytes:
    if not isinstance(text, str) or not _TOKEN_CHARS.match(text):
        raise DecryptionError("token is not unpadded url-safe base64")
    try:
        return base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))
    except (binascii.Error, ValueError) as exc:
        raise DecryptionError("token is not unpadded url-safe base64") from exc


def tokenize(key: TermKey, term: str) -> str:
    """Deterministically encrypt a normalized term into a printable token."""
    if not isinstance(term, str) or not term:
        raise InvalidInputError("term must be a non-empty string")
    ciphertext = key._siv.encrypt(_pad(term.encode("utf-8")), None)
    return _b64encode(ciphertext)


def detokenize(key: TermKey, token: str) -> str:
    raw = _b64decode(token)
    try:
        padded = key._siv.decrypt(raw, None)
    except (InvalidTag, ValueError) as exc:
        raise DecryptionError("token failed authentication") from exc
    try:
        return _unpad(padded).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecryptionError("token does not decode to text") from exc


def encrypt_blob(key: TermKey, plaintext: bytes) -> Blob:
    nonce = os.urandom(NONCE_BYTES)
    return Blob(ciphertext=key._gcm.encrypt(nonce, bytes(plaintext), None), nonce=nonce)


def decrypt_blob(key: TermKey, blob: Blob) -> bytes:
    try:
        return key._gcm.decrypt(blob.nonce, blob.ciphertext, None)
    except (InvalidTag, ValueError) as exc:
        raise DecryptionError("blob failed authentication") from exc
