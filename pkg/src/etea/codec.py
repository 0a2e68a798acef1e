"""Sealed payload containers: padding, block encryption, framing, checksum.

Container layout, bit exact:

    magic    4 bytes  b"ETEA"
    version  1 byte   0x01 (also gates the block mode; v1 means ECB)
    length   8 bytes  original plaintext length, unsigned big-endian
    body     N bytes  ciphertext, N a positive multiple of 8
    crc      4 bytes  CRC-32 over everything preceding it, big-endian
                      (zlib/ethernet polynomial 0x04C11DB7, reflected)

Padding is pad-count-valued: the input grows to the next multiple of 8
bytes, every added byte holding the number of bytes added (1..8), with
a full extra block when the input is already aligned. That makes
stripping unambiguous and gives wrong-key decryption something to fail
against.

Two weaknesses are built in on purpose and must not be papered over:
each block is encrypted independently (ECB), so equal plaintext blocks
produce equal ciphertext blocks and coarse input structure survives
into the ciphertext; and the CRC detects accidental corruption only.
It is not a MAC, authenticates nothing, and anyone can recompute it
after tampering.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from .cipher import (
    BLOCK_SIZE,
    Key128,
    blocks_to_words,
    decrypt_word_arrays,
    encrypt_word_arrays,
    words_to_blocks,
)
from .errors import EteaError

MAGIC = b"ETEA"
VERSION = 1

_HEADER = struct.Struct(">4sBQ")  # magic, version, original_length
_CRC = struct.Struct(">I")
_MIN_SIZE = _HEADER.size + BLOCK_SIZE + _CRC.size


class BadMagic(EteaError):
    """The bytes are not a sealed payload this codec understands."""


class BadChecksum(EteaError):
    """The container CRC does not match: corruption or a truncated copy."""


class BadPadding(EteaError):
    """Decrypted padding is inconsistent: wrong key or tampered body."""


class LengthMismatch(EteaError):
    """Recorded plaintext length disagrees with the decrypted padding."""


def pad(data: bytes) -> bytes:
    """Pad to the next multiple of 8 bytes; pad byte value = pad count."""
    n = BLOCK_SIZE - len(data) % BLOCK_SIZE
    return data + bytes([n]) * n


def unpad(data: bytes) -> bytes:
    """Strip :func:`pad`; raises BadPadding when the tail is inconsistent."""
    if not data or len(data) % BLOCK_SIZE:
        raise BadPadding("padded data must be a positive multiple of 8 bytes")
    n = data[-1]
    if not 1 <= n <= BLOCK_SIZE or data[-n:] != bytes([n]) * n:
        raise BadPadding("pad bytes inconsistent (wrong key or tampering)")
    return data[:-n]


def encrypt_ecb(data: bytes, key: Key128) -> bytes:
    """Encrypt an 8-byte-aligned byte string, each block independently."""
    lefts, rights = blocks_to_words(data)
    return words_to_blocks(*encrypt_word_arrays(lefts, rights, key))


def decrypt_ecb(data: bytes, key: Key128) -> bytes:
    """Inverse of :func:`encrypt_ecb`."""
    lefts, rights = blocks_to_words(data)
    return words_to_blocks(*decrypt_word_arrays(lefts, rights, key))


@dataclass(frozen=True)
class SealedPayload:
    """Parsed container. Use :func:`seal` to build one, :func:`open` to read."""

    version: int
    original_length: int
    ciphertext: bytes
    crc: int

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SealedPayload":
        """Split a container into its fields.

        Only the identity gate (magic, minimum size) is enforced here so
        that :func:`open` can report corruption as BadChecksum rather
        than a misleading structural error. Everything else is validated
        there, after the CRC.
        """
        raw = bytes(raw)
        if len(raw) < _MIN_SIZE or raw[:4] != MAGIC:
            raise BadMagic("not a sealed payload")
        _, version, original_length = _HEADER.unpack_from(raw)
        (crc,) = _CRC.unpack_from(raw, len(raw) - _CRC.size)
        return cls(version, original_length, raw[_HEADER.size : -_CRC.size], crc)

    def header_and_body(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, self.original_length) + self.ciphertext

    def to_bytes(self) -> bytes:
        return self.header_and_body() + _CRC.pack(self.crc)


def seal(plaintext: bytes, key: Key128) -> SealedPayload:
    """Pad and encrypt ``plaintext`` into a framed container."""
    if len(plaintext) >= 1 << 63:
        raise ValueError("plaintext too large to seal")
    ciphertext = encrypt_ecb(pad(bytes(plaintext)), key)
    body = _HEADER.pack(MAGIC, VERSION, len(plaintext)) + ciphertext
    return SealedPayload(VERSION, len(plaintext), ciphertext, zlib.crc32(body))


def open(sealed: SealedPayload | bytes, key: Key128) -> bytes:
    """Verify, decrypt and unpad a container; returns the original bytes.

    Raises BadMagic, BadChecksum, BadPadding or LengthMismatch. A wrong
    key almost always surfaces as BadPadding; with probability about
    2**-8n (n = pad length) garbage decrypts to plausible padding, in
    which case the length check usually catches it. There is no
    authentication here, only error detection.
    """
    if not isinstance(sealed, SealedPayload):
        sealed = SealedPayload.from_bytes(sealed)
    if zlib.crc32(sealed.header_and_body()) != sealed.crc:
        raise BadChecksum("container checksum mismatch")
    if sealed.version != VERSION:
        raise BadMagic(f"unsupported container version {sealed.version}")
    ciphertext = sealed.ciphertext
    if len(ciphertext) < BLOCK_SIZE or len(ciphertext) % BLOCK_SIZE:
        raise LengthMismatch("ciphertext length is not a positive multiple of 8")
    plaintext = unpad(decrypt_ecb(ciphertext, key))
    if len(plaintext) != sealed.original_length:
        raise LengthMismatch(
            f"container records {sealed.original_length} plaintext bytes, "
            f"padding yields {len(plaintext)}"
        )
    return plaintext
