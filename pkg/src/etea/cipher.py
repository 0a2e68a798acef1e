"""ETEA block cipher core: a TEA-family Feistel cipher.

Encrypts 64-bit blocks under a 128-bit key split into four 32-bit
sub-keys K0..K3. The cipher runs 32 cycles (64 Feistel rounds); each
cycle adds the round function of one half into the other, with integer
addition modulo 2**32 as the combining operator. K0/K1 feed the odd
rounds, K2/K3 the even rounds. The per-cycle constant is the i-th
multiple of 0x9E3779B9 (derived from the golden ratio), which keeps
the cycles decorrelated. Decryption walks the same schedule backwards,
subtracting instead of adding.

Blocks and keys serialize big-endian: a block is left||right (8 bytes),
a key is K0||K1||K2||K3 (16 bytes).

Known weakness, demonstrated empirically in :mod:`etea.analysis`:
flipping the top bits of K0 and K1 together (or of K2 and K3 together)
leaves every ciphertext unchanged, so keys come in equivalence classes
of four and the effective keyspace is 126 bits, not 128. Equivalent
keys are a documented property, not an error; no key is rejected.

All functions here are pure and operate on value types, so they are
safe to call from any number of threads.
"""

from __future__ import annotations

import secrets
import struct
from dataclasses import dataclass

import numpy as np

MASK32 = 0xFFFFFFFF
DELTA = 0x9E3779B9  # floor((sqrt(5) - 1) * 2**31)
CYCLES = 32
BLOCK_SIZE = 8  # bytes
KEY_SIZE = 16  # bytes

_BLOCK_STRUCT = struct.Struct(">2I")
_KEY_STRUCT = struct.Struct(">4I")


def delta_sums(cycles: int = CYCLES) -> tuple[int, ...]:
    """Key-schedule constants: i * DELTA mod 2**32 for cycle i in 1..cycles."""
    return tuple((i * DELTA) & MASK32 for i in range(1, cycles + 1))


DELTA_SUMS = delta_sums()


@dataclass(frozen=True)
class Key128:
    """Cipher key: four 32-bit words (K0, K1, K2, K3)."""

    words: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        words = tuple(self.words)
        if len(words) != 4 or not all(
            isinstance(w, int) and 0 <= w <= MASK32 for w in words
        ):
            raise ValueError("key must be four 32-bit words")
        object.__setattr__(self, "words", words)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Key128":
        if len(raw) != KEY_SIZE:
            raise ValueError(f"key must be {KEY_SIZE} bytes, got {len(raw)}")
        return cls(_KEY_STRUCT.unpack(raw))

    @classmethod
    def from_hex(cls, text: str) -> "Key128":
        """Parse 32 hex digits (surrounding/interior whitespace ignored)."""
        digits = "".join(text.split())
        if len(digits) != 32:
            raise ValueError(f"key must be exactly 32 hex digits, got {len(digits)}")
        return cls.from_bytes(bytes.fromhex(digits))

    @classmethod
    def random(cls) -> "Key128":
        return cls.from_bytes(secrets.token_bytes(KEY_SIZE))

    def to_bytes(self) -> bytes:
        return _KEY_STRUCT.pack(*self.words)

    def to_hex(self) -> str:
        return self.to_bytes().hex()


@dataclass(frozen=True)
class Block64:
    """Feistel state: a (left, right) pair of 32-bit words."""

    left: int
    right: int

    def __post_init__(self) -> None:
        if not (0 <= self.left <= MASK32 and 0 <= self.right <= MASK32):
            raise ValueError("block halves must be 32-bit words")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Block64":
        if len(raw) != BLOCK_SIZE:
            raise ValueError(f"block must be {BLOCK_SIZE} bytes, got {len(raw)}")
        left, right = _BLOCK_STRUCT.unpack(raw)
        return cls(left, right)

    def to_bytes(self) -> bytes:
        return _BLOCK_STRUCT.pack(self.left, self.right)


def round_f(m: int, k_a: int, k_b: int, delta_i: int) -> int:
    """Round function: ((m<<4)+k_a) XOR (m+delta_i) XOR ((m>>5)+k_b), mod 2**32."""
    return (
        ((((m << 4) & MASK32) + k_a) & MASK32)
        ^ ((m + delta_i) & MASK32)
        ^ (((m >> 5) + k_b) & MASK32)
    )


def encrypt_block(block: Block64, key: Key128, cycles: int = CYCLES) -> Block64:
    """Encrypt one block.

    ``cycles`` below the default weakens the cipher; the parameter exists
    for reduced-round diagnostics (see the avalanche baseline in
    :mod:`etea.analysis`), not for production use.
    """
    k0, k1, k2, k3 = key.words
    left, right = block.left, block.right
    sums = DELTA_SUMS if cycles == CYCLES else delta_sums(cycles)
    for s in sums:
        left = (left + round_f(right, k0, k1, s)) & MASK32
        right = (right + round_f(left, k2, k3, s)) & MASK32
    return Block64(left, right)


def decrypt_block(block: Block64, key: Key128, cycles: int = CYCLES) -> Block64:
    """Exact inverse of :func:`encrypt_block` for the same key and cycles."""
    k0, k1, k2, k3 = key.words
    left, right = block.left, block.right
    sums = DELTA_SUMS if cycles == CYCLES else delta_sums(cycles)
    for s in reversed(sums):
        right = (right - round_f(left, k2, k3, s)) & MASK32
        left = (left - round_f(right, k0, k1, s)) & MASK32
    return Block64(left, right)


def encrypt_word_arrays(
    lefts: np.ndarray, rights: np.ndarray, key: Key128, cycles: int = CYCLES
) -> tuple[np.ndarray, np.ndarray]:
    """Encrypt many blocks at once.

    ``lefts`` and ``rights`` are equal-length arrays of 32-bit block
    halves. Returns new uint32 arrays, bit-identical to applying
    :func:`encrypt_block` to each (left, right) pair; only the looping is
    vectorized, the arithmetic is the same.
    """
    k0, k1, k2, k3 = (np.uint32(w) for w in key.words)
    left = np.array(lefts, dtype=np.uint32)
    right = np.array(rights, dtype=np.uint32)
    for s in delta_sums(cycles):
        sv = np.uint32(s)
        left += ((right << 4) + k0) ^ (right + sv) ^ ((right >> 5) + k1)
        right += ((left << 4) + k2) ^ (left + sv) ^ ((left >> 5) + k3)
    return left, right


def decrypt_word_arrays(
    lefts: np.ndarray, rights: np.ndarray, key: Key128, cycles: int = CYCLES
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inverse of :func:`encrypt_word_arrays`."""
    k0, k1, k2, k3 = (np.uint32(w) for w in key.words)
    left = np.array(lefts, dtype=np.uint32)
    right = np.array(rights, dtype=np.uint32)
    for s in reversed(delta_sums(cycles)):
        sv = np.uint32(s)
        right -= ((left << 4) + k2) ^ (left + sv) ^ ((left >> 5) + k3)
        left -= ((right << 4) + k0) ^ (right + sv) ^ ((right >> 5) + k1)
    return left, right


def blocks_to_words(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Split an 8-byte-aligned byte string into (lefts, rights) word arrays."""
    if len(data) % BLOCK_SIZE:
        raise ValueError("data length must be a multiple of 8")
    words = np.frombuffer(data, dtype=">u4").astype(np.uint32)
    return words[0::2], words[1::2]


def words_to_blocks(lefts: np.ndarray, rights: np.ndarray) -> bytes:
    """Inverse of :func:`blocks_to_words`: interleave and serialize big-endian."""
    out = np.empty(lefts.size + rights.size, dtype=np.uint32)
    out[0::2] = lefts
    out[1::2] = rights
    return out.astype(">u4").tobytes()
