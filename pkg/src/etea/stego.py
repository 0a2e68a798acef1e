"""Hide a payload inside a carrier file by appending it behind a trailer.

Stego file layout: carrier bytes, payload bytes, payload length as an
unsigned 64-bit big-endian integer, then the 8-byte magic b"ETEASTEG".
The carrier prefix is preserved bit for bit, so a video carrier still
plays; common container formats stop at their own end and ignore
trailing bytes. Extraction is blind, the trailer alone locates the
payload.

This conceals from casual viewing only. The magic at a fixed offset
from the end of the file is trivially detectable by anyone who inspects
the bytes, and the file grows by the payload size. Use it to make a
payload travel inside an innocuous-looking file, not to survive an
examiner.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import EteaError

MAGIC = b"ETEASTEG"
TRAILER_SIZE = 16  # uint64 payload length + 8-byte magic

_LENGTH = struct.Struct(">Q")


class EmptyCarrier(EteaError):
    """Refusing to embed into an empty carrier."""


class AlreadyEmbedded(EteaError):
    """Carrier already ends with the stego trailer; pass force to nest."""


class NoMagic(EteaError):
    """No stego trailer present: a plain file, nothing hidden."""


class CorruptTrailer(EteaError):
    """Trailer present but its length field exceeds the file size."""


@dataclass(frozen=True)
class StegoFile:
    """A carrier with an appended payload; ``to_bytes`` gives the file."""

    carrier: bytes
    payload: bytes

    def to_bytes(self) -> bytes:
        return self.carrier + self.payload + _LENGTH.pack(len(self.payload)) + MAGIC


def embed(carrier: bytes, payload: bytes, force: bool = False) -> StegoFile:
    """Append ``payload`` and a trailer to ``carrier``.

    The carrier bytes are never modified. Embedding into a file that
    already carries a trailer is refused unless ``force`` is set, in
    which case extraction later returns the outermost payload.
    """
    carrier = bytes(carrier)
    if not carrier:
        raise EmptyCarrier("carrier is empty")
    if carrier.endswith(MAGIC) and not force:
        raise AlreadyEmbedded(
            "carrier already ends with the stego trailer; use force to embed anyway"
        )
    return StegoFile(carrier, bytes(payload))


def extract(stego: bytes) -> tuple[bytes, bytes]:
    """Recover ``(carrier, payload)`` from a stego file, blind.

    Raises NoMagic when the trailer is absent (including truncated
    files) and CorruptTrailer when the recorded length cannot fit.
    """
    data = bytes(stego)
    if len(data) < TRAILER_SIZE or not data.endswith(MAGIC):
        raise NoMagic("no stego trailer at end of file")
    (length,) = _LENGTH.unpack_from(data, len(data) - TRAILER_SIZE)
    room = len(data) - TRAILER_SIZE
    if length > room:
        raise CorruptTrailer(f"trailer claims {length} payload bytes, only {room} present")
    split = room - length
    return data[:split], data[split:room]
