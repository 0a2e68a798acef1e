"""ETEA secure transmission toolkit.

A TEA-family 64-bit Feistel block cipher, a sealed-payload container
format, append-style steganography for video (or any) carrier files,
and a threaded TCP transfer protocol, plus an analysis suite that
demonstrates the cipher's equivalent-key and avalanche behavior.
"""

from .analysis import (
    AvalancheReport,
    EquivalentKeyReport,
    avalanche,
    equivalent_key_trials,
    equivalent_keys,
)
from .cipher import Block64, Key128, decrypt_block, encrypt_block, round_f
from .codec import SealedPayload, seal
from .codec import open as open_sealed
from .errors import EteaError
from .stego import StegoFile, embed, extract
from .transfer import FileServer, send_file, serve

__version__ = "0.1.0"

__all__ = [
    "AvalancheReport",
    "Block64",
    "EquivalentKeyReport",
    "EteaError",
    "FileServer",
    "Key128",
    "SealedPayload",
    "StegoFile",
    "avalanche",
    "decrypt_block",
    "embed",
    "encrypt_block",
    "equivalent_key_trials",
    "equivalent_keys",
    "extract",
    "open_sealed",
    "round_f",
    "seal",
    "send_file",
    "serve",
]
