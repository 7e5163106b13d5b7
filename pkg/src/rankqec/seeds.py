"""Deterministic seed derivation, so parallel and serial runs agree."""

from __future__ import annotations

import hashlib


def derive_seed(master: int, name: str, index: int) -> int:
    """Stable 63-bit seed from ``(master, name, index)``."""
    h = hashlib.blake2b(f"{master}:{name}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") >> 1
