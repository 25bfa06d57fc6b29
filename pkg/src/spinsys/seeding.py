"""Counter-based seed derivation.

A run has one base seed.  Each module (stream) gets
``stream_seed(base, name)``, a 48-bit value hashed from the pair, and replica
``i`` of that stream uses ``stream_seed(base, name) + i``.  Seeds depend only
on (base, name, i), never on scheduling, so the number of worker processes
cannot change any result.
"""

from __future__ import annotations

import hashlib


def stream_seed(base: int, name: str) -> int:
    digest = hashlib.blake2b(f"{int(base)}:{name}".encode(), digest_size=6).digest()
    return int.from_bytes(digest, "big")


def replica_seed(base: int, name: str, index: int) -> int:
    return stream_seed(base, name) + int(index)
