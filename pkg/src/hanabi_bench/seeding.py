"""Deterministic seed derivation.

One root seed per game; every consumer of randomness (deal order, each
agent's internal stream, search streams) gets its own child seed so the
streams never perturb each other. Derivation uses sha256, never the
process-salted builtin hash.
"""

import hashlib
import random


def derive_seed(root: int, *labels) -> int:
    """Derive a 64-bit child seed from a root seed and a label path."""
    payload = repr((root,) + labels).encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def child_rng(root: int, *labels) -> random.Random:
    """A fresh RNG seeded from a derived child seed."""
    return random.Random(derive_seed(root, *labels))
