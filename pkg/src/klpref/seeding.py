"""Deterministic child-seed derivation.

Child seeds are the first eight bytes of a SHA-256 digest over
``master|index|role``, which keeps independent runs, evaluation sets,
and ground-truth sampling on collision-free streams.
"""

import hashlib

ROLE_TAGS = ("truth", "context-sampling", "learner", "eval-set")


def seed_split(master_seed: int, index: int, role: str) -> int:
    """Derive a 64-bit child seed for (master, index, role)."""
    if role not in ROLE_TAGS:
        raise ValueError(f"role must be one of {ROLE_TAGS}, got {role!r}")
    payload = f"{int(master_seed)}|{int(index)}|{role}".encode("ascii")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")
