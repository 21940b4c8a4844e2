"""Seeded RNG stream derivation used by every randomized component.

One master seed fans out into independent child streams through
sha256("{seed}:{label}:{index}"). Each trial, session, or node owns its
own stream, so results never depend on scheduling or iteration order.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def child_seed(master: int, label: str, index: int = 0) -> int:
    """64-bit child seed for (master, label, index)."""
    digest = hashlib.sha256(f"{master}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def stream(master: int, label: str, index: int = 0) -> random.Random:
    return random.Random(child_seed(master, label, index))


def np_stream(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, label, index))
