"""Replicate seed derivation and per-replicate random streams.

Every replicate gets its own 64-bit seed ``seed_derive(master, index)``
before any work is scheduled, so results never depend on worker count or
completion order.  A replicate then owns independent named streams
(``walk``, ``balls``) spawned from that seed.
"""
from __future__ import annotations

import secrets

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# stream tags; appended to the seed entropy so streams never overlap
WALK, BALLS = 0, 1


def splitmix64(x: int) -> int:
    """SplitMix64 output finalizer (a bijection on 64-bit integers)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def seed_derive(master: int, replicate: int) -> int:
    """Seed of replicate ``replicate`` under ``master``.

    ``splitmix64(master ^ ((replicate + 1) * GOLDEN))``.  Each stage is a
    bijection of the 64-bit words, so for a fixed master distinct replicate
    indices below 2**64 never collide, and likewise distinct masters at a
    fixed index.
    """
    if replicate < 0:
        raise ValueError("replicate index must be nonnegative")
    return splitmix64((master & MASK64) ^ (((replicate + 1) * GOLDEN) & MASK64))


def entropy_seed() -> int:
    """A fresh nonzero 64-bit master seed from the OS."""
    while True:
        s = secrets.randbits(64)
        if s:
            return s


def stream(seed: int, tag: int) -> np.random.Generator:
    """PCG64 generator for stream ``tag`` of replicate seed ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & MASK64, tag])))
