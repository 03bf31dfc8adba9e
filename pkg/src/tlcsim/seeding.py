"""Named RNG streams derived from one root seed.

Every source of randomness in the package (vehicle spawning, epsilon-greedy
draws, weight init, replay sampling, random policies) pulls from its own
named stream so that changing how one subsystem consumes randomness never
perturbs the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(name) -> int:
    """Stable 64-bit key for a stream name (portable across platforms)."""
    digest = hashlib.sha256(str(name).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def named_stream(seed: int, *names) -> np.random.Generator:
    """PCG64 generator for the stream identified by (seed, *names)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(stream_key(n) for n in names)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
