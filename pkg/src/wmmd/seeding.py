"""Seed derivation for independent, order-free random streams.

Replicated computations (Monte-Carlo replicates, per-iteration batches)
each get their own RNG seeded by ``derive_seed(master, index)``.  The
derivation is a splitmix64 finalization of ``master + index``, so the
streams are decorrelated and the result of replicate ``index`` does not
depend on scheduling or thread count.
"""

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output step for a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(seed: int, index: int) -> int:
    """Seed for stream ``index`` derived from a master ``seed``."""
    return splitmix64((int(seed) + int(index)) & _MASK)
