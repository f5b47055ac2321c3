"""Counter-based seed derivation.

Every run gets an independent seed derived from the master seed and the
run index through splitmix64, so batch results are identical regardless
of how runs are distributed over workers.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(seed: int, counter: int = 0) -> int:
    """One splitmix64 output for (seed, counter), a 64-bit integer."""
    z = (seed + 0x9E3779B97F4A7C15 * (counter + 1)) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def run_seed(master_seed: int, run_index: int) -> int:
    return splitmix64(master_seed & MASK64, run_index)


def stream_seed(run_seed_value: int, stream: int) -> int:
    """Per-run sub-streams: 1 = environment, 2 = scheduler, 3 = algorithm."""
    return splitmix64(run_seed_value, stream)
