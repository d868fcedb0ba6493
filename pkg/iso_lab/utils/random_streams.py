"""
Counter-based random streams

Each draw site gets its own Philox generator keyed by (seed, tag) with the
counter set from (round, player), so a draw depends only on its coordinates and
never on execution order.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

CONTEXT_TAG = 1
NOISE_TAG = 2
RANDOM_PREDICTION_TAG = 3


def stream(seed: int, tag: int, round_index: int, player: int = 0) -> np.random.Generator:
    """
    Return the generator for one (seed, tag, round, player) coordinate

    Args:
        seed: 64-bit seed (masked)
        tag: Stream family, one of the *_TAG constants
        round_index: 0-based round
        player: Player index, 0 for streams not tied to a player
    """
    key = np.array([seed & _MASK64, tag & _MASK64], dtype=np.uint64)
    # word 0 is the one Philox increments while drawing; coordinates live above it
    counter = np.array([0, round_index & _MASK64, player & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def derive_seed(*parts: int) -> int:
    """Mix several integers into one 64-bit seed"""
    sequence = np.random.SeedSequence([int(p) & _MASK64 for p in parts])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
