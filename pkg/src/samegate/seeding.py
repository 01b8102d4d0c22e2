import numpy as np


def derive_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``; depends only on ``(master_seed, index)``."""
    seq = np.random.SeedSequence(int(master_seed) & (2**64 - 1), spawn_key=(int(index),))
    return np.random.default_rng(seq)
