"""Seeded random generators"""
import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """
    Build a generator on the counter-based Philox bit generator

    Every sampler in the toolkit takes an explicit seed and draws from its own
    generator, so no RNG state is shared between calls.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(int(seed)))
