"""Seeded, chunk-splittable standard normal streams.

Draws are produced in fixed chunks of ``CHUNK_SIZE`` rows. Chunk ``c`` of a
stream seeded with ``seed`` always uses the bit generator keyed by
``SeedSequence(seed, spawn_key=(c,))``, so a batch is the same no matter how many
workers produce it.

Normal variates use the Box-Muller transform on pairs of uniforms. Every normal
costs exactly one uniform, which keeps substreams aligned (no rejection loop).
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import UnknownGeneratorError

CHUNK_SIZE = 65536
ENV_VAR = "CHI2GEO_GENERATOR"
DEFAULT_GENERATOR = "philox4x64-boxmuller-v1"

_BIT_GENERATORS = {
    "philox4x64-boxmuller-v1": np.random.Philox,
    "pcg64-boxmuller-v1": np.random.PCG64,
}

SEED_MAX = 2**64 - 1


def available_generators():
    return sorted(_BIT_GENERATORS)


def resolve_generator_id(generator_id=None):
    """Pick the generator: explicit argument, then $CHI2GEO_GENERATOR, then default."""
    gid = generator_id or os.environ.get(ENV_VAR) or DEFAULT_GENERATOR
    if gid not in _BIT_GENERATORS:
        raise UnknownGeneratorError(
            f"unknown generator {gid!r}; choose one of {', '.join(available_generators())}"
        )
    return gid


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def substream(seed, chunk, generator_id):
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(chunk),))
    return np.random.Generator(_BIT_GENERATORS[generator_id](ss))


def box_muller(gen, size):
    pairs = (size + 1) // 2
    u = gen.random((2, pairs))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))  # 1 - u in (0, 1]
    angle = 2.0 * np.pi * u[1]
    return np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:size]


def standard_normals(seed, count, width, generator_id=None, workers=1):
    """A ``(count, width)`` array of independent N(0, 1) draws."""
    gid = resolve_generator_id(generator_id)
    count, width = int(count), int(width)
    out = np.empty((count, width))
    if count == 0 or width == 0:
        return out
    starts = range(0, count, CHUNK_SIZE)

    def fill(start):
        rows = min(CHUNK_SIZE, count - start)
        gen = substream(seed, start // CHUNK_SIZE, gid)
        out[start:start + rows] = box_muller(gen, rows * width).reshape(rows, width)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)
    return out
