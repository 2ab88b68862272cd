"""Counter-based random streams keyed by (seed, chunk index).

Sample ``i`` of a run always lives in chunk ``i // CHUNK_SIZE``, and the
chunk's generator is a Philox stream keyed by ``(seed, chunk)``.  Results
therefore depend only on the seed, never on how chunks are spread over
workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    key = np.array([int(seed) & _MASK64, int(chunk) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def chunks(total: int, chunk_size: int = CHUNK_SIZE):
    """Yield ``(chunk_index, size)`` covering ``total`` samples."""
    for index, start in enumerate(range(0, total, chunk_size)):
        yield index, min(chunk_size, total - start)


def map_chunks(fn, seed: int, total: int, workers: int = 1, chunk_size: int = CHUNK_SIZE):
    """Apply ``fn(generator, size)`` to every chunk; results come back in chunk order."""
    jobs = list(chunks(total, chunk_size))

    def run(job):
        index, size = job
        return fn(chunk_generator(seed, index), size)

    if workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def uniform_sphere(gen: np.random.Generator, size: int) -> np.ndarray:
    """``size`` x 3 array of points uniform on the unit sphere (z uniform, azimuth uniform)."""
    u = gen.random((size, 2))
    z = 2.0 * u[:, 0] - 1.0
    az = 2.0 * np.pi * u[:, 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack((r * np.cos(az), r * np.sin(az), z))
