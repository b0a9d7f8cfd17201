"""Counter-based random streams.

All randomness comes from Philox4x64-10 (numpy's ``Philox`` bit generator)
keyed by ``(seed, stream)``. Word ``i`` of a stream is the ``i % 4``-th output
of the block at counter ``i // 4``, so any range of a stream can be generated
independently of the words before it.

* uniform: ``(word >> 11) * 2**-53`` in ``[0, 1)``
* normal ``k``: Box-Muller on words ``2k`` and ``2k + 1``,
  ``sqrt(-2 ln(1 - u0)) * cos(2 pi u1)``
"""

from __future__ import annotations

import numpy as np

_TWO_M53 = 2.0**-53
_U64 = (1 << 64) - 1


def _check(seed: int, stream: int) -> np.ndarray:
    if not (0 <= seed <= _U64 and 0 <= stream <= _U64):
        raise ValueError("seed and stream must be unsigned 64-bit integers")
    # an explicit uint64 array: numpy would route Python ints >= 2**63 through float
    return np.array([int(seed), int(stream)], dtype=np.uint64)


def raw_words(seed: int, stream: int, first: int, count: int) -> np.ndarray:
    """Words ``first .. first + count - 1`` of stream ``(seed, stream)``."""
    if first < 0 or count < 0:
        raise ValueError("first and count must be non-negative")
    block, skip = divmod(int(first), 4)
    gen = np.random.Philox(key=_check(seed, stream), counter=np.array([block, 0, 0, 0], dtype=np.uint64))
    return gen.random_raw(skip + int(count))[skip:]


def uniforms(seed: int, stream: int, first: int, count: int) -> np.ndarray:
    return (raw_words(seed, stream, first, count) >> np.uint64(11)) * _TWO_M53


def normals(seed: int, stream: int, first: int, count: int) -> np.ndarray:
    """Standard normal draws ``first .. first + count - 1`` of a stream."""
    u = uniforms(seed, stream, 2 * first, 2 * count)
    radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    return radius * np.cos(2.0 * np.pi * u[1::2])
