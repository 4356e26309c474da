"""Counter-based random streams (Philox4x32-10).

Every draw is a pure function of ``(seed, substream_index, draw_position)``,
so a block of replications can be generated in one vectorised call and
still reproduce, bit for bit, what a one-replication-at-a-time loop would
produce.  Replication ``i`` of a Monte-Carlo run uses substream ``i``.
"""
from __future__ import annotations

import hashlib

import numpy as np
from scipy.special import gammaincinv

from ..errors import UsageError

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_TWO53 = 9007199254740992.0
_U64 = (1 << 64) - 1


def philox4x32(ctr, key, rounds: int = 10):
    """Philox4x32 bijection.

    ``ctr`` is a sequence of four integer arrays (32-bit values, any common
    shape) and ``key`` a pair of 32-bit ints.  Returns four uint64 arrays
    holding the 32-bit output words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in ctr)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ np.uint64(k0),
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ np.uint64(k1),
            p0 & _MASK32,
        )
    return c0, c1, c2, c3


def _words_to_unit(a, b):
    # 53-bit double strictly inside (0, 1)
    hi = (a >> np.uint64(5)).astype(np.float64)
    lo = (b >> np.uint64(6)).astype(np.float64)
    return (hi * 67108864.0 + lo + 0.5) / _TWO53


def _uniform_pairs(seed: int, substreams: np.ndarray, block_start: int, n_blocks: int):
    """Uniforms of shape (len(substreams), 2 * n_blocks)."""
    sub = np.asarray(substreams, dtype=np.uint64)[:, None]
    j = np.arange(block_start, block_start + n_blocks, dtype=np.uint64)[None, :]
    shape = (sub.shape[0], n_blocks)
    ctr = (
        np.broadcast_to(j & _MASK32, shape),
        np.broadcast_to(j >> np.uint64(32), shape),
        np.broadcast_to(sub & _MASK32, shape),
        np.broadcast_to(sub >> np.uint64(32), shape),
    )
    key = (seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF)
    x0, x1, x2, x3 = philox4x32(ctr, key)
    out = np.empty((shape[0], 2 * n_blocks))
    out[:, 0::2] = _words_to_unit(x0, x1)
    out[:, 1::2] = _words_to_unit(x2, x3)
    return out


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _U64:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class _Draws:
    """Shared drawing logic over a set of substreams with a common cursor."""

    def __init__(self, seed: int, substreams: np.ndarray):
        self.seed = _check_seed(seed)
        self._subs = np.asarray(substreams, dtype=np.uint64)
        self._cursor = 0  # next unused Philox block

    def _take(self, k: int) -> np.ndarray:
        k = int(k)
        if k < 0:
            raise UsageError("number of draws must be nonnegative")
        n_blocks = (k + 1) // 2
        u = _uniform_pairs(self.seed, self._subs, self._cursor, n_blocks)
        self._cursor += n_blocks
        return u[:, :k]

    def _uniform(self, k):
        return self._take(k)

    def _normal(self, k):
        n_blocks = (int(k) + 1) // 2
        u = self._take(2 * n_blocks)
        r = np.sqrt(-2.0 * np.log(u[:, 0::2]))
        t = 2.0 * np.pi * u[:, 1::2]
        z = np.empty_like(u)
        z[:, 0::2] = r * np.cos(t)
        z[:, 1::2] = r * np.sin(t)
        return z[:, :k]

    def _gamma(self, shape, k):
        # inverse-CDF keeps the draw count fixed (one uniform per variate)
        return gammaincinv(shape, self._take(k))


class RandomStream(_Draws):
    """A single substream; draws advance an internal cursor.

    Two streams with equal ``(seed, substream_index)`` produce identical
    sequences no matter what other streams are consumed in between.
    """

    def __init__(self, seed: int, substream_index: int = 0):
        idx = int(substream_index)
        if not 0 <= idx <= _U64:
            raise UsageError(f"substream_index must be a 64-bit unsigned integer, got {idx}")
        super().__init__(seed, np.array([idx], dtype=np.uint64))
        self.substream_index = idx

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, substream_index={self.substream_index})"

    def substream(self, index: int) -> RandomStream:
        return RandomStream(self.seed, index)

    def derive(self, label: str) -> RandomStream:
        """Independent stream for a named sub-experiment."""
        h = hashlib.blake2b(f"{self.seed}:{self.substream_index}:{label}".encode(), digest_size=8)
        return RandomStream(int.from_bytes(h.digest(), "little"), 0)

    def replications(self, start: int, stop: int) -> Replications:
        return Replications(self.seed, start, stop)

    def uniform(self, size: int) -> np.ndarray:
        return self._uniform(size)[0]

    def normal(self, size: int) -> np.ndarray:
        return self._normal(size)[0]

    def gamma(self, shape: float, size: int) -> np.ndarray:
        return self._gamma(shape, size)[0]


class Replications(_Draws):
    """Substreams ``start .. stop-1`` drawn side by side.

    Row ``r`` of every returned array equals what ``RandomStream(seed,
    start + r)`` would give for the same sequence of calls.
    """

    def __init__(self, seed: int, start: int, stop: int):
        if not 0 <= start <= stop:
            raise UsageError("need 0 <= start <= stop")
        super().__init__(seed, np.arange(start, stop, dtype=np.uint64))
        self.start, self.stop = int(start), int(stop)

    def __len__(self):
        return self.stop - self.start

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def uniform(self, k: int = 1) -> np.ndarray:
        return self._uniform(k)

    def normal(self, k: int = 1) -> np.ndarray:
        return self._normal(k)

    def gamma(self, shape: float, k: int = 1) -> np.ndarray:
        return self._gamma(shape, k)
