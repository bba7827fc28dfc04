"""Small xoshiro256** generator usable inside numba kernels.

Seeded from a 64-bit word drawn from a Philox stream, so kernel randomness
is still keyed by the experiment seed.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _splitmix(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True)
def seed_state(seed):
    s = np.empty(4, dtype=np.uint64)
    st = np.uint64(seed)
    for i in range(4):
        st, s[i] = _splitmix(st)
    return s


@numba.njit(cache=True)
def next_u64(s):
    # xoshiro256**
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def uniform(s):
    return (next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def below(s, bound):
    # bound < 2^32 here, so a 32x32 multiply-shift suffices (Lemire, with rejection)
    b = np.uint64(bound)
    while True:
        r = next_u64(s) >> np.uint64(32)
        prod = r * b
        low = prod & np.uint64(0xFFFFFFFF)
        if low >= b or low >= (np.uint64(0x100000000) - b) % b:
            return np.int64(prod >> np.uint64(32))


@numba.njit(cache=True)
def shuffle(order, s):
    for i in range(order.shape[0] - 1, 0, -1):
        j = below(s, i + 1)
        t = order[i]
        order[i] = order[j]
        order[j] = t
