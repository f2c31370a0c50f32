"""Seeded, platform-deterministic random number generation.

All randomness in the package flows through a splitmix64 seeding stage
feeding a xoshiro256** stream, with normal variates produced by the
Box-Muller transform.  This pins the exact bit stream independently of
numpy's generator choices, so experiment outputs are reproducible across
platforms and library versions.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def _splitmix64_next(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _init_state(seed):
    s = np.empty(4, dtype=np.uint64)
    st = seed
    for i in range(4):
        st, s[i] = _splitmix64_next(st)
    return s


@njit(cache=True)
def _xoshiro_next(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _fill_normals(seed, out):
    # Box-Muller on xoshiro256** uniforms; u1 in (0, 1] so log never sees 0.
    s = _init_state(seed)
    n = out.shape[0]
    i = 0
    while i < n:
        a = _xoshiro_next(s)
        b = _xoshiro_next(s)
        u1 = (np.float64(a >> np.uint64(11)) + 1.0) * 1.1102230246251565e-16
        u2 = np.float64(b >> np.uint64(11)) * 1.1102230246251565e-16
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        out[i] = r * np.cos(ang)
        i += 1
        if i < n:
            out[i] = r * np.sin(ang)
            i += 1


def derive_seed(master_seed, stream):
    """Split a master seed into an independent per-stream seed."""
    st = (int(master_seed) + (int(stream) + 1) * 0x9E3779B97F4A7C15) % (1 << 64)
    _, z = _splitmix64_next(np.uint64(st))
    return int(z)


def normals(seed, n):
    """n standard-normal variates from the stream identified by seed."""
    out = np.empty(int(n), dtype=np.float64)
    _fill_normals(np.uint64(seed), out)
    return out


def trial_normals(master_seed, trial, n):
    """Standard normals for one trial vector of a seeded ensemble."""
    return normals(derive_seed(master_seed, trial), n)
