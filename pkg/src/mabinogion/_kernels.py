"""Compiled inner loops for the urn simulator.

Randomness is xoshiro256** with one independent stream per batch; the
stream state is derived outside (numpy SeedSequence) so a batch's output
depends only on (seed, batch index), never on thread scheduling.
"""

import numpy as np
from numba import njit, prange

U64 = np.uint64
_MAX = U64(0xFFFFFFFFFFFFFFFF)

NONE, POLICY_A, POLICY_R, Q_THRESHOLD, TABLE = 0, 1, 2, 3, 4


@njit(inline="always")
def _rotl(x, k):
    return (x << U64(k)) | (x >> U64(64 - k))


@njit(inline="always")
def next_u64(st):
    s0, s1, s2, s3 = st[0], st[1], st[2], st[3]
    result = _rotl(s1 * U64(5), 7) * U64(9)
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    st[0], st[1], st[2], st[3] = s0, s1, s2, s3
    return result


@njit(inline="always")
def bounded(st, n, rem):
    """Uniform integer in [0, n); ``rem`` is 2**64 mod n (reject the short tail)."""
    limit = _MAX - rem
    while True:
        x = next_u64(st)
        if x <= limit:
            return x % n


@njit(inline="always")
def uniform01(st):
    return (next_u64(st) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(inline="always")
def removal(w, b, kind, qn, qd, table):
    if w == 0 or b == 0:
        return 0
    if kind == POLICY_A:
        return w - b + 1 if w >= b else 0
    if kind == POLICY_R:
        return w
    if kind == Q_THRESHOLD:
        # ceil(b / q) with q = qn / qd
        c = (b * qd + qn - 1) // qn
        r = w + b - c + 1
        if r < 0:
            return 0
        return r if r < w else w
    if kind == TABLE:
        return table[w, b]
    return 0


@njit
def run_one(w, b, kind, qn, qd, table, st):
    """One trajectory; returns (draws, final black count)."""
    w -= removal(w, b, kind, qn, qd, table)
    h = 0
    n = U64(0)
    rem = U64(0)
    while w > 0 and b > 0:
        tot = U64(w + b)
        if tot != n:
            n = tot
            rem = (U64(0) - n) % n
        if bounded(st, n, rem) < U64(b):
            w -= 1
            b += 1
        else:
            w += 1
            b -= 1
        h += 1
        if kind != NONE:
            w -= removal(w, b, kind, qn, qd, table)
    return h, b


@njit(parallel=True, cache=True)
def simulate_batches(w0, b0, kind, qn, qd, table, states, batch_size, runs, out_h, out_b):
    nb = states.shape[0]
    for bi in prange(nb):
        st = states[bi].copy()
        start = bi * batch_size
        stop = min(runs, start + batch_size)
        for r in range(start, stop):
            h, bb = run_one(w0, b0, kind, qn, qd, table, st)
            out_h[r] = h
            out_b[r] = bb


@njit
def run_conditional(n, N, up, st):
    h = 0
    while n < N:
        if uniform01(st) < up[n]:
            n += 1
        else:
            n -= 1
        h += 1
    return h


@njit(parallel=True, cache=True)
def simulate_conditional_batches(n0, N, up, states, batch_size, runs, out_h):
    nb = states.shape[0]
    for bi in prange(nb):
        st = states[bi].copy()
        start = bi * batch_size
        stop = min(runs, start + batch_size)
        for r in range(start, stop):
            out_h[r] = run_conditional(n0, N, up, st)


@njit(cache=True)
def record_path(w, b, kind, qn, qd, table, st):
    """Black count after time-0 removal and after every draw (plus removal)."""
    w -= removal(w, b, kind, qn, qd, table)
    path = [b]
    while w > 0 and b > 0:
        n = U64(w + b)
        rem = (U64(0) - n) % n
        if bounded(st, n, rem) < U64(b):
            w -= 1
            b += 1
        else:
            w += 1
            b -= 1
        if kind != NONE:
            w -= removal(w, b, kind, qn, qd, table)
        path.append(b)
    return np.array(path, dtype=np.int64)


@njit(cache=True)
def record_conditional_path(n, N, up, st):
    path = [n]
    while n < N:
        if uniform01(st) < up[n]:
            n += 1
        else:
            n -= 1
        path.append(n)
    return np.array(path, dtype=np.int64)
