"""Compiled MoAC encoder/decoder loops.

A transcription of the reference coder in :mod:`molcodec.moac` onto int64
arrays, so it is valid for ``precision_bits <= 30`` (products stay below
2**62).  Bits are uint8 arrays of 0/1.  Both implementations must produce
identical bitstreams; the test suite checks that.
"""

import numpy as np
from numba import njit

MAX_PRECISION = 30

# layout of the constants vector
P, R, H, S1, D, U_LO, U_HI, W_LO, W_HI, TOTAL = range(10)


def constants(core) -> np.ndarray:
    return np.array([core.P, core.R, core.H, core.S1, core.D, core.U_lo, core.U_hi,
                     core.W_lo, core.W_hi, core.total], dtype=np.int64)


@njit(cache=True)
def _e0(x, k):
    return (x * k[S1] + (k[R] >> 1)) >> k[P]


@njit(cache=True)
def _e10(x, k):
    return k[S1] + ((x * k[D] + (k[R] >> 1)) >> k[P])


@njit(cache=True)
def _root(x, root, k):
    if root == 0:
        return x
    if root == 1:
        return (x + 1) >> 1
    return k[H] + ((x + 1) >> 1)


@njit(cache=True)
def _z0(y, k):
    return min(k[R], (2 * y * k[R] + k[S1]) // (2 * k[S1]))


@njit(cache=True)
def _z10(y, k):
    return min(k[R], max(0, (2 * (y - k[S1]) * k[R] + k[D]) // (2 * k[D])))


@njit(cache=True)
def _put(buf, n, mode, b):
    # mode 0 writes, mode 1 checks against the code (-1 flags a mismatch),
    # mode 2 just skips over the code
    if mode == 0:
        buf[n] = b
        return n + 1
    if mode == 2:
        return n + 1
    if n >= buf.shape[0] or buf[n] != b:
        return -1
    return n + 1


@njit(cache=True)
def _path(buf, n, mode, side, u):
    # side 0: "010" + "10"*(u-1), side 1: "100" + "00"*(u-1)
    first = (0, 1, 0) if side == 0 else (1, 0, 0)
    for b in first:
        n = _put(buf, n, mode, b)
        if n < 0:
            return n
    for _ in range(u - 1):
        n = _put(buf, n, mode, 1 - side)
        if n < 0:
            return n
        n = _put(buf, n, mode, 0)
        if n < 0:
            return n
    return n


@njit(cache=True)
def _path_matches(bits, pos, side, u):
    n = bits.shape[0]
    if pos + 2 * u + 1 > n:
        return False
    if side == 0:
        if bits[pos] != 0 or bits[pos + 1] != 1 or bits[pos + 2] != 0:
            return False
    elif bits[pos] != 1 or bits[pos + 1] != 0 or bits[pos + 2] != 0:
        return False
    for j in range(u - 1):
        if bits[pos + 3 + 2 * j] != 1 - side or bits[pos + 4 + 2 * j] != 0:
            return False
    return True


@njit(cache=True)
def _renorm(low, high, pending, k, buf, n, mode):
    while True:
        if pending == 0:
            if high <= k[S1]:
                n = _put(buf, n, mode, 0)
                low, high = _z0(low, k), _z0(high, k)
            elif low >= k[S1]:
                n = _put(buf, n, mode, 1)
                if n >= 0:
                    n = _put(buf, n, mode, 0)
                low, high = _z10(low, k), _z10(high, k)
            elif low >= k[U_LO] and high <= k[U_HI]:
                pending = 1
                low = (_z10(_z0(low, k), k) + 1) >> 1
                high = k[H] + ((_z0(_z10(high, k), k) + 1) >> 1)
            else:
                break
        else:
            if high <= k[H]:
                n = _path(buf, n, mode, 0, pending)
                pending = 0
                low, high = min(k[R], 2 * low), min(k[R], 2 * high)
            elif low >= k[H]:
                n = _path(buf, n, mode, 1, pending)
                pending = 0
                low, high = max(0, 2 * (low - k[H])), max(0, 2 * (high - k[H]))
            elif low >= k[W_LO] and high <= k[W_HI]:
                pending += 1
                low = (_z10(min(k[R], 2 * low), k) + 1) >> 1
                high = k[H] + ((_z0(_z0(max(0, 2 * (high - k[H])), k), k) + 1) >> 1)
            else:
                break
        if n < 0:
            break
    return low, high, pending, n


@njit(cache=True)
def _cell(toks, m, root, k):
    lo = 0
    hi = k[R]
    for j in range(m - 1, -1, -1):
        if toks[j] == 0:
            lo, hi = _e0(lo, k), _e0(hi, k)
        else:
            lo, hi = _e10(lo, k), _e10(hi, k)
    return _root(lo, root, k), _root(hi, root, k)


@njit(cache=True)
def _split(low, high, i, k, cum):
    rng = high - low
    t = k[TOTAL]
    h = t >> 1
    return low + (rng * cum[i] + h) // t, low + (rng * cum[i + 1] + h) // t


@njit(cache=True)
def _dfs(length, root, k, low, high, toks):
    """Leftmost token sequence of exactly ``length`` bits whose cell fits."""
    lo, hi = _cell(toks, 0, root, k)
    if hi <= low or lo >= high:
        return -1
    if length == 0:
        return 0 if lo >= low and hi <= high else -1
    choice = np.zeros(length + 2, np.int64)
    d = 0
    bl = 0
    while d >= 0:
        c = choice[d]
        if c >= 2:
            d -= 1
            if d >= 0:
                bl -= 1 if toks[d] == 0 else 2
            continue
        choice[d] = c + 1
        tl = 1 if c == 0 else 2
        if bl + tl > length:
            continue
        toks[d] = c
        lo, hi = _cell(toks, d + 1, root, k)
        if hi <= low or lo >= high:
            continue
        if bl + tl == length:
            if lo >= low and hi <= high:
                return d + 1
            continue
        bl += tl
        d += 1
        choice[d] = 0
    return -1


@njit(cache=True)
def encode(idx, k, cum, out):
    low = 0
    high = k[R]
    pending = 0
    n = 0
    for i in idx:
        low, high = _split(low, high, i, k, cum)
        low, high, pending, n = _renorm(low, high, pending, k, out, n, 0)
    toks = np.zeros(4 * k[P] + 16, np.int8)
    length = 0 if (n > 0 or pending > 0) else 1
    while length <= 4 * k[P] + 8:
        for root in range(3):
            if (pending == 0) != (root == 0):
                continue
            m = _dfs(length, root, k, low, high, toks)
            if m >= 0:
                if root > 0:
                    n = _path(out, n, 0, root - 1, pending)
                for j in range(m):
                    if toks[j] == 1:
                        out[n] = 1
                        n += 1
                    out[n] = 0
                    n += 1
                return n
        length += 1
    return -1


@njit(cache=True)
def _tokens(bits, start, stop, toks):
    m = 0
    j = start
    while j < stop:
        if bits[j] == 0:
            toks[m] = 0
            j += 1
        else:
            toks[m] = 1
            j += 2
        m += 1
    return m


@njit(cache=True)
def _value(bits, pos, pending, k, toks, strict):
    n = bits.shape[0]
    look = k[P]
    if pending == 0:
        m = _tokens(bits, pos, min(n, pos + look), toks)
        return _cell(toks, m, 0, k)[0]
    for side in range(2):
        if _path_matches(bits, pos, side, pending) or (
                not strict and side == (1 if pos < n and bits[pos] == 1 else 0)):
            start = pos + 2 * pending + 1
            stop = min(n, start + max(0, look - 2 * pending - 1))
            m = _tokens(bits, start, stop, toks)
            return _cell(toks, m, side + 1, k)[0]
    return -1


@njit(cache=True)
def decode(bits, k, cum, eof_index, length_hint, max_symbols, out_idx, strict):
    """Decoded symbol count, or -1 when the code is inconsistent.

    Without ``strict`` every check is skipped and the best guess returned.
    """
    low = 0
    high = k[R]
    pending = 0
    pos = 0
    count = 0
    nsym = cum.shape[0] - 1
    toks = np.zeros(bits.shape[0] + 2, np.int8)
    t = k[TOTAL]
    h = t >> 1
    while True:
        v = _value(bits, pos, pending, k, toks, strict)
        if v < 0:
            return -1
        rng = high - low
        i = 0
        for j in range(1, nsym):
            if low + (rng * cum[j] + h) // t <= v:
                i = j
            else:
                break
        low, high = _split(low, high, i, k, cum)
        low, high, pending, pos = _renorm(low, high, pending, k, bits, pos, 1 if strict else 2)
        if pos < 0:
            return -1
        out_idx[count] = i
        count += 1
        if eof_index >= 0 and i == eof_index:
            break
        if length_hint >= 0 and count == length_hint:
            if eof_index >= 0 and strict:
                return -1
            break
        if count >= max_symbols:
            if not strict:
                break
            return -1
    if not strict:
        return count
    # the unread bits must address a cell inside the final window
    n = bits.shape[0]
    for root in range(3):
        if (pending == 0) != (root == 0):
            continue
        start = pos
        if root > 0:
            if not _path_matches(bits, pos, root - 1, pending):
                continue
            start = pos + 2 * pending + 1
        m = _tokens(bits, start, n, toks)
        lo, hi = _cell(toks, m, root, k)
        if lo >= low and hi <= high:
            return count
    return -1
