"""Molecular arithmetic coding (MoAC).

MoAC codes never contain two consecutive 1s and always end in 0.  The code
space is the tree of such strings: a cell reached by a 0 (or the root) splits
at the golden ratio, ``0`` taking the left ``1/phi`` share and ``1`` the rest;
a cell reached by a 1 has a single ``0`` child with the same interval.  A code
of length ``n`` ending in 0 therefore addresses an interval of height
``phi**-n``.

Seen from any 0-cell, the two ways forward are the tokens ``"0"`` (left
``1/phi``) and ``"10"`` (right ``1/phi**2``).  Both lead to 0-cells again, so
the streaming coder works on token windows: it emits a token as soon as the
coding interval sits inside one, and zooms into that token.  When the
interval straddles the split point and is small, it falls inside the pair of
equal cells ``"010"`` | ``"100"`` that meet at the split; the coder then
defers the choice, exactly like the pending bits of binary AC, and keeps
zooming around the middle of the pair.

Split points are irrational, so all maps are rounded fixed-point
approximations.  The decoder reads the code through a register of
``precision_bits`` bits, which is what makes long words occasionally
undecodable; :func:`moac_encode_verified` detects those by decoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .ac import check_word
from .bits import ConstraintError, check_bits
from .source import CumulativeModel, DecodeError, word_interval

try:
    from . import _moac_kernel as _kernel
except ImportError:  # numba missing: the pure-Python coder handles everything
    _kernel = None

ORACLE_PHI_BITS = 256


@dataclass(frozen=True)
class MoacConfig:
    precision_bits: int = 20
    # bits used for the fixed-point golden ratio; None means precision_bits
    phi_bits: Optional[int] = None
    eof_included: Optional[bool] = None

    def __post_init__(self):
        if self.precision_bits < 8:
            raise ValueError("precision_bits must be at least 8")
        if self.phi_bits is not None and self.phi_bits < self.precision_bits:
            raise ValueError("phi_bits must be at least precision_bits")

    def uses_eof(self, model: CumulativeModel) -> bool:
        if self.eof_included is None:
            return model.eof_index is not None
        if self.eof_included and model.eof_index is None:
            raise ValueError("EOF-included mode needs an alphabet with an EOF symbol")
        return self.eof_included


DEFAULT_CONFIG = MoacConfig()


# -- golden ratio at fixed point ---------------------------------------------

@lru_cache(maxsize=None)
def psi_fixed(bits: int) -> int:
    """``floor(2**bits / phi)``, i.e. ``(sqrt 5 - 1) / 2`` at ``bits`` bits."""
    one = 1 << bits
    return (math.isqrt(5 << (2 * bits)) - one) >> 1


@lru_cache(maxsize=None)
def _psi_powers(bits: int, n: int) -> tuple[int, ...]:
    one = 1 << bits
    psi = psi_fixed(bits)
    out = [one]
    for _ in range(n):
        out.append(out[-1] * psi >> bits)
    return tuple(out)


def moac_interval(bits: str, phi_bits: int = ORACLE_PHI_BITS) -> tuple[Fraction, Fraction]:
    """Interval ``[sum b_i phi**-i, sum b_i phi**-i + phi**-(n + b_n))`` of a code.

    Values are fixed point with ``phi_bits`` fractional bits.

    >>> lo, hi = moac_interval("01000")
    >>> round(float(lo), 6), round(float(hi), 6)
    (0.381966, 0.472136)
    """
    check_bits(bits)
    if "11" in bits:
        raise ConstraintError(f"consecutive 1s in {bits!r}")
    n = len(bits)
    pw = _psi_powers(phi_bits, n + 1)
    lo = sum(pw[i + 1] for i, b in enumerate(bits) if b == "1")
    height = pw[n + (1 if bits.endswith("1") else 0)]
    den = 1 << phi_bits
    return Fraction(lo, den), Fraction(lo + height, den)


def split_cells(n: int, phi_bits: int = ORACLE_PHI_BITS) -> dict[str, tuple[Fraction, Fraction]]:
    """All column-``n`` cells, built top-down with the split rule."""
    psi = psi_fixed(phi_bits)
    den = 1 << phi_bits
    cells = {"": (0, den)}
    for _ in range(n):
        nxt = {}
        for code, (x, y) in cells.items():
            if code.endswith("1"):
                nxt[code + "0"] = (x, y)
            else:
                m = x + ((y - x) * psi >> phi_bits)
                nxt[code + "0"] = (x, m)
                nxt[code + "1"] = (m, y)
        cells = nxt
    return {c: (Fraction(x, den), Fraction(y, den)) for c, (x, y) in cells.items()}


# -- combinatorics -------------------------------------------------------------

def _fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def count_codes(n: int) -> int:
    """Number of length-``n`` strings without consecutive 1s (``Fib(n + 2)``)."""
    if n < 1:
        raise ValueError("n must be positive")
    return _fib(n + 2)


def count_ones(n: int) -> int:
    """Total number of 1s over all length-``n`` strings without consecutive 1s."""
    if n < 1:
        raise ValueError("n must be positive")
    a, b = 1, 2  # one[1], one[2]
    if n == 1:
        return a
    fa, fb = 1, 1  # Fib(1), Fib(2)
    for _ in range(n - 2):
        fa, fb = fb, fa + fb  # now fb = Fib(k) for the k being computed
        a, b = b, b + a + fb
    return b


def one_bit_density(n_max: int) -> float:
    """Fraction of 1s in length-``n_max`` MoAC codes, ``one[n-1] / (n Fib(n+1))``."""
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    n = n_max
    return float(Fraction(count_ones(n - 1), n * _fib(n + 1)))


def length_ratio_limit() -> float:
    """Asymptotic SAC/MoAC length ratio, ``1.5 * log2(phi)``."""
    import mpmath

    with mpmath.workdps(60):
        return float(mpmath.mpf(3) / 2 * mpmath.log(mpmath.phi, 2))


# -- streaming coder ----------------------------------------------------------

class _Core:
    """Fixed-point token maps shared by the encoder and the decoder.

    Normal mode: the window ``[0, R)`` is a 0-cell; token "0" is ``[0, S1)``,
    token "10" is ``[S1, R)``.  Pair mode (``pending = u > 0``): the window is
    two equal 0-cells ``[0, H)`` and ``[H, R)`` reached by the paths
    ``"010" + "10" * (u - 1)`` and ``"100" + "00" * (u - 1)``.
    """

    def __init__(self, model: CumulativeModel, precision_bits: int, phi_bits: int):
        self.P = P = precision_bits
        self.R = R = 1 << P
        self.H = R >> 1
        if model.total > R >> 3:
            raise ValueError(
                f"probabilities need {model.total.bit_length()} bits of resolution; "
                f"raise precision_bits above {precision_bits}")
        psi = psi_fixed(phi_bits)
        self.S1 = (R * psi + (1 << (phi_bits - 1))) >> phi_bits
        self.D = R - self.S1
        self.cum = model.cum
        self.total = model.total
        self.U_lo = self.embed0(self.S1)
        self.U_hi = self.embed10(self.S1)
        self.W_lo = self.embed_left(self.S1)
        self.W_hi = self.embed_right(self.U_lo)
        self.low = 0
        self.high = R
        self.pending = 0

    # embeds map child coordinates into the parent window, zooms the reverse
    def embed0(self, x: int) -> int:
        return (x * self.S1 + (self.R >> 1)) >> self.P

    def embed10(self, x: int) -> int:
        return self.S1 + ((x * self.D + (self.R >> 1)) >> self.P)

    def embed_left(self, x: int) -> int:
        return (x + 1) >> 1

    def embed_right(self, x: int) -> int:
        return self.H + ((x + 1) >> 1)

    def zoom0(self, y: int) -> int:
        return min(self.R, (2 * y * self.R + self.S1) // (2 * self.S1))

    def zoom10(self, y: int) -> int:
        return min(self.R, max(0, (2 * (y - self.S1) * self.R + self.D) // (2 * self.D)))

    def zoom_left(self, y: int) -> int:
        return min(self.R, 2 * y)

    def zoom_right(self, y: int) -> int:
        return max(0, 2 * (y - self.H))

    def split(self, i: int) -> tuple[int, int]:
        rng = self.high - self.low
        t, h = self.total, self.total >> 1
        return (self.low + (rng * self.cum[i] + h) // t,
                self.low + (rng * self.cum[i + 1] + h) // t)

    def renormalize(self) -> list[str]:
        """Zoom while the window determines bits; returns the emitted pieces."""
        out = []
        low, high = self.low, self.high
        while True:
            if not self.pending:
                if high <= self.S1:
                    out.append("0")
                    low, high = self.zoom0(low), self.zoom0(high)
                elif low >= self.S1:
                    out.append("10")
                    low, high = self.zoom10(low), self.zoom10(high)
                elif low >= self.U_lo and high <= self.U_hi:
                    self.pending = 1
                    low = self.embed_left(self.zoom10(self.zoom0(low)))
                    high = self.embed_right(self.zoom0(self.zoom10(high)))
                else:
                    break
            else:
                u = self.pending
                if high <= self.H:
                    out.append(left_path(u))
                    self.pending = 0
                    low, high = self.zoom_left(low), self.zoom_left(high)
                elif low >= self.H:
                    out.append(right_path(u))
                    self.pending = 0
                    low, high = self.zoom_right(low), self.zoom_right(high)
                elif low >= self.W_lo and high <= self.W_hi:
                    self.pending = u + 1
                    low = self.embed_left(self.zoom10(self.zoom_left(low)))
                    high = self.embed_right(self.zoom0(self.zoom0(self.zoom_right(high))))
                else:
                    break
        self.low, self.high = low, high
        return out

    def cell(self, tokens: Sequence[str]) -> tuple[int, int]:
        """Window coordinates of the 0-cell reached by a token sequence."""
        lo, hi = 0, self.R
        for tok in reversed(tokens):
            if tok == "0":
                lo, hi = self.embed0(lo), self.embed0(hi)
            else:
                lo, hi = self.embed10(lo), self.embed10(hi)
        return lo, hi

    def roots(self):
        """(prefix bits, coordinate map) for each cell the window consists of."""
        if not self.pending:
            return [("", lambda x: x)]
        u = self.pending
        return [(left_path(u), self.embed_left), (right_path(u), self.embed_right)]

    def termination(self, allow_empty: bool) -> str:
        """Shortest tail whose cell lies inside ``[low, high)``, leftmost on ties."""
        low, high = self.low, self.high
        roots = self.roots()

        def search(prefix, emb, toks, budget):
            lo, hi = self.cell(toks)
            lo, hi = emb(lo), emb(hi)
            if hi <= low or lo >= high:
                return None
            if budget == 0:
                return prefix + "".join(toks) if lo >= low and hi <= high else None
            for tok in ("0", "10"):
                if len(tok) <= budget:
                    found = search(prefix, emb, toks + [tok], budget - len(tok))
                    if found is not None:
                        return found
            return None

        length = 0 if (allow_empty or self.pending) else 1
        while True:
            for prefix, emb in roots:
                found = search(prefix, emb, [], length)
                if found is not None:
                    return found
            length += 1
            if length > 4 * self.P + 8:
                raise AssertionError("no terminating cell found")


def left_path(u: int) -> str:
    return "010" + "10" * (u - 1)


def right_path(u: int) -> str:
    return "100" + "00" * (u - 1)


def _tokens(bits: str, strict: bool = True) -> list[str]:
    """Split a constrained string into "0"/"10" tokens; a final lone 1 reads as 10."""
    toks = []
    i, n = 0, len(bits)
    while i < n:
        if bits[i] == "0":
            toks.append("0")
            i += 1
        else:
            if strict and i + 1 < n and bits[i + 1] == "1":
                raise DecodeError("consecutive 1s in MoAC code")
            toks.append("10")
            i += 2
    return toks


class MoacEncoder(_Core):
    def __init__(self, model: CumulativeModel, cfg: MoacConfig = DEFAULT_CONFIG):
        super().__init__(model, cfg.precision_bits, cfg.phi_bits or cfg.precision_bits)
        self.out: list[str] = []

    def push(self, i: int):
        self.low, self.high = self.split(i)
        self.out.extend(self.renormalize())

    def finish(self) -> str:
        prefix = "".join(self.out)
        return prefix + self.termination(allow_empty=bool(prefix))


class MoacDecoder(_Core):
    """Mirror of the encoder.  ``strict=False`` skips every consistency check
    and just returns the best guess, for reading corrupted codes."""

    def __init__(self, model: CumulativeModel, bits: str, cfg: MoacConfig = DEFAULT_CONFIG,
                 strict: bool = True):
        super().__init__(model, cfg.precision_bits, cfg.phi_bits or cfg.precision_bits)
        if strict and "11" in bits:
            raise DecodeError("consecutive 1s in MoAC code")
        self.bits = bits
        self.pos = 0
        self.strict = strict

    def _value(self) -> int:
        """Lower end of the code's cell, read through a ``precision_bits`` register."""
        rest = self.bits[self.pos:]
        look = self.P
        if not self.pending:
            return self.cell(_tokens(rest[:look], self.strict))[0]
        guess = 1 if rest.startswith("1") else 0
        for side, (prefix, emb) in enumerate(self.roots()):
            if rest.startswith(prefix) or (not self.strict and side == guess):
                tail = rest[len(prefix):][:max(0, look - len(prefix))]
                return emb(self.cell(_tokens(tail, self.strict))[0])
        raise DecodeError("code leaves the coding interval")

    def pull(self) -> int:
        v = self._value()
        rng = self.high - self.low
        t, h = self.total, self.total >> 1
        cum = self.cum
        i = 0
        for j in range(1, len(cum) - 1):
            if self.low + (rng * cum[j] + h) // t <= v:
                i = j
            else:
                break
        self.low, self.high = self.split(i)
        for piece in self.renormalize():
            if self.strict and not self.bits.startswith(piece, self.pos):
                raise DecodeError("code leaves the coding interval")
            self.pos += len(piece)
        return i

    def check_tail(self):
        """The unread bits must address a cell inside the final window."""
        rest = self.bits[self.pos:]
        for prefix, emb in self.roots():
            if rest.startswith(prefix):
                lo, hi = self.cell(_tokens(rest[len(prefix):]))
                if emb(lo) >= self.low and emb(hi) <= self.high:
                    return
        raise DecodeError("code is not inside the decoded word's interval")


def _use_kernel(cfg: MoacConfig) -> bool:
    return _kernel is not None and cfg.precision_bits <= _kernel.MAX_PRECISION


_TABLES: dict = {}


def _kernel_tables(model: CumulativeModel, precision_bits: int, phi_bits: int):
    # keyed on the integer frequencies: hashing the Fraction-valued model is slow
    key = (model.cum, precision_bits, phi_bits)
    if key not in _TABLES:
        core = _Core(model, precision_bits, phi_bits)
        _TABLES[key] = (_kernel.constants(core), np.array(model.cum, dtype=np.int64))
    return _TABLES[key]


def _encode_indices(model: CumulativeModel, idx: list[int], cfg: MoacConfig) -> str:
    if _use_kernel(cfg):
        k, cum = _kernel_tables(model, cfg.precision_bits, cfg.phi_bits or cfg.precision_bits)
        out = np.empty(len(idx) * (2 * cfg.precision_bits + 4) + 4 * cfg.precision_bits + 64, np.uint8)
        n = _kernel.encode(np.array(idx, dtype=np.int64), k, cum, out)
        if n < 0:
            raise AssertionError("no terminating cell found")
        return (out[:n] + 48).tobytes().decode()
    enc = MoacEncoder(model, cfg)
    for i in idx:
        enc.push(i)
    return enc.finish()


def moac_encode(model: CumulativeModel, word: Sequence[str], cfg: MoacConfig = DEFAULT_CONFIG) -> str:
    """Streaming MoAC code of ``word`` (not checked for decodability).

    >>> from molcodec.source import EXAMPLE, build_cumulative
    >>> moac_encode(build_cumulative(EXAMPLE), "YZ")
    '01000'
    """
    return _encode_indices(model, check_word(model, word, cfg.uses_eof(model)), cfg)


def moac_encode_verified(model: CumulativeModel, word: Sequence[str],
                         cfg: MoacConfig = DEFAULT_CONFIG) -> tuple[str, bool]:
    """Encode and decode back; the flag tells whether the round trip worked."""
    eof = cfg.uses_eof(model)
    idx = check_word(model, word, eof)
    bits = _encode_indices(model, idx, cfg)
    try:
        back = _decode_indices(model, bits, cfg, eof, None if eof else len(idx), len(idx))
    except DecodeError:
        return bits, False
    return bits, back == idx


def _decode_indices(model: CumulativeModel, bits: str, cfg: MoacConfig, eof: bool,
                    length_hint: Optional[int], max_symbols: int, strict: bool = True) -> list[int]:
    check_bits(bits)
    if strict and "11" in bits:
        raise DecodeError("consecutive 1s in MoAC code")
    if strict and not bits.endswith("0"):
        raise DecodeError("MoAC codes end with a 0")
    if _use_kernel(cfg):
        k, cum = _kernel_tables(model, cfg.precision_bits, cfg.phi_bits or cfg.precision_bits)
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - 48
        out = np.empty(max_symbols, np.int64)
        n = _kernel.decode(arr, k, cum, model.eof_index if eof else -1,
                           -1 if length_hint is None else length_hint, max_symbols, out, strict)
        if n < 0:
            raise DecodeError("code is not the MoAC encoding of any word")
        return out[:n].tolist()
    dec = MoacDecoder(model, bits, cfg, strict)
    out = []
    while True:
        i = dec.pull()
        out.append(i)
        if eof and i == model.eof_index:
            break
        if length_hint is not None and len(out) == length_hint:
            if eof and strict:
                raise DecodeError("no EOF within length_hint symbols")
            break
        if len(out) >= max_symbols:
            if not strict:
                break
            raise DecodeError("no EOF within the symbol limit")
    if strict:
        dec.check_tail()
    return out


def moac_decode(model: CumulativeModel, bits: str, cfg: MoacConfig = DEFAULT_CONFIG,
                length_hint: Optional[int] = None, max_symbols: Optional[int] = None,
                strict: bool = True) -> tuple[str, ...]:
    """Decode one MoAC code; see :class:`MoacDecoder` for ``strict``."""
    eof = cfg.uses_eof(model)
    if not eof and length_hint is None:
        raise DecodeError("EOF-excluded decoding needs length_hint")
    if max_symbols is None:
        max_symbols = length_hint if length_hint is not None else 2 * len(bits) + 64
    idx = _decode_indices(model, bits, cfg, eof, length_hint, max_symbols, strict)
    return tuple(model.symbols[i] for i in idx)


# -- exact reference ------------------------------------------------------------

def _oracle_search(a: Fraction, b: Fraction, phi_bits: int, max_len: int) -> str:
    den = 1 << phi_bits
    pw = _psi_powers(phi_bits, max_len + 2)
    A, B = a * den, b * den  # compare in fixed-point units

    def fits(lo, h):
        return A <= lo and lo + h <= B

    # breadth first over codes ending in 0; frontier holds (code, lower, ends_in_1)
    frontier = [("", 0, False)]
    for n in range(1, max_len + 1):
        nxt = []
        best = None
        for code, lo, last1 in frontier:
            children = [("0", lo)] if last1 else [("0", lo), ("1", lo + pw[n])]
            for bit, clo in children:
                c = code + bit
                h = pw[n + (bit == "1")]
                if clo + h <= A or clo >= B:
                    continue
                if bit == "0" and fits(clo, h) and best is None:
                    best = c
                nxt.append((c, clo, bit == "1"))
        if best is not None:
            return best
        frontier = nxt
    raise ValueError("no code within max_len")


def moac_encode_oracle(model: CumulativeModel, word: Sequence[str],
                       eof: Optional[bool] = None, phi_bits: int = ORACLE_PHI_BITS) -> str:
    """Shortest 0-terminated constrained code inside the exact word interval."""
    if len(word) > 32:
        raise ValueError("the reference encoder is limited to 32 symbols")
    check_word(model, word, model.eof_index is not None if eof is None else eof)
    a, b = word_interval(model, word)
    return _oracle_search(a, b, phi_bits, max_len=64 + 4 * len(word))


def moac_decode_oracle(model: CumulativeModel, bits: str, length_hint: Optional[int] = None,
                       phi_bits: int = ORACLE_PHI_BITS, max_symbols: int = 10_000) -> tuple[str, ...]:
    """Descend the exact word intervals containing the code's cell."""
    k, l = moac_interval(bits, phi_bits)
    eof = length_hint is None
    if eof and model.eof_index is None:
        raise DecodeError("length_hint is required without an EOF symbol")
    a, b = Fraction(0), Fraction(1)
    out = []
    while True:
        h = b - a
        for i in range(len(model.symbols)):
            lo, hi = a + model.c[i] * h, a + model.d[i] * h
            if lo <= k and l <= hi:
                break
        else:
            raise DecodeError("code cell straddles a symbol boundary")
        a, b = lo, hi
        out.append(model.symbols[i])
        if eof and i == model.eof_index:
            return tuple(out)
        if not eof and len(out) == length_hint:
            return tuple(out)
        if len(out) >= max_symbols:
            raise DecodeError("no EOF within the symbol limit")
