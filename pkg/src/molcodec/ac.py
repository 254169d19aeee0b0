"""Classical arithmetic coding (AC) and substitution arithmetic coding (SAC).

The coder is the usual low/high register scheme: registers of
``precision_bits`` bits, renormalised by doubling whenever the interval sits in
the lower half, the upper half, or the middle half (the last case deferring a
bit).  The final code is the shortest dyadic interval inside the coder's
finite-precision interval, so for short words it coincides with the exact
construction in :func:`ac_encode_exact`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .bits import ConstraintError, dyadic_interval, substitute_ones, unsubstitute_ones
from .source import CumulativeModel, DecodeError, EncodingError, word_interval


@dataclass(frozen=True)
class CodecConfig:
    precision_bits: int = 20
    # None follows the alphabet: EOF-included iff it has an EOF symbol
    eof_included: Optional[bool] = None

    def __post_init__(self):
        if self.precision_bits < 8:
            raise ValueError("precision_bits must be at least 8")

    def uses_eof(self, model: CumulativeModel) -> bool:
        if self.eof_included is None:
            return model.eof_index is not None
        if self.eof_included and model.eof_index is None:
            raise ValueError("EOF-included mode needs an alphabet with an EOF symbol")
        return self.eof_included


DEFAULT_CONFIG = CodecConfig()


def ac_interval(bits: str) -> tuple[Fraction, Fraction]:
    """``[sum b_k 2^-k, 2^-n + sum b_k 2^-k)`` for a nonempty code."""
    if not bits:
        raise ValueError("empty code")
    return dyadic_interval(bits)


def check_word(model: CumulativeModel, word: Sequence[str], eof: bool) -> list[int]:
    idx = model.indices(word)
    if not idx:
        raise EncodingError("empty word")
    if eof:
        e = model.eof_index
        if idx[-1] != e or e in idx[:-1]:
            raise EncodingError("EOF must appear exactly once, at the end of the word")
    return idx


def shortest_dyadic(lo: Fraction, hi: Fraction) -> str:
    """Shortest code whose dyadic interval lies in ``[lo, hi)``; leftmost on ties."""
    n = 0
    while True:
        scale = 1 << n
        k = -((-lo.numerator * scale) // lo.denominator)  # ceil(lo * 2^n)
        if Fraction(k + 1, scale) <= hi:
            return format(k, f"0{n}b") if n else ""
        n += 1


def ac_encode_exact(model: CumulativeModel, word: Sequence[str], eof: Optional[bool] = None) -> str:
    """Reference AC encoder in exact rational arithmetic."""
    check_word(model, word, model.eof_index is not None if eof is None else eof)
    return shortest_dyadic(*word_interval(model, word))


def ac_decode_exact(model: CumulativeModel, bits: str, length_hint: Optional[int] = None,
                    max_symbols: int = 100_000) -> tuple[str, ...]:
    """Reference AC decoder: descend the exact word intervals containing the code."""
    k, l = dyadic_interval(bits)
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
            raise DecodeError("code interval straddles a symbol boundary")
        a, b = lo, hi
        out.append(model.symbols[i])
        if eof and i == model.eof_index:
            return tuple(out)
        if not eof and len(out) == length_hint:
            return tuple(out)
        if len(out) >= max_symbols:
            raise DecodeError("no EOF within the symbol limit")


class _Registers:
    """Shared low/high state of the fixed-point AC encoder and decoder."""

    def __init__(self, model: CumulativeModel, precision_bits: int):
        if model.total > 1 << (precision_bits - 2):
            raise ValueError(
                f"probabilities need {model.total.bit_length()} bits of resolution; "
                f"raise precision_bits above {precision_bits}")
        self.cum = model.cum
        self.total = model.total
        self.full = 1 << precision_bits
        self.half = self.full >> 1
        self.quarter = self.full >> 2
        self.low = 0
        self.high = self.full
        # track where the window sits inside [0, 1): point w is (base + w) / 2**shift
        self.base = 0
        self.shift = precision_bits

    def narrow(self, i: int):
        rng = self.high - self.low
        half_t = self.total >> 1
        self.high = self.low + (rng * self.cum[i + 1] + half_t) // self.total
        self.low = self.low + (rng * self.cum[i] + half_t) // self.total

    def true_interval(self) -> tuple[Fraction, Fraction]:
        den = 1 << self.shift
        return Fraction(self.base + self.low, den), Fraction(self.base + self.high, den)


class ArithmeticEncoder(_Registers):
    def __init__(self, model: CumulativeModel, precision_bits: int = 20):
        super().__init__(model, precision_bits)
        self.out: list[str] = []
        self.pending = 0

    def _emit(self, bit: str):
        self.out.append(bit)
        if self.pending:
            self.out.append(("1" if bit == "0" else "0") * self.pending)
            self.pending = 0

    def push(self, i: int):
        self.narrow(i)
        half, quarter = self.half, self.quarter
        while True:
            if self.high <= half:
                self._emit("0")
                self.base <<= 1
            elif self.low >= half:
                self._emit("1")
                self.low -= half
                self.high -= half
                self.base = (self.base + half) << 1
            elif self.low >= quarter and self.high <= half + quarter:
                self.pending += 1
                self.low -= quarter
                self.high -= quarter
                self.base = (self.base + quarter) << 1
            else:
                break
            self.low <<= 1
            self.high <<= 1
            self.shift += 1

    def finish(self) -> str:
        # shortest dyadic sub-window of [low, high); pending bits need one bit at least
        n = 1 if self.pending else 0
        while True:
            size = self.full >> n
            k = -(-self.low // size)
            if (k + 1) * size <= self.high:
                break
            n += 1
        if n:
            tail = format(k, f"0{n}b")
            self._emit(tail[0])
            self.out.append(tail[1:])
        return "".join(self.out)


class ArithmeticDecoder(_Registers):
    def __init__(self, model: CumulativeModel, bits: str, precision_bits: int = 20):
        super().__init__(model, precision_bits)
        self.bits = bits
        self.pos = precision_bits
        padded = bits[:precision_bits].ljust(precision_bits, "0")
        self.value = int(padded, 2)

    def _next_bit(self) -> int:
        b = self.bits[self.pos] == "1" if self.pos < len(self.bits) else 0
        self.pos += 1
        return int(b)

    def pull(self) -> int:
        rng = self.high - self.low
        offset = self.value - self.low
        cum, total = self.cum, self.total
        # largest i with cum[i] * rng // total <= offset
        i = 0
        for j in range(1, len(cum) - 1):
            if (rng * cum[j] + (total >> 1)) // total <= offset:
                i = j
            else:
                break
        self.narrow(i)
        half, quarter = self.half, self.quarter
        while True:
            if self.high <= half:
                self.base <<= 1
            elif self.low >= half:
                self.low -= half
                self.high -= half
                self.value -= half
                self.base = (self.base + half) << 1
            elif self.low >= quarter and self.high <= half + quarter:
                self.low -= quarter
                self.high -= quarter
                self.value -= quarter
                self.base = (self.base + quarter) << 1
            else:
                break
            self.low <<= 1
            self.high <<= 1
            self.value = (self.value << 1) | self._next_bit()
            self.shift += 1
        return i


def ac_encode(model: CumulativeModel, word: Sequence[str], cfg: CodecConfig = DEFAULT_CONFIG) -> str:
    """Shortest code inside the fixed-point interval of ``word``.

    >>> from molcodec.source import EXAMPLE, build_cumulative
    >>> ac_encode(build_cumulative(EXAMPLE), "YZ")
    '011'
    """
    idx = check_word(model, word, cfg.uses_eof(model))
    enc = ArithmeticEncoder(model, cfg.precision_bits)
    for i in idx:
        enc.push(i)
    return enc.finish()


def ac_decode(model: CumulativeModel, bits: str, cfg: CodecConfig = DEFAULT_CONFIG,
              length_hint: Optional[int] = None, max_symbols: Optional[int] = None,
              strict: bool = True) -> tuple[str, ...]:
    """Decode one word from the front of ``bits``.

    EOF-included mode stops at the first EOF (trailing bits of later words are
    allowed); EOF-excluded mode needs the symbol count in ``length_hint``.
    With ``strict=False`` the decoder returns its best guess instead of
    rejecting bits that no encoder could have produced.
    """
    eof = cfg.uses_eof(model)
    if not eof and length_hint is None:
        raise DecodeError("EOF-excluded decoding needs length_hint")
    if max_symbols is None:
        max_symbols = length_hint if length_hint is not None else 8 * len(bits) + 64
    dec = ArithmeticDecoder(model, bits, cfg.precision_bits)
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
    if not strict:
        return tuple(model.symbols[i] for i in out)
    lo, hi = dec.true_interval()
    k, l = dyadic_interval(bits)
    if not (lo <= k and l <= hi):
        raise DecodeError("bits are not inside the decoded word's interval")
    return tuple(model.symbols[i] for i in out)


def sac_encode(model: CumulativeModel, word: Sequence[str], cfg: CodecConfig = DEFAULT_CONFIG) -> str:
    return substitute_ones(ac_encode(model, word, cfg))


def sac_decode(model: CumulativeModel, bits: str, cfg: CodecConfig = DEFAULT_CONFIG,
               length_hint: Optional[int] = None, max_symbols: Optional[int] = None,
               strict: bool = True) -> tuple[str, ...]:
    try:
        raw = unsubstitute_ones(bits)
    except ConstraintError as exc:
        if strict:
            raise DecodeError(f"malformed SAC code: {exc}") from None
        raw = bits.replace("10", "1")
    return ac_decode(model, raw, cfg, length_hint, max_symbols, strict)
