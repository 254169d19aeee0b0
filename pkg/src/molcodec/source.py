"""Finite source alphabets and the word -> interval map of arithmetic coding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


class ModelError(ValueError):
    """Invalid alphabet or probability model."""


class EncodingError(ValueError):
    """A word cannot be encoded (unknown symbol, misplaced EOF, ...)."""


class DecodeError(ValueError):
    """A bit string is not the encoding of any word."""


PROB_TOLERANCE = Fraction(1, 10**12)


def _as_fraction(p) -> Fraction:
    # floats go through repr so 0.2 becomes 1/5 rather than its binary value
    if isinstance(p, float):
        return Fraction(repr(p))
    return Fraction(p)


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbols with exact rational probabilities.

    ``eof_index`` marks the end-of-word symbol for EOF-included coding.
    """

    symbols: tuple[str, ...]
    probs: tuple[Fraction, ...]
    eof_index: Optional[int] = None

    def __init__(self, symbols: Sequence[str], probs: Sequence, eof_index: Optional[int] = None):
        symbols = tuple(str(s) for s in symbols)
        probs = tuple(_as_fraction(p) for p in probs)
        if len(symbols) != len(probs) or not symbols:
            raise ModelError("symbols and probabilities must be nonempty and of equal length")
        if len(set(symbols)) != len(symbols):
            raise ModelError("symbols must be distinct")
        if any(p <= 0 for p in probs):
            raise ModelError("probabilities must be positive")
        total = sum(probs)
        if abs(total - 1) > PROB_TOLERANCE:
            raise ModelError(f"probabilities sum to {float(total)}, not 1")
        if total != 1:
            probs = tuple(p / total for p in probs)
        if eof_index is not None and not 0 <= eof_index < len(symbols):
            raise ModelError("eof_index out of range")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "eof_index", eof_index)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def eof(self) -> Optional[str]:
        return None if self.eof_index is None else self.symbols[self.eof_index]

    @property
    def has_eof(self) -> bool:
        return self.eof_index is not None

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise EncodingError(f"unknown symbol {symbol!r}") from None

    def prob(self, symbol: str) -> Fraction:
        return self.probs[self.index(symbol)]

    def body_probs(self) -> dict[str, Fraction]:
        """Distribution of the symbols that make up a word body (EOF excluded)."""
        if self.eof_index is None:
            return dict(zip(self.symbols, self.probs))
        rest = 1 - self.probs[self.eof_index]
        return {s: p / rest for i, (s, p) in enumerate(zip(self.symbols, self.probs))
                if i != self.eof_index}

    def to_text(self) -> str:
        lines = []
        for i, (s, p) in enumerate(zip(self.symbols, self.probs)):
            flag = " eof" if i == self.eof_index else ""
            lines.append(f"{s} = {_decimal(p)}{flag}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Alphabet":
        """Parse ``symbol = probability [eof]`` lines; ``#`` starts a comment."""
        symbols, probs, eof = [], [], None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                parts = [key.strip()] + value.split()
            else:
                parts = line.split()
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2].lower() != "eof"):
                raise ModelError(f"line {lineno}: expected 'symbol = probability [eof]'")
            if len(parts) == 3:
                if eof is not None:
                    raise ModelError("more than one eof symbol")
                eof = len(symbols)
            symbols.append(parts[0])
            try:
                probs.append(Fraction(parts[1]))
            except ValueError:
                raise ModelError(f"line {lineno}: bad probability {parts[1]!r}") from None
        return cls(symbols, probs, eof)

    @classmethod
    def load(cls, path) -> "Alphabet":
        return cls.from_text(Path(path).read_text())


def _decimal(p: Fraction) -> str:
    # exact decimal when the denominator allows it, else a fraction string
    d = p.denominator
    for f in (2, 5):
        while d % f == 0:
            d //= f
    if d != 1:
        return str(p)
    places = 0
    while (p * 10**places).denominator != 1:
        places += 1
    return f"{float(p):.{max(places, 1)}f}"


@dataclass(frozen=True)
class CumulativeModel:
    """Lower/upper cumulative probabilities ``c`` and ``d`` of an alphabet.

    Also carries the same model as integer frequencies over a common
    denominator (``cum``/``total``), which the fixed-point coders use.
    """

    alphabet: Alphabet
    c: tuple[Fraction, ...]
    d: tuple[Fraction, ...]
    cum: tuple[int, ...] = field(repr=False)
    total: int = field(repr=False)

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.alphabet.symbols

    @property
    def eof_index(self) -> Optional[int]:
        return self.alphabet.eof_index

    def index(self, symbol: str) -> int:
        return self.alphabet.index(symbol)

    def indices(self, word: Iterable[str]) -> list[int]:
        lookup = {s: i for i, s in enumerate(self.alphabet.symbols)}
        try:
            return [lookup[s] for s in word]
        except KeyError as exc:
            raise EncodingError(f"unknown symbol {exc.args[0]!r}") from None


def build_cumulative(alphabet: Alphabet) -> CumulativeModel:
    c, d = [], []
    acc = Fraction(0)
    for p in alphabet.probs:
        c.append(acc)
        acc += p
        d.append(acc)
    if acc != 1:
        raise ModelError("cumulative probability does not reach 1")
    total = math.lcm(*(p.denominator for p in alphabet.probs))
    cum = tuple(int(x * total) for x in c) + (total,)
    return CumulativeModel(alphabet, tuple(c), tuple(d), cum, total)


def word_interval(model: CumulativeModel, word: Sequence[str]) -> tuple[Fraction, Fraction]:
    """Exact interval ``[a, b)`` of a word, by composing the symbol maps.

    >>> m = build_cumulative(Alphabet("XYZ", ["0.2", "0.3", "0.5"], 2))
    >>> word_interval(m, "YZ")
    (Fraction(7, 20), Fraction(1, 2))
    """
    if len(word) == 0:
        raise EncodingError("empty word")
    a, b = Fraction(0), Fraction(1)
    for i in model.indices(word):
        h = b - a
        a, b = a + model.c[i] * h, a + model.d[i] * h
    return a, b


def sample_word(alphabet: Alphabet, length: int, rng_seed=None) -> tuple[str, ...]:
    """Random word of ``length`` i.i.d. body symbols, plus a final EOF if the
    alphabet has one (the EOF is not counted in ``length``)."""
    return sample_words(alphabet, length, 1, rng_seed)[0]


def sample_words(alphabet: Alphabet, length: int, count: int, rng=None) -> list[tuple[str, ...]]:
    if length < 1:
        raise ValueError("word length must be at least 1")
    rng = np.random.default_rng(rng)
    body = alphabet.body_probs()
    syms = list(body)
    p = np.array([float(v) for v in body.values()])
    draws = rng.choice(len(syms), size=(count, length), p=p / p.sum())
    tail = (alphabet.eof,) if alphabet.has_eof else ()
    return [tuple(syms[j] for j in row) + tail for row in draws]


EXAMPLE = Alphabet("XYZ", ["0.2", "0.3", "0.5"], eof_index=2)
ALPHABET_1 = Alphabet("ATCG", ["0.50", "0.25", "0.23", "0.02"])
ALPHABET_2 = Alphabet(["A", "T", "C", "G", "EOF"], ["0.25", "0.24", "0.23", "0.23", "0.05"], eof_index=4)
RATIO_ALPHABET = Alphabet(["A", "B", "C", "EOF"], ["0.33", "0.33", "0.33", "0.01"], eof_index=3)

NAMED_ALPHABETS = {
    "example": EXAMPLE,
    "alphabet1": ALPHABET_1,
    "alphabet2": ALPHABET_2,
    "ratio": RATIO_ALPHABET,
}


def resolve_alphabet(name_or_path) -> Alphabet:
    """A built-in alphabet by name, or an alphabet definition file."""
    if isinstance(name_or_path, Alphabet):
        return name_or_path
    key = str(name_or_path).lower()
    if key in NAMED_ALPHABETS:
        return NAMED_ALPHABETS[key]
    return Alphabet.load(name_or_path)
