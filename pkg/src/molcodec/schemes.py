"""Uniform wrapper around every coding scheme the harness compares.

A :class:`Scheme` turns a word into bits and back.  ``decode`` is the
receiver side: it never raises on a damaged code and returns its best guess
(or ``None`` when nothing at all can be read).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .ac import CodecConfig, ac_decode, ac_encode, sac_decode, sac_encode
from .bits import ones
from .moac import MoacConfig, moac_decode, moac_encode
from .moapc import moapc_decode, moapc_encode
from .prefix import (Codebook, huffman, isi_mitigating, mohuffman, mopc_star, prefix_decode,
                     prefix_encode, uncoded)
from .source import Alphabet, CumulativeModel, DecodeError, build_cumulative

CODEBOOK_BUILDERS: dict[str, Callable[[Alphabet], Codebook]] = {
    "uncoded": uncoded,
    "isi": isi_mitigating,
    "huffman": huffman,
    "mohuffman": mohuffman,
    "mopc": mopc_star,
}
ARITHMETIC = ("ac", "sac", "moac", "moapc")
SCHEMES = tuple(CODEBOOK_BUILDERS) + ARITHMETIC
# codes of these schemes never hold two adjacent 1s, so the receiver may
# clear the bit after every detected 1
CONSTRAINED = frozenset({"isi", "mohuffman", "mopc", "sac", "moac", "moapc"})

LABELS = {
    "uncoded": "Uncoded", "isi": "ISI-Mitigating", "huffman": "Huffman",
    "mohuffman": "MoHuffman", "mopc": "MoPC*", "ac": "AC", "sac": "SAC",
    "moac": "MoAC", "moapc": "MoAPC",
}


@dataclass
class Scheme:
    name: str
    alphabet: Alphabet
    precision_bits: int = 20
    model: CumulativeModel = field(init=False, repr=False)
    codebook: Optional[Codebook] = field(init=False, repr=False)

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {', '.join(SCHEMES)}")
        self.model = build_cumulative(self.alphabet)
        if self.name in CODEBOOK_BUILDERS:
            self.codebook = CODEBOOK_BUILDERS[self.name](self.alphabet)
        elif self.name == "moapc":
            self.codebook = mopc_star(self.alphabet)
        else:
            self.codebook = None

    @property
    def label(self) -> str:
        return LABELS[self.name]

    @property
    def constrained(self) -> bool:
        return self.name in CONSTRAINED

    @property
    def exact_stats(self) -> bool:
        return self.name in CODEBOOK_BUILDERS

    def _ac_cfg(self) -> CodecConfig:
        return CodecConfig(self.precision_bits)

    def _moac_cfg(self) -> MoacConfig:
        return MoacConfig(self.precision_bits)

    def encode(self, word: Sequence[str]) -> str:
        if self.name in CODEBOOK_BUILDERS:
            return prefix_encode(self.codebook, word)
        if self.name == "ac":
            return ac_encode(self.model, word, self._ac_cfg())
        if self.name == "sac":
            return sac_encode(self.model, word, self._ac_cfg())
        if self.name == "moac":
            return moac_encode(self.model, word, self._moac_cfg())
        return moapc_encode(self.model, self.codebook, word, self._moac_cfg()).bits

    def _decode(self, bits: str, n: Optional[int], strict: bool, limit: int) -> tuple[str, ...]:
        if self.name in CODEBOOK_BUILDERS:
            return prefix_decode(self.codebook, bits, n, strict)
        if self.name == "ac":
            return ac_decode(self.model, bits, self._ac_cfg(), n, limit, strict)
        if self.name == "sac":
            return sac_decode(self.model, bits, self._ac_cfg(), n, limit, strict)
        if self.name == "moac":
            return moac_decode(self.model, bits, self._moac_cfg(), n, limit, strict)
        return moapc_decode(self.model, self.codebook, bits, self._moac_cfg(), n, strict)

    def decode_strict(self, bits: str, n: int) -> tuple[str, ...]:
        """Exact decoder; ``n`` is the symbol count (EOF included) and is only
        handed over when the alphabet has no EOF."""
        hint = None if self.alphabet.has_eof else n
        return self._decode(bits, hint, True, n)

    def decode(self, bits: str, n: int) -> Optional[tuple[str, ...]]:
        """Best-effort decode of a possibly corrupted code of an ``n``-symbol word.

        The receiver knows where each code ends; without an EOF it also knows
        the word length.  With an EOF, reading stops at the first EOF.
        """
        eof = self.alphabet.eof
        hint = None if eof is not None else n
        try:
            word = self._decode(bits, hint, False, 2 * n + 8)
        except (DecodeError, ValueError):
            return None
        if eof is not None and eof in word:
            word = word[:word.index(eof) + 1]
        return word

    def round_trip(self, word: Sequence[str]) -> bool:
        """Whether the exact decoder recovers ``word`` from its own code."""
        try:
            return self.decode_strict(self.encode(word), len(word)) == tuple(word)
        except (DecodeError, ValueError):
            return False

    def exact_word_stats(self, length: int) -> tuple[Fraction, Fraction]:
        """Expected bits and 1-bits of a codebook scheme for ``length`` body
        symbols (plus the EOF code when the alphabet has one)."""
        if not self.exact_stats:
            raise ValueError(f"{self.name} has no fixed codebook")
        body = self.alphabet.body_probs()
        codes = self.codebook.codes
        s = length * sum(p * len(codes[x]) for x, p in body.items())
        m = length * sum(p * ones(codes[x]) for x, p in body.items())
        if self.alphabet.has_eof:
            s += len(codes[self.alphabet.eof])
            m += ones(codes[self.alphabet.eof])
        return Fraction(s), Fraction(m)
