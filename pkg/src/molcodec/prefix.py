"""Prefix codebooks: Huffman, MoHuffman, optimal constrained (MoPC*) and the
fixed-length baselines, with encode/decode and a small text format."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .bits import ends_with_zero, no_consecutive_ones, ones, substitute_ones
from .source import Alphabet, DecodeError, EncodingError


class InfeasibleError(ValueError):
    """No codebook satisfies the requested constraints."""


@dataclass(frozen=True)
class Codebook:
    """Symbol -> code map, kept in alphabet order, with the symbol probabilities."""

    codes: dict
    probs: dict

    def __post_init__(self):
        if set(self.codes) != set(self.probs):
            raise ValueError("codes and probabilities must cover the same symbols")
        words = list(self.codes.values())
        if len(set(words)) != len(words):
            raise ValueError("duplicate codewords")
        for a, b in itertools.permutations(words, 2):
            if b.startswith(a):
                raise ValueError(f"{a!r} is a prefix of {b!r}")

    @property
    def expected_length(self) -> Fraction:
        return sum(self.probs[s] * len(c) for s, c in self.codes.items())

    @property
    def expected_ones(self) -> Fraction:
        return sum(self.probs[s] * ones(c) for s, c in self.codes.items())

    @property
    def kraft(self) -> Fraction:
        return sum(Fraction(1, 2 ** len(c)) for c in self.codes.values())

    def is_constrained(self) -> bool:
        return all(no_consecutive_ones(c) and ends_with_zero(c) for c in self.codes.values())

    def to_text(self) -> str:
        return "".join(f"{s} = {c}\n" for s, c in self.codes.items())

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet) -> "Codebook":
        codes = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not value.strip() or set(value.strip()) - set("01"):
                raise ValueError(f"line {lineno}: expected 'symbol = bits'")
            codes[key.strip()] = value.strip()
        return cls(codes, dict(zip(alphabet.symbols, alphabet.probs)))

    @classmethod
    def load(cls, path, alphabet: Alphabet) -> "Codebook":
        return cls.from_text(Path(path).read_text(), alphabet)


def _assign(alphabet: Alphabet, codewords: Iterable[str]) -> Codebook:
    """Cheapest codes to the likeliest symbols: order by length, then 1-count."""
    order = sorted(range(alphabet.size), key=lambda i: -alphabet.probs[i])
    ranked = sorted(codewords, key=lambda c: (len(c), ones(c), c))
    codes = {alphabet.symbols[i]: ranked[r] for r, i in enumerate(order)}
    codes = {s: codes[s] for s in alphabet.symbols}
    return Codebook(codes, dict(zip(alphabet.symbols, alphabet.probs)))


def huffman_lengths(probs: Sequence[Fraction]) -> list[int]:
    if len(probs) < 2:
        raise ValueError("Huffman coding needs at least two symbols")
    heap = [(p, i, [i]) for i, p in enumerate(probs)]
    heapq.heapify(heap)
    depth = [0] * len(probs)
    tick = len(probs)
    while len(heap) > 1:
        pa, _, a = heapq.heappop(heap)
        pb, _, b = heapq.heappop(heap)
        for i in a + b:
            depth[i] += 1
        heapq.heappush(heap, (pa + pb, tick, a + b))
        tick += 1
    return depth


def canonical_codes(lengths: Iterable[int]) -> list[str]:
    """Canonical prefix code for a multiset of lengths (shortest first)."""
    out = []
    code, prev = 0, None
    for n in sorted(lengths):
        if prev is not None:
            code = (code + 1) << (n - prev)
        out.append(format(code, f"0{n}b"))
        prev = n
    return out


def huffman(alphabet: Alphabet) -> Codebook:
    """Huffman codebook; among equal lengths fewer 1s go to likelier symbols.

    >>> from molcodec.source import ALPHABET_1
    >>> huffman(ALPHABET_1).codes
    {'A': '0', 'T': '10', 'C': '110', 'G': '111'}
    """
    return _assign(alphabet, canonical_codes(huffman_lengths(alphabet.probs)))


def mohuffman(alphabet: Alphabet) -> Codebook:
    """Huffman codebook with every 1 replaced by 10."""
    book = huffman(alphabet)
    return Codebook({s: substitute_ones(c) for s, c in book.codes.items()}, book.probs)


@lru_cache(maxsize=None)
def _full_trees(n: int) -> tuple[tuple[str, ...], ...]:
    """Leaf sets of the full binary trees over the tokens "0" and "10".

    Only one tree per multiset of leaf (length, 1-count) pairs is kept, since
    that multiset alone fixes the codebook statistics.
    """
    if n == 1:
        return (("",),)
    seen = {}
    for k in range(1, n):
        for left in _full_trees(k):
            for right in _full_trees(n - k):
                leaves = tuple("0" + c for c in left) + tuple("10" + c for c in right)
                key = tuple(sorted((len(c), ones(c)) for c in leaves))
                seen.setdefault(key, leaves)
    return tuple(seen.values())


def mopc_star(alphabet: Alphabet, max_len: Optional[int] = 8) -> Codebook:
    """Shortest constrained prefix codebook, fewest expected 1s among those.

    Every codeword ends in 0 and has no two adjacent 1s, so it is a string of
    the tokens "0" and "10", and prefix-freeness of bits equals
    prefix-freeness of tokens.  A codebook of minimal expected length is the
    leaf set of a full binary token tree (an internal node with one child
    could be spliced out), so the search runs over those trees.

    >>> from molcodec.source import Alphabet
    >>> book = mopc_star(Alphabet("ABC", ["0.4", "0.3", "0.3"]))
    >>> book.expected_length, book.expected_ones
    (Fraction(23, 10), Fraction(3, 5))
    """
    if alphabet.size == 1:
        return Codebook({alphabet.symbols[0]: "0"}, {alphabet.symbols[0]: Fraction(1)})
    probs = sorted(alphabet.probs, reverse=True)
    best, best_key = None, None
    for leaves in _full_trees(alphabet.size):
        if max_len is not None and max(len(c) for c in leaves) > max_len:
            continue
        ranked = sorted(leaves, key=lambda c: (len(c), ones(c), c))
        key = (sum(p * len(c) for p, c in zip(probs, ranked)),
               sum(p * ones(c) for p, c in zip(probs, ranked)))
        if best_key is None or key < best_key:
            best, best_key = ranked, key
    if best is None:
        raise InfeasibleError(f"no constrained codebook with codes of at most {max_len} bits")
    return _assign(alphabet, best)


def uncoded(alphabet: Alphabet) -> Codebook:
    """Fixed-length binary codes of the minimal length."""
    n = max(1, (alphabet.size - 1).bit_length())
    words = sorted((format(v, f"0{n}b") for v in range(2 ** n)), key=lambda c: (ones(c), c))
    return _assign(alphabet, words[:alphabet.size])


def isi_mitigating(alphabet: Alphabet) -> Codebook:
    """Fixed-length codes that start with 0, contain a 1 and no adjacent 1s."""
    n = 2
    while True:
        words = [c for c in (format(v, f"0{n}b") for v in range(2 ** (n - 1)))
                 if "1" in c and no_consecutive_ones(c)]
        if len(words) >= alphabet.size:
            break
        n += 1
    words.sort(key=lambda c: (ones(c), c))
    return _assign(alphabet, words[:alphabet.size])


def prefix_encode(book: Codebook, word: Sequence[str]) -> str:
    try:
        return "".join(book.codes[s] for s in word)
    except KeyError as exc:
        raise EncodingError(f"symbol {exc.args[0]!r} not in codebook") from None


def prefix_decode(book: Codebook, bits: str, length_hint: Optional[int] = None,
                  strict: bool = True) -> tuple[str, ...]:
    """Greedy parse; with ``length_hint`` stop after that many symbols.

    ``strict=False`` returns whatever parsed before the first bad bit.
    """
    lookup = {c: s for s, c in book.codes.items()}
    longest = max(len(c) for c in lookup)
    out = []
    i = 0
    while i < len(bits):
        if length_hint is not None and len(out) == length_hint:
            break
        for j in range(i + 1, min(len(bits), i + longest) + 1):
            s = lookup.get(bits[i:j])
            if s is not None:
                out.append(s)
                i = j
                break
        else:
            if not strict:
                return tuple(out)
            raise DecodeError(f"unparseable bits at offset {i}")
    if not strict:
        return tuple(out)
    if i != len(bits):
        raise DecodeError("trailing bits after the last symbol")
    if length_hint is not None and len(out) != length_hint:
        raise DecodeError(f"decoded {len(out)} symbols, expected {length_hint}")
    return tuple(out)
