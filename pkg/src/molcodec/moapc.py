"""MoAPC: MoAC with a MoPC* fallback, selected by a one- or two-bit header.

Header ``0`` announces a MoAC payload, header ``10`` a prefix-coded one.  The
encoder only uses MoAC when decoding its own output gives the word back, so
every frame decodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .moac import DEFAULT_CONFIG, MoacConfig, moac_decode, moac_encode_verified
from .prefix import Codebook, prefix_decode, prefix_encode
from .source import CumulativeModel, DecodeError

MOAC_HEADER = "0"
PREFIX_HEADER = "10"


@dataclass(frozen=True)
class MoapcFrame:
    header: str
    payload: str
    scheme: str  # "moac" or "mopc"

    def __post_init__(self):
        expected = MOAC_HEADER if self.scheme == "moac" else PREFIX_HEADER
        if self.scheme not in ("moac", "mopc") or self.header != expected:
            raise ValueError(f"header {self.header!r} does not match scheme {self.scheme!r}")

    @property
    def bits(self) -> str:
        return self.header + self.payload


def moapc_encode(model: CumulativeModel, book: Codebook, word: Sequence[str],
                 cfg: MoacConfig = DEFAULT_CONFIG) -> MoapcFrame:
    bits, ok = moac_encode_verified(model, word, cfg)
    if ok:
        return MoapcFrame(MOAC_HEADER, bits, "moac")
    return MoapcFrame(PREFIX_HEADER, prefix_encode(book, word), "mopc")


def moapc_decode(model: CumulativeModel, book: Codebook, bits: str,
                 cfg: MoacConfig = DEFAULT_CONFIG, length_hint: Optional[int] = None,
                 strict: bool = True) -> tuple[str, ...]:
    """Decode one frame; ``length_hint`` counts all symbols, EOF included."""
    if bits.startswith(MOAC_HEADER):
        return moac_decode(model, bits[1:], cfg, length_hint=length_hint, strict=strict)
    if bits.startswith(PREFIX_HEADER):
        word = prefix_decode(book, bits[2:], length_hint, strict)
        if strict and cfg.uses_eof(model):
            eof = model.symbols[model.eof_index]
            if not word or word[-1] != eof or eof in word[:-1]:
                raise DecodeError("prefix payload does not end with the only EOF")
        return word
    raise DecodeError("frame does not start with a valid header")
