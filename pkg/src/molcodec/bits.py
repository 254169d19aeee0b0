"""Bit strings are plain ``str`` objects over ``'0'``/``'1'``.

Keeping them as strings makes codebooks, CSV output and doctests readable;
the codecs convert to integers where arithmetic is needed.
"""

from __future__ import annotations

from fractions import Fraction


class ConstraintError(ValueError):
    """A bit string violates the (1, inf) run-length constraint."""


def check_bits(bits: str) -> str:
    if any(b not in "01" for b in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return bits


def no_consecutive_ones(bits: str) -> bool:
    return "11" not in bits


def ends_with_zero(bits: str) -> bool:
    return bits.endswith("0")


def ones(bits: str) -> int:
    return bits.count("1")


def substitute_ones(bits: str) -> str:
    """Replace every 1 by 10, the substitution used by SAC and MoHuffman.

    >>> substitute_ones("011")
    '01010'
    """
    return bits.replace("1", "10")


def unsubstitute_ones(bits: str) -> str:
    """Inverse of :func:`substitute_ones`.

    A trailing lone ``1`` (its ``0`` cut off, e.g. by a detection error) is
    read as a 1.

    >>> unsubstitute_ones("01010")
    '011'
    """
    if "11" in bits:
        raise ConstraintError("consecutive 1s in substituted bit string")
    return bits.replace("10", "1")


def dyadic_interval(bits: str) -> tuple[Fraction, Fraction]:
    """Interval ``[k, k + 2**-n)`` a binary code addresses in ``[0, 1)``.

    >>> dyadic_interval("011")
    (Fraction(3, 8), Fraction(1, 2))
    """
    n = len(bits)
    k = Fraction(int(bits, 2) if bits else 0, 1 << n)
    return k, k + Fraction(1, 1 << n)
