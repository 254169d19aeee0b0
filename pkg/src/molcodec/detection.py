"""Adaptive-threshold detection, ISI error correction and pilot calibration.

The received trace is cut into chunks of ``spacing`` intervals (the last
chunk takes the remainder).  In each chunk the threshold is

    tau = a * r_min + (1 - a) * r_max

with ``r_min`` the smallest nonzero count (infinite for an all-zero chunk),
and an interval reads as 1 when its count reaches both ``tau`` and ``min``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein

RMIN_MODES = ("nonzero", "exclude_first")
A_STEP = 0.004
MIN_SCALE = 5 / 6


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class DetectionParams:
    a: float = 0.5
    spacing: int = 4
    min: int = 1

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise ValueError("a must lie in [0, 1]")
        if self.spacing < 1:
            raise ValueError("spacing must be positive")
        if self.min < 0:
            raise ValueError("min must be nonnegative")


def chunk_bounds(n: int, spacing: int) -> list[tuple[int, int]]:
    """Chunks of ``spacing`` intervals; the last one also takes the remainder."""
    m = max(1, n // spacing)
    bounds = [(k * spacing, (k + 1) * spacing) for k in range(m - 1)]
    bounds.append(((m - 1) * spacing, n))
    return bounds


def _rmin(chunk: np.ndarray, mode: str) -> float:
    if mode == "exclude_first" and chunk.size > 1:
        return float(chunk[1:].min())
    nz = chunk[chunk > 0]
    return float(nz.min()) if nz.size else math.inf


def thresholds(counts: np.ndarray, spacing: int, a, rmin_mode: str = "nonzero") -> np.ndarray:
    """Per-interval thresholds; ``a`` may be an array (one row per value)."""
    if rmin_mode not in RMIN_MODES:
        raise ValueError(f"rmin_mode must be one of {RMIN_MODES}")
    counts = np.asarray(counts)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    tau = np.empty((a.size, counts.size))
    for lo, hi in chunk_bounds(counts.size, spacing):
        chunk = counts[lo:hi]
        rmax = float(chunk.max()) if chunk.size else 0.0
        rmin = _rmin(chunk, rmin_mode)
        if math.isinf(rmin):
            tau[:, lo:hi] = math.inf
        else:
            # same value as a*rmin + (1-a)*rmax, but exact when rmin == rmax or a == 1
            tau[:, lo:hi] = (rmax - a * (rmax - rmin))[:, None]
    return tau


def detect(counts: Sequence[int], params: DetectionParams, rmin_mode: str = "nonzero") -> str:
    """Bits read from a trace.

    >>> detect([10, 2, 0, 9], DetectionParams(a=0.5, spacing=4, min=1))
    '1001'
    """
    counts = np.asarray(counts)
    if counts.size == 0:
        return ""
    tau = thresholds(counts, params.spacing, params.a, rmin_mode)[0]
    ones = (counts >= tau) & (counts >= params.min)
    return "".join("1" if b else "0" for b in ones)


def correct(bits: str) -> str:
    """Left-to-right sweep clearing the bit after every 1.

    >>> correct("1111")
    '1010'
    """
    out = list(bits)
    for j in range(len(out) - 1):
        if out[j] == "1":
            out[j + 1] = "0"
    return "".join(out)


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Levenshtein distance between two symbol sequences."""
    return Levenshtein.distance(list(a), list(b))


def symbol_error(decoded: Optional[Sequence], original: Sequence) -> float:
    """Edit distance over the original length, capped at 1; None means failure."""
    if decoded is None:
        return 1.0
    if tuple(decoded) == tuple(original):
        return 0.0
    return min(1.0, edit_distance(decoded, original) / len(original))


@dataclass
class Calibration:
    params: DetectionParams
    pilot_ser: float
    # pilot SER for every (a, spacing) tried, rows follow ``spacings``
    grid: np.ndarray
    a_values: np.ndarray
    spacings: tuple


def a_grid(step: float = A_STEP) -> np.ndarray:
    n = int(round(1 / step))
    return np.round(np.arange(n + 1) * step, 10)


def sweep(traces: Sequence[np.ndarray], pilots: Sequence[Sequence[str]],
          decode: Callable[[str, int], Optional[tuple]], constrained: bool,
          spacings: Sequence[int], min_count: int, rmin_mode: str = "nonzero",
          a_values: Optional[np.ndarray] = None) -> Calibration:
    """Pick (a, spacing) with the lowest pilot SER; ties go to smaller a, then spacing.

    Detected bits only switch on as ``a`` grows, so each trace yields few
    distinct bit patterns over the grid; every pattern is decoded once.
    """
    if a_values is None:
        a_values = a_grid()
    spacings = tuple(spacings)
    grid = np.zeros((len(spacings), a_values.size))
    for trace, word in zip(traces, pilots):
        trace = np.asarray(trace)
        cache = {}
        for si, sp in enumerate(spacings):
            tau = thresholds(trace, sp, a_values, rmin_mode)
            on = (trace[None, :] >= tau) & (trace[None, :] >= min_count)
            # a larger a only lowers thresholds, so equal rows are adjacent
            starts = np.flatnonzero(np.r_[True, (on[1:] != on[:-1]).any(axis=1)])
            ends = np.r_[starts[1:], a_values.size]
            for lo, hi in zip(starts, ends):
                key = on[lo].tobytes()
                if key not in cache:
                    bits = "".join(np.where(on[lo], "1", "0"))
                    if constrained:
                        bits = correct(bits)
                    cache[key] = symbol_error(decode(bits, len(word)), word)
                grid[si, lo:hi] += cache[key]
    grid /= max(1, len(pilots))
    # argmin over a first (smallest a on ties), then over spacing
    best = None
    for ai in range(a_values.size):
        for si in range(len(spacings)):
            if best is None or grid[si, ai] < grid[best[0], best[1]]:
                best = (si, ai)
    si, ai = best
    params = DetectionParams(float(a_values[ai]), spacings[si], min_count)
    return Calibration(params, float(grid[si, ai]), grid, a_values, spacings)


def min_from_pilots(traces: Sequence[np.ndarray], pilot_bits: Sequence[str]) -> int:
    """Scaled-down smallest count seen in an interval that carried a 1."""
    lows = [int(np.asarray(t)[[i for i, b in enumerate(bits) if b == "1"]].min())
            for t, bits in zip(traces, pilot_bits) if "1" in bits]
    if not lows:
        raise CalibrationError("pilots transmitted no 1-bit")
    return int(math.floor(MIN_SCALE * min(lows)))


def default_spacings(bits_per_symbol: float) -> range:
    """Spacings 2 .. 2 * (mean code bits per source symbol)."""
    return range(2, max(2, int(math.floor(2 * bits_per_symbol))) + 1)


def save_calibrations(path, table: dict):
    """Write ``{(scheme, molecules): DetectionParams}`` as an INI file."""
    cp = configparser.ConfigParser()
    for (scheme, molecules), p in sorted(table.items()):
        cp[f"{scheme}:{molecules}"] = {"a": f"{p.a:.3f}", "spacing": str(p.spacing), "min": str(p.min)}
    with open(path, "w") as fh:
        cp.write(fh)


def load_calibrations(path) -> dict:
    cp = configparser.ConfigParser()
    cp.read_string(Path(path).read_text())
    out = {}
    for name in cp.sections():
        scheme, _, molecules = name.rpartition(":")
        sec = cp[name]
        out[(scheme, int(molecules))] = DetectionParams(
            sec.getfloat("a"), sec.getint("spacing"), sec.getint("min"))
    return out
