"""Experiment driver: scheme statistics, budget normalization, end-to-end
error rates and length/power/accuracy curves."""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .bits import ones
from .channel import ChannelParams, fast_counts, impulse_response, simulate
from .detection import (Calibration, DetectionParams, correct, default_spacings, detect,
                        min_from_pilots, sweep, symbol_error)
from .schemes import Scheme
from .source import Alphabet, sample_words

BASELINE = "uncoded"
DESK_MOLECULES = (100, 200, 300, 400)
DESK_WORDS = 512
FULL_WORDS = 5120
PILOT_WORDS = 256
WORD_LENGTH = 20
CURVE_SAMPLES = 400


@dataclass(frozen=True)
class SchemeStats:
    expected_bits: float
    expected_ones: float

    def __post_init__(self):
        if self.expected_ones > self.expected_bits:
            raise ValueError("a code cannot hold more 1-bits than bits")


@dataclass(frozen=True)
class NormalizedConfig:
    signal_interval: int  # ms
    molecules_per_one: int
    factor: float = 1.0  # M1 / M2, molecules_per_one = round(factor * M)

    def __post_init__(self):
        if self.signal_interval <= 0 or self.molecules_per_one <= 0:
            raise ValueError("signal interval and molecule count must be positive")

    @property
    def factor_display(self) -> str:
        # reference tables cut the factor after four decimals rather than rounding
        return f"{math.floor(self.factor * 10**4) / 10**4:.4f}"


@dataclass(frozen=True)
class ErrorReport:
    wer: float
    ser: float
    words_sent: int


def _word_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index, stream]))


def _sample(alphabet: Alphabet, length: int, count: int, seed: int, stream: int = 0):
    # one substream per word, so any subset of words can be regenerated alone
    return [sample_words(alphabet, length, 1, _word_rng(seed, w, stream))[0] for w in range(count)]


def scheme_stats(scheme: Scheme, word_len: int, sample_count: int = 10**5,
                 rng_seed: int = 0) -> SchemeStats:
    """Mean bits and 1-bits per word; exact for codebook schemes."""
    if scheme.exact_stats:
        s, m = scheme.exact_word_stats(word_len)
        return SchemeStats(float(s), float(m))
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    words = sample_words(scheme.alphabet, word_len, sample_count, rng_seed)
    codes = [scheme.encode(w) for w in words]
    return SchemeStats(float(np.mean([len(c) for c in codes])),
                       float(np.mean([ones(c) for c in codes])))


def normalize(baseline: SchemeStats, base_config: NormalizedConfig, target: SchemeStats,
              M_base: Optional[int] = None) -> NormalizedConfig:
    """Give ``target`` the time and molecule budget of the baseline.

    The signal interval scales by S1/S2 and is rounded to whole ms; the
    molecule count scales by M1/M2 and is rounded half to even.
    """
    if target.expected_bits <= 0 or target.expected_ones <= 0:
        raise ValueError("target statistics must be positive")
    if M_base is None:
        M_base = base_config.molecules_per_one
    interval = round(base_config.signal_interval * baseline.expected_bits / target.expected_bits)
    factor = baseline.expected_ones / target.expected_ones
    return NormalizedConfig(interval, max(1, round(factor * M_base)), factor)


def transmit(codes: Sequence[str], params: ChannelParams, seed: int, stream: int = 1,
             method: str = "fast") -> list[np.ndarray]:
    """Send the codes back to back and cut the received trace per code.

    Molecules left over from one word keep arriving during the next ones.
    ``fast`` draws each release's absorptions from the impulse response;
    ``tracking`` follows every molecule (slow, for checks on short runs).
    """
    offsets = np.cumsum([0] + [len(c) for c in codes])
    if method == "tracking":
        total = simulate("".join(codes), params, seed)
    elif method == "fast":
        response = impulse_response(params)
        total = np.zeros(offsets[-1], dtype=np.int64)
        for w, code in enumerate(codes):
            fast_counts(code, params, _word_rng(seed, w, stream), response, offsets[w], total)
    else:
        raise ValueError("method must be 'fast' or 'tracking'")
    return [total[offsets[w]:offsets[w + 1]] for w in range(len(codes))]


def channel_for(scheme: Scheme, base: ChannelParams, stats: SchemeStats,
                baseline_stats: SchemeStats, M: int) -> tuple[ChannelParams, NormalizedConfig]:
    cfg = normalize(baseline_stats, NormalizedConfig(base.ts, M), stats, M)
    return replace(base, ts=cfg.signal_interval, molecules_per_one=cfg.molecules_per_one), cfg


def calibrate(scheme: Scheme, params: ChannelParams, pilot_count: int = PILOT_WORDS,
              word_len: int = WORD_LENGTH, seed: int = 0, rmin_mode: str = "nonzero",
              spacings: Optional[Iterable[int]] = None, method: str = "fast") -> Calibration:
    """Choose a, spacing and min for one scheme from known pilot words."""
    pilots = _sample(scheme.alphabet, word_len, pilot_count, seed, stream=2)
    codes = [scheme.encode(w) for w in pilots]
    traces = transmit(codes, params, seed, stream=3, method=method)
    # every ISI-mitigating block carries a 1, so that scheme needs no gate
    min_count = 0 if scheme.name == "isi" else min_from_pilots(traces, codes)
    if spacings is None:
        spacings = default_spacings(sum(map(len, codes)) / sum(map(len, pilots)))
    return sweep(traces, pilots, scheme.decode, scheme.constrained, spacings, min_count, rmin_mode)


def receive(scheme: Scheme, trace: np.ndarray, det: DetectionParams, n: int,
            rmin_mode: str = "nonzero") -> Optional[tuple]:
    bits = detect(trace, det, rmin_mode)
    if scheme.constrained:
        bits = correct(bits)
    return scheme.decode(bits, n)


def evaluate(scheme: Scheme, params: ChannelParams, det: DetectionParams,
             word_len: int = WORD_LENGTH, word_count: int = DESK_WORDS, rng_seed: int = 0,
             rmin_mode: str = "nonzero", method: str = "fast") -> ErrorReport:
    """Encode, transmit, detect, correct, decode and compare ``word_count`` words."""
    words = _sample(scheme.alphabet, word_len, word_count, rng_seed)
    codes = [scheme.encode(w) for w in words]
    traces = transmit(codes, params, rng_seed, method=method)
    wrong = 0
    ser = 0.0
    for word, trace in zip(words, traces):
        got = receive(scheme, trace, det, len(word), rmin_mode)
        wrong += got != word
        ser += symbol_error(got, word)
    return ErrorReport(wrong / word_count, ser / word_count, word_count)


def ideal_trace(code: str, molecules: int) -> np.ndarray:
    """Counts of a channel without loss or ISI."""
    return np.array([molecules if b == "1" else 0 for b in code], dtype=np.int64)


# ---------------------------------------------------------------- curves

ANALYSES = ("length", "ones", "accuracy", "ratio")


def curve(analysis: str, schemes: Sequence[Scheme], lengths: Iterable[int],
          samples: int = CURVE_SAMPLES, seed: int = 0) -> list[dict]:
    """One row per word length.

    ``length``/``ones`` give mean bits/1-bits per scheme, ``accuracy`` the
    fraction of words the exact decoder recovers, and ``ratio`` divides the
    mean length and 1-count of the first scheme by those of the second.
    """
    if analysis not in ANALYSES:
        raise ValueError(f"analysis must be one of {ANALYSES}")
    if analysis == "ratio" and len(schemes) != 2:
        raise ValueError("ratio curves compare exactly two schemes")
    alphabet = schemes[0].alphabet
    rows = []
    for n in lengths:
        words = sample_words(alphabet, n, samples, np.random.SeedSequence([seed, n]))
        row = {"word_length": n}
        if analysis == "accuracy":
            for s in schemes:
                row[s.name] = float(np.mean([s.round_trip(w) for w in words]))
        else:
            codes = {s.name: [s.encode(w) for w in words] for s in schemes}
            mean_len = {k: float(np.mean([len(c) for c in v])) for k, v in codes.items()}
            mean_ones = {k: float(np.mean([ones(c) for c in v])) for k, v in codes.items()}
            if analysis == "length":
                row.update(mean_len)
            elif analysis == "ones":
                row.update(mean_ones)
            else:
                a, b = (s.name for s in schemes)
                row["length_ratio"] = mean_len[a] / mean_len[b]
                row["ones_ratio"] = mean_ones[a] / mean_ones[b]
        rows.append(row)
    return rows


def write_csv(rows: Sequence[dict], fh):
    if not rows:
        return
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})


# ---------------------------------------------------------------- config

CHANNEL_KEYS = {"D": float, "r0": float, "rR": float, "ts": int, "dt": float,
                "molecules_per_one": int, "noise_variance": float}


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` and ``;`` start comments."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string("[run]\n" + Path(path).read_text())
    return dict(cp["run"])


def channel_from(config: dict, **overrides) -> ChannelParams:
    kw = {k: conv(config[k]) for k, conv in CHANNEL_KEYS.items() if k in config}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ChannelParams(**kw)
