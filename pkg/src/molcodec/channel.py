"""Diffusion channel with a point transmitter and an absorbing spherical receiver.

A 1-bit releases ``molecules_per_one`` molecules at the start of its signal
interval (on-off keying); a 0-bit releases nothing.  Molecules take Gaussian
steps of variance ``2 D dt`` per axis, are absorbed when a step ends inside
the receiver, and otherwise stay in the medium for later intervals.

Units are micrometres and milliseconds throughout; ``D`` is given in um^2/s
as is customary and converted on use.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import erfc


@dataclass(frozen=True)
class ChannelParams:
    D: float = 79.4            # um^2/s
    r0: float = 10.0           # transmitter to receiver centre, um
    rR: float = 5.0            # receiver radius, um
    ts: int = 200              # signal interval, ms
    dt: float = 1.0            # step, ms
    molecules_per_one: int = 100
    noise_variance: float = 0.0

    def __post_init__(self):
        if not self.r0 > self.rR > 0:
            raise ValueError("need r0 > rR > 0")
        if not 0 < self.dt <= self.ts:
            raise ValueError("need 0 < dt <= ts")
        if abs(self.ts / self.dt - round(self.ts / self.dt)) > 1e-9:
            raise ValueError("ts must be a multiple of dt")

    @property
    def d_per_ms(self) -> float:
        return self.D / 1000.0

    @property
    def steps_per_interval(self) -> int:
        return int(round(self.ts / self.dt))

    @property
    def step_sigma(self) -> float:
        return math.sqrt(2 * self.d_per_ms * self.dt)


def _release_rng(seed: int, index: int) -> np.random.Generator:
    # one substream per release keeps traces independent of processing order
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def walk(n: int, steps: int, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Track ``n`` molecules released together; step index of absorption or -1.

    Steps are counted from 1; a molecule absorbed at step ``k`` was inside the
    receiver after ``k * dt`` ms.
    """
    pos = np.zeros((n, 3))
    pos[:, 0] = params.r0
    alive = np.arange(n)
    hit = np.full(n, -1, dtype=np.int64)
    sigma = params.step_sigma
    r2 = params.rR ** 2
    for k in range(1, steps + 1):
        if alive.size == 0:
            break
        p = pos[alive] + rng.normal(0.0, sigma, size=(alive.size, 3))
        inside = np.einsum("ij,ij->i", p, p) <= r2
        hit[alive[inside]] = k
        pos[alive] = p
        alive = alive[~inside]
    return hit


def displacements(n: int, steps: int, params: ChannelParams, seed: int = 0) -> np.ndarray:
    """Free-diffusion displacement (n x 3) after ``steps`` steps, no receiver."""
    rng = np.random.default_rng(seed)
    out = np.zeros((n, 3))
    for _ in range(steps):
        out += rng.normal(0.0, params.step_sigma, size=(n, 3))
    return out


def _add_noise(counts: np.ndarray, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    if params.noise_variance <= 0:
        return counts
    noisy = counts + rng.normal(0.0, math.sqrt(params.noise_variance), size=counts.shape)
    return np.maximum(0, np.rint(noisy)).astype(np.int64)


def simulate(bits: str, params: ChannelParams, rng_seed: int = 0) -> np.ndarray:
    """Particle-tracking trace: absorbed molecules per signal interval."""
    n = len(bits)
    spi = params.steps_per_interval
    counts = np.zeros(n, dtype=np.int64)
    for j, b in enumerate(bits):
        if b != "1":
            continue
        hit = walk(params.molecules_per_one, (n - j) * spi, params, _release_rng(rng_seed, j))
        hit = hit[hit > 0]
        np.add.at(counts, j + (hit - 1) // spi, 1)
    return _add_noise(counts, params, np.random.default_rng([rng_seed, n]))


def hit_probability(t_ms, params: ChannelParams):
    """Probability that a molecule released at time 0 is absorbed by ``t_ms``."""
    t = np.asarray(t_ms, dtype=float)
    with np.errstate(divide="ignore"):
        z = (params.r0 - params.rR) / np.sqrt(4 * params.d_per_ms * t)
    return params.rR / params.r0 * erfc(z)


# Impulse response used by the fast path.  Molecules do not interact, so the
# counts caused by one release are multinomial over the per-interval
# absorption probabilities; those come from a one-off particle-tracking run
# (early part, where the discrete step matters) and the closed-form hitting
# probability (late tail).
IMPULSE_PARTICLES = 20_000
IMPULSE_TRACKED_MS = 2_000
IMPULSE_HORIZON_MS = 20_000


@lru_cache(maxsize=8)
def _step_pmf(D: float, r0: float, rR: float, dt: float, particles: int, seed: int) -> np.ndarray:
    params = ChannelParams(D=D, r0=r0, rR=rR, ts=max(1, int(math.ceil(dt))), dt=dt)
    tracked = int(round(IMPULSE_TRACKED_MS / dt))
    total = int(round(IMPULSE_HORIZON_MS / dt))
    hit = walk(particles, tracked, params, np.random.default_rng(seed))
    pmf = np.zeros(total)
    pmf[:tracked] = np.bincount(hit[hit > 0] - 1, minlength=tracked)[:tracked] / particles
    edges = np.arange(tracked, total + 1) * dt
    pmf[tracked:] = np.diff(hit_probability(edges, params))
    return pmf


def impulse_response(params: ChannelParams, particles: int = IMPULSE_PARTICLES,
                     seed: int = 12345) -> np.ndarray:
    """Absorption probability per signal interval after a release at interval 0."""
    pmf = _step_pmf(params.D, params.r0, params.rR, params.dt, particles, seed)
    spi = params.steps_per_interval
    n = int(math.ceil(pmf.size / spi))
    padded = np.zeros(n * spi)
    padded[:pmf.size] = pmf
    return padded.reshape(n, spi).sum(axis=1)


def fast_counts(bits: str, params: ChannelParams, rng: np.random.Generator,
                response: Optional[np.ndarray] = None, start: int = 0,
                out: Optional[np.ndarray] = None) -> np.ndarray:
    """Add the absorptions caused by ``bits`` (placed at ``start``) to ``out``.

    Equivalent in distribution to :func:`simulate`, up to the impulse
    response estimate and its horizon.
    """
    if response is None:
        response = impulse_response(params)
    if out is None:
        out = np.zeros(start + len(bits), dtype=np.int64)
    total = out.size
    for j, b in enumerate(bits):
        if b != "1":
            continue
        at = start + j
        probs = response[:total - at]
        draw = rng.multinomial(params.molecules_per_one, np.append(probs, max(0.0, 1 - probs.sum())))
        out[at:at + probs.size] += draw[:-1]
    return out


def write_trace(dest, counts: Sequence[int]):
    """CSV of (interval_index, count); ``dest`` is a path or an open text file."""
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", newline="") as fh:
            write_trace(fh, counts)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["interval_index", "count"])
    for i, c in enumerate(counts):
        w.writerow([i, int(c)])
