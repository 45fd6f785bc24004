"""Finite-shot measurement records with reproducible randomness.

Each sampled time gets its own counter-based RNG stream keyed by
``(seed, point index)``, so a simulated trace depends only on the inputs,
never on evaluation order.  Counts are stored as integers; empirical
frequencies are exact ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .quantum import ground_population_from_decomposition, spectral_decompose

__all__ = [
    "DataTrace",
    "SamplingSchedule",
    "low_discrepancy_times",
    "schedule_times",
    "simulate_trace",
    "merge_traces",
    "mix64",
]

_MASK64 = (1 << 64) - 1

SCHEDULE_KINDS = ("low-discrepancy", "uniform", "explicit-times", "half-period")


def mix64(*parts) -> int:
    """Mix integers into one 64-bit seed (splitmix64 finalizer per part).

    For each part p: ``h = splitmix((h + GOLDEN + p) mod 2^64)`` where
    splitmix is the xor-shift/multiply finalizer of SplitMix64.  Used to
    derive per-run and per-round seeds from a master seed.
    """
    h = 0
    for p in parts:
        h = (h + 0x9E3779B97F4A7C15 + (int(p) & _MASK64)) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


@dataclass(frozen=True)
class DataTrace:
    """Measured |1> counts per sampling time.

    The constructor canonicalizes: times sorted ascending, exact duplicate
    times pooled by summing successes and shots.
    """

    times: np.ndarray
    successes: np.ndarray
    shots: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        successes = np.asarray(self.successes, dtype=np.int64)
        shots = np.asarray(self.shots, dtype=np.int64)
        if not (times.shape == successes.shape == shots.shape) or times.ndim != 1:
            raise InvalidParameterError("times, successes and shots must be equal-length 1-d")
        if np.any(shots < 1):
            raise InvalidParameterError("shots must be positive at every time")
        if np.any(successes < 0) or np.any(successes > shots):
            raise InvalidParameterError("successes must lie in [0, shots]")
        uniq, inverse = np.unique(times, return_inverse=True)
        if uniq.size != times.size:
            successes = np.bincount(inverse, weights=successes).astype(np.int64)
            shots = np.bincount(inverse, weights=shots).astype(np.int64)
            times = uniq
        else:
            order = np.argsort(times, kind="stable")
            times = times[order]
            successes = successes[order]
            shots = shots[order]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "successes", successes)
        object.__setattr__(self, "shots", shots)

    @property
    def frequencies(self) -> np.ndarray:
        return self.successes / self.shots

    @property
    def n_points(self) -> int:
        return int(self.times.size)

    @property
    def total_shots(self) -> int:
        return int(self.shots.sum())

    def __len__(self):
        return self.n_points

    def __eq__(self, other):
        if not isinstance(other, DataTrace):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.successes, other.successes)
            and np.array_equal(self.shots, other.shots)
        )


def _radical_inverse_base2(i: int) -> float:
    f = 1.0
    r = 0.0
    while i > 0:
        i, rem = divmod(i, 2)
        f /= 2.0
        r += f * rem
    return r


def low_discrepancy_times(count: int, time_range) -> np.ndarray:
    """Deterministic van der Corput (base 2) points scaled to the range.

    Uses indices 1..count of the radical-inverse sequence, so the first
    point is the interval midpoint.  No RNG involved.
    """
    t_min, t_max = float(time_range[0]), float(time_range[1])
    if not t_max > t_min:
        raise InvalidParameterError("empty time range %r" % (time_range,))
    if count < 1:
        raise InvalidParameterError("count must be >= 1, got %d" % count)
    span = t_max - t_min
    return np.array([t_min + span * _radical_inverse_base2(i) for i in range(1, count + 1)])


@dataclass(frozen=True)
class SamplingSchedule:
    """Recipe for a set of sampling times."""

    kind: str
    time_range: tuple = (0.0, 20.0)
    count: int = 100
    explicit: np.ndarray | None = None  # for kind="explicit-times"
    omega: float | None = None  # for kind="half-period"

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise InvalidParameterError(
                "unknown schedule kind %r (expected one of %s)" % (self.kind, ", ".join(SCHEDULE_KINDS))
            )
        t_min, t_max = self.time_range
        if not (t_min >= 0.0 and t_max > t_min):
            raise InvalidParameterError("schedule range must satisfy 0 <= t_min < t_max")
        if self.count < 1:
            raise InvalidParameterError("schedule count must be >= 1")


def schedule_times(schedule: SamplingSchedule) -> np.ndarray:
    """Realize a schedule as a concrete array of times (always deterministic)."""
    t_min, t_max = schedule.time_range
    if schedule.kind == "low-discrepancy":
        return low_discrepancy_times(schedule.count, schedule.time_range)
    if schedule.kind == "uniform":
        return np.linspace(t_min, t_max, schedule.count)
    if schedule.kind == "explicit-times":
        if schedule.explicit is None:
            raise InvalidParameterError("explicit-times schedule needs explicit times")
        times = np.asarray(schedule.explicit, dtype=float)
        if times.size != schedule.count:
            raise InvalidParameterError(
                "explicit times length %d does not match count %d" % (times.size, schedule.count)
            )
        return times
    # half-period
    if schedule.omega is None or schedule.omega <= 0.0:
        raise InvalidParameterError("half-period schedule needs omega > 0")
    step = math.pi / schedule.omega
    j0 = math.ceil(t_min / step)
    times = (j0 + np.arange(schedule.count)) * step
    if times[-1] > t_max:
        raise InvalidParameterError(
            "half-period schedule does not fit: %d points of spacing %.4g exceed t_max=%g"
            % (schedule.count, step, t_max)
        )
    return times


def simulate_trace(H, times, shots: int, seed: int) -> DataTrace:
    """Binomial measurement record of p11 at the given times.

    The success count at canonical (sorted) position n is drawn from a
    Philox stream keyed by ``(seed, n)``; identical inputs give identical
    traces no matter how the evaluation is ordered or parallelized.
    """
    if shots < 1:
        raise InvalidParameterError("shots must be >= 1, got %r" % (shots,))
    times = np.sort(np.asarray(times, dtype=float))
    sd = spectral_decompose(H)
    probs = np.clip(ground_population_from_decomposition(sd, times), 0.0, 1.0)
    successes = np.empty(times.size, dtype=np.int64)
    key = int(seed) & _MASK64
    for n in range(times.size):
        rng = np.random.Generator(np.random.Philox(key=np.array([key, n], dtype=np.uint64)))
        successes[n] = rng.binomial(shots, probs[n])
    return DataTrace(times=times, successes=successes, shots=np.full(times.size, shots, dtype=np.int64))


def merge_traces(a: DataTrace, b: DataTrace) -> DataTrace:
    """Pool two traces; coincident times add their counts."""
    return DataTrace(
        times=np.concatenate([a.times, b.times]),
        successes=np.concatenate([a.successes, b.successes]),
        shots=np.concatenate([a.shots, b.shots]),
    )
