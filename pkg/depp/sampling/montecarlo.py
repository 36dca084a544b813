"""Reproducible shot sampling of coincidence patterns.

The generator is xorshift64* with fixed shifts (12, 25, 27) and multiplier
2685821657736338717, so golden counts are identical on every platform.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from depp.core.diag import debug
from depp.optics.network import ALL_PATTERNS
from depp.protocols.depp import RunResult

__all__ = [
    "SamplingError",
    "RngState",
    "SampleReport",
    "rng_next",
    "uniform",
    "shard_seeds",
    "sample_patterns",
    "sample_patterns_sharded",
    "wilson_halfwidth",
    "wilson_center",
    "rng_call_count",
    "ZERO_SEED_REPLACEMENT",
]

MASK64 = (1 << 64) - 1
MULTIPLIER = 2685821657736338717
ZERO_SEED_REPLACEMENT = 0x9E3779B97F4A7C15
WILSON_Z = 1.959963984540054  # two-sided 95%
DISTRIBUTION_TOL = 1e-9


class SamplingError(ValueError):
    pass


class _CallCounter:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._n = 0

    def bump(self) -> None:
        with self._lock:
            self._n += 1

    @property
    def value(self) -> int:
        with self._lock:
            return self._n


_calls = _CallCounter()


def rng_call_count() -> int:
    """Total rng_next calls in this process (instrumentation for the analytic path)."""
    return _calls.value


@dataclass(frozen=True)
class RngState:
    state: int

    def __post_init__(self) -> None:
        if not 0 < self.state <= MASK64:
            raise SamplingError(f"RngState must be a nonzero 64-bit value, got {self.state!r}")

    @classmethod
    def from_seed(cls, seed: int) -> "RngState":
        s = int(seed) & MASK64
        return cls(s if s != 0 else ZERO_SEED_REPLACEMENT)


def rng_next(s: RngState) -> tuple[RngState, int]:
    _calls.bump()
    x = s.state
    x ^= x >> 12
    x ^= (x << 25) & MASK64
    x ^= x >> 27
    return RngState(x), (x * MULTIPLIER) & MASK64


def uniform(output: int) -> float:
    """Uniform real in [0, 1) from the high 53 bits."""
    return (output >> 11) / float(1 << 53)


def wilson_halfwidth(count: int, shots: int, z: float = WILSON_Z) -> float:
    p = count / shots
    z2 = z * z
    return (z / (1.0 + z2 / shots)) * math.sqrt(p * (1.0 - p) / shots + z2 / (4.0 * shots * shots))


def wilson_center(count: int, shots: int, z: float = WILSON_Z) -> float:
    z2 = z * z
    return (count / shots + z2 / (2.0 * shots)) / (1.0 + z2 / shots)


@dataclass(frozen=True)
class SampleReport:
    shots: int
    seed: int
    counts: dict[str, int]
    frequencies: dict[str, float]
    ci_halfwidth: dict[str, float]
    shards: int = 1

    def interval(self, key: str) -> tuple[float, float]:
        """95% Wilson interval (low, high) for a pattern key such as "cd"."""
        c = wilson_center(self.counts[key], self.shots)
        h = self.ci_halfwidth[key]
        return max(0.0, c - h), min(1.0, c + h)


def _distribution(rr: RunResult) -> list[tuple[str, float]]:
    probs = rr.probabilities()
    dist = [(p.key, max(0.0, probs.get(p, 0.0))) for p in ALL_PATTERNS]
    total = math.fsum(v for _, v in dist)
    if abs(total - 1.0) > DISTRIBUTION_TOL:
        raise SamplingError(f"pattern probabilities sum to {total!r}, expected 1")
    return dist


def _draw(dist: list[tuple[str, float]], shots: int, state: RngState) -> dict[str, int]:
    cumulative: list[tuple[str, float]] = []
    acc = 0.0
    for key, p in dist:
        acc += p
        cumulative.append((key, acc))
    # Rounding can leave u above the last bound; fall back to the last populated pattern.
    fallback = [key for key, p in dist if p > 0.0][-1]

    counts = {key: 0 for key, _ in dist}
    for _ in range(shots):
        state, out = rng_next(state)
        u = uniform(out)
        for key, bound in cumulative:
            if u < bound:
                counts[key] += 1
                break
        else:
            counts[fallback] += 1
    return counts


def _report(shots: int, seed: int, counts: dict[str, int], shards: int) -> SampleReport:
    return SampleReport(
        shots=shots,
        seed=seed,
        counts=counts,
        frequencies={k: c / shots for k, c in counts.items()},
        ci_halfwidth={k: wilson_halfwidth(c, shots) for k, c in counts.items()},
        shards=shards,
    )


def sample_patterns(rr: RunResult, shots: int, seed: int) -> SampleReport:
    if shots <= 0:
        raise SamplingError(f"shots must be positive, got {shots}")
    dist = _distribution(rr)
    counts = _draw(dist, shots, RngState.from_seed(seed))
    debug(f"sampled {shots} shots seed={seed}", scope="sampling")
    return _report(shots, seed, counts, 1)


def shard_seeds(seed: int, shards: int) -> list[RngState]:
    """Shard i starts from the master state advanced i+1 times."""
    state = RngState.from_seed(seed)
    out: list[RngState] = []
    for _ in range(shards):
        state, _ = rng_next(state)
        out.append(state)
    return out


def sample_patterns_sharded(
    rr: RunResult, shots: int, seed: int, shards: int, *, max_workers: int | None = None
) -> SampleReport:
    if shots <= 0:
        raise SamplingError(f"shots must be positive, got {shots}")
    if shards <= 0:
        raise SamplingError(f"shards must be positive, got {shards}")
    dist = _distribution(rr)
    base, extra = divmod(shots, shards)
    sizes = [base + (1 if i < extra else 0) for i in range(shards)]
    states = shard_seeds(seed, shards)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        parts = list(pool.map(lambda args: _draw(dist, *args), zip(sizes, states)))

    merged = {key: 0 for key, _ in dist}
    for part in parts:
        for key, c in part.items():
            merged[key] += c
    return _report(shots, seed, merged, shards)
