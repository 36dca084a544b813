from __future__ import annotations

import math

import pytest

from depp.core.qcore import DensityMatrix, basis_state, bell_state
from depp.noise.channels import SourceConfig, make_spatial_state
from depp.optics.network import ALL_PATTERNS
from depp.protocols.depp import PatternRecord, RunResult, one_step_depp
from depp.sampling.montecarlo import (
    ZERO_SEED_REPLACEMENT,
    RngState,
    SamplingError,
    rng_call_count,
    rng_next,
    sample_patterns,
    sample_patterns_sharded,
    shard_seeds,
    uniform,
    wilson_halfwidth,
)

IDEAL = make_spatial_state(SourceConfig())


def _uniform_result() -> RunResult:
    return one_step_depp(DensityMatrix.maximally_mixed(4), IDEAL)


def _result_with(probs: list[float]) -> RunResult:
    return RunResult(tuple(PatternRecord(p, q, None, None, None) for p, q in zip(ALL_PATTERNS, probs)))


class TestGenerator:
    def test_seed_one_golden(self) -> None:
        state, out = rng_next(RngState.from_seed(1))
        assert state.state == 33554433
        assert out == 0x47E4CE4B896CDD1D

    def test_zero_seed_remapped(self) -> None:
        assert RngState.from_seed(0).state == ZERO_SEED_REPLACEMENT

    def test_negative_seed_wraps(self) -> None:
        assert RngState.from_seed(-1).state == (1 << 64) - 1

    def test_zero_state_rejected(self) -> None:
        with pytest.raises(SamplingError):
            RngState(0)

    def test_streams_repeat(self) -> None:
        a = b = RngState.from_seed(42)
        for _ in range(1000):
            a, x = rng_next(a)
            b, y = rng_next(b)
            assert x == y

    def test_uniform_range(self) -> None:
        assert uniform(0) == 0.0
        assert uniform((1 << 64) - 1) < 1.0


class TestSamplePatterns:
    def test_degenerate_distribution(self) -> None:
        report = sample_patterns(one_step_depp(basis_state(4, 0), IDEAL), 100, seed=3)
        assert report.counts == {"cd": 100, "cf": 0, "ed": 0, "ef": 0}

    def test_uniform_frequencies(self) -> None:
        report = sample_patterns(_uniform_result(), 100_000, seed=2024)
        assert sum(report.counts.values()) == 100_000
        for key, freq in report.frequencies.items():
            assert abs(freq - 0.25) <= 0.0055, key

    def test_deterministic(self) -> None:
        rr = _uniform_result()
        assert sample_patterns(rr, 5000, seed=9) == sample_patterns(rr, 5000, seed=9)

    def test_psi_minus(self) -> None:
        report = sample_patterns(one_step_depp(bell_state("psi-"), IDEAL), 2000, seed=5)
        assert report.counts["cd"] == 0 and report.counts["ef"] == 0
        assert report.counts["cf"] + report.counts["ed"] == 2000

    def test_zero_shots(self) -> None:
        with pytest.raises(SamplingError):
            sample_patterns(_uniform_result(), 0, seed=1)

    def test_distribution_must_sum_to_one(self) -> None:
        with pytest.raises(SamplingError):
            sample_patterns(_result_with([0.5, 0.2, 0.0, 0.0]), 10, seed=1)

    def test_counts_rng_calls(self) -> None:
        before = rng_call_count()
        sample_patterns(_uniform_result(), 250, seed=1)
        assert rng_call_count() - before == 250


class TestWilson:
    def test_halfwidth_symmetric(self) -> None:
        assert wilson_halfwidth(30, 100) == pytest.approx(wilson_halfwidth(70, 100))

    def test_interval_contains_estimate(self) -> None:
        report = sample_patterns(_uniform_result(), 1000, seed=8)
        for key in report.counts:
            lo, hi = report.interval(key)
            assert lo <= report.frequencies[key] <= hi

    def test_coverage(self) -> None:
        """95% intervals cover the true probability for at least 44 of 50 seeds."""
        rr = _result_with([0.1, 0.2, 0.3, 0.4])
        truth = {"cd": 0.1, "cf": 0.2, "ed": 0.3, "ef": 0.4}
        covered = 0
        for seed in range(1, 51):
            report = sample_patterns(rr, 10_000, seed=seed)
            lo, hi = report.interval("ed")
            covered += lo <= truth["ed"] <= hi
        assert covered >= 44


class TestSharding:
    def test_shard_seeds(self) -> None:
        state = RngState.from_seed(17)
        expected = []
        for _ in range(3):
            state, _ = rng_next(state)
            expected.append(state)
        assert shard_seeds(17, 3) == expected

    def test_merged_counts(self) -> None:
        rr = _uniform_result()
        a = sample_patterns_sharded(rr, 10_001, seed=4, shards=4)
        b = sample_patterns_sharded(rr, 10_001, seed=4, shards=4, max_workers=1)
        assert a == b
        assert sum(a.counts.values()) == 10_001
        assert a.shards == 4
        assert all(math.isclose(a.frequencies[k], a.counts[k] / 10_001) for k in a.counts)

    def test_bad_shards(self) -> None:
        with pytest.raises(SamplingError):
            sample_patterns_sharded(_uniform_result(), 10, seed=1, shards=0)
