from __future__ import annotations

import math

import numpy as np
import pytest

from depp.noise.channels import NoiseModelError
from depp.protocols.recurrence import (
    bennett_iterate,
    bennett_pairs_to_target,
    bennett_recurrence,
    bennett_step_exact,
    bennett_success_probability,
    werner_params,
)


class TestClosedForm:
    def test_known_value(self) -> None:
        """F=0.7 gives success probability 0.68 and F' = 25/34."""
        assert bennett_success_probability(0.7) == pytest.approx(0.68, abs=1e-12)
        assert bennett_recurrence(0.7) == pytest.approx(25 / 34, abs=1e-12)

    @pytest.mark.parametrize("F", [0.25, 0.5, 1.0])
    def test_fixed_points(self, F) -> None:
        assert bennett_recurrence(F) == pytest.approx(F, abs=1e-12)

    def test_strictly_increasing_above_half(self) -> None:
        for F in np.linspace(0.5, 1.0, 52)[1:-1]:
            assert bennett_recurrence(float(F)) > F

    def test_rejects_out_of_range(self) -> None:
        with pytest.raises(NoiseModelError):
            bennett_recurrence(1.2)
        with pytest.raises(NoiseModelError):
            bennett_recurrence(math.nan)


class TestExactOracle:
    @pytest.mark.parametrize("F", [i / 10 for i in range(11)])
    def test_matches_closed_form(self, F) -> None:
        exact, p_succ = bennett_step_exact(F)
        assert exact == pytest.approx(bennett_recurrence(F), abs=1e-12)
        assert p_succ == pytest.approx(bennett_success_probability(F), abs=1e-12)

    def test_werner_params(self) -> None:
        p = werner_params(0.4)
        assert p.F == 0.4
        assert p.F1 == pytest.approx(0.2)


class TestIterate:
    def test_zero_rounds(self) -> None:
        trace = bennett_iterate(0.8, 0)
        assert trace.fidelities == (0.8,)
        assert trace.success_probs == (1.0,)
        assert trace.rounds == 0
        assert trace.expected_pairs_consumed == 1.0

    def test_two_rounds(self) -> None:
        trace = bennett_iterate(0.7, 2)
        f1 = 25 / 34
        assert trace.fidelities[1] == pytest.approx(f1, abs=1e-12)
        assert trace.fidelities[2] == pytest.approx(bennett_recurrence(f1), abs=1e-12)
        p1, p2 = trace.success_probs[1:]
        assert trace.expected_pairs_consumed == pytest.approx(2 * 2 / (p1 * p2), rel=1e-12)
        assert trace.overall_success_probability == pytest.approx(p1 * p2)

    def test_negative_rounds(self) -> None:
        with pytest.raises(ValueError):
            bennett_iterate(0.7, -1)


class TestPairsToTarget:
    def test_reachable(self) -> None:
        out = bennett_pairs_to_target(0.7, 0.99)
        assert out.reachable
        assert out.rounds is not None and out.rounds >= 2
        assert out.expected_pairs is not None and out.expected_pairs > 4
        assert out.trace is not None and out.trace.final_fidelity >= 0.99

    def test_already_there(self) -> None:
        out = bennett_pairs_to_target(0.995, 0.99)
        assert out.reachable and out.rounds == 0 and out.expected_pairs == 1.0

    def test_unit_target_unreachable(self) -> None:
        assert not bennett_pairs_to_target(0.9, 1.0).reachable

    def test_below_threshold_unreachable(self) -> None:
        assert not bennett_pairs_to_target(0.5, 0.6).reachable
