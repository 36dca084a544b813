from __future__ import annotations

import csv
import io
import math

import pytest

from depp.automation.sweep import SweepError, point_config, run_sweep, sweep_rows, sweepable_params
from depp.core.config import parse_scenario
from depp.noise.channels import BellDiagonalParams
from depp.protocols.compare import compare_protocols
from depp.protocols.recurrence import bennett_iterate
from depp.render.table import (
    COMPARISON_HEADER,
    SWEEP_HEADER,
    comparison_csv,
    format_comparison_table,
    run_csv,
    sweep_csv,
)

PHASE_FLIP = """\
[noise.polarization]
model = bell_diagonal
F = 0.8
F1 = 0.2
F2 = 0
F3 = 0

[protocol]
name = one_step_depp
"""

PRODUCT = """\
[noise.polarization]
model = product
alpha = 1
beta = 0
gamma = 0
delta = 0

[protocol]
name = one_step_depp
"""


class TestSweep:
    def test_theta_sweep_follows_cos_squared(self) -> None:
        points = run_sweep(parse_scenario(PHASE_FLIP), "source.theta", 0.0, math.pi, 5)
        assert [p.value for p in points] == pytest.approx([i * math.pi / 4 for i in range(5)])
        for p in points:
            assert p.result.mean_corrected_fidelity == pytest.approx(
                math.cos(p.value / 2) ** 2, abs=1e-12
            )

    def test_fidelity_sweep_is_deterministic(self) -> None:
        """Sweeping F with F1 = 1 - F keeps acceptance at 1 everywhere."""
        points = run_sweep(parse_scenario(PHASE_FLIP), "noise.polarization.F", 0.5, 1.0, 6)
        for p in points:
            assert p.result.acceptance_probability == pytest.approx(1.0, abs=1e-12)
            assert p.result.mean_corrected_fidelity == pytest.approx(1.0, abs=1e-12)

    def test_rows_in_value_order(self) -> None:
        points = run_sweep(parse_scenario(PHASE_FLIP), "source.r", 2.0, 0.0, 9, max_workers=4)
        values = [row[1] for row in sweep_rows(points)]
        assert values == sorted(values, reverse=True)
        assert all(row[0] == "source.r" for row in sweep_rows(points))

    @pytest.mark.parametrize("steps", [1, 0, -3])
    def test_too_few_steps(self, steps) -> None:
        with pytest.raises(SweepError):
            run_sweep(parse_scenario(PHASE_FLIP), "source.r", 0.0, 1.0, steps)

    def test_unknown_param(self) -> None:
        with pytest.raises(SweepError, match="unknown sweep parameter"):
            run_sweep(parse_scenario(PHASE_FLIP), "noise.polarization.alpha", 0.0, 1.0, 3)

    def test_out_of_range_value(self) -> None:
        with pytest.raises(SweepError):
            run_sweep(parse_scenario(PHASE_FLIP), "noise.polarization.F", 0.5, 1.5, 3)


class TestPointConfig:
    def test_bell_rescales_other_weights(self) -> None:
        cfg = point_config(parse_scenario(PHASE_FLIP), "noise.polarization.F", 0.6)
        assert cfg.noise.bell is not None
        assert cfg.noise.bell.as_tuple() == pytest.approx((0.6, 0.4, 0.0, 0.0))

    def test_product_splits_evenly_from_zero(self) -> None:
        cfg = point_config(parse_scenario(PRODUCT), "noise.polarization.alpha", 0.4)
        assert cfg.noise.product is not None
        assert cfg.noise.product.as_tuple() == pytest.approx((0.4, 0.2, 0.2, 0.2))

    def test_params_follow_model(self) -> None:
        assert "noise.polarization.alpha" in sweepable_params(parse_scenario(PRODUCT))
        assert "noise.polarization.F" not in sweepable_params(parse_scenario(PRODUCT))


class TestTables:
    def test_sweep_csv(self) -> None:
        points = run_sweep(parse_scenario(PHASE_FLIP), "source.theta", 0.0, 1.0, 3)
        rows = list(csv.reader(io.StringIO(sweep_csv(sweep_rows(points)))))
        assert tuple(rows[0]) == SWEEP_HEADER
        assert len(rows) == 4
        assert float(rows[1][2]) == pytest.approx(1.0)

    def test_comparison_csv_unreachable(self) -> None:
        text = comparison_csv(compare_protocols(BellDiagonalParams.werner(0.9), 1.0))
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == COMPARISON_HEADER
        assert rows[2] == ["bennett", "unreachable", "unreachable", "unreachable"]
        assert rows[3][2] == "0.5"

    def test_comparison_table(self) -> None:
        table = format_comparison_table(compare_protocols(BellDiagonalParams.werner(0.7), 0.99))
        lines = table.splitlines()
        assert lines[0] == "# target fidelity 0.99"
        assert lines[1].startswith("protocol")
        assert [line.split()[0] for line in lines[3:]] == ["one_step_depp", "bennett", "simon_pan"]

    def test_trace_csv(self) -> None:
        rows = list(csv.reader(io.StringIO(run_csv(bennett_iterate(0.7, 2)))))
        assert rows[0] == ["round", "fidelity", "success_probability"]
        assert [r[0] for r in rows[1:]] == ["0", "1", "2"]

    def test_run_csv_rejects_unknown(self) -> None:
        with pytest.raises(TypeError):
            run_csv(42)
