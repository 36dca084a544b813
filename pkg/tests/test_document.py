from __future__ import annotations

from pathlib import Path

import pytest

from depp.core.config import parse_scenario
from depp.protocols.recurrence import bennett_iterate
from depp.protocols.runner import execute
from depp.render.document import (
    DocumentWriteError,
    build_document,
    dump_document,
    load_document,
    result_to_dict,
    serialize_result,
    write_document,
)

PSI_MINUS = """\
[noise.polarization]
model = bell_diagonal
F = 0
F1 = 0
F2 = 0
F3 = 1

[protocol]
name = one_step_depp
"""


def _doc(text: str = PSI_MINUS) -> dict:
    return build_document(execute(parse_scenario(text)))


class TestDocument:
    def test_top_level_keys(self) -> None:
        doc = _doc()
        assert list(doc) == ["scenario", "analytic", "meta"]
        assert doc["meta"]["tool"] == "depp"
        assert doc["meta"]["seed"] == 1

    def test_psi_minus_patterns(self) -> None:
        """psi- splits evenly over D2/D7 and D5/D4 and never fires cd or ef."""
        patterns = {p["pattern"]: p for p in _doc()["analytic"]["patterns"]}
        assert patterns["cf"]["detectors"] == ["D2", "D7"]
        assert patterns["ed"]["detectors"] == ["D5", "D4"]
        assert patterns["cf"]["probability"] == pytest.approx(0.5, abs=1e-12)
        assert patterns["ed"]["probability"] == pytest.approx(0.5, abs=1e-12)
        assert patterns["cd"]["accepted"] is False
        assert patterns["cd"]["raw_state"] is None
        assert patterns["cf"]["corrected_fidelity"] == pytest.approx(1.0, abs=1e-12)

    def test_matrix_layout(self) -> None:
        state = _doc()["analytic"]["patterns"][1]["corrected_state"]
        assert set(state) == {"real", "imag"}
        assert len(state["real"]) == 4 and all(len(row) == 4 for row in state["real"])

    def test_sampling_section(self) -> None:
        doc = _doc(PSI_MINUS + "[run]\nshots = 1000\nseed = 5\n")
        assert list(doc) == ["scenario", "analytic", "sampling", "meta"]
        sampling = doc["sampling"]
        assert sampling["shots"] == 1000
        assert sampling["counts"]["cf"] + sampling["counts"]["ed"] == 1000
        lo, hi = sampling["intervals"]["cf"]
        assert lo <= sampling["frequencies"]["cf"] <= hi

    def test_round_trip_is_byte_identical(self) -> None:
        text = dump_document(_doc(PSI_MINUS + "[run]\nshots = 77\nseed = -4\n"))
        assert dump_document(load_document(text)) == text

    def test_scenario_echo(self) -> None:
        scenario = _doc()["scenario"]
        assert scenario["noise"] == {"model": "bell_diagonal", "F": 0.0, "F1": 0.0, "F2": 0.0, "F3": 1.0}
        assert scenario["run"]["output"] is None


class TestResults:
    def test_zero_round_trace(self) -> None:
        d = result_to_dict(bennett_iterate(0.8, 0))
        assert d["fidelities"] == [0.8]
        assert d["success_probs"] == [1.0]

    def test_unknown_type(self) -> None:
        with pytest.raises(TypeError):
            result_to_dict(object())

    def test_serialize_ends_with_newline(self) -> None:
        assert serialize_result(bennett_iterate(0.7, 1)).endswith("}\n")

    def test_load_rejects_non_object(self) -> None:
        with pytest.raises(ValueError):
            load_document("[1, 2]")


class TestWrite:
    def test_creates_parents(self, tmp_path: Path) -> None:
        out = write_document("{}\n", tmp_path / "a" / "b" / "doc.json")
        assert out.read_text(encoding="utf-8") == "{}\n"

    def test_error_names_path(self, tmp_path: Path) -> None:
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        target = blocker / "doc.json"
        with pytest.raises(DocumentWriteError) as exc:
            write_document("{}\n", target)
        assert exc.value.path == target
        assert str(target) in str(exc.value)
