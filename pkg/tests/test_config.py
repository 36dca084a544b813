from __future__ import annotations

import math
import random
from pathlib import Path

import pytest

from depp.core.config import (
    MatrixFileError,
    ParseError,
    format_scenario,
    load_matrix_file,
    load_scenario,
    parse_scenario,
)

MINIMAL = """\
[noise.polarization]
model = bell_diagonal
F = 1
F1 = 0
F2 = 0
F3 = 0

[protocol]
name = one_step_depp
"""


def _raises(text: str | bytes, **kw) -> ParseError:
    with pytest.raises(ParseError) as exc:
        parse_scenario(text, **kw)
    return exc.value


class TestDefaults:
    def test_minimal(self) -> None:
        cfg = parse_scenario(MINIMAL)
        assert cfg.source.r == 1.0
        assert cfg.source.theta == 0.0
        assert cfg.spatial_dephasing == 0.0
        assert cfg.run.shots == 0
        assert cfg.run.seed == 1
        assert cfg.run.output is None
        assert cfg.noise.bell is not None and cfg.noise.bell.F == 1.0
        assert cfg.protocol.name == "one_step_depp"

    def test_comments_and_whitespace(self) -> None:
        text = "# header\n\n  [ source ]  # trailing\n\tr = 0.5   \n" + MINIMAL
        assert parse_scenario(text).source.r == 0.5

    def test_hash_inside_string(self) -> None:
        cfg = parse_scenario(MINIMAL + '[run]\noutput = "out#1.json"  # comment\n')
        assert cfg.run.output == "out#1.json"

    def test_bytes_input(self) -> None:
        assert parse_scenario(MINIMAL.encode()).protocol.name == "one_step_depp"

    def test_exponent_numbers(self) -> None:
        cfg = parse_scenario(MINIMAL + "[noise.spatial]\ndephasing = 2.5e-1\n")
        assert cfg.spatial_dephasing == 0.25


class TestModels:
    def test_pauli(self) -> None:
        text = "[noise.polarization]\nmodel = pauli\npx = 0.1\npz = 0.05\n[protocol]\nname = simon_pan\n"
        cfg = parse_scenario(text)
        assert cfg.noise.pauli is not None
        assert (cfg.noise.pauli.px, cfg.noise.pauli.py, cfg.noise.pauli.pz) == (0.1, 0.0, 0.05)
        assert cfg.noise.pauli.target == "B"

    def test_product(self) -> None:
        text = (
            "[noise.polarization]\nmodel = product\nalpha = 1\nbeta = 0\ngamma = 0\ndelta = 0\n"
            "[protocol]\nname = one_step_depp\n"
        )
        assert parse_scenario(text).noise.product is not None

    def test_matrix_path_resolved(self, tmp_path: Path) -> None:
        path = tmp_path / "s.epp"
        path.write_text(
            '[noise.polarization]\nmodel = matrix\nfile = "rho.yml"\n[protocol]\nname = one_step_depp\n',
            encoding="utf-8",
        )
        cfg = load_scenario(path)
        assert cfg.resolve(cfg.noise.matrix_file or "") == tmp_path.resolve() / "rho.yml"

    def test_key_from_other_model(self) -> None:
        text = MINIMAL.replace("F3 = 0\n", "F3 = 0\npx = 0.1\n")
        err = _raises(text)
        assert "px" in err.message and err.line == 7


class TestProtocolKeys:
    def test_bennett_requires_rounds(self) -> None:
        err = _raises(MINIMAL.replace("one_step_depp", "bennett"))
        assert "rounds" in err.message

    def test_rounds_rejected_elsewhere(self) -> None:
        err = _raises(MINIMAL + "rounds = 2\n")
        assert "rounds" in err.message and err.line == 10

    def test_compare_target(self) -> None:
        cfg = parse_scenario(MINIMAL.replace("one_step_depp", "compare\ntarget_fidelity = 0.99"))
        assert cfg.protocol.target_fidelity == 0.99

    def test_compare_target_range(self) -> None:
        err = _raises(MINIMAL.replace("one_step_depp", "compare\ntarget_fidelity = 0.4"))
        assert err.line == 10

    def test_rounds_integer(self) -> None:
        err = _raises(MINIMAL.replace("one_step_depp", "bennett\nrounds = 2.5"))
        assert "integer" in err.message


class TestErrors:
    """Every rejection is a ParseError pointing at the offending line."""

    def test_bell_sum_points_at_last_weight(self) -> None:
        text = MINIMAL.replace("F = 1", "F = 0.3").replace("F1 = 0", "F1 = 0.3")
        text = text.replace("F2 = 0", "F2 = 0.3").replace("F3 = 0", "F3 = 0.3")
        err = _raises(text)
        assert "F+F1+F2+F3=1" in err.message
        assert err.line == 6

    def test_duplicate_key(self) -> None:
        err = _raises(MINIMAL + "[run]\nseed = 1\nshots = 5\nseed = 2\n")
        assert "seed" in err.message and "line 11" in err.message
        assert err.line == 13

    def test_duplicate_section(self) -> None:
        err = _raises(MINIMAL + "[protocol]\n")
        assert err.line == 10

    def test_unknown_section(self) -> None:
        err = _raises("[detector]\n" + MINIMAL)
        assert err.line == 1 and err.column == 1

    def test_unknown_key(self) -> None:
        err = _raises(MINIMAL + "[run]\nwarp = 9\n")
        assert "warp" in err.message and err.line == 11

    def test_type_mismatch(self) -> None:
        err = _raises(MINIMAL + "[run]\nshots = many\n")
        assert err.line == 11 and err.column == 9

    def test_missing_section(self) -> None:
        err = _raises("[protocol]\nname = one_step_depp\n")
        assert "noise.polarization" in err.message
        assert (err.line, err.column) == (2, 21)

    def test_empty_input(self) -> None:
        err = _raises("")
        assert (err.line, err.column) == (1, 1)

    def test_entry_before_section(self) -> None:
        err = _raises("r = 1\n" + MINIMAL)
        assert err.line == 1

    def test_unterminated_string(self) -> None:
        err = _raises(MINIMAL + '[run]\noutput = "abc\n')
        assert err.line == 11 and err.column == 10

    def test_trailing_garbage(self) -> None:
        err = _raises(MINIMAL.replace("F = 1", "F = 1 2"))
        assert err.line == 3 and err.column == 7

    def test_invalid_utf8(self) -> None:
        err = _raises(b"[run]\nseed = \xff\n")
        assert (err.line, err.column) == (2, 8)

    def test_origin_in_message(self) -> None:
        err = _raises("[nope]\n", origin="demo.epp")
        assert str(err).startswith("demo.epp:1:1:")


class TestOverrides:
    def test_applied_before_validation(self) -> None:
        cfg = parse_scenario(
            MINIMAL,
            overrides=["noise.polarization.F=0.8", "noise.polarization.F1=0.2", "run.seed=7"],
        )
        assert cfg.noise.bell is not None and cfg.noise.bell.F == 0.8
        assert cfg.run.seed == 7

    def test_creates_section(self) -> None:
        cfg = parse_scenario(MINIMAL, overrides=["source.theta=3.0"])
        assert cfg.source.theta == 3.0

    def test_bad_override_position(self) -> None:
        err = _raises(MINIMAL, overrides=["run.seed=1", "run.bogus=2"])
        assert err.origin == "--set" and err.line == 2

    def test_malformed_override(self) -> None:
        err = _raises(MINIMAL, overrides=["seed7"])
        assert err.origin == "--set"

    def test_override_type_checked(self) -> None:
        err = _raises(MINIMAL, overrides=["run.shots=lots"])
        assert err.origin == "--set" and err.line == 1


class TestCanonicalForm:
    SAMPLES = [
        MINIMAL,
        MINIMAL.replace("one_step_depp", "bennett\nrounds = 3") + '[run]\nshots = 10\nseed = -3\noutput = "a \\"b\\".json"\n',
        "[source]\nr = 0.3\ntheta = -1\n[noise.polarization]\nmodel = pauli\npy = 0.2\ntarget = A\n"
        "[noise.spatial]\ndephasing = 0.1\n[protocol]\nname = compare\ntarget_fidelity = 1\n",
        '[noise.polarization]\nmodel = matrix\nfile = "m.yml"\n[protocol]\nname = simon_pan\n',
    ]

    @pytest.mark.parametrize("text", SAMPLES)
    def test_round_trip(self, text) -> None:
        cfg = parse_scenario(text)
        canon = format_scenario(cfg)
        assert parse_scenario(canon) == cfg
        assert format_scenario(parse_scenario(canon)) == canon

    def test_escaped_output(self) -> None:
        cfg = parse_scenario(self.SAMPLES[1])
        assert cfg.run.output == 'a "b".json'


class TestFuzz:
    def test_random_bytes_never_crash(self) -> None:
        """Arbitrary byte strings only ever produce ParseError, with positions inside the input."""
        rnd = random.Random(0xEE)
        alphabet = b"[]=.#\"\\ \t\n\r-+eE0123456789abcdefFmodelrunseedshots_\xff\xc3"
        for i in range(10_000):
            n = rnd.randint(0, 1024)
            if i % 2:
                data = bytes(rnd.choice(alphabet) for _ in range(n))
            else:
                data = rnd.randbytes(n)
            try:
                parse_scenario(data)
            except ParseError as e:
                assert e.line >= 1 and e.column >= 1
                lines = data.split(b"\n")
                if data:
                    assert e.line <= len(lines)
                    assert e.column <= len(lines[e.line - 1]) + 1

    def test_mutated_valid_files(self) -> None:
        rnd = random.Random(7)
        base = bytearray(MINIMAL.encode())
        for _ in range(2000):
            data = bytearray(base)
            for _ in range(rnd.randint(1, 6)):
                pos = rnd.randrange(len(data))
                data[pos] = rnd.randrange(256)
            try:
                parse_scenario(bytes(data))
            except ParseError:
                pass


class TestMatrixFile:
    def test_mapping(self, tmp_path: Path) -> None:
        path = tmp_path / "rho.yml"
        path.write_text(
            "real:\n  - [0.5, 0, 0, 0.5]\n  - [0, 0, 0, 0]\n  - [0, 0, 0, 0]\n  - [0.5, 0, 0, 0.5]\n",
            encoding="utf-8",
        )
        rho = load_matrix_file(path)
        assert rho.purity() == pytest.approx(1.0)

    def test_with_imag(self, tmp_path: Path) -> None:
        path = tmp_path / "rho.yml"
        path.write_text(
            "real: [[0.5, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.5]]\n"
            "imag: [[0, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [-0.5, 0, 0, 0]]\n",
            encoding="utf-8",
        )
        assert math.isclose(load_matrix_file(path).entries[0, 3].imag, 0.5)

    def test_bare_list(self, tmp_path: Path) -> None:
        path = tmp_path / "rho.yml"
        path.write_text(
            "- [0.25, 0, 0, 0]\n- [0, 0.25, 0, 0]\n- [0, 0, 0.25, 0]\n- [0, 0, 0, 0.25]\n",
            encoding="utf-8",
        )
        assert load_matrix_file(path).purity() == pytest.approx(0.25)

    @pytest.mark.parametrize(
        "body",
        [
            "real: [[1, 0], [0, 0]]\n",
            "real: [[0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 0.5, 0], [0, 0, 0, 0.5]]\n",
            "colour: red\n",
            "real: [[a, b]]\n",
            "just text\n",
        ],
    )
    def test_rejects(self, tmp_path: Path, body) -> None:
        path = tmp_path / "rho.yml"
        path.write_text(body, encoding="utf-8")
        with pytest.raises(MatrixFileError):
            load_matrix_file(path)
