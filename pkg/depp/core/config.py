"""Scenario files (`.epp`).

Grammar (line oriented):

    # comment to end of line
    [section]            or  [section.sub]
    key = value          value: number, bare word, or "quoted string"

Sections: [source] r, theta (radians) · [noise.polarization] model + model keys ·
[noise.spatial] dephasing · [protocol] name, rounds, target_fidelity ·
[run] shots, seed, output.

Every rejection raises ParseError carrying a 1-based line and column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Sequence

import numpy as np
import yaml

from depp.core.qcore import DensityMatrix, QuantumStateError
from depp.noise.channels import (
    BellDiagonalParams,
    NoiseModelError,
    ProductDiagonalParams,
    SourceConfig,
)

__all__ = [
    "ParseError",
    "MatrixFileError",
    "PauliNoise",
    "PolarizationNoise",
    "ProtocolConfig",
    "RunConfig",
    "ScenarioConfig",
    "parse_scenario",
    "load_scenario",
    "format_scenario",
    "load_matrix_file",
    "PROTOCOLS",
    "NOISE_MODELS",
]

PROTOCOLS = ("one_step_depp", "bennett", "simon_pan", "compare")
NOISE_MODELS = ("bell_diagonal", "pauli", "product", "matrix")

_MODEL_KEYS: dict[str, tuple[str, ...]] = {
    "bell_diagonal": ("F", "F1", "F2", "F3"),
    "pauli": ("px", "py", "pz", "target"),
    "product": ("alpha", "beta", "gamma", "delta"),
    "matrix": ("file",),
}

_SECTION_KEYS: dict[str, set[str]] = {
    "source": {"r", "theta"},
    "noise.polarization": {"model"} | {k for keys in _MODEL_KEYS.values() for k in keys},
    "noise.spatial": {"dephasing"},
    "protocol": {"name", "rounds", "target_fidelity"},
    "run": {"shots", "seed", "output"},
}

SEED_MIN = -(1 << 63)
SEED_MAX = (1 << 64) - 1


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, origin: str = "<scenario>") -> None:
        super().__init__(f"{origin}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.origin = origin


class MatrixFileError(ValueError):
    pass


# ----------------------------------------------------------------------
# Config model
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PauliNoise:
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0
    target: Literal["A", "B"] = "B"


@dataclass(frozen=True)
class PolarizationNoise:
    model: str
    bell: BellDiagonalParams | None = None
    pauli: PauliNoise | None = None
    product: ProductDiagonalParams | None = None
    matrix_file: str | None = None


@dataclass(frozen=True)
class ProtocolConfig:
    name: str
    rounds: int | None = None
    target_fidelity: float | None = None


@dataclass(frozen=True)
class RunConfig:
    shots: int = 0
    seed: int = 1
    output: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    source: SourceConfig
    noise: PolarizationNoise
    protocol: ProtocolConfig
    run: RunConfig = field(default_factory=RunConfig)
    spatial_dephasing: float = 0.0
    base_dir: Path | None = field(default=None, compare=False)

    def resolve(self, p: str) -> Path:
        path = Path(p)
        if path.is_absolute() or self.base_dir is None:
            return path
        return self.base_dir / path

    def output_path(self) -> Path | None:
        return None if self.run.output is None else self.resolve(self.run.output)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, run=replace(self.run, seed=seed))


# ----------------------------------------------------------------------
# Lexing
# ----------------------------------------------------------------------

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_SECTION_RE = re.compile(rf"\[[ \t]*({_NAME}(?:\.{_NAME})?)[ \t]*\]")
_KEY_RE = re.compile(_NAME)
_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?", re.ASCII)
_INTEGER_RE = re.compile(r"[+-]?\d+", re.ASCII)
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-/]*")
_BLANK = " \t\r\f\v"
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class _Value:
    kind: Literal["number", "word", "string"]
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class _Entry:
    key: str
    value: _Value
    line: int
    column: int
    origin: str | None = None


@dataclass
class _Section:
    name: str
    line: int
    column: int
    entries: dict[str, _Entry] = field(default_factory=dict)
    origin: str | None = None


class _Lexer:
    def __init__(self, origin: str) -> None:
        self.origin = origin

    def fail(self, message: str, line: int, column: int) -> ParseError:
        return ParseError(message, line, column, self.origin)

    def strip_comment(self, raw: str) -> str:
        in_quote = False
        escaped = False
        for i, ch in enumerate(raw):
            if in_quote:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_quote = False
            elif ch == '"':
                in_quote = True
            elif ch == "#":
                return raw[:i]
        return raw

    def value(self, s: str, pos: int, lineno: int) -> tuple[_Value, int]:
        col = pos + 1
        if pos >= len(s):
            raise self.fail("expected a value", lineno, max(1, min(col, len(s))))
        ch = s[pos]
        if ch == '"':
            out: list[str] = []
            i = pos + 1
            while i < len(s):
                c = s[i]
                if c == "\\":
                    if i + 1 >= len(s) or s[i + 1] not in _ESCAPES:
                        raise self.fail("invalid escape in string", lineno, i + 1)
                    out.append(_ESCAPES[s[i + 1]])
                    i += 2
                    continue
                if c == '"':
                    return _Value("string", "".join(out), lineno, col), i + 1
                out.append(c)
                i += 1
            raise self.fail("unterminated string", lineno, col)
        m = _NUMBER_RE.match(s, pos)
        if m and (m.end() >= len(s) or not (s[m.end()].isalnum() or s[m.end()] in "_.")):
            return _Value("number", m.group(0), lineno, col), m.end()
        m = _WORD_RE.match(s, pos)
        if m:
            return _Value("word", m.group(0), lineno, col), m.end()
        raise self.fail(f"expected a value, found {ch!r}", lineno, col)

    def sections(self, text: str) -> dict[str, _Section]:
        out: dict[str, _Section] = {}
        current: _Section | None = None
        for lineno, raw in enumerate(text.split("\n"), start=1):
            body = self.strip_comment(raw)
            stripped = body.strip(_BLANK)
            if not stripped:
                continue
            start = len(body) - len(body.lstrip(_BLANK))
            col = start + 1

            if body[start] == "[":
                m = _SECTION_RE.fullmatch(stripped)
                if not m:
                    raise self.fail("malformed section header", lineno, col)
                name = m.group(1)
                if name not in _SECTION_KEYS:
                    raise self.fail(f"unknown section [{name}]", lineno, col)
                if name in out:
                    raise self.fail(
                        f"duplicate section [{name}] (first on line {out[name].line})", lineno, col
                    )
                current = _Section(name=name, line=lineno, column=col)
                out[name] = current
                continue

            m = _KEY_RE.match(body, start)
            if not m:
                raise self.fail(f"expected a key, found {body[start]!r}", lineno, col)
            key = m.group(0)
            pos = m.end()
            while pos < len(body) and body[pos] in _BLANK:
                pos += 1
            if pos >= len(body) or body[pos] != "=":
                raise self.fail(f"expected '=' after key {key!r}", lineno, min(pos, len(body) - 1) + 1)
            pos += 1
            while pos < len(body) and body[pos] in _BLANK:
                pos += 1
            if pos >= len(body):
                raise self.fail(f"missing value for key {key!r}", lineno, len(body))
            value, end = self.value(body, pos, lineno)
            rest = body[end:]
            if rest.strip(_BLANK):
                extra = end + (len(rest) - len(rest.lstrip(_BLANK)))
                raise self.fail("unexpected text after value", lineno, extra + 1)

            if current is None:
                raise self.fail(f"key {key!r} outside of any section", lineno, col)
            if key in current.entries:
                first = current.entries[key]
                raise self.fail(
                    f"duplicate key {key!r} in [{current.name}] (first on line {first.line})",
                    lineno,
                    col,
                )
            current.entries[key] = _Entry(key=key, value=value, line=lineno, column=col)
        return out


def _eof_position(text: str) -> tuple[int, int]:
    if not text:
        return 1, 1
    lines = text.split("\n")
    if text.endswith("\n"):
        return len(lines) - 1, len(lines[-2]) + 1
    return len(lines), len(lines[-1])


# ----------------------------------------------------------------------
# Overrides
# ----------------------------------------------------------------------


def _apply_overrides(sections: dict[str, _Section], overrides: Sequence[str]) -> None:
    lexer = _Lexer("--set")
    for idx, item in enumerate(overrides, start=1):
        path, sep, raw_value = item.partition("=")
        section_name, dot, key = path.strip().rpartition(".")
        if not sep or not dot:
            raise lexer.fail(f"override must look like section.key=value, got {item!r}", idx, 1)
        if section_name not in _SECTION_KEYS:
            raise lexer.fail(f"unknown section [{section_name}]", idx, 1)
        if key not in _SECTION_KEYS[section_name]:
            raise lexer.fail(f"unknown key {key!r} in [{section_name}]", idx, 1)
        text = raw_value.strip(_BLANK)
        if not text:
            raise lexer.fail(f"missing value for {path.strip()!r}", idx, max(1, len(item)))
        value, end = lexer.value(text, 0, idx)
        if end != len(text):
            raise lexer.fail("unexpected text after value", idx, end + 1)
        value = _Value(value.kind, value.text, idx, 1)
        section = sections.setdefault(section_name, _Section(section_name, idx, 1, origin="--set"))
        section.entries[key] = _Entry(key=key, value=value, line=idx, column=1, origin="--set")


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------


class _Builder:
    def __init__(self, sections: dict[str, _Section], text: str, origin: str) -> None:
        self.sections = sections
        self.origin = origin
        self.eof = _eof_position(text)

    def fail(self, message: str, line: int, column: int) -> ParseError:
        return ParseError(message, line, column, self.origin)

    def fail_at(self, entry: _Entry, message: str, *, at_key: bool = False) -> ParseError:
        column = entry.column if at_key else entry.value.column
        return ParseError(message, entry.line, column, entry.origin or self.origin)

    def _require(self, name: str) -> _Section:
        if name not in self.sections:
            raise self.fail(f"missing required section [{name}]", *self.eof)
        return self.sections[name]

    def _reject_unknown(self, section: _Section, allowed: set[str], context: str) -> None:
        unknown = sorted(
            (e for e in section.entries.values() if e.key not in allowed), key=lambda e: e.line
        )
        if unknown:
            e = unknown[0]
            raise self.fail_at(e, f"unknown key {e.key!r} in {context}", at_key=True)

    def _require_key(self, section: _Section, key: str) -> _Entry:
        if key not in section.entries:
            raise ParseError(
                f"missing required key {key!r} in [{section.name}]",
                section.line,
                section.column,
                section.origin or self.origin,
            )
        return section.entries[key]

    def number(self, entry: _Entry) -> float:
        if entry.value.kind != "number":
            raise self.fail_at(entry, f"{entry.key} must be a number, got {entry.value.text!r}")
        v = float(entry.value.text)
        if not math.isfinite(v):
            raise self.fail_at(entry, f"{entry.key} is out of range")
        return v

    def probability(self, entry: _Entry) -> float:
        v = self.number(entry)
        if not 0.0 <= v <= 1.0:
            raise self.fail_at(entry, f"{entry.key} must lie in [0, 1], got {v!r}")
        return v

    def integer(self, entry: _Entry) -> int:
        if entry.value.kind != "number" or not _INTEGER_RE.fullmatch(entry.value.text):
            raise self.fail_at(entry, f"{entry.key} must be an integer, got {entry.value.text!r}")
        try:
            return int(entry.value.text)
        except ValueError:
            raise self.fail_at(entry, f"{entry.key} is too large") from None

    def word(self, entry: _Entry, choices: Sequence[str]) -> str:
        if entry.value.kind not in ("word", "string") or entry.value.text not in choices:
            raise self.fail_at(
                entry, f"{entry.key} must be one of {', '.join(choices)}, got {entry.value.text!r}"
            )
        return entry.value.text

    def text(self, entry: _Entry) -> str:
        if entry.value.kind not in ("word", "string") or not entry.value.text:
            raise self.fail_at(entry, f"{entry.key} must be a path or string")
        return entry.value.text

    def _get(self, section: _Section | None, key: str) -> _Entry | None:
        return None if section is None else section.entries.get(key)

    # --- sections ---

    def source(self) -> SourceConfig:
        sec = self.sections.get("source")
        r_entry, theta_entry = self._get(sec, "r"), self._get(sec, "theta")
        r = 1.0 if r_entry is None else self.number(r_entry)
        if r_entry is not None and r < 0:
            raise self.fail_at(r_entry, f"r must be >= 0, got {r!r}")
        theta = 0.0 if theta_entry is None else self.number(theta_entry)
        return SourceConfig(r=r, theta=theta)

    def _simplex(self, sec: _Section, keys: tuple[str, ...], factory: Any) -> Any:
        entries = [self._require_key(sec, k) for k in keys]
        values = [self.probability(e) for e in entries]
        try:
            return factory(*values)
        except NoiseModelError as e:
            last = max(entries, key=lambda x: (x.line, x.column))
            raise self.fail_at(last, str(e)) from None

    def noise(self) -> PolarizationNoise:
        sec = self._require("noise.polarization")
        self._reject_unknown(sec, _SECTION_KEYS["noise.polarization"], "[noise.polarization]")
        model = self.word(self._require_key(sec, "model"), NOISE_MODELS)
        allowed = set(_MODEL_KEYS[model]) | {"model"}
        self._reject_unknown(sec, allowed, f"[noise.polarization] with model {model}")

        if model == "bell_diagonal":
            return PolarizationNoise(model, bell=self._simplex(sec, _MODEL_KEYS[model], BellDiagonalParams))
        if model == "product":
            return PolarizationNoise(
                model, product=self._simplex(sec, _MODEL_KEYS[model], ProductDiagonalParams)
            )
        if model == "pauli":
            probs = {}
            for k in ("px", "py", "pz"):
                e = sec.entries.get(k)
                probs[k] = 0.0 if e is None else self.probability(e)
            if math.fsum(probs.values()) > 1.0 + 1e-12:
                last = max(
                    (sec.entries[k] for k in probs if k in sec.entries),
                    key=lambda x: (x.line, x.column),
                )
                raise self.fail_at(last, "px+py+pz must not exceed 1")
            t = sec.entries.get("target")
            target = "B" if t is None else self.word(t, ("A", "B"))
            return PolarizationNoise(model, pauli=PauliNoise(target=target, **probs))  # type: ignore[arg-type]
        return PolarizationNoise(model, matrix_file=self.text(self._require_key(sec, "file")))

    def spatial(self) -> float:
        sec = self.sections.get("noise.spatial")
        if sec is None:
            return 0.0
        self._reject_unknown(sec, _SECTION_KEYS["noise.spatial"], "[noise.spatial]")
        e = sec.entries.get("dephasing")
        return 0.0 if e is None else self.probability(e)

    def protocol(self) -> ProtocolConfig:
        sec = self._require("protocol")
        self._reject_unknown(sec, _SECTION_KEYS["protocol"], "[protocol]")
        name = self.word(self._require_key(sec, "name"), PROTOCOLS)
        rounds: int | None = None
        target: float | None = None

        for key, owner in (("rounds", "bennett"), ("target_fidelity", "compare")):
            e = sec.entries.get(key)
            if e is not None and name != owner:
                raise self.fail_at(e, f"{key} only applies to protocol {owner}", at_key=True)
        if name == "bennett":
            e = self._require_key(sec, "rounds")
            rounds = self.integer(e)
            if rounds < 0:
                raise self.fail_at(e, f"rounds must be >= 0, got {rounds}")
        if name == "compare":
            e = self._require_key(sec, "target_fidelity")
            target = self.number(e)
            if not 0.5 < target <= 1.0:
                raise self.fail_at(e, f"target_fidelity must lie in (0.5, 1], got {target!r}")
        return ProtocolConfig(name=name, rounds=rounds, target_fidelity=target)

    def run(self) -> RunConfig:
        sec = self.sections.get("run")
        if sec is None:
            return RunConfig()
        self._reject_unknown(sec, _SECTION_KEYS["run"], "[run]")
        shots, seed, output = 0, 1, None
        if (e := sec.entries.get("shots")) is not None:
            shots = self.integer(e)
            if shots < 0:
                raise self.fail_at(e, f"shots must be >= 0, got {shots}")
        if (e := sec.entries.get("seed")) is not None:
            seed = self.integer(e)
            if not SEED_MIN <= seed <= SEED_MAX:
                raise self.fail_at(e, "seed must fit in 64 bits")
        if (e := sec.entries.get("output")) is not None:
            output = self.text(e)
        return RunConfig(shots=shots, seed=seed, output=output)

    def build(self, base_dir: Path | None) -> ScenarioConfig:
        src = self.sections.get("source")
        if src is not None:
            self._reject_unknown(src, _SECTION_KEYS["source"], "[source]")
        return ScenarioConfig(
            source=self.source(),
            noise=self.noise(),
            protocol=self.protocol(),
            run=self.run(),
            spatial_dephasing=self.spatial(),
            base_dir=base_dir,
        )


def _decode(data: str | bytes, origin: str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        head = data[: e.start]
        line = head.count(b"\n") + 1
        column = e.start - (head.rfind(b"\n") + 1) + 1
        raise ParseError("invalid UTF-8", line, column, origin) from None


def parse_scenario(
    text: str | bytes,
    *,
    overrides: Sequence[str] = (),
    origin: str = "<scenario>",
    base_dir: Path | None = None,
) -> ScenarioConfig:
    """Parse scenario text; overrides (`section.key=value`) apply before validation."""
    decoded = _decode(text, origin)
    sections = _Lexer(origin).sections(decoded)
    _apply_overrides(sections, overrides)
    return _Builder(sections, decoded, origin).build(base_dir)


def load_scenario(path: Path, *, overrides: Sequence[str] = ()) -> ScenarioConfig:
    return parse_scenario(
        path.read_bytes(),
        overrides=overrides,
        origin=str(path),
        base_dir=path.resolve().parent,
    )


# ----------------------------------------------------------------------
# Canonical form
# ----------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def format_scenario(cfg: ScenarioConfig) -> str:
    """Canonical scenario text; parsing it yields an equal ScenarioConfig."""
    lines = [
        "[source]",
        f"r = {cfg.source.r!r}",
        f"theta = {cfg.source.theta!r}",
        "",
        "[noise.polarization]",
        f"model = {cfg.noise.model}",
    ]
    n = cfg.noise
    if n.bell is not None:
        lines += [f"{k} = {v!r}" for k, v in zip(_MODEL_KEYS["bell_diagonal"], n.bell.as_tuple())]
    elif n.product is not None:
        lines += [f"{k} = {v!r}" for k, v in zip(_MODEL_KEYS["product"], n.product.as_tuple())]
    elif n.pauli is not None:
        lines += [
            f"px = {n.pauli.px!r}",
            f"py = {n.pauli.py!r}",
            f"pz = {n.pauli.pz!r}",
            f"target = {n.pauli.target}",
        ]
    elif n.matrix_file is not None:
        lines.append(f"file = {_quote(n.matrix_file)}")
    lines += ["", "[noise.spatial]", f"dephasing = {cfg.spatial_dephasing!r}", ""]
    lines += ["[protocol]", f"name = {cfg.protocol.name}"]
    if cfg.protocol.rounds is not None:
        lines.append(f"rounds = {cfg.protocol.rounds}")
    if cfg.protocol.target_fidelity is not None:
        lines.append(f"target_fidelity = {cfg.protocol.target_fidelity!r}")
    lines += ["", "[run]", f"shots = {cfg.run.shots}", f"seed = {cfg.run.seed}"]
    if cfg.run.output is not None:
        lines.append(f"output = {_quote(cfg.run.output)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Explicit polarization matrix files
# ----------------------------------------------------------------------


def load_matrix_file(path: Path) -> DensityMatrix:
    """Load a 4×4 density matrix from YAML: {real: [[...]], imag: [[...]]} or a bare list."""
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise MatrixFileError(f"{path}: invalid YAML ({e})") from e
    if isinstance(raw, dict):
        unknown = set(raw) - {"real", "imag"}
        if unknown:
            raise MatrixFileError(f"{path}: unknown keys {sorted(unknown)}")
        if "real" not in raw:
            raise MatrixFileError(f"{path}: missing required key: real")
        real, imag = raw["real"], raw.get("imag")
    elif isinstance(raw, list):
        real, imag = raw, None
    else:
        raise MatrixFileError(f"{path}: expected a mapping or a 4x4 list")
    try:
        m = np.array(real, dtype=float) + (0j if imag is None else 1j * np.array(imag, dtype=float))
    except (TypeError, ValueError) as e:
        raise MatrixFileError(f"{path}: entries must be numbers ({e})") from e
    if m.shape != (4, 4):
        raise MatrixFileError(f"{path}: expected a 4x4 matrix, got shape {m.shape}")
    try:
        return DensityMatrix(m)
    except QuantumStateError as e:
        raise MatrixFileError(f"{path}: {e}") from e
