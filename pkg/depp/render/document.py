"""Results documents.

A document is a JSON object with top-level keys `scenario`, `analytic`, `sampling`
(only when shots > 0) and `meta`. Key order is fixed and floats are written with
the shortest repr that round-trips (at most 17 significant digits), so
dump(load(dump(x))) is byte-identical to dump(x).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from depp import __version__
from depp.core.config import ScenarioConfig
from depp.core.qcore import DensityMatrix
from depp.noise.channels import BellDiagonalParams
from depp.protocols.compare import ComparisonRow, ProtocolComparison, SimonPanResult
from depp.protocols.depp import RunResult
from depp.protocols.recurrence import RecurrenceTrace
from depp.protocols.runner import ScenarioRun
from depp.sampling.montecarlo import SampleReport

__all__ = [
    "DocumentWriteError",
    "scenario_to_dict",
    "result_to_dict",
    "build_document",
    "dump_document",
    "load_document",
    "serialize_result",
    "write_document",
]

TOOL_NAME = "depp"


class DocumentWriteError(RuntimeError):
    def __init__(self, path: Path, reason: str) -> None:
        super().__init__(f"cannot write {path}: {reason}")
        self.path = path


def _matrix(rho: DensityMatrix | None) -> dict[str, list[list[float]]] | None:
    if rho is None:
        return None
    m = np.asarray(rho.entries)
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def _bell(p: BellDiagonalParams) -> dict[str, float]:
    return {"F": p.F, "F1": p.F1, "F2": p.F2, "F3": p.F3}


def _run_result(rr: RunResult) -> dict[str, Any]:
    patterns = []
    for rec in rr.records:
        patterns.append(
            {
                "pattern": rec.pattern.key,
                "detectors": list(rec.detector_pair),
                "probability": rec.probability,
                "accepted": rec.accepted,
                "corrected_fidelity": rec.corrected_fidelity,
                "raw_state": _matrix(rec.raw_state),
                "corrected_state": _matrix(rec.corrected_state),
            }
        )
    return {
        "kind": "one_step_depp",
        "acceptance_probability": rr.acceptance_probability,
        "mean_corrected_fidelity": rr.mean_corrected_fidelity,
        "patterns": patterns,
    }


def _trace(t: RecurrenceTrace) -> dict[str, Any]:
    return {
        "kind": "bennett",
        "rounds": t.rounds,
        "fidelities": list(t.fidelities),
        "success_probs": list(t.success_probs),
        "final_fidelity": t.final_fidelity,
        "overall_success_probability": t.overall_success_probability,
        "expected_pairs_consumed": t.expected_pairs_consumed,
    }


def _row(row: ComparisonRow) -> dict[str, Any]:
    return {
        "protocol": row.protocol,
        "reachable": row.reachable,
        "rounds": row.rounds,
        "final_fidelity": row.final_fidelity,
        "success_probability": row.success_probability,
        "expected_pairs": row.expected_pairs,
    }


def _sample(s: SampleReport) -> dict[str, Any]:
    return {
        "shots": s.shots,
        "seed": s.seed,
        "shards": s.shards,
        "counts": dict(s.counts),
        "frequencies": dict(s.frequencies),
        "ci_halfwidth": dict(s.ci_halfwidth),
        "intervals": {k: list(s.interval(k)) for k in s.counts},
    }


def result_to_dict(result: Any) -> dict[str, Any]:
    if isinstance(result, RunResult):
        return _run_result(result)
    if isinstance(result, RecurrenceTrace):
        return _trace(result)
    if isinstance(result, SampleReport):
        return _sample(result)
    if isinstance(result, SimonPanResult):
        return {"kind": "simon_pan", "params": _bell(result.params), "efficiency": result.efficiency}
    if isinstance(result, ProtocolComparison):
        return {
            "kind": "compare",
            "target_fidelity": result.target_fidelity,
            "params": _bell(result.params),
            "rows": [_row(r) for r in result.rows()],
            "depp": _run_result(result.depp),
        }
    raise TypeError(f"cannot serialize {type(result).__name__}")


def scenario_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    noise: dict[str, Any] = {"model": cfg.noise.model}
    if cfg.noise.bell is not None:
        noise.update(_bell(cfg.noise.bell))
    elif cfg.noise.product is not None:
        p = cfg.noise.product
        noise.update(alpha=p.alpha, beta=p.beta, gamma=p.gamma, delta=p.delta)
    elif cfg.noise.pauli is not None:
        q = cfg.noise.pauli
        noise.update(px=q.px, py=q.py, pz=q.pz, target=q.target)
    elif cfg.noise.matrix_file is not None:
        noise["file"] = cfg.noise.matrix_file

    protocol: dict[str, Any] = {"name": cfg.protocol.name}
    if cfg.protocol.rounds is not None:
        protocol["rounds"] = cfg.protocol.rounds
    if cfg.protocol.target_fidelity is not None:
        protocol["target_fidelity"] = cfg.protocol.target_fidelity

    return {
        "source": {"r": cfg.source.r, "theta": cfg.source.theta},
        "noise": noise,
        "spatial_dephasing": cfg.spatial_dephasing,
        "protocol": protocol,
        "run": {"shots": cfg.run.shots, "seed": cfg.run.seed, "output": cfg.run.output},
    }


def build_document(run: ScenarioRun) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "scenario": scenario_to_dict(run.config),
        "analytic": result_to_dict(run.analytic),
    }
    if run.sampling is not None:
        doc["sampling"] = _sample(run.sampling)
    doc["meta"] = {"tool": TOOL_NAME, "version": __version__, "seed": run.config.run.seed}
    return doc


def dump_document(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def load_document(text: str) -> dict[str, Any]:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("results document must be a JSON object")
    return doc


def serialize_result(result: Any) -> str:
    return dump_document(result_to_dict(result))


def write_document(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DocumentWriteError(path, e.strerror or str(e)) from e
    return path
