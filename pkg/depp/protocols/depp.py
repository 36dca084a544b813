from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from depp.core.diag import debug
from depp.core.qcore import (
    EXACT_TOL,
    PAULI_I,
    PAULI_X,
    DensityMatrix,
    DimensionError,
    StateVector,
    basis_state,
    bell_state,
    fidelity_pure,
)
from depp.noise.channels import product_dephase
from depp.optics.network import (
    ALL_PATTERNS,
    CoincidencePattern,
    OpticalNetwork,
    embed,
    project_pattern,
    two_photon_unitary,
)

__all__ = [
    "PatternRecord",
    "RunResult",
    "apply_correction",
    "run_network",
    "one_step_depp",
    "one_step_depp_decomposed",
    "mix_results",
]

_SIGMA_X_ON_B = np.kron(PAULI_I, PAULI_X)


@dataclass(frozen=True, eq=False)
class PatternRecord:
    pattern: CoincidencePattern
    probability: float
    raw_state: DensityMatrix | None
    corrected_state: DensityMatrix | None
    corrected_fidelity: float | None

    @property
    def detector_pair(self) -> tuple[str, str]:
        return self.pattern.detector_pair

    @property
    def accepted(self) -> bool:
        return self.corrected_state is not None


@dataclass(frozen=True, eq=False)
class RunResult:
    records: tuple[PatternRecord, ...]

    def __post_init__(self) -> None:
        if self.acceptance_probability > 1.0 + EXACT_TOL:
            raise ValueError(
                f"pattern probabilities sum to {self.acceptance_probability!r} > 1"
            )

    @property
    def acceptance_probability(self) -> float:
        return math.fsum(r.probability for r in self.records)

    @property
    def mean_corrected_fidelity(self) -> float:
        accepted = [r for r in self.records if r.accepted]
        weight = math.fsum(r.probability for r in accepted)
        if weight <= 0.0:
            return 0.0
        total = math.fsum(r.probability * (r.corrected_fidelity or 0.0) for r in accepted)
        return min(1.0, max(0.0, total / weight))

    def record(self, pattern: CoincidencePattern) -> PatternRecord:
        for r in self.records:
            if r.pattern == pattern:
                return r
        raise KeyError(pattern.key)

    def probabilities(self) -> dict[CoincidencePattern, float]:
        return {r.pattern: r.probability for r in self.records}

    def allclose(self, other: "RunResult", atol: float = EXACT_TOL) -> bool:
        """Field-by-field comparison within atol."""
        if [r.pattern for r in self.records] != [r.pattern for r in other.records]:
            return False
        for a, b in zip(self.records, other.records):
            if abs(a.probability - b.probability) > atol:
                return False
            for x, y in ((a.raw_state, b.raw_state), (a.corrected_state, b.corrected_state)):
                if (x is None) != (y is None):
                    return False
                if x is not None and not x.allclose(y, atol=atol):  # type: ignore[arg-type]
                    return False
            if (a.corrected_fidelity is None) != (b.corrected_fidelity is None):
                return False
            if a.corrected_fidelity is not None and abs(
                a.corrected_fidelity - b.corrected_fidelity  # type: ignore[operator]
            ) > atol:
                return False
        return True


def apply_correction(pat: CoincidencePattern, state: DensityMatrix) -> DensityMatrix:
    """σx on photon B for the cross patterns (c,f) and (e,d); identity otherwise."""
    if state.dim != 4:
        raise DimensionError(f"correction acts on a two-photon polarization state, got dim {state.dim}")
    if not pat.is_cross:
        return state
    return state.conjugate_by(_SIGMA_X_ON_B)


def _as_density(state: StateVector | DensityMatrix) -> DensityMatrix:
    return state.to_density() if isinstance(state, StateVector) else state


def run_network(rho_joint: DensityMatrix, network: OpticalNetwork | None = None) -> RunResult:
    """Propagate a 16-dim joint state through the network and postselect every pattern."""
    if rho_joint.dim != 16:
        raise DimensionError(f"joint state must have dim 16, got {rho_joint.dim}")
    net = network or OpticalNetwork.pbs_hwp()
    rho_out = rho_joint.conjugate_by(two_photon_unitary(net))
    target = bell_state("phi+")

    records: list[PatternRecord] = []
    for pat in ALL_PATTERNS:
        prob, raw = project_pattern(rho_out, pat)
        if raw is None:
            records.append(PatternRecord(pat, prob, None, None, None))
            continue
        corrected = apply_correction(pat, raw)
        records.append(
            PatternRecord(pat, prob, raw, corrected, fidelity_pure(corrected, target))
        )
    return RunResult(records=tuple(records))


def one_step_depp(
    rho_p: StateVector | DensityMatrix,
    spatial: StateVector | DensityMatrix,
    *,
    network: OpticalNetwork | None = None,
) -> RunResult:
    rho_p = _as_density(rho_p)
    rho_s = _as_density(spatial)
    if rho_p.dim != 4 or rho_s.dim != 4:
        raise DimensionError(
            f"one_step_depp needs 4-dim polarization and spatial states, got {rho_p.dim} and {rho_s.dim}"
        )
    result = run_network(embed(rho_p, rho_s), network)
    debug(
        f"acceptance={result.acceptance_probability:.15f} "
        f"fidelity={result.mean_corrected_fidelity:.15f}",
        scope="depp",
    )
    return result


def mix_results(weighted: Iterable[tuple[float, RunResult]]) -> RunResult:
    """Probability mixture of runs; conditional states are re-weighted per pattern."""
    items = [(float(w), r) for w, r in weighted if w > 0.0]
    target = bell_state("phi+")
    records: list[PatternRecord] = []
    for pat in ALL_PATTERNS:
        prob = math.fsum(w * r.record(pat).probability for w, r in items)
        parts = [
            (w * r.record(pat).probability, r.record(pat))
            for w, r in items
            if r.record(pat).raw_state is not None
        ]
        if not parts or prob <= 0.0:
            records.append(PatternRecord(pat, prob, None, None, None))
            continue
        raw = DensityMatrix(sum(q * rec.raw_state.entries for q, rec in parts) / prob)  # type: ignore[union-attr]
        corrected = apply_correction(pat, raw)
        records.append(
            PatternRecord(pat, prob, raw, corrected, fidelity_pure(corrected, target))
        )
    return RunResult(records=tuple(records))


# HH, VV, HV, VH positions in the HH, HV, VH, VV basis.
_PRODUCT_BRANCHES = (0, 3, 1, 2)


def one_step_depp_decomposed(
    rho_p: DensityMatrix,
    spatial: StateVector | DensityMatrix,
    *,
    network: OpticalNetwork | None = None,
) -> RunResult:
    """Run the four product-basis branches separately and mix them by their weights."""
    params, _ = product_dephase(rho_p)
    branches = [
        (w, one_step_depp(basis_state(4, idx), spatial, network=network))
        for w, idx in zip(params.as_tuple(), _PRODUCT_BRANCHES)
    ]
    return mix_results(branches)
