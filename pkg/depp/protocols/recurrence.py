"""Conventional two-copy recurrence purification on Werner pairs.

`bennett_recurrence` is the closed-form fidelity map; `bennett_step_exact` builds the
two-pair state explicitly and is used as an independent check of the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from depp.core.diag import debug
from depp.core.qcore import (
    PAULI_X,
    DensityMatrix,
    bell_state,
    fidelity_pure,
)
from depp.noise.channels import BellDiagonalParams, NoiseModelError, make_bell_diagonal

__all__ = [
    "RecurrenceTrace",
    "BennettOutcome",
    "werner_params",
    "bennett_recurrence",
    "bennett_success_probability",
    "bennett_step_exact",
    "bennett_iterate",
    "bennett_pairs_to_target",
    "PURIFICATION_THRESHOLD",
    "MAX_ROUNDS",
]

PURIFICATION_THRESHOLD = 0.5
MAX_ROUNDS = 10_000


def _check_fidelity(F: float) -> float:
    v = float(F)
    if not math.isfinite(v) or v < 0.0 or v > 1.0:
        raise NoiseModelError(f"fidelity must lie in [0, 1], got {F!r}")
    return v


def werner_params(F: float) -> BellDiagonalParams:
    return BellDiagonalParams.werner(_check_fidelity(F))


def bennett_success_probability(F: float) -> float:
    F = _check_fidelity(F)
    e = 1.0 - F
    return F * F + (2.0 / 3.0) * F * e + (5.0 / 9.0) * e * e


def bennett_recurrence(F: float) -> float:
    F = _check_fidelity(F)
    e = 1.0 - F
    return (F * F + e * e / 9.0) / bennett_success_probability(F)


# Qubit order (A1, B1, A2, B2): pair 1 is the source, pair 2 the target.
def _bilateral_cnot() -> np.ndarray:
    u = np.zeros((16, 16), dtype=np.complex128)
    for a1 in (0, 1):
        for b1 in (0, 1):
            for a2 in (0, 1):
                for b2 in (0, 1):
                    src = a1 * 8 + b1 * 4 + a2 * 2 + b2
                    dst = a1 * 8 + b1 * 4 + (a2 ^ a1) * 2 + (b2 ^ b1)
                    u[dst, src] = 1.0
    return u


_BCNOT = _bilateral_cnot()
_XX = np.kron(PAULI_X, PAULI_X)


def bennett_step_exact(F: float) -> tuple[float, float]:
    """One purification round on two explicit Werner pairs.

    Returns (output fidelity, coincidence probability).
    """
    werner = make_bell_diagonal(werner_params(F)).entries
    joint = _BCNOT @ np.kron(werner, werner) @ _BCNOT.conj().T
    t = joint.reshape((2,) * 8)

    keep_00 = t[:, :, 0, 0, :, :, 0, 0].reshape(4, 4)
    keep_11 = t[:, :, 1, 1, :, :, 1, 1].reshape(4, 4)
    # Bilateral flip on the |11⟩ branch; Bell-diagonal weights are invariant under it.
    keep_11 = _XX @ keep_11 @ _XX.conj().T

    unnormalized = keep_00 + keep_11
    p_succ = float(np.trace(unnormalized).real)
    source = DensityMatrix(unnormalized / p_succ)
    return fidelity_pure(source, bell_state("phi+")), p_succ


@dataclass(frozen=True)
class RecurrenceTrace:
    """Per-round fidelities; success_probs[0] is 1.0 for the unprocessed input."""

    fidelities: tuple[float, ...]
    success_probs: tuple[float, ...]
    expected_pairs_consumed: float

    def __post_init__(self) -> None:
        if len(self.fidelities) != len(self.success_probs):
            raise ValueError("fidelities and success_probs must have equal length")

    @property
    def rounds(self) -> int:
        return len(self.fidelities) - 1

    @property
    def final_fidelity(self) -> float:
        return self.fidelities[-1]

    @property
    def overall_success_probability(self) -> float:
        return math.prod(self.success_probs)


def _pairs_consumed(success_probs: list[float]) -> float:
    pairs = 1.0
    for p in reversed(success_probs):
        pairs = 2.0 * pairs / p
    return pairs


def bennett_iterate(F0: float, rounds: int) -> RecurrenceTrace:
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    F = _check_fidelity(F0)
    fidelities = [F]
    probs: list[float] = []
    for _ in range(rounds):
        probs.append(bennett_success_probability(F))
        F = bennett_recurrence(F)
        fidelities.append(F)
    return RecurrenceTrace(
        fidelities=tuple(fidelities),
        success_probs=(1.0, *probs),
        expected_pairs_consumed=_pairs_consumed(probs),
    )


@dataclass(frozen=True)
class BennettOutcome:
    reachable: bool
    target_fidelity: float
    trace: RecurrenceTrace | None = field(default=None)

    @property
    def rounds(self) -> int | None:
        return None if self.trace is None else self.trace.rounds

    @property
    def expected_pairs(self) -> float | None:
        return None if self.trace is None else self.trace.expected_pairs_consumed


def bennett_pairs_to_target(
    F0: float, target: float, *, max_rounds: int = MAX_ROUNDS
) -> BennettOutcome:
    """Rounds and expected pairs for the recurrence to reach `target` from F0."""
    F = _check_fidelity(F0)
    target = float(target)
    if F >= target:
        return BennettOutcome(True, target, bennett_iterate(F, 0))
    if target >= 1.0 or F <= PURIFICATION_THRESHOLD:
        # F=1 is only approached asymptotically; F <= 1/2 never improves.
        debug(f"recurrence cannot reach {target!r} from {F!r}", scope="bennett")
        return BennettOutcome(False, target, None)

    rounds = 0
    while F < target and rounds < max_rounds:
        F = bennett_recurrence(F)
        rounds += 1
    if F < target:
        return BennettOutcome(False, target, None)
    return BennettOutcome(True, target, bennett_iterate(F0, rounds))
