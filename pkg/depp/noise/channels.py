from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from depp.core.qcore import (
    BELL_KINDS,
    EXACT_TOL,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    DimensionError,
    KrausChannel,
    StateVector,
    bell_state,
    fidelity_pure,
)
from depp.optics.network import embed_permutation

__all__ = [
    "NoiseModelError",
    "BellDiagonalParams",
    "SourceConfig",
    "ProductDiagonalParams",
    "make_spatial_state",
    "make_bell_diagonal",
    "make_product_diagonal",
    "bell_weights",
    "pauli_channel",
    "product_dephase",
    "spatial_dephasing",
    "lift_channel",
]

Target = Literal["A", "B"]


class NoiseModelError(ValueError):
    pass


def _check_probability(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v) or v < 0.0 or v > 1.0:
        raise NoiseModelError(f"{name} must be a probability in [0, 1], got {value!r}")
    return v


def _check_simplex(names: tuple[str, ...], values: tuple[float, ...]) -> None:
    for n, v in zip(names, values):
        _check_probability(n, v)
    total = math.fsum(values)
    if abs(total - 1.0) > EXACT_TOL:
        raise NoiseModelError(f"{'+'.join(names)}=1 violated (sum is {total!r})")


@dataclass(frozen=True)
class BellDiagonalParams:
    """Weights of φ+, φ−, ψ+, ψ− in a Bell-diagonal polarization state."""

    F: float
    F1: float
    F2: float
    F3: float

    def __post_init__(self) -> None:
        _check_simplex(("F", "F1", "F2", "F3"), self.as_tuple())

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.F, self.F1, self.F2, self.F3)

    @classmethod
    def werner(cls, F: float) -> "BellDiagonalParams":
        rest = (1.0 - F) / 3.0
        return cls(F, rest, rest, 1.0 - F - 2.0 * rest)


@dataclass(frozen=True)
class SourceConfig:
    """Post-selected single-pair source: relative amplitude r and phase theta (radians)."""

    r: float = 1.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        r = float(self.r)
        theta = float(self.theta)
        if not math.isfinite(r) or r < 0.0:
            raise NoiseModelError(f"r must be a finite nonnegative number, got {self.r!r}")
        if not math.isfinite(theta):
            raise NoiseModelError(f"theta must be finite, got {self.theta!r}")
        theta = math.fmod(theta, 2 * math.pi)
        if theta < 0.0:
            theta += 2 * math.pi
        if theta >= 2 * math.pi:
            theta = 0.0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class ProductDiagonalParams:
    """Weights of |HH⟩, |VV⟩, |HV⟩, |VH⟩ (α, β, γ, δ); γ is not the source coupling."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self) -> None:
        _check_simplex(("alpha", "beta", "gamma", "delta"), self.as_tuple())

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta)


def make_spatial_state(cfg: SourceConfig) -> StateVector:
    """(|a1 b1⟩ + r e^{iθ} |a2 b2⟩) / √(1+r²) in a1b1, a1b2, a2b1, a2b2 order."""
    amp = cfg.r * complex(math.cos(cfg.theta), math.sin(cfg.theta))
    norm = math.sqrt(1.0 + cfg.r * cfg.r)
    return StateVector(np.array([1.0, 0.0, 0.0, amp], dtype=np.complex128) / norm)


def make_bell_diagonal(p: BellDiagonalParams) -> DensityMatrix:
    rho = np.zeros((4, 4), dtype=np.complex128)
    for weight, kind in zip(p.as_tuple(), BELL_KINDS):
        v = bell_state(kind).amplitudes
        rho += weight * np.outer(v, v.conj())
    return DensityMatrix(rho)


# Diagonal positions of HH, VV, HV, VH in the HH, HV, VH, VV basis.
_PRODUCT_INDEX = (0, 3, 1, 2)


def make_product_diagonal(p: ProductDiagonalParams) -> DensityMatrix:
    diag = np.zeros(4, dtype=np.complex128)
    for weight, idx in zip(p.as_tuple(), _PRODUCT_INDEX):
        diag[idx] = weight
    return DensityMatrix(np.diag(diag))


def bell_weights(rho: DensityMatrix) -> BellDiagonalParams:
    """Bell-basis diagonal of a two-qubit state (its Bell-diagonal twirl)."""
    if rho.dim != 4:
        raise DimensionError(f"bell_weights needs a two-qubit state, got dim {rho.dim}")
    weights = [fidelity_pure(rho, bell_state(k)) for k in BELL_KINDS]
    total = math.fsum(weights)
    return BellDiagonalParams(*(w / total for w in weights))


def pauli_channel(px: float, py: float, pz: float, target: Target = "B") -> KrausChannel:
    """Pauli noise on one photon's polarization, lifted to the 4-dim two-photon space."""
    px = _check_probability("px", px)
    py = _check_probability("py", py)
    pz = _check_probability("pz", pz)
    p0 = 1.0 - (px + py + pz)
    if p0 < -EXACT_TOL:
        raise NoiseModelError(f"px+py+pz must not exceed 1 (got {px + py + pz!r})")
    p0 = max(p0, 0.0)
    if target not in ("A", "B"):
        raise NoiseModelError(f"target must be A or B, got {target!r}")

    def on_target(op: np.ndarray) -> np.ndarray:
        return np.kron(op, PAULI_I) if target == "A" else np.kron(PAULI_I, op)

    ops = [
        math.sqrt(w) * on_target(op)
        for w, op in ((p0, PAULI_I), (px, PAULI_X), (py, PAULI_Y), (pz, PAULI_Z))
        if w > 0.0
    ]
    if not ops:
        ops = [on_target(PAULI_I)]
    return KrausChannel(tuple(ops))


def product_dephase(rho_p: DensityMatrix) -> tuple[ProductDiagonalParams, DensityMatrix]:
    """Diagonal of rho_p in the σz⊗σz product basis and the dephased matrix."""
    if rho_p.dim != 4:
        raise DimensionError(f"product_dephase needs dim 4, got {rho_p.dim}")
    diag = rho_p.entries.diagonal().real.copy()
    diag = np.clip(diag, 0.0, None)
    values = [float(diag[idx]) for idx in _PRODUCT_INDEX]
    total = math.fsum(values)
    params = ProductDiagonalParams(*(v / total for v in values))
    return params, DensityMatrix(np.diag(diag.astype(np.complex128)))


def spatial_dephasing(lam: float) -> KrausChannel:
    """Destroys the a1b1/a2b2 coherence with probability lam."""
    lam = _check_probability("dephasing", lam)
    p11 = np.zeros((4, 4), dtype=np.complex128)
    p11[0, 0] = 1.0
    rest = np.eye(4, dtype=np.complex128) - p11
    ops = [math.sqrt(1.0 - lam) * np.eye(4, dtype=np.complex128)]
    if lam > 0.0:
        ops += [math.sqrt(lam) * p11, math.sqrt(lam) * rest]
    return KrausChannel(tuple(op for op in ops if np.any(op)))


def lift_channel(
    ch: KrausChannel, subsystem: Literal["polarization", "spatial"]
) -> KrausChannel:
    """Lift a 4-dim channel to the 16-dim joint space (embed basis convention)."""
    if ch.dim != 4:
        raise DimensionError(f"lift_channel expects a 4-dim channel, got {ch.dim}")
    eye = np.eye(4, dtype=np.complex128)
    p = embed_permutation()
    if subsystem == "polarization":
        ops = [p @ np.kron(k, eye) @ p.T for k in ch.operators]
    elif subsystem == "spatial":
        ops = [p @ np.kron(eye, k) @ p.T for k in ch.operators]
    else:
        raise NoiseModelError(f"unknown subsystem: {subsystem!r}")
    return KrausChannel(tuple(ops))
