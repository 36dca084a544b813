from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence, overload

import numpy as np

__all__ = [
    "VALID_TOL",
    "EXACT_TOL",
    "QuantumStateError",
    "DimensionError",
    "StateVector",
    "DensityMatrix",
    "KrausChannel",
    "tensor_product",
    "fidelity_pure",
    "partial_trace",
    "apply_channel",
    "is_unitary",
    "is_density",
    "BELL_KINDS",
    "bell_state",
    "basis_state",
    "identity_channel",
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
]

# Validity checks vs. identities on exact permutation/tensor arithmetic.
VALID_TOL = 1e-10
EXACT_TOL = 1e-12

BellKind = Literal["phi+", "phi-", "psi+", "psi-"]

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class QuantumStateError(ValueError):
    pass


class DimensionError(QuantumStateError):
    pass


def _as_complex_array(data: object, *, ndim: int, what: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise QuantumStateError(f"{what}: not a complex array ({e})") from e
    if arr.ndim != ndim:
        raise DimensionError(f"{what}: expected {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{what}: empty")
    if not np.all(np.isfinite(arr)):
        raise QuantumStateError(f"{what}: NaN or Inf entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_complex_array(self.amplitudes, ndim=1, what="StateVector")
        norm = float(np.vdot(arr, arr).real)
        if abs(norm - 1.0) > VALID_TOL:
            raise QuantumStateError(f"StateVector: squared norm {norm!r} != 1")
        object.__setattr__(self, "amplitudes", _frozen(arr))

    @classmethod
    def normalized(cls, amplitudes: Iterable[complex] | np.ndarray) -> "StateVector":
        data = amplitudes if isinstance(amplitudes, np.ndarray) else list(amplitudes)
        arr = _as_complex_array(data, ndim=1, what="StateVector")
        norm = math.sqrt(float(np.vdot(arr, arr).real))
        if norm == 0.0:
            raise QuantumStateError("StateVector: zero vector cannot be normalized")
        return cls(arr / norm)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "StateVector") -> complex:
        if other.dim != self.dim:
            raise DimensionError(f"inner product of dims {self.dim} and {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix (within VALID_TOL).

    Tiny negative diagonal noise (>= -VALID_TOL) is clamped to zero on construction;
    anything larger is rejected.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_complex_array(self.entries, ndim=2, what="DensityMatrix")
        n, m = arr.shape
        if n != m:
            raise DimensionError(f"DensityMatrix: not square ({n}x{m})")
        if np.max(np.abs(arr - arr.conj().T)) > VALID_TOL:
            raise QuantumStateError("DensityMatrix: not Hermitian")
        arr = (arr + arr.conj().T) / 2

        diag = arr.diagonal().real
        if np.any(diag < -VALID_TOL):
            raise QuantumStateError(
                f"DensityMatrix: negative diagonal entry {float(diag.min())!r}"
            )
        tiny = (diag < 0) & (diag >= -VALID_TOL)
        if np.any(tiny):
            arr = arr.copy()
            idx = np.nonzero(tiny)[0]
            arr[idx, idx] = 0.0

        tr = float(np.trace(arr).real)
        if abs(tr - 1.0) > VALID_TOL:
            raise QuantumStateError(f"DensityMatrix: trace {tr!r} != 1")
        lo = float(np.linalg.eigvalsh(arr).min())
        if lo < -VALID_TOL:
            raise QuantumStateError(f"DensityMatrix: eigenvalue {lo!r} < 0")
        object.__setattr__(self, "entries", _frozen(arr))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def rank(self, tol: float = VALID_TOL) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.entries) > tol))

    def allclose(self, other: "DensityMatrix", atol: float = EXACT_TOL) -> bool:
        return self.dim == other.dim and bool(
            np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)
        )

    def conjugate_by(self, op: np.ndarray) -> "DensityMatrix":
        """Return op · rho · op† (op assumed unitary)."""
        op = np.asarray(op, dtype=np.complex128)
        if op.shape != (self.dim, self.dim):
            raise DimensionError(f"operator shape {op.shape} vs dim {self.dim}")
        return DensityMatrix(op @ self.entries @ op.conj().T)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.operators:
            raise QuantumStateError("KrausChannel: no operators")
        ops = tuple(
            _as_complex_array(k, ndim=2, what="Kraus operator") for k in self.operators
        )
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise DimensionError(f"Kraus operator shape {k.shape}, expected {(dim, dim)}")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim))) > VALID_TOL:
            raise QuantumStateError("KrausChannel: sum of K†K is not the identity")
        object.__setattr__(self, "operators", tuple(_frozen(k) for k in ops))

    @property
    def dim(self) -> int:
        return int(self.operators[0].shape[0])

    def compose(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying `other` first, then self."""
        if other.dim != self.dim:
            raise DimensionError(f"compose dims {self.dim} and {other.dim}")
        return KrausChannel(tuple(a @ b for a in self.operators for b in other.operators))


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=np.complex128),))


@overload
def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix: ...
@overload
def tensor_product(a: StateVector, b: StateVector) -> StateVector: ...


def tensor_product(a, b):
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries))
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    raise QuantumStateError(
        f"tensor_product needs two operands of the same kind, got "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def fidelity_pure(rho: DensityMatrix, psi: StateVector) -> float:
    if rho.dim != psi.dim:
        raise DimensionError(f"fidelity: rho dim {rho.dim} vs psi dim {psi.dim}")
    value = complex(np.vdot(psi.amplitudes, rho.entries @ psi.amplitudes))
    if abs(value.imag) > VALID_TOL:
        raise QuantumStateError(f"fidelity has imaginary part {value.imag!r}")
    return min(1.0, max(0.0, value.real))


def partial_trace(rho: DensityMatrix, dims: Sequence[int], keep: Iterable[int]) -> DensityMatrix:
    dims = [int(d) for d in dims]
    if not dims or any(d <= 0 for d in dims):
        raise DimensionError(f"partial_trace: invalid subsystem dims {dims}")
    if math.prod(dims) != rho.dim:
        raise DimensionError(f"partial_trace: dims {dims} do not multiply to {rho.dim}")
    kept = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in kept):
        raise DimensionError(f"partial_trace: keep {kept} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = rho.entries.reshape(dims + dims)
    current = n
    for ax in sorted(set(range(n)) - set(kept), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + current)
        current -= 1
    d = math.prod(dims[k] for k in kept)
    return DensityMatrix(t.reshape(d, d))


def apply_channel(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    if ch.dim != rho.dim:
        raise DimensionError(f"channel dim {ch.dim} vs state dim {rho.dim}")
    out = sum(k @ rho.entries @ k.conj().T for k in ch.operators)
    return DensityMatrix(out)


def is_unitary(m: object) -> bool:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    if not np.all(np.isfinite(arr)):
        return False
    return bool(np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0]))) <= VALID_TOL)


def is_density(rho: object) -> bool:
    if isinstance(rho, DensityMatrix):
        return True
    try:
        DensityMatrix(np.asarray(rho))
    except QuantumStateError:
        return False
    return True


_BELL_AMPLITUDES: dict[str, tuple[int, int, int, int]] = {
    "phi+": (1, 0, 0, 1),
    "phi-": (1, 0, 0, -1),
    "psi+": (0, 1, 1, 0),
    "psi-": (0, 1, -1, 0),
}

BELL_KINDS: tuple[BellKind, ...] = ("phi+", "phi-", "psi+", "psi-")


def bell_state(kind: BellKind) -> StateVector:
    """Bell state in HH, HV, VH, VV order."""
    try:
        amps = _BELL_AMPLITUDES[kind]
    except KeyError:
        raise QuantumStateError(f"unknown Bell state: {kind!r}") from None
    return StateVector(np.array(amps, dtype=np.complex128) / math.sqrt(2))


def basis_state(dim: int, index: int) -> StateVector:
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return StateVector(v)
