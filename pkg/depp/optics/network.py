"""Linear-optical network of the one-step purification setup.

Basis conventions
-----------------
- Polarization: H=0, V=1.
- Side maps (`pbs_hwp_side_map`) use the mode order [(H,p1), (V,p1), (H,p2), (V,p2)]
  on input and [(H,x), (V,x), (H,y), (V,y)] on output, i.e. index = 2*port + pol.
- The joint 16-dim space (`embed`) orders each side as 2*pol + port, and the
  joint index is side_A * 4 + side_B.

Output ports c/e (Alice) and d/f (Bob) each merge the two arms entering the final
PBS; the arms are told apart by polarization, so one 4-level space per side is enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from depp.core.qcore import (
    DensityMatrix,
    DimensionError,
    StateVector,
    is_unitary,
    tensor_product,
)

__all__ = [
    "OpticsError",
    "SingleMode",
    "CoincidencePattern",
    "ALL_PATTERNS",
    "OpticalNetwork",
    "pbs_map",
    "hwp_map",
    "pbs_route",
    "hwp",
    "pbs_hwp_side_map",
    "embed",
    "embed_vector",
    "embed_permutation",
    "two_photon_unitary",
    "project_pattern",
    "detector_label",
    "pattern_outcomes",
    "PROBABILITY_FLOOR",
]

Pol = Literal["H", "V"]
Side = Literal["alice", "bob"]

# Conditional states below this probability are reported absent.
PROBABILITY_FLOOR = 1e-14

_POL_INDEX: dict[str, int] = {"H": 0, "V": 1}
_INPUT_PORTS: dict[str, tuple[str, str]] = {"alice": ("a1", "a2"), "bob": ("b1", "b2")}
_OUTPUT_PORTS: dict[str, tuple[str, str]] = {"alice": ("c", "e"), "bob": ("d", "f")}
_DETECTORS: dict[str, str] = {"c": "D2", "d": "D4", "e": "D5", "f": "D7"}


class OpticsError(ValueError):
    pass


@dataclass(frozen=True)
class SingleMode:
    pol: Pol
    port: str

    def __post_init__(self) -> None:
        if self.pol not in _POL_INDEX:
            raise OpticsError(f"unknown polarization: {self.pol!r}")
        known = {p for ports in (*_INPUT_PORTS.values(), *_OUTPUT_PORTS.values()) for p in ports}
        if self.port not in known and self.port not in ("transmit", "reflect"):
            raise OpticsError(f"unknown port: {self.port!r}")


@dataclass(frozen=True)
class CoincidencePattern:
    alice_port: str
    bob_port: str

    def __post_init__(self) -> None:
        if self.alice_port not in _OUTPUT_PORTS["alice"]:
            raise OpticsError(f"Alice output port must be c or e, got {self.alice_port!r}")
        if self.bob_port not in _OUTPUT_PORTS["bob"]:
            raise OpticsError(f"Bob output port must be d or f, got {self.bob_port!r}")

    @property
    def key(self) -> str:
        return f"{self.alice_port}{self.bob_port}"

    @property
    def detector_pair(self) -> tuple[str, str]:
        return (detector_label(self.alice_port), detector_label(self.bob_port))

    @property
    def is_cross(self) -> bool:
        # (c,f) and (e,d): the two photons carry opposite input polarizations.
        return _OUTPUT_PORTS["alice"].index(self.alice_port) != _OUTPUT_PORTS["bob"].index(
            self.bob_port
        )

    @classmethod
    def from_key(cls, key: str) -> "CoincidencePattern":
        if len(key) != 2:
            raise OpticsError(f"pattern key must be two letters, got {key!r}")
        return cls(alice_port=key[0], bob_port=key[1])


ALL_PATTERNS: tuple[CoincidencePattern, ...] = (
    CoincidencePattern("c", "d"),
    CoincidencePattern("c", "f"),
    CoincidencePattern("e", "d"),
    CoincidencePattern("e", "f"),
)


# ----------------------------------------------------------------------
# Elements
# ----------------------------------------------------------------------


def pbs_map() -> dict[str, str]:
    """Polarization → PBS output arm: H is transmitted, V reflected."""
    return {"H": "transmit", "V": "reflect"}


def hwp_map() -> dict[str, str]:
    return {"H": "V", "V": "H"}


def pbs_route(mode: SingleMode) -> SingleMode:
    return SingleMode(pol=mode.pol, port=pbs_map()[mode.pol])


def hwp(mode: SingleMode) -> SingleMode:
    return SingleMode(pol=hwp_map()[mode.pol], port=mode.port)  # type: ignore[arg-type]


def _side_route(side: Side, mode: SingleMode) -> SingleMode:
    # PBS on each input port: transmitted arms lead to the first output (c/d),
    # reflected arms to the second (e/f). Arms leaving the second input port carry a HWP.
    p1, p2 = _INPUT_PORTS[side]
    x, y = _OUTPUT_PORTS[side]
    if mode.port not in (p1, p2):
        raise OpticsError(f"{mode.port!r} is not a {side} input port")
    arm = pbs_route(mode)
    if mode.port == p2:
        arm = hwp(arm)
    out_port = x if arm.port == "transmit" else y
    return SingleMode(pol=arm.pol, port=out_port)


def pbs_hwp_side_map(side: Side) -> np.ndarray:
    """4×4 permutation over [(H,p1),(V,p1),(H,p2),(V,p2)] → [(H,x),(V,x),(H,y),(V,y)]."""
    if side not in _INPUT_PORTS:
        raise OpticsError(f"unknown side: {side!r}")
    inputs = _INPUT_PORTS[side]
    outputs = _OUTPUT_PORTS[side]
    m = np.zeros((4, 4), dtype=np.complex128)
    for port_i, port in enumerate(inputs):
        for pol in ("H", "V"):
            out = _side_route(side, SingleMode(pol=pol, port=port))
            col = 2 * port_i + _POL_INDEX[pol]
            row = 2 * outputs.index(out.port) + _POL_INDEX[out.pol]
            m[row, col] = 1.0
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class OpticalNetwork:
    alice_map: np.ndarray
    bob_map: np.ndarray

    def __post_init__(self) -> None:
        for name in ("alice_map", "bob_map"):
            arr = np.array(getattr(self, name), dtype=np.complex128)
            if arr.shape != (4, 4):
                raise OpticsError(f"{name} must be 4x4, got {arr.shape}")
            if not is_unitary(arr):
                raise OpticsError(f"{name} is not unitary")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def pbs_hwp(cls) -> "OpticalNetwork":
        return cls(alice_map=pbs_hwp_side_map("alice"), bob_map=pbs_hwp_side_map("bob"))

    @classmethod
    def from_maps(cls, alice_map: np.ndarray, bob_map: np.ndarray) -> "OpticalNetwork":
        return cls(alice_map=alice_map, bob_map=bob_map)


# ----------------------------------------------------------------------
# Joint space
# ----------------------------------------------------------------------

# Side-map index (2*port + pol) → embed-local index (2*pol + port).
_SIDE_TO_LOCAL = np.zeros((4, 4), dtype=np.complex128)
for _port in (0, 1):
    for _pol in (0, 1):
        _SIDE_TO_LOCAL[2 * _pol + _port, 2 * _port + _pol] = 1.0

# (pA, pB, sA, sB) → (pA, sA, pB, sB) on the 16-dim space.
_EMBED_AXES = (0, 2, 1, 3)


def _check_dim(state: DensityMatrix | StateVector, dim: int, what: str) -> None:
    if state.dim != dim:
        raise DimensionError(f"{what}: expected dim {dim}, got {state.dim}")


def embed(rho_p: DensityMatrix, rho_s: DensityMatrix) -> DensityMatrix:
    """Joint state over (pol_A ⊗ spa_A) ⊗ (pol_B ⊗ spa_B).

    Component index = (2·pol_A + spa_A)·4 + (2·pol_B + spa_B).
    """
    _check_dim(rho_p, 4, "polarization state")
    _check_dim(rho_s, 4, "spatial state")
    t = tensor_product(rho_p, rho_s).entries.reshape((2,) * 8)
    t = t.transpose(*_EMBED_AXES, *(a + 4 for a in _EMBED_AXES))
    return DensityMatrix(t.reshape(16, 16))


def embed_vector(psi_p: StateVector, psi_s: StateVector) -> StateVector:
    _check_dim(psi_p, 4, "polarization state")
    _check_dim(psi_s, 4, "spatial state")
    t = tensor_product(psi_p, psi_s).amplitudes.reshape((2,) * 4)
    return StateVector(t.transpose(*_EMBED_AXES).reshape(16))


def embed_permutation() -> np.ndarray:
    """Permutation matrix P with embed(a, b) = P (a ⊗ b) Pᵀ."""
    p = np.zeros((16, 16), dtype=np.complex128)
    for pa in (0, 1):
        for pb in (0, 1):
            for sa in (0, 1):
                for sb in (0, 1):
                    src = ((pa * 2 + pb) * 2 + sa) * 2 + sb
                    dst = (2 * pa + sa) * 4 + (2 * pb + sb)
                    p[dst, src] = 1.0
    return p


def two_photon_unitary(net: OpticalNetwork) -> np.ndarray:
    a = _SIDE_TO_LOCAL @ net.alice_map @ _SIDE_TO_LOCAL.T
    b = _SIDE_TO_LOCAL @ net.bob_map @ _SIDE_TO_LOCAL.T
    u = np.kron(a, b)
    u.setflags(write=False)
    return u


def project_pattern(
    rho_out: DensityMatrix, pat: CoincidencePattern
) -> tuple[float, DensityMatrix | None]:
    """Probability of a coincidence pattern and the surviving 4×4 polarization state."""
    _check_dim(rho_out, 16, "network output")
    x = _OUTPUT_PORTS["alice"].index(pat.alice_port)
    y = _OUTPUT_PORTS["bob"].index(pat.bob_port)
    # Axes: polA, portA, polB, portB for rows, then the same for columns.
    t = rho_out.entries.reshape((2,) * 8)
    block = t[:, x, :, y, :, x, :, y].reshape(4, 4)
    prob = float(np.trace(block).real)
    if prob < PROBABILITY_FLOOR:
        return max(prob, 0.0), None
    return prob, DensityMatrix(block / prob)


def detector_label(port: str) -> str:
    try:
        return _DETECTORS[port]
    except KeyError:
        raise OpticsError(f"{port!r} is not an output port") from None


def pattern_outcomes() -> dict[CoincidencePattern, str]:
    """Bell state each coincidence pattern heralds for the ideal hyperentangled input."""
    return {p: ("psi+" if p.is_cross else "phi+") for p in ALL_PATTERNS}
