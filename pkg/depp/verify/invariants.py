"""Built-in invariant suite behind `depp validate`.

Every check takes the optical network under test and returns a CheckResult.
Checks that do not involve the network ignore it. Random inputs come from a
fixed numpy seed, so the suite is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from depp.core.config import format_scenario, parse_scenario
from depp.core.qcore import (
    BELL_KINDS,
    EXACT_TOL,
    PAULI_X,
    VALID_TOL,
    DensityMatrix,
    StateVector,
    apply_channel,
    basis_state,
    bell_state,
    fidelity_pure,
    is_unitary,
    partial_trace,
    tensor_product,
)
from depp.noise.channels import (
    BellDiagonalParams,
    ProductDiagonalParams,
    SourceConfig,
    bell_weights,
    lift_channel,
    make_bell_diagonal,
    make_product_diagonal,
    make_spatial_state,
    pauli_channel,
    product_dephase,
    spatial_dephasing,
)
from depp.optics.network import (
    ALL_PATTERNS,
    CoincidencePattern,
    OpticalNetwork,
    embed,
    embed_vector,
    pattern_outcomes,
    two_photon_unitary,
)
from depp.protocols.compare import compare_protocols, simon_pan_model
from depp.protocols.depp import one_step_depp, one_step_depp_decomposed
from depp.protocols.recurrence import bennett_recurrence, bennett_step_exact
from depp.sampling.montecarlo import ZERO_SEED_REPLACEMENT, RngState, rng_next

__all__ = [
    "CheckResult",
    "Check",
    "CHECKS",
    "run_suite",
    "perturbed_network",
    "random_density_matrix",
    "random_bell_params",
    "random_product_params",
    "SUITE_SEED",
]

SUITE_SEED = 20240517
SEED1_FIRST_OUTPUT = 0x47E4CE4B896CDD1D


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


Check = Callable[[OpticalNetwork], CheckResult]


class _Failed(Exception):
    pass


def _expect(cond: bool, detail: str) -> None:
    if not cond:
        raise _Failed(detail)


# ----------------------------------------------------------------------
# Random inputs
# ----------------------------------------------------------------------


def random_density_matrix(rng: np.random.Generator, dim: int = 4) -> DensityMatrix:
    """Ginibre-ensemble mixed state."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_bell_params(rng: np.random.Generator) -> BellDiagonalParams:
    w = rng.dirichlet(np.ones(4))
    w[3] = 1.0 - math.fsum(w[:3])
    return BellDiagonalParams(*(float(max(v, 0.0)) for v in w))


def random_product_params(rng: np.random.Generator) -> ProductDiagonalParams:
    w = rng.dirichlet(np.ones(4))
    w[3] = 1.0 - math.fsum(w[:3])
    return ProductDiagonalParams(*(float(max(v, 0.0)) for v in w))


def _mixed_inputs(rng: np.random.Generator) -> list[DensityMatrix]:
    out = [make_bell_diagonal(random_bell_params(rng)) for _ in range(25)]
    out += [make_product_diagonal(random_product_params(rng)) for _ in range(25)]
    out += [random_density_matrix(rng) for _ in range(50)]
    return out


def _ideal_spatial() -> StateVector:
    return make_spatial_state(SourceConfig())


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------


def _side_maps_unitary(net: OpticalNetwork) -> None:
    _expect(is_unitary(net.alice_map), "Alice's side map is not unitary")
    _expect(is_unitary(net.bob_map), "Bob's side map is not unitary")
    _expect(is_unitary(two_photon_unitary(net)), "joint map is not unitary")


def _joint_map_permutation(net: OpticalNetwork) -> None:
    u = np.asarray(two_photon_unitary(net))
    _expect(bool(np.all(np.isclose(u, 0) | np.isclose(u, 1))), "joint map has non-0/1 entries")
    _expect(bool(np.all(np.isclose(np.abs(u).sum(axis=0), 1))), "joint map is not a permutation")


def _bell_basis_orthonormal(_: OpticalNetwork) -> None:
    for i, a in enumerate(BELL_KINDS):
        for j, b in enumerate(BELL_KINDS):
            ip = bell_state(a).inner(bell_state(b))
            want = 1.0 if i == j else 0.0
            _expect(abs(ip - want) <= EXACT_TOL, f"<{a}|{b}> = {ip!r}")


def _channels_trace_preserving(_: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED)
    channels = [spatial_dephasing(lam) for lam in (0.0, 0.3, 1.0)]
    for _i in range(5):
        px, py, pz, _rest = rng.dirichlet(np.ones(4))
        channels.append(pauli_channel(px, py, pz, target="A"))
        channels.append(pauli_channel(px, py, pz, target="B"))
    channels += [lift_channel(ch, "polarization") for ch in channels[3:5]]
    channels.append(lift_channel(spatial_dephasing(0.5), "spatial"))
    for ch in channels:
        total = sum(k.conj().T @ k for k in ch.operators)
        err = float(np.max(np.abs(total - np.eye(ch.dim))))
        _expect(err <= VALID_TOL, f"sum K†K deviates from identity by {err!r}")


def _partial_trace_of_product(_: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED)
    for _i in range(10):
        a, b = random_density_matrix(rng, 2), random_density_matrix(rng, 4)
        ab = tensor_product(a, b)
        _expect(partial_trace(ab, [2, 4], [0]).allclose(a), "tracing out B does not return A")
        _expect(partial_trace(ab, [2, 4], [1]).allclose(b), "tracing out A does not return B")


def _pattern_completeness(net: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED)
    spatial = _ideal_spatial()
    for rho in _mixed_inputs(rng):
        acc = one_step_depp(rho, spatial, network=net).acceptance_probability
        _expect(abs(acc - 1.0) <= EXACT_TOL, f"acceptance probability {acc!r} != 1")


def _branch_orthogonality(net: OpticalNetwork) -> None:
    u = np.asarray(two_photon_unitary(net))
    branches = (basis_state(4, 0), basis_state(4, 3))  # |a1 b1>, |a2 b2>
    for idx in range(4):
        pol = basis_state(4, idx)
        outs = [u @ embed_vector(pol, s).amplitudes for s in branches]
        sites = [int(np.argmax(np.abs(o))) for o in outs]
        # Local index per side is 2*pol + port; port is the low bit.
        ports = [((s // 4) % 2, (s % 4) % 2) for s in sites]
        label = ("HH", "HV", "VH", "VV")[idx]
        _expect(
            ports[0] == ports[1],
            f"input {label}: spatial branches exit through different ports {ports}",
        )
        overlap = abs(complex(np.vdot(outs[0], outs[1])))
        _expect(overlap <= EXACT_TOL, f"input {label}: branch overlap {overlap!r}")


def _phase_flip_invisibility(net: OpticalNetwork) -> None:
    spatial = _ideal_spatial()
    for a, b in (("phi+", "phi-"), ("psi+", "psi-")):
        ra = one_step_depp(bell_state(a), spatial, network=net)
        rb = one_step_depp(bell_state(b), spatial, network=net)
        _expect(ra.allclose(rb), f"{a} and {b} give different results")


def _deterministic_purification(net: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED + 1)
    spatial = _ideal_spatial()
    for rho in _mixed_inputs(rng):
        rr = one_step_depp(rho, spatial, network=net)
        _expect(abs(rr.acceptance_probability - 1.0) <= EXACT_TOL, "acceptance below 1")
        for rec in rr.records:
            if rec.accepted:
                f = rec.corrected_fidelity or 0.0
                _expect(abs(f - 1.0) <= EXACT_TOL, f"pattern {rec.pattern.key}: fidelity {f!r}")


def _pattern_statistics(net: OpticalNetwork) -> None:
    spatial = _ideal_spatial()
    outcomes = pattern_outcomes()
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    points = [
        (F, F1, F2, 1.0 - F - F1 - F2)
        for F in grid
        for F1 in grid
        for F2 in grid
        if F + F1 + F2 <= 1.0
    ][:20]
    for F, F1, F2, F3 in points:
        rr = one_step_depp(make_bell_diagonal(BellDiagonalParams(F, F1, F2, F3)), spatial, network=net)
        same, cross = (F + F1) / 2, (F2 + F3) / 2
        for rec in rr.records:
            want = cross if rec.pattern.is_cross else same
            _expect(
                abs(rec.probability - want) <= EXACT_TOL,
                f"P{rec.detector_pair} = {rec.probability!r}, expected {want!r}",
            )
            if rec.raw_state is not None:
                f = fidelity_pure(rec.raw_state, bell_state(outcomes[rec.pattern]))  # type: ignore[arg-type]
                _expect(abs(f - 1.0) <= EXACT_TOL, f"pattern {rec.pattern.key} is not {outcomes[rec.pattern]}")


def _decomposition_equivalence(net: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED + 2)
    spatial = _ideal_spatial()
    for _i in range(50):
        rho = random_density_matrix(rng)
        direct = one_step_depp(rho, spatial, network=net)
        mixed = one_step_depp_decomposed(rho, spatial, network=net)
        _expect(direct.allclose(mixed), "direct run differs from the product-basis mixture")


def _source_imperfection(net: OpticalNetwork) -> None:
    hh = basis_state(4, 0)
    cd = CoincidencePattern("c", "d")
    for r in (0.0, 0.5, 1.0, 2.0):
        for theta in (0.0, math.pi / 2, math.pi):
            rr = one_step_depp(hh, make_spatial_state(SourceConfig(r, theta)), network=net)
            got = rr.record(cd).corrected_fidelity
            want = abs(1 + r * complex(math.cos(theta), math.sin(theta))) ** 2 / (2 * (1 + r * r))
            _expect(
                got is not None and abs(got - want) <= EXACT_TOL,
                f"r={r} theta={theta!r}: fidelity {got!r}, expected {want!r}",
            )


def _bennett_oracle_agreement(_: OpticalNetwork) -> None:
    for i in range(11):
        F = i / 10
        exact, _p = bennett_step_exact(F)
        closed = bennett_recurrence(F)
        _expect(abs(exact - closed) <= EXACT_TOL, f"F={F}: closed form {closed!r} vs oracle {exact!r}")


def _bennett_fixed_points(_: OpticalNetwork) -> None:
    for F in (0.25, 0.5, 1.0):
        _expect(abs(bennett_recurrence(F) - F) <= EXACT_TOL, f"{F} is not a fixed point")
    _expect(abs(bennett_recurrence(0.7) - 25 / 34) <= EXACT_TOL, "F=0.7 does not map to 25/34")


def _bennett_monotone(_: OpticalNetwork) -> None:
    for i in range(1, 51):
        F = 0.5 + 0.5 * i / 51
        _expect(bennett_recurrence(F) > F, f"no improvement at F={F!r}")


def _pauli_bell_mapping(_: OpticalNetwork) -> None:
    phi = bell_state("phi+").to_density()
    for (px, py, pz), kind in (((1, 0, 0), "psi+"), ((0, 1, 0), "psi-"), ((0, 0, 1), "phi-")):
        w = bell_weights(apply_channel(phi, pauli_channel(px, py, pz)))
        got = dict(zip(BELL_KINDS, w.as_tuple()))[kind]
        _expect(abs(got - 1.0) <= EXACT_TOL, f"Pauli ({px},{py},{pz}) does not map phi+ to {kind}")


def _product_dephase_idempotent(_: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED + 3)
    for _i in range(10):
        _, once = product_dephase(random_density_matrix(rng))
        _, twice = product_dephase(once)
        _expect(once.allclose(twice), "dephasing twice differs from dephasing once")


def _simon_pan_efficiency(_: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED + 4)
    for _i in range(10):
        sp = simon_pan_model(random_bell_params(rng))
        _expect(sp.efficiency == 0.5, f"efficiency {sp.efficiency!r}")
        _expect(sp.params.F2 == 0.0 and sp.params.F3 == 0.0, "psi sector not emptied")
    cmp = compare_protocols(BellDiagonalParams.werner(0.7), 1.0)
    _expect(not cmp.bennett.reachable, "recurrence marked able to reach fidelity 1")


def _rng_reproducibility(_: OpticalNetwork) -> None:
    _, first = rng_next(RngState.from_seed(1))
    _expect(first == SEED1_FIRST_OUTPUT, f"seed 1 first output {first:#018x}")
    _expect(RngState.from_seed(0).state == ZERO_SEED_REPLACEMENT, "seed 0 is not remapped")
    a, b = RngState.from_seed(99), RngState.from_seed(99)
    for _i in range(100):
        a, x = rng_next(a)
        b, y = rng_next(b)
        _expect(x == y, "identical seeds diverged")


_CANONICAL_SAMPLES = (
    "[noise.polarization]\nmodel = bell_diagonal\nF = 0.7\nF1 = 0.1\nF2 = 0.1\nF3 = 0.1\n"
    "[protocol]\nname = compare\ntarget_fidelity = 0.99\n",
    "[source]\nr = 0.5\ntheta = 7.0\n[noise.polarization]\nmodel = pauli\npx = 0.1\ntarget = A\n"
    "[noise.spatial]\ndephasing = 0.2\n[protocol]\nname = bennett\nrounds = 3\n"
    '[run]\nshots = 1000\nseed = -5\noutput = "out dir/result.json"\n',
)


def _scenario_canonical(_: OpticalNetwork) -> None:
    for text in _CANONICAL_SAMPLES:
        cfg = parse_scenario(text)
        canon = format_scenario(cfg)
        _expect(parse_scenario(canon) == cfg, "canonical text parses to a different scenario")
        _expect(format_scenario(parse_scenario(canon)) == canon, "canonical text is not stable")


def _channel_lift(_: OpticalNetwork) -> None:
    rng = np.random.default_rng(SUITE_SEED + 5)
    rho_p, rho_s = random_density_matrix(rng), random_density_matrix(rng)
    pol = pauli_channel(0.1, 0.2, 0.3, target="A")
    spa = spatial_dephasing(0.4)
    joint = embed(rho_p, rho_s)
    _expect(
        apply_channel(joint, lift_channel(pol, "polarization")).allclose(
            embed(apply_channel(rho_p, pol), rho_s)
        ),
        "lifted polarization channel does not commute with embed",
    )
    _expect(
        apply_channel(joint, lift_channel(spa, "spatial")).allclose(
            embed(rho_p, apply_channel(rho_s, spa))
        ),
        "lifted spatial channel does not commute with embed",
    )


def _named(name: str, body: Callable[[OpticalNetwork], None]) -> Check:
    def check(net: OpticalNetwork) -> CheckResult:
        try:
            body(net)
        except _Failed as e:
            return CheckResult(name, False, str(e))
        except (ValueError, ArithmeticError) as e:
            return CheckResult(name, False, f"{type(e).__name__}: {e}")
        return CheckResult(name, True)

    check.__name__ = name
    return check


CHECKS: tuple[Check, ...] = (
    _named("side-maps-unitary", _side_maps_unitary),
    _named("joint-map-permutation", _joint_map_permutation),
    _named("bell-basis-orthonormal", _bell_basis_orthonormal),
    _named("channels-trace-preserving", _channels_trace_preserving),
    _named("partial-trace-of-product", _partial_trace_of_product),
    _named("channel-lift", _channel_lift),
    _named("branch-orthogonality", _branch_orthogonality),
    _named("pattern-completeness", _pattern_completeness),
    _named("deterministic-purification", _deterministic_purification),
    _named("pattern-statistics", _pattern_statistics),
    _named("phase-flip-invisibility", _phase_flip_invisibility),
    _named("decomposition-equivalence", _decomposition_equivalence),
    _named("source-imperfection", _source_imperfection),
    _named("bennett-oracle-agreement", _bennett_oracle_agreement),
    _named("bennett-fixed-points", _bennett_fixed_points),
    _named("bennett-monotone", _bennett_monotone),
    _named("pauli-bell-mapping", _pauli_bell_mapping),
    _named("product-dephase-idempotent", _product_dephase_idempotent),
    _named("simon-pan-efficiency", _simon_pan_efficiency),
    _named("rng-reproducibility", _rng_reproducibility),
    _named("scenario-canonical", _scenario_canonical),
)


def perturbed_network() -> OpticalNetwork:
    """PBS/HWP network with rows (V,c) and (V,e) of Alice's map swapped.

    Alice then routes (V,a1) to (V,c) and (H,a2) to (V,e).
    """
    base = OpticalNetwork.pbs_hwp()
    return OpticalNetwork.from_maps(np.asarray(base.alice_map)[[0, 3, 2, 1]], base.bob_map)


def run_suite(network: OpticalNetwork | None = None) -> list[CheckResult]:
    net = network or OpticalNetwork.pbs_hwp()
    return [check(net) for check in CHECKS]
