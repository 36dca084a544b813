"""Execute a parsed scenario: build the input states, run the protocol, optionally sample."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from depp.core.config import ScenarioConfig, load_matrix_file
from depp.core.diag import debug
from depp.core.qcore import DensityMatrix, apply_channel, bell_state, fidelity_pure
from depp.noise.channels import (
    bell_weights,
    make_bell_diagonal,
    make_product_diagonal,
    make_spatial_state,
    pauli_channel,
    spatial_dephasing,
)
from depp.optics.network import OpticalNetwork
from depp.protocols.compare import (
    ProtocolComparison,
    SimonPanResult,
    compare_protocols,
    simon_pan_model,
)
from depp.protocols.depp import RunResult, one_step_depp
from depp.protocols.recurrence import RecurrenceTrace, bennett_iterate
from depp.sampling.montecarlo import SampleReport, sample_patterns

__all__ = [
    "AnalyticResult",
    "ScenarioRun",
    "polarization_state",
    "spatial_state",
    "execute",
]

AnalyticResult = Union[RunResult, RecurrenceTrace, SimonPanResult, ProtocolComparison]


@dataclass(frozen=True, eq=False)
class ScenarioRun:
    config: ScenarioConfig
    polarization: DensityMatrix
    spatial: DensityMatrix
    analytic: AnalyticResult
    sampling: SampleReport | None = None

    @property
    def pattern_result(self) -> RunResult | None:
        """The RunResult behind this run, if the protocol produces one."""
        if isinstance(self.analytic, RunResult):
            return self.analytic
        if isinstance(self.analytic, ProtocolComparison):
            return self.analytic.depp
        return None


def polarization_state(cfg: ScenarioConfig) -> DensityMatrix:
    noise = cfg.noise
    if noise.bell is not None:
        return make_bell_diagonal(noise.bell)
    if noise.product is not None:
        return make_product_diagonal(noise.product)
    if noise.pauli is not None:
        ch = pauli_channel(noise.pauli.px, noise.pauli.py, noise.pauli.pz, noise.pauli.target)
        return apply_channel(bell_state("phi+").to_density(), ch)
    if noise.matrix_file is not None:
        return load_matrix_file(cfg.resolve(noise.matrix_file))
    raise ValueError(f"noise model {noise.model!r} has no parameters")


def spatial_state(cfg: ScenarioConfig) -> DensityMatrix:
    rho_s = make_spatial_state(cfg.source).to_density()
    if cfg.spatial_dephasing == 0.0:
        return rho_s
    return apply_channel(rho_s, spatial_dephasing(cfg.spatial_dephasing))


def _analytic(
    cfg: ScenarioConfig,
    rho_p: DensityMatrix,
    rho_s: DensityMatrix,
    network: OpticalNetwork | None,
) -> AnalyticResult:
    name = cfg.protocol.name
    if name == "one_step_depp":
        return one_step_depp(rho_p, rho_s, network=network)
    if name == "bennett":
        F = fidelity_pure(rho_p, bell_state("phi+"))
        return bennett_iterate(F, cfg.protocol.rounds or 0)
    if name == "simon_pan":
        return simon_pan_model(bell_weights(rho_p))
    if name == "compare":
        target = cfg.protocol.target_fidelity
        if target is None:
            raise ValueError("compare needs a target fidelity")
        return compare_protocols(
            bell_weights(rho_p), target, spatial=rho_s, rho_p=rho_p, network=network
        )
    raise ValueError(f"unknown protocol: {name!r}")


def execute(cfg: ScenarioConfig, *, network: OpticalNetwork | None = None) -> ScenarioRun:
    """Analytic run, plus pattern sampling when run.shots > 0.

    With shots == 0 the generator is never touched.
    """
    rho_p = polarization_state(cfg)
    rho_s = spatial_state(cfg)
    debug(f"protocol={cfg.protocol.name} model={cfg.noise.model}", scope="run")
    run = ScenarioRun(cfg, rho_p, rho_s, _analytic(cfg, rho_p, rho_s, network))

    rr = run.pattern_result
    if cfg.run.shots > 0 and rr is not None:
        report = sample_patterns(rr, cfg.run.shots, cfg.run.seed)
        return ScenarioRun(cfg, rho_p, rho_s, run.analytic, report)
    if cfg.run.shots > 0:
        debug(f"shots ignored for protocol {cfg.protocol.name}", scope="run")
    return run
