"""Parameter sweeps of the one-step protocol over a scenario."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from depp.core.config import ScenarioConfig
from depp.core.diag import debug
from depp.noise.channels import BellDiagonalParams, NoiseModelError, ProductDiagonalParams, SourceConfig
from depp.optics.network import ALL_PATTERNS, OpticalNetwork
from depp.protocols.depp import RunResult, one_step_depp
from depp.protocols.runner import polarization_state, spatial_state

__all__ = ["SweepError", "SweepPoint", "sweepable_params", "point_config", "run_sweep", "sweep_rows"]

MIN_STEPS = 2

_BELL_KEYS = ("F", "F1", "F2", "F3")
_PRODUCT_KEYS = ("alpha", "beta", "gamma", "delta")
_PAULI_KEYS = ("px", "py", "pz")


class SweepError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SweepPoint:
    param: str
    value: float
    result: RunResult

    def row(self) -> list[object]:
        probs = self.result.probabilities()
        return [
            self.param,
            self.value,
            self.result.acceptance_probability,
            self.result.mean_corrected_fidelity,
            *(probs[p] for p in ALL_PATTERNS),
        ]


def sweepable_params(cfg: ScenarioConfig) -> list[str]:
    keys = ["source.r", "source.theta", "noise.spatial.dephasing"]
    model_keys = {"bell_diagonal": _BELL_KEYS, "product": _PRODUCT_KEYS, "pauli": _PAULI_KEYS}
    keys += [f"noise.polarization.{k}" for k in model_keys.get(cfg.noise.model, ())]
    return keys


def _rescaled(weights: dict[str, float], key: str, value: float) -> list[float]:
    """Set one simplex weight and rescale the others so the sum stays 1."""
    if not 0.0 <= value <= 1.0:
        raise SweepError(f"{key} must lie in [0, 1], got {value!r}")
    others = {k: v for k, v in weights.items() if k != key}
    rest = sum(others.values())
    remaining = 1.0 - value
    out = {}
    for k, v in others.items():
        out[k] = remaining * (v / rest if rest > 0.0 else 1.0 / len(others))
    out[key] = value
    return [out[k] for k in weights]


def point_config(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    """Scenario with `param` set to `value`."""
    if param not in sweepable_params(cfg):
        raise SweepError(
            f"unknown sweep parameter {param!r}; choose one of {', '.join(sweepable_params(cfg))}"
        )
    key = param.rpartition(".")[2]
    try:
        if param == "source.r":
            return replace(cfg, source=SourceConfig(r=value, theta=cfg.source.theta))
        if param == "source.theta":
            return replace(cfg, source=SourceConfig(r=cfg.source.r, theta=value))
        if param == "noise.spatial.dephasing":
            if not 0.0 <= value <= 1.0:
                raise SweepError(f"dephasing must lie in [0, 1], got {value!r}")
            return replace(cfg, spatial_dephasing=value)
        noise = cfg.noise
        if noise.bell is not None:
            weights = dict(zip(_BELL_KEYS, noise.bell.as_tuple()))
            bell = BellDiagonalParams(*_rescaled(weights, key, value))
            return replace(cfg, noise=replace(noise, bell=bell))
        if noise.product is not None:
            weights = dict(zip(_PRODUCT_KEYS, noise.product.as_tuple()))
            product = ProductDiagonalParams(*_rescaled(weights, key, value))
            return replace(cfg, noise=replace(noise, product=product))
        if noise.pauli is not None:
            pauli = replace(noise.pauli, **{key: value})
            if not 0.0 <= value <= 1.0 or pauli.px + pauli.py + pauli.pz > 1.0 + 1e-12:
                raise SweepError(f"{param}={value!r} leaves the Pauli probabilities invalid")
            return replace(cfg, noise=replace(noise, pauli=pauli))
    except NoiseModelError as e:
        raise SweepError(f"{param}={value!r}: {e}") from e
    raise SweepError(f"cannot sweep {param!r} for model {cfg.noise.model}")


def _evaluate(cfg: ScenarioConfig, network: OpticalNetwork | None) -> RunResult:
    return one_step_depp(polarization_state(cfg), spatial_state(cfg), network=network)


def run_sweep(
    cfg: ScenarioConfig,
    param: str,
    start: float,
    stop: float,
    steps: int,
    *,
    network: OpticalNetwork | None = None,
    max_workers: int | None = None,
) -> list[SweepPoint]:
    """Evaluate the one-step protocol at `steps` evenly spaced values, in value order."""
    if steps < MIN_STEPS:
        raise SweepError(f"steps must be >= {MIN_STEPS}, got {steps}")
    values = [float(v) for v in np.linspace(start, stop, steps)]
    configs = [point_config(cfg, param, v) for v in values]
    debug(f"sweep {param} {start!r}..{stop!r} steps={steps}", scope="sweep")

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(lambda c: _evaluate(c, network), configs))
    return [SweepPoint(param, v, r) for v, r in zip(values, results)]


def sweep_rows(points: list[SweepPoint]) -> list[list[object]]:
    return [p.row() for p in points]
