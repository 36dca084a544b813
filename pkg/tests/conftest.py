from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from depp.core.qcore import DensityMatrix
from depp.noise.channels import make_bell_diagonal, make_product_diagonal
from depp.verify.invariants import (
    random_bell_params,
    random_density_matrix,
    random_product_params,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def random_state(rng):
    """Ginibre-ensemble mixed state factory: random_state(dim=4)."""

    def make(dim: int = 4) -> DensityMatrix:
        return random_density_matrix(rng, dim)

    return make


@pytest.fixture
def random_bell_diagonal(rng):
    def make() -> DensityMatrix:
        return make_bell_diagonal(random_bell_params(rng))

    return make


@pytest.fixture
def random_product_diagonal(rng):
    def make() -> DensityMatrix:
        return make_product_diagonal(random_product_params(rng))

    return make


@pytest.fixture
def write_scenario(tmp_path: Path):
    def write(text: str, name: str = "scenario.epp") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
