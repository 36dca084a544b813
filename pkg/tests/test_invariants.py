from __future__ import annotations

import pytest

from depp.optics.network import OpticalNetwork
from depp.verify.invariants import CHECKS, perturbed_network, run_suite


class TestSuite:
    def test_reference_network_passes(self) -> None:
        results = run_suite()
        failed = [(r.name, r.detail) for r in results if not r.passed]
        assert failed == []
        assert len(results) == len(CHECKS) >= 10

    def test_names_unique(self) -> None:
        names = [r.name for r in run_suite()]
        assert len(names) == len(set(names))

    def test_perturbed_network_breaks_branch_orthogonality(self) -> None:
        results = {r.name: r for r in run_suite(perturbed_network())}
        assert not results["branch-orthogonality"].passed
        assert results["branch-orthogonality"].detail
        assert results["bennett-fixed-points"].passed

    def test_perturbed_maps_differ(self) -> None:
        net = perturbed_network()
        assert not (net.alice_map == OpticalNetwork.pbs_hwp().alice_map).all()

    @pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__)
    def test_each_check_individually(self, check) -> None:
        assert check(OpticalNetwork.pbs_hwp()).passed
