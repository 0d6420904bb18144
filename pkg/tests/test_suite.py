"""Tests for the seeded property suite."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from bdepth.core.config import DepthConfig, SuiteSizes
from bdepth.core.errors import InvariantViolation
from bdepth.morse.circle import CircleMorseData
from bdepth.suite import generators as gen
from bdepth.suite.runner import (
    CHECK_BUDGETS,
    CHECKS,
    CheckResult,
    SuiteResults,
    SuiteRunner,
    instance_rng,
    run_suite,
)

# ---------------------------------------------------------------------------
# Fixtures & helpers
# ---------------------------------------------------------------------------

EXACT_CHECKS = ["circle", "periodic", "attainment", "extension", "shift", "quasi", "tensor", "quantum"]


@pytest.fixture
def small_config(monkeypatch: pytest.MonkeyPatch) -> DepthConfig:
    monkeypatch.delenv("BDEPTH_SEED", raising=False)
    sizes = SuiteSizes(
        circle_instances=20,
        periodic_instances=10,
        attainment_instances=10,
        shift_instances=5,
        quasi_instances=5,
        tensor_instances=4,
        tensor_max_dim=4,
        quantum_instances=5,
        signature_instances=2,
        embedding_instances=5,
        flow_instances=0,
        workers=1,
    )
    return DepthConfig(seed=5, suite=sizes)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


class TestGenerators:
    def test_circle_data_is_valid(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(20):
            data = gen.random_circle_data(rng, 6, 10)
            assert isinstance(data, CircleMorseData)
            assert 1 <= data.m <= 6

    def test_instance_streams_are_reproducible(self) -> None:
        a = instance_rng(3, "circle", 7).integers(0, 10**9)
        b = instance_rng(3, "circle", 7).integers(0, 10**9)
        c = instance_rng(3, "circle", 8).integers(0, 10**9)
        assert a == b
        assert a != c

    def test_extension_shares_attainment_stream(self) -> None:
        assert CHECKS["extension"][2] == CHECKS["attainment"][2]

    @pytest.mark.parametrize("seed", range(5))
    def test_lattice_step_has_small_entries(self, seed: int) -> None:
        step, depth = gen.random_lattice_step(np.random.default_rng(seed))
        assert 1 <= step.source.dim <= 3 and 1 <= step.target.dim <= 4
        assert depth >= 0
        assert all(level.denominator == 1 for level in step.source.levels + step.target.levels)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


class TestSuiteRunner:
    def test_exact_checks_pass(self, small_config: DepthConfig) -> None:
        results = run_suite(small_config, EXACT_CHECKS)
        assert [c.name for c in results.checks] == EXACT_CHECKS
        assert results.passed, results.to_dict()
        assert results.checks[0].instances == 20

    def test_numerical_checks_pass(self, small_config: DepthConfig) -> None:
        results = run_suite(small_config, ["signature", "embedding"])
        assert results.passed, results.to_dict()

    def test_checks_run_in_fixed_order(self, small_config: DepthConfig) -> None:
        results = SuiteRunner(small_config).run(["periodic", "circle"])
        assert [c.name for c in results.checks] == ["circle", "periodic"]

    def test_unknown_check(self, small_config: DepthConfig) -> None:
        with pytest.raises(ValueError):
            run_suite(small_config, ["circle", "nope"])

    def test_same_seed_same_bytes(self, small_config: DepthConfig, tmp_path: Path) -> None:
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        run_suite(small_config, ["circle", "attainment"]).save(first)
        run_suite(small_config, ["circle", "attainment"]).save(second)
        assert first.read_bytes() == second.read_bytes()

    def test_single_check_sees_same_instances(self, small_config: DepthConfig) -> None:
        runner = SuiteRunner(small_config)
        alone = runner.run(["tensor"]).to_dict()["checks"][0]
        together = runner.run(["circle", "tensor"]).to_dict()["checks"][1]
        assert alone == together

    def test_failures_are_recorded(self, small_config: DepthConfig,
                                   monkeypatch: pytest.MonkeyPatch) -> None:
        def broken(rng: np.random.Generator, config: DepthConfig) -> None:
            raise InvariantViolation("forced")

        monkeypatch.setitem(CHECKS, "circle", (broken, "circle_instances", "circle"))
        results = run_suite(small_config, ["circle"])
        assert not results.passed
        assert results.failure_count == 20
        assert results.checks[0].failures[0].message == "InvariantViolation: forced"

    def test_fan_out_matches_single_process(self, small_config: DepthConfig) -> None:
        single = run_suite(small_config, ["circle", "attainment"]).to_dict()
        small_config.suite.workers = 2
        assert run_suite(small_config, ["circle", "attainment"]).to_dict() == single


class TestTimings:
    def test_timings_stay_out_of_results(self, small_config: DepthConfig, tmp_path: Path) -> None:
        results = run_suite(small_config, ["circle", "periodic"])
        circle, periodic = results.checks
        assert circle.seconds > 0
        assert circle.budget == CHECK_BUDGETS["circle"]
        assert periodic.budget is None and periodic.within_budget
        assert "seconds" not in results.to_dict()["checks"][0]
        results.save_timings(tmp_path / "timings.json")
        timings = json.loads((tmp_path / "timings.json").read_text())
        assert set(timings) == {"circle", "periodic"}
        assert timings["circle"]["budget"] == 10.0

    def test_budget_flag(self) -> None:
        assert CheckResult("circle", 1, seconds=12.0, budget=10.0).within_budget is False
        assert CheckResult("circle", 1, seconds=3.0, budget=10.0).within_budget

    @pytest.mark.parametrize("name", ["circle", "signature"])
    def test_default_sizes_meet_budget(self, name: str, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("BDEPTH_SEED", raising=False)
        config = DepthConfig(suite=SuiteSizes(workers=1))
        result = SuiteRunner(config).run_check(name)
        assert result.passed
        assert result.seconds < CHECK_BUDGETS[name]


class TestSuiteResults:
    def test_save_and_load(self, small_config: DepthConfig, tmp_path: Path) -> None:
        results = run_suite(small_config, ["periodic"])
        path = tmp_path / "suite.json"
        results.save(path)
        assert path.read_text().endswith("}\n")
        assert SuiteResults.load(path).to_dict() == results.to_dict()
