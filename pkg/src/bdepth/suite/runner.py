"""Property-suite runner: seeded random instances checked against exact identities.

Each check draws its instances from its own seed stream so a check can be
rerun alone and still see the same instances, whether instances run in one
process or fan out over several. Serialized results carry no timings; two
runs with the same seed and sizes write identical bytes. Wall-clock times go
to a separate timings file and are compared against ``CHECK_BUDGETS``.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from bdepth.algebra.filtered import chains_equal
from bdepth.algebra.morphisms import extend_coefficients, quasiequivalence_audit
from bdepth.algebra.oracle import determinantal_depth, lattice_depth
from bdepth.algebra.quantum import dichotomy_audit
from bdepth.algebra.reduction import boundary_depth, depth_profile, depth_witness, step_depth
from bdepth.algebra.tensor import SignedComplex, verify_product_bounds
from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import BdepthError, InvariantViolation
from bdepth.core.novikov import ExponentGroup
from bdepth.lab.flow import BlockOperatorFamily, flow_audit
from bdepth.lab.scan import exceptional_set_scan
from bdepth.lab.spectral import projection_audit
from bdepth.morse.circle import beta_chain, beta_combinatorial, quadruple_max_fast
from bdepth.morse.sampled import BumpProfile, embedding_bounds
from bdepth.suite import generators as gen

logger = logging.getLogger(__name__)

# Smallest n-th singular value a constant family may show anywhere in its scan.
CONSTANT_FAMILY_FLOOR = 1e-3
# Generator bounds for the brute-force lattice comparison.
LATTICE_MAX_SOURCE = 3
LATTICE_MAX_TARGET = 4
# Wall-clock budgets in seconds for the default sizes.
CHECK_BUDGETS: dict[str, float] = {"circle": 10.0, "attainment": 60.0, "signature": 30.0}


@dataclass
class InstanceFailure:
    index: int
    message: str


@dataclass
class CheckResult:
    """Outcome of one check over all its instances.

    ``seconds`` is wall-clock time and stays out of ``SuiteResults.to_dict``.
    """

    name: str
    instances: int
    failures: list[InstanceFailure] = field(default_factory=list)
    seconds: float = 0.0
    budget: float | None = None

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.seconds < self.budget


@dataclass
class SuiteResults:
    """Collection of check results with serialization."""

    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failure_count(self) -> int:
        return sum(len(c.failures) for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "instances": c.instances,
                    "passed": c.passed,
                    "failures": [{"index": f.index, "message": f.message} for f in c.failures],
                }
                for c in self.checks
            ],
        }

    def timings(self) -> dict:
        return {
            c.name: {"seconds": round(c.seconds, 3), "budget": c.budget, "within_budget": c.within_budget}
            for c in self.checks
        }

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def save_timings(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.timings(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: Path) -> SuiteResults:
        data = json.loads(path.read_text())
        checks = [
            CheckResult(
                name=c["name"],
                instances=c["instances"],
                failures=[InstanceFailure(f["index"], f["message"]) for f in c["failures"]],
            )
            for c in data["checks"]
        ]
        return cls(seed=data["seed"], checks=checks)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantViolation(message)


def _expect_report(report: InvariantReport) -> None:
    _expect(report.passed, f"{report.check}: " + "; ".join(report.errors))


def _check_circle(rng: np.random.Generator, config: DepthConfig) -> None:
    sizes = config.suite
    data = gen.random_circle_data(rng, sizes.circle_max_m, sizes.circle_value_bound)
    chain, formula = beta_chain(data, config), beta_combinatorial(data)
    _expect(chain == formula, f"{data.values}: chain depth {chain} != quadruple formula {formula}")
    if data.m > 1:
        fast = quadruple_max_fast(data.maxima, data.minima)
        _expect(fast == formula, f"{data.values}: fast quadruple maximum {fast} != {formula}")


def _check_periodic(rng: np.random.Generator, config: DepthConfig) -> None:
    data = gen.random_periodic_data(rng, config.suite.periodic_max_m)
    beta = beta_chain(data, config)
    _expect(beta == data.osc, f"{data.values}: depth {beta} != oscillation {data.osc}")


def _check_attainment(rng: np.random.Generator, config: DepthConfig) -> None:
    sizes = config.suite
    step = gen.random_step(rng, sizes.attainment_max_dim, sizes.attainment_max_exponent)
    witness = depth_witness(step, config)
    depth = step_depth(step, config)
    oracle = determinantal_depth(step, config)
    _expect(witness.gap == depth == oracle,
            f"witness gap {witness.gap}, depth {depth}, determinantal {oracle} disagree")
    _expect(chains_equal(step.apply(witness.primitive), witness.boundary),
            "witness primitive does not map to its boundary")
    measured = step.source.level(witness.primitive) - step.target.level(witness.boundary)
    _expect(measured == depth, f"witness levels give gap {measured}, depth is {depth}")

    lattice_step, built = gen.random_lattice_step(rng, LATTICE_MAX_SOURCE, LATTICE_MAX_TARGET)
    engine = step_depth(lattice_step, config)
    lattice = lattice_depth(lattice_step)
    _expect(lattice == engine == built,
            f"lattice value {lattice}, depth {engine}, constructed depth {built} disagree")


def _check_extension(rng: np.random.Generator, config: DepthConfig) -> None:
    sizes = config.suite
    cx = gen.complex_from_step(
        gen.random_step(rng, sizes.attainment_max_dim, sizes.attainment_max_exponent)
    )
    depth = boundary_depth(cx, config)
    for denominator in (2, 4):
        group = ExponentGroup.integers(Fraction(1, denominator))
        extended = boundary_depth(extend_coefficients(cx, group), config)
        _expect(extended == depth, f"depth {depth} becomes {extended} over {group}")


def _check_shift(rng: np.random.Generator, config: DepthConfig) -> None:
    cx = gen.random_two_term_complex(rng, 4, 6)
    image, ingredients = gen.random_shift_isomorphism(rng, cx)
    before, after = depth_profile(cx, config), depth_profile(image, config)
    for k, value in before.items():
        target = ingredients["grading_map"][k]
        _expect(after[target] == value,
                f"grading {k} depth {value} becomes {after[target]} at {target} ({ingredients})")


def _check_quasi(rng: np.random.Generator, config: DepthConfig) -> None:
    cx = gen.random_two_term_complex(rng, 4, 6)
    quasiequivalence_audit(*gen.random_quasi_pair(rng, cx), config=config)


def _check_tensor(rng: np.random.Generator, config: DepthConfig) -> None:
    half = max(1, config.suite.tensor_max_dim // 2)
    left = SignedComplex.from_integer_grading(gen.random_two_term_complex(rng, half, 4))
    right = SignedComplex.from_integer_grading(gen.random_two_term_complex(rng, half, 4))
    verify_product_bounds(left, right, config)


def _check_quantum(rng: np.random.Generator, config: DepthConfig) -> None:
    q = gen.random_quantum_correction(rng, config.suite.quantum_max_dim)
    _expect_report(dichotomy_audit(q, config))


def _check_signature(rng: np.random.Generator, config: DepthConfig) -> None:
    b1, b2 = gen.random_block_pair(rng, config.suite.signature_max_n)
    _expect_report(projection_audit(b1, b2, config, points=config.suite.signature_grid))


def _check_flow(rng: np.random.Generator, config: DepthConfig) -> None:
    n = int(rng.integers(1, 3))
    fam = gen.random_family(rng, n)
    _expect_report(flow_audit(fam, float(rng.uniform(0.5, 1.5)), config))

    b1 = gen.random_symmetric(rng, n, float(rng.uniform(0.0, 1.0)))
    b2 = gen.random_symmetric(rng, n, float(rng.uniform(0.0, 1.0)))
    constant = BlockOperatorFamily.constant(b1, b2)
    eta0 = constant.end_norm()
    flat = exceptional_set_scan(constant, (eta0 + 0.5, eta0 + 3.0), config=config)
    _expect(not flat.candidates, f"constant family has candidates {flat.candidates}")
    _expect(flat.min_singular_value > CONSTANT_FAMILY_FLOOR,
            f"constant family reaches singular value {flat.min_singular_value:.3g}")

    eta_range = (fam.end_norm() + 0.25, fam.sup_norm() + 1.0)
    coarse = exceptional_set_scan(fam, eta_range, config=config)
    for eta in coarse.candidates:
        _expect(coarse.eta0 <= eta <= coarse.eta1,
                f"candidate {eta:.6g} outside [{coarse.eta0:.6g}, {coarse.eta1:.6g}]")
    fine = exceptional_set_scan(fam, eta_range, resolution=2 * config.resolution - 1, config=config)
    spacing = (eta_range[1] - eta_range[0]) / (config.resolution - 1)
    _expect(len(fine.candidates) == len(coarse.candidates)
            and all(abs(a - b) <= spacing for a, b in zip(coarse.candidates, fine.candidates)),
            f"candidates {coarse.candidates} change to {fine.candidates} when the grid doubles")


def _check_embedding(rng: np.random.Generator, config: DepthConfig) -> None:
    v, w = gen.random_sequence_pair(rng, config.suite.embedding_max_support)
    _expect_report(embedding_bounds(v, w, BumpProfile.tent()))


CheckFn = Callable[[np.random.Generator, DepthConfig], None]

# name -> (check, size field, seed stream); extension reuses the attainment instances
CHECKS: dict[str, tuple[CheckFn, str, str]] = {
    "circle": (_check_circle, "circle_instances", "circle"),
    "periodic": (_check_periodic, "periodic_instances", "periodic"),
    "attainment": (_check_attainment, "attainment_instances", "attainment"),
    "extension": (_check_extension, "attainment_instances", "attainment"),
    "shift": (_check_shift, "shift_instances", "shift"),
    "quasi": (_check_quasi, "quasi_instances", "quasi"),
    "tensor": (_check_tensor, "tensor_instances", "tensor"),
    "quantum": (_check_quantum, "quantum_instances", "quantum"),
    "signature": (_check_signature, "signature_instances", "signature"),
    "flow": (_check_flow, "flow_instances", "flow"),
    "embedding": (_check_embedding, "embedding_instances", "embedding"),
}

_STREAMS = list(dict.fromkeys(stream for _, _, stream in CHECKS.values()))


def instance_rng(seed: int, stream: str, index: int) -> np.random.Generator:
    """Generator for instance ``index`` of a seed stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAMS.index(stream), index)))


def _run_instance(name: str, index: int, config: DepthConfig) -> InstanceFailure | None:
    check, _, stream = CHECKS[name]
    try:
        check(instance_rng(config.seed, stream, index), config)
    except BdepthError as e:
        logger.debug("%s instance %d failed: %s", name, index, e)
        return InstanceFailure(index, f"{type(e).__name__}: {e}")
    return None


def resolve_workers(requested: int) -> int:
    """``requested`` processes, or one per CPU when it is 0."""
    return requested if requested > 0 else os.cpu_count() or 1


class SuiteRunner:
    """Run the randomized property checks."""

    def __init__(self, config: DepthConfig) -> None:
        self.config = config

    def run(self, checks: list[str] | None = None) -> SuiteResults:
        """Run the named checks (default: all) in their fixed order.

        Raises:
            ValueError: an unknown check name.
        """
        names = list(CHECKS) if checks is None else checks
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise ValueError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
        results = SuiteResults(seed=self.config.seed)
        for name in CHECKS:
            if name in names:
                results.checks.append(self.run_check(name))
        return results

    def run_check(self, name: str) -> CheckResult:
        """Run every instance of one check, fanned out over ``suite.workers`` processes.

        Failures are listed by instance index whatever the worker count.
        """
        _, size_field, _ = CHECKS[name]
        count = getattr(self.config.suite, size_field)
        workers = min(resolve_workers(self.config.suite.workers), count)
        logger.info("Running %s on %d instances (seed %d, %d workers)",
                    name, count, self.config.seed, max(workers, 1))
        result = CheckResult(name=name, instances=count, budget=CHECK_BUDGETS.get(name))
        started = time.perf_counter()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_run_instance, [name] * count, range(count),
                                         [self.config] * count, chunksize=max(1, count // (4 * workers))))
        else:
            outcomes = [_run_instance(name, index, self.config) for index in range(count)]
        result.seconds = time.perf_counter() - started
        result.failures = [f for f in outcomes if f is not None]
        if result.failures:
            logger.warning("%s: %d of %d instances failed", name, len(result.failures), count)
        if not result.within_budget:
            logger.warning("%s took %.1f s, over its %.0f s budget", name, result.seconds, result.budget)
        else:
            logger.info("%s finished in %.2f s", name, result.seconds)
        return result


def run_suite(config: DepthConfig, checks: list[str] | None = None) -> SuiteResults:
    return SuiteRunner(config).run(checks)
