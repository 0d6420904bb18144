"""Quantum corrections of a rational complex and the depth/homology dichotomy.

A correction deforms a differential ``d0`` with rational entries by terms of
valuation at least ``gaps[k]`` on the step into grading ``k``. Either the
deformation is invisible (both adjacent depths vanish and homology keeps its
dimension) or some adjacent depth reaches the gap and homology drops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from bdepth.algebra.filtered import Chain, FilteredComplex, chain_sub, chain_with_group
from bdepth.algebra.reduction import homology_rank, reduce
from bdepth.audit.report import InvariantReport
from bdepth.core.config import DepthConfig
from bdepth.core.errors import GapViolated, InvariantViolation
from bdepth.core.novikov import INF, ExtRational, as_fraction, format_ext

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuantumCorrection:
    """A deformation of ``base`` with a declared gap per grading.

    ``base`` has a trivial exponent group, constant entries and all levels 0;
    ``deformed`` has the same generators in the same gradings, all levels 0,
    over the exponent group the gaps live in. ``gaps[k]`` bounds the
    deformation of the step from ``successor(k)`` into ``k``.
    """

    base: FilteredComplex
    deformed: FilteredComplex
    gaps: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        base, deformed = self.base, self.deformed
        if not base.group.is_trivial:
            raise ValueError(f"base complex must have rational entries, got group {base.group}")
        if base.grading.labels != deformed.grading.labels or any(
            base.grading.successor(k) != deformed.grading.successor(k) for k in base.grading.labels
        ):
            raise ValueError("base and deformed complexes must share the grading")
        for k in base.grading.labels:
            if base.pieces[k].basis != deformed.pieces[k].basis:
                raise ValueError(f"grading {k!r} has different generators in base and deformation")
            for cx, name in ((base, "base"), (deformed, "deformed")):
                if any(lvl != 0 for lvl in cx.pieces[k].levels):
                    raise ValueError(f"{name} complex must have all levels 0 (grading {k!r})")
        for src, col in base.differential.items():
            for tgt, coeff in col.items():
                if any(e != 0 for e, _ in coeff.terms):
                    raise ValueError(f"base entry ({tgt}, {src}) is not a rational constant")
        gaps = {str(k): as_fraction(v) for k, v in self.gaps.items()}
        for k, mu in gaps.items():
            if k not in deformed.grading:
                raise ValueError(f"gap declared for unknown grading {k!r}")
            if mu <= 0 or not deformed.group.contains(mu):
                raise ValueError(f"gap {mu} for grading {k!r} must be positive and in {deformed.group}")
        object.__setattr__(self, "gaps", gaps)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.deformed.grading.labels

    def gap(self, label: str) -> ExtRational:
        """Declared gap of the step into ``label``, else the tightest one the deformation allows.

        Raises:
            GapViolated: nothing is declared and some deformation entry has
                valuation ``<= 0``, so no positive gap exists.
        """
        if label in self.gaps:
            return self.gaps[label]
        nu, entry = self._tightest_entry(label)
        if nu <= 0:
            raise GapViolated(
                f"deformation entry {entry} into {label!r} has valuation {nu}; gaps must be positive",
                entry=entry,
                required=Fraction(0),
                actual=nu,
            )
        return nu

    def tightest_gap(self, label: str) -> ExtRational:
        """Least valuation of a deformation entry on the step into ``label`` (inf if none)."""
        return self._tightest_entry(label)[0]

    def _tightest_entry(self, label: str) -> tuple[ExtRational, tuple[str, str] | None]:
        best: ExtRational = INF
        entry = None
        for src in self.deformed.pieces[self.deformed.grading.successor(label)].basis:
            for tgt, coeff in self.deformation(src).items():
                if coeff.terms[0][0] < best:
                    best, entry = coeff.terms[0][0], (tgt, src)
        return best, entry

    def deformation(self, name: str) -> Chain:
        """``(d - d0) name`` as a chain over the deformed complex's group."""
        group = self.deformed.group
        return chain_sub(
            self.deformed.differential.get(name, {}),
            chain_with_group(self.base.differential.get(name, {}), group),
        )


@dataclass
class DichotomyVerdict:
    """Which alternative holds at one grading, with the numbers that decide it."""

    label: str
    alternative: str  # "i" (invisible) or "ii" (homology drops)
    depth: Fraction
    depth_below: Fraction
    gap: ExtRational
    gap_below: ExtRational
    homology: int
    base_homology: int
    ranks: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "alternative": self.alternative,
            "b_k": str(self.depth),
            "b_k_minus_1": str(self.depth_below),
            "mu_k": format_ext(self.gap),
            "mu_k_minus_1": format_ext(self.gap_below),
            "dim_H": self.homology,
            "dim_H_base": self.base_homology,
            "rank_d0": self.ranks[0],
            "rank_d": self.ranks[1],
        }


def validate_gap(q: QuantumCorrection) -> InvariantReport:
    """Check every deformation entry against the declared gap.

    The report records, per grading, the tightest gap the deformation allows
    (the least valuation of its entries, ``inf`` when the step is undeformed).

    Raises:
        GapViolated: the first entry whose valuation is below its grading's gap.
    """
    report = InvariantReport(check="quantum gap")
    grading = q.deformed.grading
    for k in q.labels:
        required = q.gap(k)
        for src in q.deformed.pieces[grading.successor(k)].basis:
            for tgt, coeff in q.deformation(src).items():
                nu = coeff.terms[0][0]
                if nu < required:
                    raise GapViolated(
                        f"deformation entry ({tgt}, {src}) has valuation {nu} below gap "
                        f"{format_ext(required)}",
                        entry=(tgt, src),
                        required=required,
                        actual=nu,
                    )
        report.record(f"tightest gap[{k}]", q.tightest_gap(k), threshold=required)
    return report


def rank_compare(
    q: QuantumCorrection, label: str, config: DepthConfig | None = None
) -> tuple[int, int]:
    """Ranks of ``d0`` and ``d`` on the step into ``label``.

    Raises InvariantViolation when the deformed rank is smaller, when a rank
    jump comes with a depth below the gap, or when equal ranks leave a
    nonzero depth.
    """
    base_rank = reduce(q.base.step_into(label), config, method="field").rank
    cert = reduce(q.deformed.step_into(label), config)
    if base_rank > cert.rank:
        raise InvariantViolation(
            f"rank of d0 ({base_rank}) exceeds rank of d ({cert.rank}) into {label!r}", label
        )
    if base_rank < cert.rank and cert.max_gap < q.gap(label):
        raise InvariantViolation(
            f"rank jumps into {label!r} but depth {cert.max_gap} is below the gap", label
        )
    if base_rank == cert.rank and cert.max_gap != 0:
        raise InvariantViolation(
            f"ranks agree into {label!r} but depth is {cert.max_gap}", label
        )
    return base_rank, cert.rank


def homology_ranks(
    q: QuantumCorrection, label: str, config: DepthConfig | None = None
) -> tuple[int, int]:
    """``(dim H_k(C), dim H_k(base))``; the first never exceeds the second."""
    return homology_rank(q.deformed, label, config), homology_rank(q.base, label, config)


def classify(q: QuantumCorrection, label: str, config: DepthConfig | None = None) -> DichotomyVerdict:
    """Decide which alternative of the dichotomy holds at grading ``label``.

    Raises:
        InvariantViolation: neither alternative holds (a broken correction).
    """
    below = q.deformed.grading.predecessor(label)
    depth = reduce(q.deformed.step_into(label), config).max_gap
    depth_below = reduce(q.deformed.step_into(below), config).max_gap
    homology, base_homology = homology_ranks(q, label, config)
    ranks = rank_compare(q, label, config)
    verdict = DichotomyVerdict(
        label=label,
        alternative="",
        depth=depth,
        depth_below=depth_below,
        gap=q.gap(label),
        gap_below=q.gap(below),
        homology=homology,
        base_homology=base_homology,
        ranks=ranks,
    )
    if depth == 0 and depth_below == 0 and homology == base_homology:
        verdict.alternative = "i"
    elif (depth >= verdict.gap or depth_below >= verdict.gap_below) and homology < base_homology:
        verdict.alternative = "ii"
    else:
        raise InvariantViolation(
            f"neither alternative holds at grading {label!r}", verdict.to_dict()
        )
    logger.debug("grading %s: alternative %s", label, verdict.alternative)
    return verdict


def dichotomy_audit(q: QuantumCorrection, config: DepthConfig | None = None) -> InvariantReport:
    """Gap validation plus one verdict per grading."""
    report = InvariantReport(check="quantum dichotomy")
    report.merge(validate_gap(q))
    for k in q.labels:
        verdict = classify(q, k, config)
        report.record(f"alternative[{k}]", verdict.alternative)
        report.record(f"verdict[{k}]", verdict.to_dict())
    return report
