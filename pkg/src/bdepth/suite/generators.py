"""Seeded random instances for the property suite.

Every generator takes a ``numpy.random.Generator`` and returns a valid
instance; rejection sampling never loops without bound.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from bdepth.algebra.filtered import (
    Chain,
    FilteredComplex,
    FilteredMap,
    FilteredVectorSpace,
    GradingSet,
    LinearStep,
    chain_add,
    chain_scale,
)
from bdepth.algebra.morphisms import apply_shift_isomorphism, identity_between
from bdepth.algebra.quantum import QuantumCorrection
from bdepth.core.errors import InvariantViolation
from bdepth.core.novikov import ExponentGroup, NovikovElement
from bdepth.lab.flow import BlockOperatorFamily
from bdepth.morse.circle import CircleMorseData

INTEGERS = ExponentGroup.integers(1)
MAX_REJECTIONS = 50


def _int(rng: np.random.Generator, low: int, high: int) -> int:
    """Uniform integer in ``[low, high]``."""
    return int(rng.integers(low, high + 1))


def _nonzero(rng: np.random.Generator, bound: int = 3) -> int:
    value = _int(rng, 1, bound)
    return value if rng.random() < 0.5 else -value


# ---------------------------------------------------------------------------
# Circle Morse data
# ---------------------------------------------------------------------------


def _alternating_values(rng: np.random.Generator, m: int, bound: int) -> list[int]:
    maxima = [_int(rng, -bound + 1, bound) for _ in range(m)]
    values: list[int] = []
    for i in range(m):
        ceiling = min(maxima[i], maxima[(i + 1) % m]) - 1
        values.extend((maxima[i], _int(rng, -bound, ceiling)))
    return values


def random_circle_data(rng: np.random.Generator, max_m: int = 10, bound: int = 20) -> CircleMorseData:
    """Integer critical values in ``[-bound, bound]`` with ``m <= max_m`` maxima."""
    m = _int(rng, 1, max_m)
    return CircleMorseData.normalized(_alternating_values(rng, m, bound))


def random_periodic_data(rng: np.random.Generator, max_m: int = 6, bound: int = 20) -> CircleMorseData:
    """A pattern of one to three (max, min) pairs repeated ``m >= 2`` times."""
    m = _int(rng, 2, max(2, max_m))
    pattern = _alternating_values(rng, _int(rng, 1, 3), bound)
    return CircleMorseData.periodic(pattern, m)


# ---------------------------------------------------------------------------
# Filtered maps and two-term complexes
# ---------------------------------------------------------------------------


def _levels(rng: np.random.Generator, count: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(_int(rng, -4, 4), 2) for _ in range(count))


def _filtered_entry(rng: np.random.Generator, lowest: int, max_exponent: int) -> NovikovElement:
    """One or two integer-exponent terms, all at or above ``lowest``."""
    top = max(lowest, max_exponent)
    exponents = {_int(rng, lowest, min(top, lowest + 3))}
    if rng.random() < 0.3:
        exponents.add(_int(rng, lowest, top))
    return NovikovElement.from_terms([(e, _nonzero(rng)) for e in exponents], INTEGERS)


def _random_columns(rng: np.random.Generator, source: FilteredVectorSpace,
                    target: FilteredVectorSpace, max_exponent: int, density: float) -> dict[str, Chain]:
    columns: dict[str, Chain] = {}
    for s, s_level in zip(source.basis, source.levels):
        col: Chain = {}
        for t, t_level in zip(target.basis, target.levels):
            if rng.random() < density:
                col[t] = _filtered_entry(rng, math.ceil(t_level - s_level), max_exponent)
        if col:
            columns[s] = col
    return columns


def random_step(rng: np.random.Generator, max_dim: int = 6, max_exponent: int = 10) -> LinearStep:
    """A nonzero filtered map over ``Z*1`` with levels in half-integers.

    Entry ``(x, y)`` has every exponent at least ``level(x) - level(y)``, so
    the map never raises levels.
    """
    n_src, n_tgt = _int(rng, 1, max_dim), _int(rng, 1, max_dim)
    source = FilteredVectorSpace(tuple(f"y{i + 1}" for i in range(n_src)), _levels(rng, n_src), INTEGERS)
    target = FilteredVectorSpace(tuple(f"x{i + 1}" for i in range(n_tgt)), _levels(rng, n_tgt), INTEGERS)
    while True:
        step = LinearStep(source, target, _random_columns(rng, source, target, max_exponent, 0.6))
        if not step.is_zero():
            return step


def complex_from_step(step: LinearStep) -> FilteredComplex:
    """The two-term complex ``y -> x``: grading ``"1"`` holds the source, ``"0"`` the target."""
    return FilteredComplex(
        GradingSet.cyclic(("0", "1")),
        {"1": step.source, "0": step.target},
        dict(step.columns),
    )


def random_two_term_complex(rng: np.random.Generator, max_dim: int = 6,
                            max_exponent: int = 10) -> FilteredComplex:
    return complex_from_step(random_step(rng, max_dim, max_exponent))


def random_lattice_step(rng: np.random.Generator, max_source: int = 3,
                        max_target: int = 4) -> tuple[LinearStep, Fraction]:
    """A filtered map whose depth is attained on the small coefficient lattice.

    Built as ``W A0 V`` over ``Z*1`` with integer levels in ``[0, 3]``:

    - ``A0`` sends the first ``r`` sources ``y_i`` to ``T^(a_i) x_(pi(i))`` for
      distinct targets and the rest to zero, with ``0 <= a_i <= 5``;
    - ``V`` adds ``c T^e y_i`` to ``y_1`` for some ``i < r``, so ``V^-1`` has
      coefficients ``-c T^e`` with ``c`` in ``{1, 2, -1, -2}`` and ``e <= 4``;
    - ``W`` is a level-preserving unitriangular change of the target.

    Returns the step and its depth ``max_i (level(y_i) - level(x_(pi(i))) + a_i)``.
    """
    n_src, n_tgt = _int(rng, 1, max_source), _int(rng, 1, max_target)
    rank = _int(rng, 1, min(n_src, n_tgt))
    source = FilteredVectorSpace(tuple(f"y{i + 1}" for i in range(n_src)),
                                 tuple(Fraction(_int(rng, 0, 3)) for _ in range(n_src)), INTEGERS)
    target = FilteredVectorSpace(tuple(f"x{i + 1}" for i in range(n_tgt)),
                                 tuple(Fraction(_int(rng, 0, 3)) for _ in range(n_tgt)), INTEGERS)
    pairing = [int(t) for t in rng.permutation(n_tgt)[:rank]]

    shifts: list[int] = []
    for i, t in enumerate(pairing):
        floor = max(0, math.ceil(target.levels[t] - source.levels[i]))
        shifts.append(floor + _int(rng, 0, 2))
    depth = max(source.levels[i] - target.levels[t] + shifts[i] for i, t in enumerate(pairing))

    first = source.basis[0]
    mixing: Chain = {first: NovikovElement.one(INTEGERS)}
    for i in range(1, rank):
        if rng.random() < 0.6:
            floor = max(0, math.ceil(source.levels[i] - source.levels[0]))
            mixing[source.basis[i]] = NovikovElement.monomial(
                floor + _int(rng, 0, 1), _nonzero(rng, 2), INTEGERS)

    change = _unitriangular(rng, target, INTEGERS)
    columns: dict[str, Chain] = {}
    for j, name in enumerate(source.basis):
        pre = mixing if j == 0 else {name: NovikovElement.one(INTEGERS)}
        col: Chain = {}
        for s, coeff in pre.items():
            i = source.basis.index(s)
            if i >= rank:
                continue
            t = target.basis[pairing[i]]
            scaled = coeff * NovikovElement.monomial(shifts[i], 1, INTEGERS)
            col = chain_add(col, chain_scale(change[t], scaled))
        if col:
            columns[name] = col
    return LinearStep(source, target, columns), depth


# ---------------------------------------------------------------------------
# Shift isomorphisms and quasiequivalences
# ---------------------------------------------------------------------------


def _unitriangular(rng: np.random.Generator, space: FilteredVectorSpace,
                   group: ExponentGroup) -> dict[str, Chain]:
    """Images ``x_j + sum_(i<j) c T^e x_i`` with ``level(x_i) - e <= level(x_j)``."""
    images: dict[str, Chain] = {}
    for j, name in enumerate(space.basis):
        col: Chain = {name: NovikovElement.one(group)}
        for i in range(j):
            if rng.random() < 0.5:
                lowest = math.ceil(space.levels[i] - space.levels[j])
                col[space.basis[i]] = NovikovElement.monomial(lowest + _int(rng, 0, 1),
                                                              _nonzero(rng, 2), group)
        images[name] = col
    return images


def random_shift_isomorphism(
    rng: np.random.Generator, complex_: FilteredComplex
) -> tuple[FilteredComplex, dict]:
    """Transport a two-term complex along a random shift isomorphism.

    Returns the image complex and the ingredients (relabeling and shift).
    """
    matrices: dict[str, Chain] = {}
    for space in complex_.pieces.values():
        matrices.update(_unitriangular(rng, space, complex_.group))
    labels = complex_.grading.labels
    swap = rng.random() < 0.5
    grading_map = {k: labels[(i + 1) % len(labels)] if swap else k for i, k in enumerate(labels)}
    shift = Fraction(_int(rng, -4, 4), 2)
    image = apply_shift_isomorphism(complex_, matrices, grading_map, {k: shift for k in labels})
    return image, {"grading_map": grading_map, "shift": shift}


def _jittered(complex_: FilteredComplex, offsets: dict[str, Fraction]) -> FilteredComplex:
    pieces = {
        k: FilteredVectorSpace(
            p.basis, tuple(lvl + offsets[n] for n, lvl in zip(p.basis, p.levels)), p.group
        )
        for k, p in complex_.pieces.items()
    }
    return FilteredComplex(complex_.grading, pieces, complex_.differential)


def random_quasi_pair(
    rng: np.random.Generator, complex_: FilteredComplex
) -> tuple[FilteredMap, FilteredMap, FilteredMap, FilteredMap, Fraction, Fraction, Fraction]:
    """A perturbation ``D`` of ``complex_`` with level jitter at most ``c/2`` per generator.

    Identity maps in both directions and zero homotopies make a
    c-quasiequivalence. Jitter is drawn in quarters and rejected while it
    breaks the filtration; the fallback raises sources and lowers targets.
    """
    c = Fraction(_int(rng, 1, 4), 2)
    reach = int(2 * c)  # c/2 in quarters
    names = complex_.generators
    perturbed = None
    for _ in range(MAX_REJECTIONS):
        offsets = {n: Fraction(_int(rng, -reach, reach), 4) for n in names}
        try:
            perturbed = _jittered(complex_, offsets)
            break
        except InvariantViolation:
            continue
    if perturbed is None:
        sources = set(complex_.pieces["1"].basis)
        offsets = {n: Fraction(_int(rng, 0, reach), 4) * (1 if n in sources else -1) for n in names}
        perturbed = _jittered(complex_, offsets)
    c1 = max(Fraction(0), *(offsets[n] for n in names))
    c2 = max(Fraction(0), *(-offsets[n] for n in names))
    phi = identity_between(complex_, perturbed, c1)
    psi = identity_between(perturbed, complex_, c2)
    return phi, psi, complex_.zero_homotopy(), perturbed.zero_homotopy(), c1, c2, c


# ---------------------------------------------------------------------------
# Quantum corrections
# ---------------------------------------------------------------------------


def _conjugate(complex_: FilteredComplex, matrices: dict[str, Chain]) -> FilteredComplex:
    labels = complex_.grading.labels
    return apply_shift_isomorphism(complex_, matrices, {k: k for k in labels},
                                   {k: 0 for k in labels}, complex_.grading)


def _upper(rng: np.random.Generator, basis: tuple[str, ...], group: ExponentGroup,
           exponent: int, density: float) -> dict[str, Chain]:
    """``I + T^exponent N`` with ``N`` strictly upper triangular and small integer entries."""
    images: dict[str, Chain] = {}
    for j, name in enumerate(basis):
        col: Chain = {name: NovikovElement.one(group)}
        for i in range(j):
            if rng.random() < density:
                col[basis[i]] = NovikovElement.monomial(exponent, _nonzero(rng, 2), group)
        images[name] = col
    return images


def random_quantum_correction(rng: np.random.Generator, max_dim: int = 5) -> QuantumCorrection:
    """A valid correction with gap ``mu`` in every grading.

    The base is a sum of elementary collapses ``a -> b`` and isolated
    generators. The deformation pairs some isolated generators by
    ``T^(mu + r)`` and then conjugates by ``I + T^mu N``; both complexes are
    finally conjugated by the same rational unipotent matrix.
    """
    labels = tuple(str(i) for i in range(_int(rng, 2, 3)))
    grading = GradingSet.cyclic(labels)
    mu = _int(rng, 1, 3)
    basis: dict[str, list[str]] = {k: [] for k in labels}
    collapses: list[tuple[str, str]] = []
    counter = iter(range(1, 10_000))

    def fresh(label: str) -> str | None:
        if len(basis[label]) >= max_dim:
            return None
        name = f"g{next(counter)}"
        basis[label].append(name)
        return name

    for _ in range(_int(rng, 0, len(labels) + 1)):
        k = labels[_int(rng, 0, len(labels) - 1)]
        below = grading.predecessor(k)
        if len(basis[k]) < max_dim and len(basis[below]) < max_dim:
            collapses.append((fresh(k), fresh(below)))  # type: ignore[arg-type]
    isolated = {k: [n for n in (fresh(k) for _ in range(_int(rng, 0, 2))) if n] for k in labels}
    for k in labels:
        if not basis[k]:
            isolated[k].append(fresh(k))  # type: ignore[arg-type]

    new_pairs: list[tuple[str, str, int]] = []
    for k in labels:
        below = grading.predecessor(k)
        while isolated[k] and isolated[below] and rng.random() < 0.5:
            new_pairs.append((isolated[k].pop(), isolated[below].pop(), mu + _int(rng, 0, 2)))

    trivial = ExponentGroup.trivial()
    one, one_z = NovikovElement.one(trivial), NovikovElement.one(INTEGERS)
    base_diff = {a: {b: one} for a, b in collapses}
    deformed_diff: dict[str, Chain] = {a: {b: one_z} for a, b in collapses}
    for a, b, e in new_pairs:
        deformed_diff[a] = {b: NovikovElement.monomial(e, _nonzero(rng, 2), INTEGERS)}

    zeros = {k: tuple(Fraction(0) for _ in basis[k]) for k in labels}
    base = FilteredComplex(
        grading, {k: FilteredVectorSpace(tuple(basis[k]), zeros[k], trivial) for k in labels}, base_diff
    )
    deformed = FilteredComplex(
        grading, {k: FilteredVectorSpace(tuple(basis[k]), zeros[k], INTEGERS) for k in labels},
        deformed_diff,
    )

    nilpotent: dict[str, Chain] = {}
    for k in labels:
        nilpotent.update(_upper(rng, tuple(basis[k]), INTEGERS, mu, 0.3))
    deformed = _conjugate(deformed, nilpotent)

    rational = {k: [[_int(rng, -2, 2) if i < j and rng.random() < 0.5 else int(i == j)
                     for j in range(len(basis[k]))] for i in range(len(basis[k]))] for k in labels}
    for cx_group, target in ((trivial, "base"), (INTEGERS, "deformed")):
        matrices: dict[str, Chain] = {}
        for k in labels:
            for j, name in enumerate(basis[k]):
                matrices[name] = {
                    basis[k][i]: NovikovElement.constant(rational[k][i][j], cx_group)
                    for i in range(len(basis[k])) if rational[k][i][j]
                }
        if target == "base":
            base = _conjugate(base, matrices)
        else:
            deformed = _conjugate(deformed, matrices)
    return QuantumCorrection(base, deformed, {k: Fraction(mu) for k in labels})


# ---------------------------------------------------------------------------
# Numerical lab
# ---------------------------------------------------------------------------


def random_symmetric(rng: np.random.Generator, n: int, norm: float = 1.0) -> np.ndarray:
    """A symmetric matrix with spectral norm exactly ``norm`` (zero when ``n`` is 0)."""
    a = rng.standard_normal((n, n))
    a = a + a.T
    size = float(np.max(np.abs(np.linalg.eigvalsh(a)))) if n else 0.0
    return a * (norm / size) if size > 0 else a


def random_block_pair(rng: np.random.Generator, max_n: int = 4) -> tuple[np.ndarray, np.ndarray]:
    n = _int(rng, 1, max_n)
    return random_symmetric(rng, n, rng.uniform(0.1, 2.0)), random_symmetric(rng, n, rng.uniform(0.1, 2.0))


def random_family(rng: np.random.Generator, n: int = 2, T: float = 1.0,
                  samples: int = 9) -> BlockOperatorFamily:
    """Smooth-ish family on ``[-T, T]`` whose samples satisfy ``|B1| + |B2| <= 2``."""
    positions = np.linspace(-T, T, samples)
    b1 = np.stack([random_symmetric(rng, n, rng.uniform(0.0, 1.0)) for _ in positions])
    b2 = np.stack([random_symmetric(rng, n, rng.uniform(0.0, 1.0)) for _ in positions])
    return BlockOperatorFamily(positions, b1, b2, T)


def random_sequence_pair(rng: np.random.Generator, max_support: int = 6) -> tuple[list[Fraction], list[Fraction]]:
    """Two finitely supported rational sequences (halves in ``[-10, 10]``)."""

    def draw() -> list[Fraction]:
        return [Fraction(_int(rng, -20, 20), 2) for _ in range(_int(rng, 0, max_support))]

    return draw(), draw()
