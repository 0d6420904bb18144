"""Exact arithmetic in the Novikov field over the rationals.

Elements are finite sums ``sum a_g T^g`` with exponents in a finitely
generated subgroup of the rationals. A finite ``cutoff`` records that every
term strictly below it is represented exactly and nothing is known above.
Extended rationals are ``Fraction`` values or ``math.inf`` / ``-math.inf``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from bdepth.core.errors import (
    CutoffAmbiguous,
    ExponentOutsideGroup,
    GroupMismatch,
    NovikovDivisionByZero,
    ParseError,
    UnboundedInverse,
)

ExtRational = Union[Fraction, float]
Rational = Union[Fraction, int, str]

INF = math.inf
NEG_INF = -math.inf

_TERM_RE = re.compile(r"^([+-]?\d+(?:/\d+)?)\*T\^([+-]?\d+(?:/\d+)?)$")
_CUTOFF_RE = re.compile(r"^O\(T\^([+-]?\d+(?:/\d+)?)\)$")


def as_fraction(value: Rational) -> Fraction:
    """Coerce an int, string literal or Fraction to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; pass a Fraction or a 'p/q' string")
    return Fraction(value)


def parse_ext(text: str | int | Fraction | float) -> ExtRational:
    """Parse an extended rational: ``inf``, ``-inf`` or a rational literal."""
    if isinstance(text, float) and math.isinf(text):
        return text
    if isinstance(text, str):
        stripped = text.strip().lower()
        if stripped in ("inf", "+inf", "infinity"):
            return INF
        if stripped in ("-inf", "-infinity"):
            return NEG_INF
    return as_fraction(text)  # type: ignore[arg-type]


def format_ext(value: ExtRational) -> str:
    """Canonical text for an extended rational."""
    if isinstance(value, float):
        if value == INF:
            return "inf"
        if value == NEG_INF:
            return "-inf"
        raise TypeError(f"not an extended rational: {value!r}")
    return str(value)


def rational_gcd(values: Iterable[Fraction]) -> Fraction:
    """Positive generator of the subgroup of Q generated by ``values`` (0 if trivial)."""
    nonzero = [abs(Fraction(v)) for v in values if v != 0]
    if not nonzero:
        return Fraction(0)
    denom = math.lcm(*(v.denominator for v in nonzero))
    numer = math.gcd(*(int(v * denom) for v in nonzero))
    return Fraction(numer, denom)


@dataclass(frozen=True, eq=False)
class ExponentGroup:
    """A finitely generated additive subgroup of Q.

    Such a subgroup is cyclic, so two groups are equal exactly when their
    positive generators agree, whatever generators they were declared with.
    """

    generators: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        gens = tuple(as_fraction(g) for g in self.generators)
        if any(g <= 0 for g in gens):
            raise ValueError(f"exponent group generators must be positive: {gens}")
        if len(set(gens)) != len(gens):
            raise ValueError(f"exponent group generators must be distinct: {gens}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_generator", rational_gcd(gens))

    @classmethod
    def trivial(cls) -> ExponentGroup:
        return cls(())

    @classmethod
    def integers(cls, step: Rational = 1) -> ExponentGroup:
        """The group Z*step."""
        return cls((as_fraction(step),))

    @property
    def generator(self) -> Fraction:
        """Positive cyclic generator, 0 for the trivial group."""
        return self._generator  # type: ignore[attr-defined]

    @property
    def is_trivial(self) -> bool:
        return self.generator == 0

    def contains(self, value: Rational) -> bool:
        value = as_fraction(value)
        if value == 0:
            return True
        if self.is_trivial:
            return False
        return (value / self.generator).denominator == 1

    def is_subgroup_of(self, other: ExponentGroup) -> bool:
        return self.is_trivial or other.contains(self.generator)

    def join(self, *values: Rational) -> ExponentGroup:
        """Smallest group containing this one and ``values``."""
        extra = {abs(as_fraction(v)) for v in values} - {Fraction(0)}
        if not extra or all(self.contains(v) for v in extra):
            return self
        g = rational_gcd([self.generator, *extra])
        return ExponentGroup((g,))

    def coset_key(self, value: Fraction) -> Fraction:
        """Canonical representative of ``value`` modulo this group."""
        if self.is_trivial:
            return value
        return value - self.generator * math.floor(value / self.generator)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExponentGroup):
            return NotImplemented
        return self.generator == other.generator

    def __hash__(self) -> int:
        return hash(("ExponentGroup", self.generator))

    def __str__(self) -> str:
        return "0" if self.is_trivial else f"Z*{self.generator}"


Term = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class NovikovElement:
    """A truncated element of the Novikov field.

    ``terms`` holds (exponent, coefficient) pairs with strictly increasing
    exponents and nonzero coefficients, all below ``cutoff``.
    """

    terms: tuple[Term, ...]
    group: ExponentGroup
    cutoff: ExtRational = INF

    def __post_init__(self) -> None:
        previous: Fraction | None = None
        for exp, coeff in self.terms:
            if coeff == 0:
                raise ValueError("zero coefficient in canonical terms")
            if previous is not None and exp <= previous:
                raise ValueError("exponents must be strictly increasing")
            if not exp < self.cutoff:
                raise ValueError(f"exponent {exp} not below cutoff {format_ext(self.cutoff)}")
            if not self.group.contains(exp):
                raise ExponentOutsideGroup(f"exponent {exp} not in {self.group}")
            previous = exp

    # -- construction ------------------------------------------------------

    @classmethod
    def _raw(cls, terms: tuple[Term, ...], group: ExponentGroup,
             cutoff: ExtRational) -> NovikovElement:
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "group", group)
        object.__setattr__(obj, "cutoff", cutoff)
        return obj

    @classmethod
    def from_terms(
        cls,
        terms: Iterable[tuple[Rational, Rational]],
        group: ExponentGroup,
        cutoff: ExtRational = INF,
    ) -> NovikovElement:
        """Canonicalize arbitrary terms: merge, drop zeros and anything at or above cutoff."""
        merged: dict[Fraction, Fraction] = {}
        for exp, coeff in terms:
            e = as_fraction(exp)
            merged[e] = merged.get(e, Fraction(0)) + as_fraction(coeff)
        canonical = tuple(sorted((e, c) for e, c in merged.items() if c != 0 and e < cutoff))
        for e, _ in canonical:
            if not group.contains(e):
                raise ExponentOutsideGroup(f"exponent {e} not in {group}")
        return cls._raw(canonical, group, cutoff)

    @classmethod
    def zero(cls, group: ExponentGroup) -> NovikovElement:
        return cls._raw((), group, INF)

    @classmethod
    def constant(cls, value: Rational, group: ExponentGroup) -> NovikovElement:
        return cls.from_terms([(0, value)], group)

    @classmethod
    def one(cls, group: ExponentGroup) -> NovikovElement:
        return cls.constant(1, group)

    @classmethod
    def monomial(cls, exponent: Rational, coeff: Rational = 1,
                 group: ExponentGroup | None = None) -> NovikovElement:
        exponent = as_fraction(exponent)
        if group is None:
            group = ExponentGroup.trivial().join(exponent)
        return cls.from_terms([(exponent, coeff)], group)

    # -- valuation ---------------------------------------------------------

    def valuation(self) -> ExtRational:
        """Least exponent with nonzero coefficient, ``inf`` for zero."""
        if self.terms:
            return self.terms[0][0]
        if self.cutoff != INF:
            raise CutoffAmbiguous(
                f"no terms below cutoff {format_ext(self.cutoff)}; valuation undetermined"
            )
        return INF

    def lower_valuation(self) -> ExtRational:
        """A lower bound for the valuation that never raises."""
        return self.terms[0][0] if self.terms else self.cutoff

    def is_zero(self) -> bool:
        """Exactly zero (no terms and no truncation)."""
        return not self.terms and self.cutoff == INF

    def vanishes(self) -> bool:
        """No terms below cutoff."""
        return not self.terms

    def coefficient(self, exponent: Rational) -> Fraction:
        exponent = as_fraction(exponent)
        for e, c in self.terms:
            if e == exponent:
                return c
        return Fraction(0)

    def reduction(self) -> Fraction:
        """Constant coefficient: the residue map for elements of valuation >= 0."""
        if not self.cutoff > 0:
            raise CutoffAmbiguous("constant term lies above the cutoff")
        return self.coefficient(0)

    # -- ring operations ---------------------------------------------------

    def _check_group(self, other: NovikovElement) -> None:
        if self.group != other.group:
            raise GroupMismatch(f"operands over {self.group} and {other.group}")

    def _coerce(self, other: object) -> NovikovElement | None:
        if isinstance(other, NovikovElement):
            self._check_group(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return NovikovElement.constant(other, self.group)
        return None

    def __add__(self, other: object) -> NovikovElement:
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        cutoff = min(self.cutoff, y.cutoff)
        merged = dict(self.terms)
        for e, c in y.terms:
            merged[e] = merged.get(e, Fraction(0)) + c
        terms = tuple(sorted((e, c) for e, c in merged.items() if c != 0 and e < cutoff))
        return NovikovElement._raw(terms, self.group, cutoff)

    __radd__ = __add__

    def __neg__(self) -> NovikovElement:
        return NovikovElement._raw(tuple((e, -c) for e, c in self.terms), self.group, self.cutoff)

    def __sub__(self, other: object) -> NovikovElement:
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other: object) -> NovikovElement:
        return (-self) + other

    def __mul__(self, other: object) -> NovikovElement:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        cutoff = min(self.cutoff + y.lower_valuation(), y.cutoff + self.lower_valuation())
        product: dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in y.terms:
                e = e1 + e2
                if e < cutoff:
                    product[e] = product.get(e, Fraction(0)) + c1 * c2
        terms = tuple(sorted((e, c) for e, c in product.items() if c != 0))
        return NovikovElement._raw(terms, self.group, cutoff)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> NovikovElement:
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self * y.invert()

    def scale(self, factor: Rational) -> NovikovElement:
        factor = as_fraction(factor)
        if factor == 0:
            return NovikovElement._raw((), self.group, self.cutoff)
        return NovikovElement._raw(
            tuple((e, c * factor) for e, c in self.terms), self.group, self.cutoff
        )

    def shift(self, exponent: Rational) -> NovikovElement:
        """Multiply by ``T^exponent``."""
        exponent = as_fraction(exponent)
        if not self.group.contains(exponent):
            raise ExponentOutsideGroup(f"shift {exponent} not in {self.group}")
        return NovikovElement._raw(
            tuple((e + exponent, c) for e, c in self.terms), self.group, self.cutoff + exponent
        )

    def truncate(self, cutoff: ExtRational) -> NovikovElement:
        cutoff = min(self.cutoff, cutoff)
        return NovikovElement._raw(
            tuple((e, c) for e, c in self.terms if e < cutoff), self.group, cutoff
        )

    def with_group(self, group: ExponentGroup) -> NovikovElement:
        """Reinterpret over a larger exponent group."""
        if not self.group.is_subgroup_of(group):
            raise GroupMismatch(f"{self.group} is not contained in {group}")
        return NovikovElement._raw(self.terms, group, self.cutoff)

    def project(self, group: ExponentGroup) -> NovikovElement:
        """Component with exponents in ``group`` under the splitting by cosets."""
        return NovikovElement._raw(
            tuple((e, c) for e, c in self.terms if group.contains(e)), group, self.cutoff
        )

    def invert(self, cutoff: ExtRational | None = None) -> NovikovElement:
        """Multiplicative inverse, truncated where the input's precision runs out.

        Exact monomials invert exactly. Anything else needs either a finite
        input cutoff or an explicit ``cutoff`` for the result.
        """
        if not self.terms:
            if self.cutoff == INF:
                raise NovikovDivisionByZero("inverse of zero")
            raise CutoffAmbiguous("cannot invert an element with no terms below cutoff")

        v, lead = self.terms[0]
        if len(self.terms) == 1 and self.cutoff == INF:
            return NovikovElement._raw(((-v, 1 / lead),), self.group, INF)

        target = self.cutoff - 2 * v if self.cutoff != INF else INF
        if cutoff is not None:
            target = min(target, cutoff)
        if target == INF:
            raise UnboundedInverse(f"inverse of {self} is an infinite series; pass a cutoff")

        # x = lead*T^v*(1 + r); (1 + r)^-1 = sum s_n T^(n*u) below relative bound
        tail = [(e - v, c / lead) for e, c in self.terms[1:]]
        bound = target + v
        if not tail:
            terms = ((-v, 1 / lead),) if -v < target else ()
            return NovikovElement._raw(terms, self.group, target)

        step = rational_gcd(d for d, _ in tail)
        tail_steps = [(int(d / step), c) for d, c in tail]
        count = math.ceil(bound / step) if bound > 0 else 0
        series: list[Fraction] = []
        for n in range(count):
            if n == 0:
                series.append(Fraction(1))
                continue
            acc = Fraction(0)
            for m, c in tail_steps:
                if m > n:
                    break
                acc -= c * series[n - m]
            series.append(acc)
        terms = tuple(
            (-v + n * step, s / lead) for n, s in enumerate(series) if s != 0
        )
        return NovikovElement._raw(terms, self.group, target)

    # -- text form ---------------------------------------------------------

    def __str__(self) -> str:
        parts = [f"{c}*T^{e}" for e, c in self.terms]
        if self.cutoff != INF:
            parts.append(f"O(T^{format_ext(self.cutoff)})")
        return "; ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str, group: ExponentGroup | None = None) -> NovikovElement:
        """Parse the ``coeff*T^exp; ...`` form, with an optional ``O(T^c)`` term.

        Without ``group`` the element lives in the group its exponents generate.
        """
        stripped = text.strip()
        if stripped == "0":
            return cls.zero(group or ExponentGroup.trivial())
        terms: list[tuple[Fraction, Fraction]] = []
        cutoff: ExtRational = INF
        column = 1
        for raw in text.split(";"):
            token = raw.strip()
            offset = column + (len(raw) - len(raw.lstrip()))
            column += len(raw) + 1
            if not token:
                raise ParseError("empty term in Novikov element", column=offset)
            match = _TERM_RE.match(token)
            if match:
                terms.append((Fraction(match.group(2)), Fraction(match.group(1))))
                continue
            cut = _CUTOFF_RE.match(token)
            if cut and cutoff == INF:
                cutoff = Fraction(cut.group(1))
                continue
            raise ParseError(f"malformed term {token!r}", column=offset)
        if group is None:
            group = ExponentGroup.trivial().join(*(e for e, _ in terms))
        try:
            return cls.from_terms(terms, group, cutoff)
        except ExponentOutsideGroup as exc:
            raise ParseError(str(exc)) from exc
