"""
Grassmann algebra kernel

Exact arithmetic over a finite exterior algebra generated by named conjugate
pairs (xi, xi*). Elements are sparse maps from monomials to complex
coefficients. A monomial is an ascending tuple of generator indices; the
generator index of a pair is ``2 * pair_index + conjugated``, so every sign in
this module comes from sorting generator sequences into that order.
"""
import cmath
from numbers import Number
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from src.qubit_channels.errors import AlgebraContextError, DomainError

Monomial = Tuple[int, ...]
Scalar = Union[int, float, complex]

PRUNE_THRESHOLD: float = 1e-15
EQUALITY_TOLERANCE: float = 1e-12

# Sign of the Berezin integral of xi xi* over d^2 xi = d xi* d xi.
_BEREZIN_PAIR_SIGN: int = 1


@dataclass(frozen=True)
class GeneratorId:
    name: str
    conjugated: bool = False

    @property
    def label(self) -> str:
        return f"{self.name}*" if self.conjugated else self.name

    @classmethod
    def parse(cls, label: str) -> "GeneratorId":
        """
        Parses ``"xi"`` or ``"xi*"`` into a generator id.

        :param label: Pair name, optionally followed by ``*``.
        :return: The generator id.
        """
        if label.endswith("*"):
            return cls(label[:-1], True)
        return cls(label, False)


def sort_sign(indices: Sequence[int]) -> Tuple[int, Monomial]:
    """
    Sorts a generator sequence into canonical order.

    :param indices: Generator indices in product order.
    :return: (sign, monomial); sign is 0 when a generator repeats.
    """
    if len(set(indices)) != len(indices):
        return 0, ()
    inversions = sum(1 for i, j in combinations(range(len(indices)), 2) if indices[i] > indices[j])
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


@lru_cache(maxsize=65536)
def merge_monomials(left: Monomial, right: Monomial) -> Tuple[int, Monomial]:
    """
    Product of two canonical monomials.

    :param left: Left factor.
    :param right: Right factor.
    :return: (sign, monomial); sign is 0 when the factors share a generator.
    """
    if not left:
        return 1, right
    if not right:
        return 1, left
    if set(left) & set(right):
        return 0, ()
    swaps = 0
    for g in left:
        for h in right:
            if g > h:
                swaps += 1
    return (-1 if swaps % 2 else 1), tuple(sorted(left + right))


@dataclass(frozen=True)
class GrassmannAlgebra:
    """
    Algebra context: an ordered tuple of conjugate-pair names.

    Elements may only be combined when their contexts compare equal.
    """

    pairs: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if len(set(self.pairs)) != len(self.pairs):
            raise AlgebraContextError(f"Duplicate generator pair in {self.pairs}")
        if any(not name or name.endswith("*") for name in self.pairs):
            raise AlgebraContextError(f"Invalid generator pair name in {self.pairs}")

    @property
    def n_generators(self) -> int:
        return 2 * len(self.pairs)

    def pair_index(self, pair: str) -> int:
        try:
            return self.pairs.index(pair)
        except ValueError:
            raise AlgebraContextError(f"Unknown generator pair '{pair}' in algebra {self.pairs}")

    def index_of(self, generator: Union[GeneratorId, str]) -> int:
        if isinstance(generator, str):
            generator = GeneratorId.parse(generator)
        return 2 * self.pair_index(generator.name) + int(generator.conjugated)

    def generator(self, index: int) -> GeneratorId:
        return GeneratorId(self.pairs[index // 2], bool(index % 2))

    def monomial(self, *labels: str) -> Tuple[int, Monomial]:
        """
        Canonical form of a product of generators written in any order.

        :param labels: Generator labels in product order, e.g. ``("xi*", "xi")``.
        :return: (sign, monomial).
        """
        return sort_sign([self.index_of(label) for label in labels])

    def zero(self) -> "GrassmannElement":
        return GrassmannElement(self, {})

    def one(self) -> "GrassmannElement":
        return GrassmannElement(self, {(): 1.0})

    def scalar(self, value: Scalar) -> "GrassmannElement":
        return GrassmannElement(self, {(): complex(value)})

    def gen(self, pair: str, conjugated: bool = False) -> "GrassmannElement":
        index = 2 * self.pair_index(pair) + int(conjugated)
        return GrassmannElement(self, {(index,): 1.0})

    def product(self, *labels: str, coefficient: Scalar = 1.0) -> "GrassmannElement":
        """
        Element ``coefficient * g1 g2 ...`` for generator labels in product order.

        :param labels: Generator labels, e.g. ``("zeta", "zeta*", "xi")``.
        :param coefficient: Scalar prefactor.
        :return: The element, zero when a generator repeats.
        """
        sign, monomial = self.monomial(*labels)
        if sign == 0:
            return self.zero()
        return GrassmannElement(self, {monomial: sign * complex(coefficient)})

    def element(self, terms: Mapping[Tuple[str, ...], Scalar]) -> "GrassmannElement":
        """
        Builds an element from label tuples, each read in product order.

        :param terms: Map from label tuples to coefficients; ``()`` is the scalar part.
        :return: The element.
        """
        result = self.zero()
        for labels, coefficient in terms.items():
            result = result + self.product(*labels, coefficient=coefficient)
        return result


def _pruned(terms: Dict[Monomial, complex]) -> Dict[Monomial, complex]:
    return {m: c for m, c in terms.items() if abs(c) > PRUNE_THRESHOLD}


class GrassmannElement:
    """
    Immutable element of a finite Grassmann algebra.
    """

    __slots__ = ("_algebra", "_terms")

    def __init__(self, algebra: GrassmannAlgebra, terms: Mapping[Monomial, Scalar]):
        self._algebra = algebra
        self._terms = _pruned({tuple(m): complex(c) for m, c in terms.items()})

    @property
    def algebra(self) -> GrassmannAlgebra:
        return self._algebra

    @property
    def terms(self) -> Mapping[Monomial, complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def scalar_part(self) -> complex:
        return self._terms.get((), 0j)

    def coefficient(self, *labels: str) -> complex:
        """
        Coefficient of the product of ``labels`` as written.

        ``chi.coefficient("xi*", "xi")`` is the C of ``A + B1 xi + B2 xi* + C xi* xi``.
        """
        sign, monomial = self._algebra.monomial(*labels)
        if sign == 0:
            raise DomainError(f"Repeated generator in {labels}")
        return sign * self._terms.get(monomial, 0j)

    def _check(self, other: "GrassmannElement") -> None:
        if other._algebra != self._algebra:
            raise AlgebraContextError(
                f"Algebra mismatch: {self._algebra.pairs} vs {other._algebra.pairs}"
            )

    def _coerce(self, other: Union["GrassmannElement", Scalar]) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            self._check(other)
            return other
        if isinstance(other, Number):
            return self._algebra.scalar(other)
        return NotImplemented

    def __add__(self, other: Union["GrassmannElement", Scalar]) -> "GrassmannElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0j) + c
        return GrassmannElement(self._algebra, terms)

    __radd__ = __add__

    def __neg__(self) -> "GrassmannElement":
        return GrassmannElement(self._algebra, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Union["GrassmannElement", Scalar]) -> "GrassmannElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "GrassmannElement":
        return (-self) + other

    def __mul__(self, other: Union["GrassmannElement", Scalar]) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            return mul(self, other)
        if isinstance(other, Number):
            return GrassmannElement(self._algebra, {m: c * other for m, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other: Scalar) -> "GrassmannElement":
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other: Scalar) -> "GrassmannElement":
        if isinstance(other, Number):
            return self * (1.0 / other)
        return NotImplemented

    def isclose(self, other: "GrassmannElement", atol: float = EQUALITY_TOLERANCE) -> bool:
        return max_abs_difference(self, other) <= atol

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Number):
            other = self._algebra.scalar(other)
        if not isinstance(other, GrassmannElement) or other._algebra != self._algebra:
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=lambda k: (len(k), k)):
            labels = "".join(self._algebra.generator(i).label for i in m) or "1"
            parts.append(f"({self._terms[m]:.6g})*{labels}" if m else f"({self._terms[m]:.6g})")
        return " + ".join(parts)


def mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """
    Canonical-normal-form product of two elements.

    :param a: Left factor.
    :param b: Right factor.
    :return: a * b.
    :raises AlgebraContextError: If the factors belong to different algebras.
    """
    a._check(b)
    terms: Dict[Monomial, complex] = {}
    for m1, c1 in a._terms.items():
        for m2, c2 in b._terms.items():
            sign, m = merge_monomials(m1, m2)
            if sign:
                terms[m] = terms.get(m, 0j) + sign * c1 * c2
    return GrassmannElement(a._algebra, terms)


def conj(a: GrassmannElement) -> GrassmannElement:
    """
    Grassmann complex conjugation: reverses factor order, swaps xi and xi*,
    conjugates scalars.
    """
    terms: Dict[Monomial, complex] = {}
    for m, c in a._terms.items():
        sign, conjugated = sort_sign([g ^ 1 for g in reversed(m)])
        terms[conjugated] = terms.get(conjugated, 0j) + sign * c.conjugate()
    return GrassmannElement(a._algebra, terms)


def berezin_integrate(a: GrassmannElement, pair: str) -> GrassmannElement:
    """
    Berezin integral over d^2 xi = d xi* d xi for the named pair.

    Terms lacking either generator of the pair vanish; in the remaining terms
    the adjacent (xi, xi*) factor is removed with sign ``_BEREZIN_PAIR_SIGN``.

    :param a: Integrand.
    :param pair: Pair name to integrate over.
    :return: Element free of the pair's generators.
    :raises AlgebraContextError: If the pair is unknown.
    """
    p = a._algebra.pair_index(pair)
    plain, conjugated = 2 * p, 2 * p + 1
    terms: Dict[Monomial, complex] = {}
    for m, c in a._terms.items():
        if plain in m and conjugated in m:
            rest = tuple(g for g in m if g != plain and g != conjugated)
            terms[rest] = terms.get(rest, 0j) + _BEREZIN_PAIR_SIGN * c
    return GrassmannElement(a._algebra, terms)


def graded_exp(a: GrassmannElement) -> GrassmannElement:
    """
    Exponential of an element; the scalar part is exponentiated as an ordinary
    complex number and the nilpotent remainder by its terminating power series.
    """
    nilpotent = a - a.scalar_part
    result = a._algebra.one()
    power = a._algebra.one()
    n = 1
    while True:
        power = mul(power, nilpotent) / n
        if power.is_zero():
            break
        result = result + power
        n += 1
    return result * cmath.exp(a.scalar_part)


def graded_log(a: GrassmannElement) -> GrassmannElement:
    """
    Principal logarithm, the inverse of graded_exp.

    :param a: Element with nonzero scalar part.
    :return: log(a) with graded_exp(graded_log(a)) == a.
    :raises DomainError: If the scalar part vanishes.
    """
    s = a.scalar_part
    if abs(s) <= PRUNE_THRESHOLD:
        raise DomainError("Logarithm needs a nonzero scalar part")
    u = a / s - 1
    result = a._algebra.scalar(cmath.log(s))
    power = a._algebra.one()
    n = 1
    while True:
        power = mul(power, u)
        if power.is_zero():
            break
        result = result + power * ((-1) ** (n + 1) / n)
        n += 1
    return result


def delta(
    algebra: GrassmannAlgebra, pair: str, shift: Optional[GrassmannElement] = None
) -> GrassmannElement:
    """
    Grassmann delta (xi - s)(xi* - s*) for the named pair.

    :param algebra: Algebra context.
    :param pair: Pair carrying the delta.
    :param shift: Odd, linear shift s; zero when omitted.
    :return: The delta element.
    :raises DomainError: If the shift has even or nonlinear terms.
    """
    shift = algebra.zero() if shift is None else shift
    if shift.algebra != algebra:
        raise AlgebraContextError(f"Shift belongs to {shift.algebra.pairs}, expected {algebra.pairs}")
    if any(len(m) != 1 for m, _ in shift):
        raise DomainError("Delta shift must be odd and linear in the generators")
    left = algebra.gen(pair) - shift
    right = algebra.gen(pair, conjugated=True) - conj(shift)
    return mul(left, right)


def parity_split(a: GrassmannElement) -> Tuple[GrassmannElement, GrassmannElement]:
    """
    Splits an element into its even and odd parts.

    :param a: Element to split.
    :return: (even, odd), summing to ``a``.
    """
    even = {m: c for m, c in a._terms.items() if len(m) % 2 == 0}
    odd = {m: c for m, c in a._terms.items() if len(m) % 2 == 1}
    return GrassmannElement(a._algebra, even), GrassmannElement(a._algebra, odd)


def reflect(a: GrassmannElement, pair: str) -> GrassmannElement:
    """
    Substitution xi -> -xi, xi* -> -xi* for the named pair.
    """
    p = a._algebra.pair_index(pair)
    terms = {}
    for m, c in a._terms.items():
        count = sum(1 for g in m if g // 2 == p)
        terms[m] = -c if count % 2 else c
    return GrassmannElement(a._algebra, terms)


def substitute_zero(a: GrassmannElement, pair: str) -> GrassmannElement:
    """
    Substitution xi = xi* = 0 for the named pair.
    """
    p = a._algebra.pair_index(pair)
    return GrassmannElement(a._algebra, {m: c for m, c in a._terms.items() if all(g // 2 != p for g in m)})


def relabel(
    a: GrassmannElement, target: GrassmannAlgebra, mapping: Optional[Mapping[str, str]] = None
) -> GrassmannElement:
    """
    Moves an element into another algebra context, renaming pairs.

    Pairs absent from ``mapping`` keep their name. Signs come from re-sorting
    each monomial in the target order.

    :param a: Element to move.
    :param target: Target algebra.
    :param mapping: Source pair name -> target pair name.
    :return: The relabelled element.
    :raises AlgebraContextError: If a pair has no counterpart in the target.
    """
    mapping = dict(mapping or {})
    index_map = {}
    for p, name in enumerate(a._algebra.pairs):
        q = target.pair_index(mapping.get(name, name))
        index_map[2 * p] = 2 * q
        index_map[2 * p + 1] = 2 * q + 1
    terms: Dict[Monomial, complex] = {}
    for m, c in a._terms.items():
        sign, moved = sort_sign([index_map[g] for g in m])
        if sign:
            terms[moved] = terms.get(moved, 0j) + sign * c
    return GrassmannElement(target, terms)


def max_abs_difference(a: GrassmannElement, b: GrassmannElement) -> float:
    """
    Largest coefficient mismatch between two elements of the same algebra.
    """
    a._check(b)
    keys = set(a._terms) | set(b._terms)
    return max((abs(a._terms.get(k, 0j) - b._terms.get(k, 0j)) for k in keys), default=0.0)


def random_element(
    algebra: GrassmannAlgebra, rng, density: float = 1.0, parity: Optional[int] = None
) -> GrassmannElement:
    """
    Random element with normally distributed complex coefficients.

    :param algebra: Algebra context.
    :param rng: numpy Generator.
    :param density: Probability that a given monomial is present.
    :param parity: Restrict to even (0) or odd (1) monomials.
    :return: The element.
    """
    terms = {}
    for k in range(algebra.n_generators + 1):
        if parity is not None and k % 2 != parity:
            continue
        for m in combinations(range(algebra.n_generators), k):
            if rng.random() < density:
                terms[m] = complex(rng.normal(), rng.normal())
    return GrassmannElement(algebra, terms)


def four_coefficient(
    algebra: GrassmannAlgebra, pair: str, A: Scalar, B1: Scalar, B2: Scalar, C: Scalar
) -> GrassmannElement:
    """
    ``A + B1 xi + B2 xi* + C xi* xi`` over the named pair.
    """
    return algebra.element(
        {(): A, (pair,): B1, (f"{pair}*",): B2, (f"{pair}*", pair): C}
    )


def sum_elements(algebra: GrassmannAlgebra, elements: Iterable[GrassmannElement]) -> GrassmannElement:
    """
    Sum of elements of one algebra; zero for an empty iterable.
    """
    total = algebra.zero()
    for element in elements:
        total = total + element
    return total
