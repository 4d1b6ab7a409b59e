"""
Hybrid qubit/Grassmann operators

A HybridOperator is a sum of terms g (x) M with g a Grassmann monomial kept to
the LEFT of the 2x2 matrix M. Odd Grassmann content anticommutes with sigma_+
and sigma_-, so moving a monomial of parity p from right to left conjugates the
matrix by sigma_z^p. Everything below follows from that single rule.
"""
from numbers import Number
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from src.qubit_channels.errors import AlgebraContextError
from src.qubit_channels.grassmann import (
    PRUNE_THRESHOLD,
    GrassmannAlgebra,
    GrassmannElement,
    Monomial,
    conj,
    merge_monomials,
    sort_sign,
)
from src.qubit_channels import grassmann

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_+ = |1><0|, sigma_- = |0><1|
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)

# Trace weight applied to matrix parts carrying odd Grassmann monomials.
_ODD_TRACE_WEIGHT = SIGMA_Z


def _frozen(matrix: np.ndarray) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"Qubit operators are 2x2, got shape {m.shape}")
    m.flags.writeable = False
    return m


def _graded(matrix: np.ndarray, parity: int) -> np.ndarray:
    return SIGMA_Z @ matrix @ SIGMA_Z if parity % 2 else matrix


class HybridOperator:
    """
    Immutable 2x2 operator with Grassmann coefficients in left-normal form.
    """

    __slots__ = ("_algebra", "_terms")

    def __init__(self, algebra: GrassmannAlgebra, terms: Mapping[Monomial, np.ndarray]):
        self._algebra = algebra
        self._terms: Dict[Monomial, np.ndarray] = {
            tuple(m): _frozen(M)
            for m, M in terms.items()
            if np.max(np.abs(M)) > PRUNE_THRESHOLD
        }

    @property
    def algebra(self) -> GrassmannAlgebra:
        return self._algebra

    @property
    def terms(self) -> Mapping[Monomial, np.ndarray]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def _check(self, other: "HybridOperator") -> None:
        if other._algebra != self._algebra:
            raise AlgebraContextError(
                f"Algebra mismatch: {self._algebra.pairs} vs {other._algebra.pairs}"
            )

    def __add__(self, other: "HybridOperator") -> "HybridOperator":
        if not isinstance(other, HybridOperator):
            return NotImplemented
        self._check(other)
        terms = {m: M.copy() for m, M in self._terms.items()}
        for m, M in other._terms.items():
            terms[m] = terms[m] + M if m in terms else M.copy()
        return HybridOperator(self._algebra, terms)

    def __neg__(self) -> "HybridOperator":
        return HybridOperator(self._algebra, {m: -M for m, M in self._terms.items()})

    def __sub__(self, other: "HybridOperator") -> "HybridOperator":
        if not isinstance(other, HybridOperator):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Union["HybridOperator", Number]) -> "HybridOperator":
        if isinstance(other, HybridOperator):
            return hmul(self, other)
        if isinstance(other, Number):
            return HybridOperator(self._algebra, {m: M * other for m, M in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other: Number) -> "HybridOperator":
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def matrix_part(self, *labels: str) -> np.ndarray:
        """
        Matrix multiplying the Grassmann product of ``labels`` as written.
        """
        sign, m = self._algebra.monomial(*labels)
        return sign * self._terms.get(m, np.zeros((2, 2), dtype=complex))

    def scalar_part(self) -> np.ndarray:
        return self._terms.get((), np.zeros((2, 2), dtype=complex)).copy()

    def max_abs_difference(self, other: "HybridOperator") -> float:
        self._check(other)
        zero = np.zeros((2, 2), dtype=complex)
        keys = set(self._terms) | set(other._terms)
        return max(
            (float(np.max(np.abs(self._terms.get(k, zero) - other._terms.get(k, zero)))) for k in keys),
            default=0.0,
        )

    def isclose(self, other: "HybridOperator", atol: float = grassmann.EQUALITY_TOLERANCE) -> bool:
        return self.max_abs_difference(other) <= atol

    def __repr__(self) -> str:
        parts = []
        for m, M in sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            labels = "".join(self._algebra.generator(i).label for i in m) or "1"
            parts.append(f"{labels}*{M.tolist()}")
        return " + ".join(parts) if parts else "0"


def qubit(algebra: GrassmannAlgebra, matrix: np.ndarray) -> HybridOperator:
    """1 (x) M"""
    return HybridOperator(algebra, {(): matrix})


def grassmann_part(element: GrassmannElement) -> HybridOperator:
    """g (x) identity"""
    return HybridOperator(element.algebra, {m: c * IDENTITY for m, c in element})


def hybrid_from(
    algebra: GrassmannAlgebra, pieces: Iterable[Tuple[GrassmannElement, np.ndarray]]
) -> HybridOperator:
    """
    Sum of g (x) M pieces given with the Grassmann factor already on the left.
    """
    terms: Dict[Monomial, np.ndarray] = {}
    for element, matrix in pieces:
        if element.algebra != algebra:
            raise AlgebraContextError(f"Algebra mismatch: {element.algebra.pairs} vs {algebra.pairs}")
        for m, c in element:
            terms[m] = terms.get(m, 0) + c * np.asarray(matrix, dtype=complex)
    return HybridOperator(algebra, terms)


def hmul(*operators: HybridOperator) -> HybridOperator:
    """
    Product of hybrid operators, left to right.

    (g M)(h N) = (g h) (sigma_z^p(h) M sigma_z^p(h) N)

    :param operators: Two or more factors in the same algebra.
    :return: The normal-form product.
    :raises AlgebraContextError: On mismatched algebras.
    """
    if not operators:
        raise ValueError("hmul needs at least one operator")
    result = operators[0]
    for right in operators[1:]:
        result._check(right)
        terms: Dict[Monomial, np.ndarray] = {}
        for g, M in result._terms.items():
            for h, N in right._terms.items():
                sign, gh = merge_monomials(g, h)
                if not sign:
                    continue
                piece = sign * (_graded(M, len(h)) @ N)
                terms[gh] = terms[gh] + piece if gh in terms else piece
        result = HybridOperator(result._algebra, terms)
    return result


def htrace(operator: HybridOperator) -> GrassmannElement:
    """
    Graded trace: Tr[g M] = g Tr[M] for even g, g Tr[sigma_z M] for odd g.
    """
    terms = {}
    for g, M in operator._terms.items():
        weight = _ODD_TRACE_WEIGHT if len(g) % 2 else IDENTITY
        terms[g] = complex(np.trace(weight @ M))
    return GrassmannElement(operator._algebra, terms)


def hadjoint(operator: HybridOperator) -> HybridOperator:
    """
    Generalized adjoint, (g M)^dagger = M^dagger g* moved back to left-normal form.
    """
    terms: Dict[Monomial, np.ndarray] = {}
    for g, M in operator._terms.items():
        sign, g_conj = sort_sign([i ^ 1 for i in reversed(g)])
        piece = sign * _graded(M.conj().T, len(g))
        terms[g_conj] = terms[g_conj] + piece if g_conj in terms else piece
    return HybridOperator(operator._algebra, terms)


def reflect(operator: HybridOperator, pair: str) -> HybridOperator:
    """
    Substitution xi -> -xi on the Grassmann parts; D(-xi) = reflect(D(xi)).
    """
    p = operator._algebra.pair_index(pair)
    terms = {}
    for g, M in operator._terms.items():
        count = sum(1 for i in g if i // 2 == p)
        terms[g] = -M if count % 2 else M
    return HybridOperator(operator._algebra, terms)


def berezin_integrate(operator: HybridOperator, pair: str) -> HybridOperator:
    """
    Entrywise Berezin integral of the Grassmann coefficients over d^2 xi.

    The matrix part sits to the right of every Grassmann factor, so each matrix
    entry integrates as an ordinary Grassmann element.
    """
    algebra = operator._algebra
    result: Dict[Monomial, np.ndarray] = {}
    for i in range(2):
        for j in range(2):
            entry = GrassmannElement(algebra, {g: M[i, j] for g, M in operator._terms.items()})
            for m, c in grassmann.berezin_integrate(entry, pair):
                result.setdefault(m, np.zeros((2, 2), dtype=complex))[i, j] += c
    return HybridOperator(algebra, result)


def displacement(algebra: GrassmannAlgebra, pair: str) -> HybridOperator:
    """
    Qubit displacement operator

        D(xi) = 1 + sigma_+ xi - xi* sigma_- - sigma_z xi* xi / 2
              = 1 - xi sigma_+ - xi* sigma_- + (xi xi* / 2) sigma_z

    :param algebra: Algebra context holding the pair.
    :param pair: Pair name of xi.
    :return: D(xi) in left-normal form.
    """
    xi = algebra.gen(pair)
    xi_c = algebra.gen(pair, conjugated=True)
    return hybrid_from(
        algebra,
        [
            (algebra.one(), IDENTITY),
            (-xi, SIGMA_PLUS),
            (-xi_c, SIGMA_MINUS),
            (algebra.product(pair, f"{pair}*", coefficient=0.5), SIGMA_Z),
        ],
    )


def etilde(algebra: GrassmannAlgebra, pair: str) -> HybridOperator:
    """
    E~(xi) = sigma_z - xi* xi / 2 + sigma_+ xi - xi* sigma_-, the kernel of the
    characteristic-function inversion.
    """
    xi = algebra.gen(pair)
    xi_c = algebra.gen(pair, conjugated=True)
    return hybrid_from(
        algebra,
        [
            (algebra.one(), SIGMA_Z),
            (algebra.product(pair, f"{pair}*", coefficient=0.5), IDENTITY),
            (-xi, SIGMA_PLUS),
            (-xi_c, SIGMA_MINUS),
        ],
    )


def coherent_state(algebra: GrassmannAlgebra, pair: str) -> Tuple[GrassmannElement, GrassmannElement]:
    """
    Amplitudes of |xi> = D(xi)|0> on |0> and |1>: (1 - xi* xi / 2, -xi).
    """
    return (
        algebra.one() - algebra.product(f"{pair}*", pair, coefficient=0.5),
        -algebra.gen(pair),
    )


def apply_to_amplitudes(
    matrix: np.ndarray, amplitudes: Sequence[GrassmannElement]
) -> Tuple[GrassmannElement, GrassmannElement]:
    """
    Applies a qubit matrix to a ket with Grassmann amplitudes.

    Kets carry the grading |j> xi = (-1)^j xi |j>, so odd amplitude content
    picks up sigma_z on both sides of the matrix.
    """
    matrix = np.asarray(matrix, dtype=complex)
    graded = _graded(matrix, 1)
    out = []
    for i in range(2):
        total = amplitudes[0].algebra.zero()
        for j in range(2):
            even, odd = grassmann.parity_split(amplitudes[j])
            total = total + even * complex(matrix[i, j]) + odd * complex(graded[i, j])
        out.append(total)
    return out[0], out[1]


def state_norm(amplitudes: Sequence[GrassmannElement]) -> GrassmannElement:
    """
    Graded inner product <psi|psi> = sum_j conj(a_j) a_j.
    """
    total = amplitudes[0].algebra.zero()
    for a in amplitudes:
        total = total + conj(a) * a
    return total


def apply_kraus(kraus: Sequence[np.ndarray], operator: HybridOperator) -> HybridOperator:
    """
    Kraus sandwich sum_k M_k X M_k^dagger evaluated with hmul.
    """
    algebra = operator.algebra
    result = HybridOperator(algebra, {})
    for M in kraus:
        result = result + hmul(qubit(algebra, M), operator, qubit(algebra, np.conj(M).T))
    return result


def anticommutator(a: HybridOperator, b: HybridOperator) -> HybridOperator:
    """{a, b} = ab + ba under hmul"""
    return hmul(a, b) + hmul(b, a)
