from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.qubit_channels.errors import DomainError
from src.qubit_channels.grassmann import (
    GrassmannAlgebra,
    GrassmannElement,
    berezin_integrate,
    conj,
    four_coefficient,
    max_abs_difference,
    reflect,
)
from src.qubit_channels.hybrid import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    IDENTITY,
    displacement,
    etilde,
    grassmann_part,
    hmul,
    htrace,
    qubit,
)
from src.qubit_channels import hybrid

DEFAULT_PAIR: str = "xi"
HERMITICITY_TOLERANCE: float = 1e-10
NORMALIZATION_TOLERANCE: float = 1e-10
POSITIVITY_TOLERANCE: float = 1e-12


@dataclass(frozen=True)
class CharFn:
    """
    Characteristic function chi(xi) = A + B1 xi + B2 xi* + C xi* xi of a qubit
    operator.
    """

    A: complex
    B1: complex
    B2: complex
    C: complex
    pair: str = DEFAULT_PAIR

    def to_element(self, algebra: Optional[GrassmannAlgebra] = None, pair: Optional[str] = None) -> GrassmannElement:
        """
        Element form, optionally over another pair and algebra.

        :param algebra: Target algebra; a one-pair algebra when omitted.
        :param pair: Pair name to use; the stored pair when omitted.
        :return: The four-coefficient element.
        """
        pair = pair or self.pair
        algebra = algebra or GrassmannAlgebra((pair,))
        return four_coefficient(algebra, pair, self.A, self.B1, self.B2, self.C)

    @classmethod
    def from_element(cls, element: GrassmannElement, pair: str = DEFAULT_PAIR) -> "CharFn":
        """
        Reads the four coefficients of an element over a single pair.

        :raises DomainError: If the element depends on other generators.
        """
        algebra = element.algebra
        p = algebra.pair_index(pair)
        foreign = [m for m, _ in element if any(g // 2 != p for g in m)]
        if foreign:
            raise DomainError(f"Element depends on generators outside pair '{pair}'")
        return cls(
            A=element.scalar_part,
            B1=element.coefficient(pair),
            B2=element.coefficient(f"{pair}*"),
            C=element.coefficient(f"{pair}*", pair),
            pair=pair,
        )

    def evaluate_zero(self) -> complex:
        return self.A

    def coefficients(self) -> Tuple[complex, complex, complex, complex]:
        return self.A, self.B1, self.B2, self.C

    def max_abs_difference(self, other: "CharFn") -> float:
        return float(max(abs(x - y) for x, y in zip(self.coefficients(), other.coefficients())))


@dataclass(frozen=True)
class ValidityReport:
    hermitian: bool
    normalized: bool
    positive: bool
    positivity_lhs: float
    hermiticity_residual: float
    trace: complex
    integral: complex
    coherence: complex

    @property
    def is_density(self) -> bool:
        return self.hermitian and self.normalized and self.positive


def char_of(op: np.ndarray, pair: str = DEFAULT_PAIR) -> CharFn:
    """
    Characteristic function chi(xi) = Tr[Theta D(xi)].

    :param op: 2x2 operator Theta.
    :param pair: Pair name of xi.
    :return: The CharFn.
    """
    algebra = GrassmannAlgebra((pair,))
    chi = htrace(hmul(qubit(algebra, op), displacement(algebra, pair)))
    return CharFn.from_element(chi, pair)


def invert(chi: CharFn) -> np.ndarray:
    """
    Theta = integral d^2 xi chi(xi) E~(-xi).

    :param chi: Characteristic function.
    :return: The 2x2 operator.
    """
    algebra = GrassmannAlgebra((chi.pair,))
    integrand = hmul(
        grassmann_part(chi.to_element(algebra)),
        hybrid.reflect(etilde(algebra, chi.pair), chi.pair),
    )
    return hybrid.berezin_integrate(integrand, chi.pair).scalar_part()


def density_checks(chi: CharFn) -> ValidityReport:
    """
    Density-operator conditions on a characteristic function.

    Hermiticity is chi(xi) = [chi(-xi)]*, normalization chi(0) = 1 and
    positivity |integral chi xi|^2 + [integral chi]^2 <= 1/4.

    :param chi: Characteristic function.
    :return: ValidityReport with the evaluated quantities.
    """
    pair = chi.pair
    element = chi.to_element()
    mirrored = conj(reflect(element, pair))
    hermiticity_residual = max_abs_difference(element, mirrored)

    integral = berezin_integrate(element, pair).scalar_part
    coherence = berezin_integrate(element * element.algebra.gen(pair), pair).scalar_part
    positivity_lhs = abs(coherence) ** 2 + integral.real ** 2

    hermitian = (
        hermiticity_residual <= HERMITICITY_TOLERANCE
        and abs(integral.imag) <= HERMITICITY_TOLERANCE
    )
    return ValidityReport(
        hermitian=hermitian,
        normalized=abs(chi.A - 1) <= NORMALIZATION_TOLERANCE,
        positive=positivity_lhs <= 0.25 + POSITIVITY_TOLERANCE,
        positivity_lhs=float(positivity_lhs),
        hermiticity_residual=float(hermiticity_residual),
        trace=chi.A,
        integral=integral,
        coherence=coherence,
    )


def density_entries(chi: CharFn) -> Tuple[complex, complex]:
    """
    (p, gamma) with p = integral chi + 1/2 and gamma = integral chi xi*.
    """
    element = chi.to_element()
    algebra = element.algebra
    p = berezin_integrate(element, chi.pair).scalar_part + 0.5
    gamma = berezin_integrate(element * algebra.gen(chi.pair, conjugated=True), chi.pair).scalar_part
    return p, gamma


def bloch_from_char(chi: CharFn) -> np.ndarray:
    """
    Bloch vector r_i = Tr[sigma_i rho] / Tr[rho] of the operator behind chi.
    """
    rho = invert(chi)
    trace = np.trace(rho)
    if abs(trace) <= NORMALIZATION_TOLERANCE:
        raise DomainError("Bloch vector needs a nonzero trace")
    return np.real(np.array([np.trace(s @ rho) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]) / trace)


def char_from_bloch(r: np.ndarray, trace: float = 1.0, pair: str = DEFAULT_PAIR) -> CharFn:
    """
    Characteristic function of (trace / 2)(1 + r . sigma).

    :param r: Bloch vector.
    :param trace: Trace of the operator.
    :param pair: Pair name of xi.
    :return: The CharFn.
    """
    r = np.asarray(r, dtype=float)
    rho = 0.5 * trace * (IDENTITY + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)
    return char_of(rho, pair)
