"""
Green-function representation of qubit channels

A channel N acts on characteristic functions through a kernel G(zeta, xi):

    chi'(xi) = integral d^2 zeta chi(zeta) G(zeta, xi)
    G(zeta, xi) = sum_k Tr[M_k sigma_z D(-zeta) M_k^dagger D(xi)]

Kernels live in the algebra with pairs ("zeta", "xi"); composition runs in a
six-generator algebra with an intermediate pair "xip".
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.logger.logger import Logger
from src.qubit_channels.charfn import CharFn
from src.qubit_channels.errors import DomainError
from src.qubit_channels.grassmann import (
    GrassmannAlgebra,
    GrassmannElement,
    berezin_integrate,
    delta,
    graded_exp,
    max_abs_difference,
    relabel,
    substitute_zero,
    sum_elements,
)
from src.qubit_channels.hybrid import SIGMA_Z, displacement, hmul, htrace, qubit, reflect
from src.qubit_channels.oracle import AffineChannelData, validate_kraus

logger = Logger(__name__)

INPUT_PAIR: str = "zeta"
OUTPUT_PAIR: str = "xi"
INTERMEDIATE_PAIR: str = "xip"

KERNEL_ALGEBRA = GrassmannAlgebra((INPUT_PAIR, OUTPUT_PAIR))
COMPOSITION_ALGEBRA = GrassmannAlgebra((INPUT_PAIR, INTERMEDIATE_PAIR, OUTPUT_PAIR))

GAUSSIAN_TOLERANCE: float = 1e-10
IMAGINARY_TOLERANCE: float = 1e-10
TRACE_TOLERANCE: float = 1e-12

__all__ = [
    "AffineChannelData",
    "GaussianParams",
    "GreenFn",
    "apply_green",
    "compose_gaussian",
    "compose_green",
    "detect_gaussian",
    "gaussian_kernel",
    "green_from_kraus",
    "green_from_kraus_dual",
    "green_from_tT",
    "identity_green",
    "mix_green",
    "sandwich_green",
]


@dataclass(frozen=True)
class GreenFn:
    kernel: GrassmannElement

    def __post_init__(self) -> None:
        if self.kernel.algebra != KERNEL_ALGEBRA:
            raise DomainError(f"Green kernels live in {KERNEL_ALGEBRA.pairs}, got {self.kernel.algebra.pairs}")

    def coefficient(self, *labels: str) -> complex:
        return self.kernel.coefficient(*labels)

    def max_abs_difference(self, other: "GreenFn") -> float:
        return max_abs_difference(self.kernel, other.kernel)

    def isclose(self, other: "GreenFn", atol: float = 1e-12) -> bool:
        return self.max_abs_difference(other) <= atol

    def trace_preservation_residual(self) -> float:
        """
        Deviation of G(zeta, 0) from zeta zeta*.
        """
        at_zero = substitute_zero(self.kernel, OUTPUT_PAIR)
        return max_abs_difference(at_zero, KERNEL_ALGEBRA.product(INPUT_PAIR, f"{INPUT_PAIR}*"))

    def __add__(self, other: "GreenFn") -> "GreenFn":
        return GreenFn(self.kernel + other.kernel)

    def __mul__(self, weight: float) -> "GreenFn":
        return GreenFn(self.kernel * weight)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"GreenFn({self.kernel!r})"


@dataclass(frozen=True)
class GaussianParams:
    """
    Parameters of G = delta(zeta - a xi - b xi*) exp[-c xi* xi].
    """

    a: complex
    b: complex
    c: float

    @property
    def canonical_exponent(self) -> float:
        """x of exp[x xi xi*]; equal to c since xi xi* = -xi* xi."""
        return self.c

    def to_affine(self) -> Tuple[float, float, float]:
        """
        (lambda1, lambda2, t3) = (a - b, a + b, 2c) for real a, b.

        :raises DomainError: If a or b carries an imaginary part.
        """
        if abs(complex(self.a).imag) > IMAGINARY_TOLERANCE or abs(complex(self.b).imag) > IMAGINARY_TOLERANCE:
            raise DomainError("Affine form needs real Gaussian parameters a and b")
        a, b = complex(self.a).real, complex(self.b).real
        return a - b, a + b, 2 * self.c

    def max_abs_difference(self, other: "GaussianParams") -> float:
        return float(max(abs(self.a - other.a), abs(self.b - other.b), abs(self.c - other.c)))


def identity_green() -> GreenFn:
    """(zeta - xi)(zeta* - xi*)"""
    return GreenFn(delta(KERNEL_ALGEBRA, INPUT_PAIR, KERNEL_ALGEBRA.gen(OUTPUT_PAIR)))


def sandwich_green(A: np.ndarray, B: np.ndarray) -> GreenFn:
    """
    Kernel of Theta -> A Theta B: Tr[A sigma_z D(-zeta) B D(xi)].

    Not trace preserving in general.
    """
    algebra = KERNEL_ALGEBRA
    kernel = htrace(
        hmul(
            qubit(algebra, np.asarray(A) @ SIGMA_Z),
            reflect(displacement(algebra, INPUT_PAIR), INPUT_PAIR),
            qubit(algebra, B),
            displacement(algebra, OUTPUT_PAIR),
        )
    )
    return GreenFn(kernel)


def green_from_kraus(kraus: Sequence[np.ndarray]) -> GreenFn:
    """
    Kernel sum_k Tr[M_k sigma_z D(-zeta) M_k^dagger D(xi)].

    :param kraus: Kraus operators.
    :return: The Green function.
    :raises ChannelValidationError: If the Kraus set is not trace preserving.
    """
    kraus = validate_kraus(kraus)
    kernel = sum_elements(
        KERNEL_ALGEBRA, (sandwich_green(M, np.conj(M).T).kernel for M in kraus)
    )
    return GreenFn(kernel)


def green_from_kraus_dual(kraus: Sequence[np.ndarray]) -> GreenFn:
    """
    Heisenberg-picture kernel Tr[sigma_z D(-zeta) N_H(D(xi))] with the dual map
    applied to D(xi) by hybrid sandwiching.
    """
    kraus = validate_kraus(kraus)
    algebra = KERNEL_ALGEBRA
    d_xi = displacement(algebra, OUTPUT_PAIR)
    dual_image = None
    for M in kraus:
        term = hmul(qubit(algebra, np.conj(M).T), d_xi, qubit(algebra, M))
        dual_image = term if dual_image is None else dual_image + term
    kernel = htrace(
        hmul(
            qubit(algebra, SIGMA_Z),
            reflect(displacement(algebra, INPUT_PAIR), INPUT_PAIR),
            dual_image,
        )
    )
    return GreenFn(kernel)


def gaussian_kernel(params: GaussianParams) -> GreenFn:
    """
    delta(zeta - a xi - b xi*) exp[-c xi* xi]
    """
    algebra = KERNEL_ALGEBRA
    shift = algebra.gen(OUTPUT_PAIR) * complex(params.a) + algebra.gen(OUTPUT_PAIR, conjugated=True) * complex(params.b)
    exponent = algebra.product(f"{OUTPUT_PAIR}*", OUTPUT_PAIR, coefficient=-float(params.c))
    return GreenFn(delta(algebra, INPUT_PAIR, shift) * graded_exp(exponent))


def green_from_tT(data: AffineChannelData) -> GreenFn:
    """
    Kernel of a channel with diagonal T = diag(l1, l2, l3):

        delta(zeta - (l2 + l1)/2 xi - (l2 - l1)/2 xi*) exp[-(t3/2) xi* xi]
        + (l3 - l1 l2) xi xi*
        + (t1 - i t2)/2 zeta zeta* xi - (t1 + i t2)/2 zeta zeta* xi*

    :param data: Affine data with diagonal T.
    :return: The Green function.
    :raises DomainError: If T is not diagonal.
    """
    if not data.is_diagonal():
        raise DomainError("green_from_tT needs a diagonal T; rotate to canonical form first")
    l1, l2, l3 = data.lambdas
    t1, t2, t3 = (float(x) for x in data.t)
    algebra = KERNEL_ALGEBRA
    z, zc, x, xc = INPUT_PAIR, f"{INPUT_PAIR}*", OUTPUT_PAIR, f"{OUTPUT_PAIR}*"
    kernel = gaussian_kernel(GaussianParams(a=(l1 + l2) / 2, b=(l2 - l1) / 2, c=t3 / 2)).kernel
    kernel = kernel + algebra.element(
        {
            (x, xc): l3 - l1 * l2,
            (z, zc, x): (t1 - 1j * t2) / 2,
            (z, zc, xc): -(t1 + 1j * t2) / 2,
        }
    )
    return GreenFn(kernel)


def apply_green(G: GreenFn, chi: CharFn) -> CharFn:
    """
    chi'(xi) = integral d^2 zeta chi(zeta) G(zeta, xi).

    :param G: Channel kernel.
    :param chi: Input characteristic function over any pair name.
    :return: Output characteristic function over the input's pair name.
    """
    chi_zeta = relabel(chi.to_element(), KERNEL_ALGEBRA, {chi.pair: INPUT_PAIR})
    image = berezin_integrate(chi_zeta * G.kernel, INPUT_PAIR)
    output = relabel(image, GrassmannAlgebra((chi.pair,)), {OUTPUT_PAIR: chi.pair, INPUT_PAIR: chi.pair})
    return CharFn.from_element(output, chi.pair)


def compose_green(first: GreenFn, second: GreenFn) -> GreenFn:
    """
    Kernel of second o first: integral d^2 xi' G1(zeta, xi') G2(xi', xi).

    :param first: Kernel of the channel applied first.
    :param second: Kernel of the channel applied second.
    :return: The composed kernel.
    """
    g1 = relabel(first.kernel, COMPOSITION_ALGEBRA, {OUTPUT_PAIR: INTERMEDIATE_PAIR})
    g2 = relabel(second.kernel, COMPOSITION_ALGEBRA, {INPUT_PAIR: INTERMEDIATE_PAIR})
    composed = berezin_integrate(g1 * g2, INTERMEDIATE_PAIR)
    return GreenFn(relabel(composed, KERNEL_ALGEBRA, {INTERMEDIATE_PAIR: OUTPUT_PAIR}))


def _gaussian_candidate(G: GreenFn) -> GaussianParams:
    z, zc, x, xc = INPUT_PAIR, f"{INPUT_PAIR}*", OUTPUT_PAIR, f"{OUTPUT_PAIR}*"
    return GaussianParams(
        a=G.coefficient(zc, x),
        b=G.coefficient(zc, xc),
        c=G.coefficient(z, zc, x, xc),
    )


def gaussian_mismatch(G: GreenFn) -> float:
    """
    Distance between G and the Gaussian kernel rebuilt from its cross terms.
    """
    candidate = _gaussian_candidate(G)
    rebuilt = gaussian_kernel(GaussianParams(candidate.a, candidate.b, complex(candidate.c).real))
    return G.max_abs_difference(rebuilt) + abs(complex(candidate.c).imag)


def detect_gaussian(G: GreenFn, tolerance: float = GAUSSIAN_TOLERANCE) -> Optional[GaussianParams]:
    """
    Gaussian parameters of G when G = delta(zeta - a xi - b xi*) exp[-c xi* xi].

    a and b are read from the zeta* xi and zeta* xi* terms, c from the
    zeta zeta* xi xi* term; the rebuilt kernel must match all coefficients.

    :param G: Kernel to test.
    :param tolerance: Allowed coefficient mismatch.
    :return: GaussianParams, or None when G is not Gaussian.
    """
    candidate = _gaussian_candidate(G)
    c = complex(candidate.c)
    if abs(c.imag) > IMAGINARY_TOLERANCE:
        logger.warning("Gaussian exponent is not real", imag=f"{c.imag:.3e}")
        return None
    params = GaussianParams(a=candidate.a, b=candidate.b, c=c.real)
    residual = G.max_abs_difference(gaussian_kernel(params))
    if residual > tolerance:
        logger.debug("Kernel is not Gaussian", residual=f"{residual:.3e}")
        return None
    return params


def compose_gaussian(first: GaussianParams, second: GaussianParams) -> GaussianParams:
    """
    Semigroup law of Gaussian kernels, first applied first:

        a = a1 a2 + b1 b2*,  b = a1 b2 + b1 a2*,  c = c1 (|a2|^2 - |b2|^2) + c2
    """
    a1, b1, c1 = complex(first.a), complex(first.b), first.c
    a2, b2, c2 = complex(second.a), complex(second.b), second.c
    return GaussianParams(
        a=a1 * a2 + b1 * b2.conjugate(),
        b=a1 * b2 + b1 * a2.conjugate(),
        c=c1 * (abs(a2) ** 2 - abs(b2) ** 2) + c2,
    )


def mix_green(weights: Sequence[float], kernels: Sequence[GreenFn]) -> GreenFn:
    """
    Convex combination sum_i w_i G_i of kernels.

    :param weights: Mixture weights.
    :param kernels: Kernels, one per weight.
    :return: The mixed kernel.
    :raises DomainError: If the lengths differ.
    """
    if len(weights) != len(kernels):
        raise DomainError("Mixture weights and kernels differ in length")
    return GreenFn(sum_elements(KERNEL_ALGEBRA, (k.kernel * float(w) for w, k in zip(weights, kernels))))
