import numpy as np
import pytest

from src.qubit_channels.grassmann import GrassmannAlgebra, random_element
from src.qubit_channels.hybrid import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    HybridOperator,
    anticommutator,
    apply_to_amplitudes,
    apply_kraus,
    berezin_integrate,
    coherent_state,
    displacement,
    grassmann_part,
    hadjoint,
    hmul,
    htrace,
    hybrid_from,
    qubit,
    reflect,
    state_norm,
)

ALGEBRA = GrassmannAlgebra(("xi",))
TWO_PAIRS = GrassmannAlgebra(("zeta", "xi"))
ATOL = 1e-10


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(11)


def random_hybrid(algebra: GrassmannAlgebra, rng: np.random.Generator) -> HybridOperator:
    """
    Helper function building a random hybrid operator from a few Grassmann/matrix pieces.
    """
    return hybrid_from(
        algebra,
        [
            (random_element(algebra, rng, density=0.5), rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            for _ in range(3)
        ],
    )


def test_rejects_non_qubit_matrix() -> None:
    """
    Test that only 2x2 matrix parts are accepted.
    """
    with pytest.raises(ValueError):
        qubit(ALGEBRA, np.eye(3))


def test_odd_grassmann_anticommutes_with_ladder_operators() -> None:
    """
    Test that xi anticommutes with sigma_+ and sigma_- but commutes with sigma_z.
    """
    xi = grassmann_part(ALGEBRA.gen("xi"))
    for ladder in (SIGMA_PLUS, SIGMA_MINUS):
        assert anticommutator(xi, qubit(ALGEBRA, ladder)).max_abs_difference(HybridOperator(ALGEBRA, {})) < ATOL
    commutator = hmul(xi, qubit(ALGEBRA, SIGMA_Z)) - hmul(qubit(ALGEBRA, SIGMA_Z), xi)
    assert commutator.max_abs_difference(HybridOperator(ALGEBRA, {})) < ATOL


def test_moving_odd_monomial_left_conjugates_by_sigma_z() -> None:
    """
    Test the normal-ordering rule M xi = xi (sigma_z M sigma_z).
    """
    M = np.array([[1, 2], [3, 4]], dtype=complex)
    product = hmul(qubit(ALGEBRA, M), grassmann_part(ALGEBRA.gen("xi")))
    np.testing.assert_allclose(product.matrix_part("xi"), SIGMA_Z @ M @ SIGMA_Z)


def test_product_is_associative(rng: np.random.Generator) -> None:
    """
    Test associativity of hmul on random hybrid operators.
    """
    for _ in range(10):
        a, b, c = (random_hybrid(TWO_PAIRS, rng) for _ in range(3))
        assert hmul(hmul(a, b), c).max_abs_difference(hmul(a, hmul(b, c))) < 1e-9


def test_adjoint_reverses_products(rng: np.random.Generator) -> None:
    """
    Test that the generalized adjoint is an involution that reverses products.
    """
    for _ in range(10):
        a, b = random_hybrid(TWO_PAIRS, rng), random_hybrid(TWO_PAIRS, rng)
        assert hadjoint(hadjoint(a)).max_abs_difference(a) < ATOL
        assert hadjoint(hmul(a, b)).max_abs_difference(hmul(hadjoint(b), hadjoint(a))) < 1e-9


def test_displacement_is_unitary() -> None:
    """
    Test that D(xi)^dagger = D(-xi) and D(xi)^dagger D(xi) = 1.
    """
    D = displacement(ALGEBRA, "xi")
    assert hadjoint(D).max_abs_difference(reflect(D, "xi")) < ATOL
    assert hmul(hadjoint(D), D).max_abs_difference(qubit(ALGEBRA, IDENTITY)) < ATOL
    assert hmul(D, hadjoint(D)).max_abs_difference(qubit(ALGEBRA, IDENTITY)) < ATOL


def test_trace_of_displacement() -> None:
    """
    Test that the graded trace of D(xi) is 2, the characteristic function of the identity.
    """
    assert htrace(displacement(ALGEBRA, "xi")) == 2


def test_trace_is_cyclic_for_qubit_operators(rng: np.random.Generator) -> None:
    """
    Test Tr[X Theta] = Tr[Theta X] for a plain qubit operator Theta.
    """
    for _ in range(10):
        X = random_hybrid(TWO_PAIRS, rng)
        theta = qubit(TWO_PAIRS, rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        assert htrace(hmul(X, theta)).isclose(htrace(hmul(theta, X)), atol=1e-9)


def test_integrating_displacement() -> None:
    """
    Test that only the xi xi* sigma_z / 2 term of D(xi) survives integration.
    """
    integrated = berezin_integrate(displacement(ALGEBRA, "xi"), "xi")
    np.testing.assert_allclose(integrated.scalar_part(), SIGMA_Z / 2, atol=ATOL)


def test_coherent_state_is_normalized() -> None:
    """
    Test that the Grassmann coherent state has unit norm.
    """
    assert state_norm(coherent_state(ALGEBRA, "xi")) == 1


def test_apply_kraus_matches_matrix_sandwich(rng: np.random.Generator) -> None:
    """
    Test that a unitary Kraus sandwich on a plain qubit operator is U M U^dagger.
    """
    U = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    image = apply_kraus([U], qubit(ALGEBRA, M))
    np.testing.assert_allclose(image.scalar_part(), U @ M @ U.conj().T, atol=ATOL)
    D = displacement(ALGEBRA, "xi")
    assert apply_kraus([IDENTITY], D).max_abs_difference(D) < ATOL


def test_sigma_minus_eigen_relation() -> None:
    """
    Test that sigma_- acting on the coherent-state amplitudes gives xi times them.
    """
    xi = ALGEBRA.gen("xi")
    amplitudes = coherent_state(ALGEBRA, "xi")
    lowered = apply_to_amplitudes(SIGMA_MINUS, amplitudes)
    for got, amplitude in zip(lowered, amplitudes):
        assert got.isclose(xi * amplitude, atol=ATOL)
    assert lowered[0].isclose(xi, atol=ATOL)
