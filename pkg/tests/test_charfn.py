import numpy as np
import pytest

from src.qubit_channels import oracle
from src.qubit_channels.charfn import (
    CharFn,
    bloch_from_char,
    char_from_bloch,
    char_of,
    density_checks,
    density_entries,
    invert,
)
from src.qubit_channels.errors import DomainError
from src.qubit_channels.grassmann import GrassmannAlgebra

ATOL = 1e-12


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(3)


def test_characteristic_coefficients() -> None:
    """
    Test chi = Tr + theta01 xi - theta10 xi* - (theta00 - theta11)/2 xi* xi.
    """
    T = np.array([[0.6, 0.2 - 0.1j], [0.3 + 0.4j, 0.4]])
    chi = char_of(T)
    assert chi.A == pytest.approx(1.0)
    assert chi.B1 == pytest.approx(0.2 - 0.1j)
    assert chi.B2 == pytest.approx(-(0.3 + 0.4j))
    assert chi.C == pytest.approx(-0.1)


def test_identity_and_pure_states() -> None:
    """
    Test the characteristic functions of 1, |0><0| and |1><1|.
    """
    assert char_of(np.eye(2)).coefficients() == pytest.approx((2, 0, 0, 0))
    assert char_of(np.diag([1, 0])).coefficients() == pytest.approx((1, 0, 0, -0.5))
    assert char_of(np.diag([0, 1])).coefficients() == pytest.approx((1, 0, 0, 0.5))


def test_inversion_roundtrip(rng: np.random.Generator) -> None:
    """
    Test that inverting chi(Theta) returns Theta for random complex operators.
    """
    for _ in range(200):
        T = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        np.testing.assert_allclose(invert(char_of(T)), T, atol=ATOL)


def test_pair_name_is_kept() -> None:
    """
    Test that a characteristic function over another pair name inverts to the same operator.
    """
    T = np.array([[0.25, 0.5j], [-0.5j, 0.75]])
    chi = char_of(T, pair="eta")
    assert chi.pair == "eta"
    np.testing.assert_allclose(invert(chi), T, atol=ATOL)


def test_density_entries() -> None:
    """
    Test that p = integral chi + 1/2 and gamma = integral chi xi* read rho00 and rho01.
    """
    rho = np.array([[0.7, 0.1 - 0.2j], [0.1 + 0.2j, 0.3]])
    p, gamma = density_entries(char_of(rho))
    assert p == pytest.approx(0.7)
    assert gamma == pytest.approx(0.1 - 0.2j)


def test_pure_state_is_on_positivity_boundary() -> None:
    """
    Test that |0><0| saturates the positivity condition.
    """
    report = density_checks(char_of(np.diag([1, 0])))
    assert report.is_density
    assert report.positivity_lhs == pytest.approx(0.25)


def test_invalid_operators_are_flagged() -> None:
    """
    Test that non-Hermitian, unnormalized and non-positive operators are rejected.
    """
    assert not density_checks(char_of(np.array([[0.5, 0.5], [0.0, 0.5]]))).hermitian
    assert not density_checks(char_of(np.diag([0.5, 0.25]))).normalized
    negative = density_checks(char_of(np.diag([1.2, -0.2])))
    assert negative.hermitian and negative.normalized
    assert not negative.positive


def test_density_checks_agree_with_spectrum(rng: np.random.Generator) -> None:
    """
    Test agreement with the eigenvalue test on random Hermitian unit-trace operators.
    """
    for _ in range(300):
        V = oracle.random_kraus(rng, rank=1)[0]
        top = rng.uniform(-0.5, 1.5)
        H = V @ np.diag([top, 1 - top]) @ V.conj().T
        expected = bool(np.min(np.linalg.eigvalsh(H)) >= -1e-10)
        assert density_checks(char_of(H)).is_density == expected


def test_bloch_roundtrip(rng: np.random.Generator) -> None:
    """
    Test that the Bloch vector survives the trip through the characteristic function.
    """
    for _ in range(20):
        r = rng.normal(size=3)
        r = r / np.linalg.norm(r) * rng.uniform(0, 1)
        np.testing.assert_allclose(bloch_from_char(char_from_bloch(r)), r, atol=ATOL)


def test_bloch_needs_trace() -> None:
    """
    Test that a traceless operator has no Bloch vector.
    """
    with pytest.raises(DomainError):
        bloch_from_char(char_of(np.diag([1, -1])))


def test_from_element_rejects_foreign_generators() -> None:
    """
    Test that an element depending on another pair is not a characteristic function of xi.
    """
    algebra = GrassmannAlgebra(("zeta", "xi"))
    with pytest.raises(DomainError):
        CharFn.from_element(algebra.one() + algebra.gen("zeta"), "xi")


def test_value_at_zero_is_trace() -> None:
    """
    Test that chi(0) is the trace of the operator.
    """
    assert char_of(np.array([[0.5, 1.0], [2.0, 1.5]])).evaluate_zero() == pytest.approx(2.0)
