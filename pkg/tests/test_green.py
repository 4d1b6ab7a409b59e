import numpy as np
import pytest

from src.qubit_channels import oracle
from src.qubit_channels.charfn import char_of
from src.qubit_channels.errors import ChannelValidationError, DomainError
from src.qubit_channels.green import (
    KERNEL_ALGEBRA,
    GaussianParams,
    GreenFn,
    apply_green,
    compose_gaussian,
    compose_green,
    detect_gaussian,
    gaussian_kernel,
    green_from_kraus,
    green_from_kraus_dual,
    green_from_tT,
    identity_green,
    mix_green,
    sandwich_green,
)
from src.qubit_channels.grassmann import GrassmannAlgebra

ATOL = 1e-12
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def amplitude_damping(gamma: float):
    """
    Helper function returning the amplitude-damping Kraus pair.
    """
    return [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def random_gaussian(rng: np.random.Generator) -> GaussianParams:
    """
    Helper function returning Gaussian parameters of a canonical channel.
    """
    theta, phi = rng.uniform(0, 2 * np.pi, size=2)
    q = rng.uniform(0, 1)
    return GaussianParams(
        a=np.cos(theta) * np.cos(phi),
        b=-np.sin(theta) * np.sin(phi),
        c=(2 * q - 1) * (np.cos(2 * theta) - np.cos(2 * phi)) / 4,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2)


def test_identity_kernel() -> None:
    """
    Test that the identity channel has kernel (zeta - xi)(zeta* - xi*).
    """
    expected = KERNEL_ALGEBRA.element(
        {("zeta", "zeta*"): 1, ("zeta", "xi*"): -1, ("xi", "zeta*"): -1, ("xi", "xi*"): 1}
    )
    assert identity_green().kernel.isclose(expected, atol=ATOL)
    assert green_from_kraus([np.eye(2)]).isclose(identity_green())


def test_kernel_lives_in_kernel_algebra() -> None:
    """
    Test that a Green function rejects elements of other algebras.
    """
    with pytest.raises(DomainError):
        GreenFn(GrassmannAlgebra(("xi",)).one())


def test_green_from_kraus_validates() -> None:
    """
    Test that a non trace-preserving Kraus set is rejected.
    """
    with pytest.raises(ChannelValidationError):
        green_from_kraus([np.diag([1.0, 0.5])])


def test_trace_preservation(rng: np.random.Generator) -> None:
    """
    Test that G(zeta, 0) = zeta zeta* for random channels.
    """
    for rank in (1, 2, 3, 4):
        assert green_from_kraus(oracle.random_kraus(rng, rank)).trace_preservation_residual() < ATOL


def test_dual_construction_matches(rng: np.random.Generator) -> None:
    """
    Test that the Heisenberg-picture construction gives the same kernel.
    """
    for _ in range(20):
        kraus = oracle.random_kraus(rng, int(rng.integers(1, 5)))
        assert green_from_kraus_dual(kraus).max_abs_difference(green_from_kraus(kraus)) < ATOL


def test_action_matches_oracle(rng: np.random.Generator) -> None:
    """
    Test that integrating against the kernel reproduces the channel output.
    """
    for _ in range(100):
        kraus = oracle.random_kraus(rng, int(rng.integers(1, 5)))
        rho = oracle.random_density(rng)
        image = apply_green(green_from_kraus(kraus), char_of(rho))
        assert image.max_abs_difference(char_of(oracle.apply_channel(kraus, rho))) < ATOL


def test_action_keeps_pair_name() -> None:
    """
    Test that the output characteristic function uses the input pair name.
    """
    chi = char_of(np.diag([0.25, 0.75]), pair="eta")
    image = apply_green(green_from_kraus(amplitude_damping(0.5)), chi)
    assert image.pair == "eta"
    assert image.max_abs_difference(char_of(np.diag([0.625, 0.375]), pair="eta")) < ATOL


def test_composition_matches_oracle(rng: np.random.Generator) -> None:
    """
    Test that kernel composition equals the kernel of the composed Kraus set.
    """
    for _ in range(30):
        first, second = oracle.random_kraus(rng, 2), oracle.random_kraus(rng, 3)
        composed = compose_green(green_from_kraus(first), green_from_kraus(second))
        assert composed.max_abs_difference(green_from_kraus(oracle.compose_kraus(second, first))) < ATOL


def test_identity_is_neutral(rng: np.random.Generator) -> None:
    """
    Test that composing with the identity kernel on either side changes nothing.
    """
    G = green_from_kraus(oracle.random_kraus(rng, 2))
    assert compose_green(identity_green(), G).max_abs_difference(G) < ATOL
    assert compose_green(G, identity_green()).max_abs_difference(G) < ATOL


def test_gaussian_kernel_is_trace_preserving(rng: np.random.Generator) -> None:
    """
    Test G(zeta, 0) = zeta zeta* for Gaussian kernels.
    """
    for _ in range(10):
        assert gaussian_kernel(random_gaussian(rng)).trace_preservation_residual() < ATOL


def test_detect_gaussian() -> None:
    """
    Test Gaussian detection on the identity, sigma_z and dephasing.
    """
    assert detect_gaussian(identity_green()).max_abs_difference(GaussianParams(1, 0, 0)) < ATOL
    assert detect_gaussian(green_from_kraus([SIGMA_Z])).max_abs_difference(GaussianParams(-1, 0, 0)) < ATOL
    dephasing = mix_green([0.5, 0.5], [identity_green(), green_from_kraus([SIGMA_Z])])
    assert detect_gaussian(dephasing) is None


def test_amplitude_damping_is_gaussian() -> None:
    """
    Test that amplitude damping has a = sqrt(1 - gamma), b = 0, c = gamma / 2.
    """
    gamma = 0.36
    params = detect_gaussian(green_from_kraus(amplitude_damping(gamma)))
    assert params is not None
    assert params.max_abs_difference(GaussianParams(0.8, 0, gamma / 2)) < ATOL


def test_gaussian_semigroup(rng: np.random.Generator) -> None:
    """
    Test that composing Gaussian kernels follows the closed-form parameter law.
    """
    for _ in range(50):
        p1, p2 = random_gaussian(rng), random_gaussian(rng)
        composed = compose_green(gaussian_kernel(p1), gaussian_kernel(p2))
        assert composed.max_abs_difference(gaussian_kernel(compose_gaussian(p1, p2))) < ATOL
        detected = detect_gaussian(composed)
        assert detected is not None
        assert detected.max_abs_difference(compose_gaussian(p1, p2)) < 1e-10


def test_green_from_affine_data() -> None:
    """
    Test that the (t, T) construction agrees with the Kraus construction.
    """
    kraus = amplitude_damping(0.3)
    data = oracle.tT_from_kraus(kraus)
    assert green_from_tT(data).max_abs_difference(green_from_kraus(kraus)) < ATOL
    dephasing = oracle.AffineChannelData.diagonal((0.2, 0.2, 1.0))
    assert green_from_tT(dephasing).max_abs_difference(green_from_kraus(oracle.kraus_from_tT(dephasing))) < ATOL


def test_green_from_affine_needs_diagonal_T() -> None:
    """
    Test that a non-diagonal T raises DomainError.
    """
    data = oracle.AffineChannelData(T=np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
    with pytest.raises(DomainError):
        green_from_tT(data)


def test_affine_form_needs_real_parameters() -> None:
    """
    Test that complex Gaussian parameters have no diagonal affine form.
    """
    assert GaussianParams(0.5, 0.25, 0.1).to_affine() == pytest.approx((0.25, 0.75, 0.2))
    assert GaussianParams(0.5, 0.25, 0.1).canonical_exponent == pytest.approx(0.1)
    with pytest.raises(DomainError):
        GaussianParams(0.5j, 0, 0).to_affine()


def test_mix_green_lengths() -> None:
    """
    Test that mismatched weights and kernels raise DomainError.
    """
    with pytest.raises(DomainError):
        mix_green([1.0], [identity_green(), identity_green()])


def test_sandwich_kernel_action(rng: np.random.Generator) -> None:
    """
    Test that the sandwich kernel of (A, B) maps Theta to A Theta B.
    """
    A, B, T = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    image = apply_green(sandwich_green(A, B), char_of(T))
    assert image.max_abs_difference(char_of(A @ T @ B)) < 1e-10
