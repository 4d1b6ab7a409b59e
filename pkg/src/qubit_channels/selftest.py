"""
Self-test battery

Pinned convention anchors (delta sifting, characteristic-function
coefficients, identity kernel, G(zeta, 0) = zeta zeta*, D(xi)^dagger = D(-xi))
followed by the correspondence matrix that ties every Grassmann-side
construction to its dense-matrix twin. Each check reports its residual; an
exception inside a check counts as a failure of that check.
"""
import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from src.logger.logger import Logger
from src.qubit_channels import oracle
from src.qubit_channels.charfn import CharFn, char_of, density_checks, invert
from src.qubit_channels.gaussian import (
    CanonicalParams,
    affine_data,
    canonical_to_green,
    complementary_green,
    complementary_kraus,
    degradability_classify,
    dilation_kraus,
    gaussian_cp_check,
    gaussian_params,
    verify_verdict,
)
from src.qubit_channels.grassmann import GrassmannAlgebra, berezin_integrate, delta, four_coefficient, max_abs_difference
from src.qubit_channels.green import (
    KERNEL_ALGEBRA,
    apply_green,
    compose_gaussian,
    compose_green,
    gaussian_kernel,
    green_from_kraus,
    green_from_tT,
    identity_green,
)
from src.qubit_channels.hybrid import displacement, hadjoint, reflect

logger = Logger(__name__)

ANCHOR_TOLERANCE: float = 1e-12
DEGRADATION_TOLERANCE: float = 1e-9
DEFAULT_SAMPLES: int = 20

_ANCHOR_OPERATOR = np.array([[0.6, 0.2 - 0.1j], [0.3 + 0.4j, 0.4]], dtype=complex)
_WITNESS_POINTS = (
    CanonicalParams(math.pi / 6, 0.0, 1.0),
    CanonicalParams(-math.pi / 6, -math.pi / 2, 1.0),
    CanonicalParams(math.pi / 4, math.pi / 4, 1.0),
    CanonicalParams(math.pi / 6, 0.0, 0.7),
    CanonicalParams(math.pi / 6, math.pi / 8, 0.5),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def run_check(name: str, tolerance: float, compute: Callable[[], float]) -> CheckResult:
    """
    Runs one check; an exception counts as a failure with infinite residual.

    :param name: Check name.
    :param tolerance: Largest passing residual.
    :param compute: Callable returning the residual.
    :return: The CheckResult.
    """
    try:
        residual = float(compute())
    except Exception as e:
        logger.error(f"Self-test check {name} raised: {e}")
        return CheckResult(name, False, math.inf, tolerance, f"{type(e).__name__}: {e}")
    passed = residual <= tolerance
    if not passed:
        logger.error("Self-test check failed", check=name, residual=f"{residual:.3e}", tolerance=tolerance)
    return CheckResult(name, passed, residual, tolerance)


# Anchors

def delta_sifting() -> float:
    """integral d^2 zeta f(zeta) delta(zeta - xi) = f(xi)"""
    algebra = KERNEL_ALGEBRA
    coefficients = (0.3 + 0.1j, 0.7, -0.2j, 1.1)
    f_zeta = four_coefficient(algebra, "zeta", *coefficients)
    sifted = berezin_integrate(f_zeta * delta(algebra, "zeta", algebra.gen("xi")), "zeta")
    return max_abs_difference(sifted, four_coefficient(algebra, "xi", *coefficients))


def characteristic_coefficients() -> float:
    """chi = Tr + theta01 xi - theta10 xi* - (theta00 - theta11)/2 xi* xi"""
    T = _ANCHOR_OPERATOR
    expected = CharFn(A=np.trace(T), B1=T[0, 1], B2=-T[1, 0], C=-(T[0, 0] - T[1, 1]) / 2)
    return char_of(T).max_abs_difference(expected)


def identity_kernel() -> float:
    return green_from_kraus([np.eye(2)]).max_abs_difference(identity_green())


def trace_preservation(rng: np.random.Generator) -> float:
    return max(green_from_kraus(oracle.random_kraus(rng, rank)).trace_preservation_residual() for rank in (1, 2, 3, 4))


def displacement_adjoint() -> float:
    """D(xi)^dagger = D(-xi)"""
    algebra = GrassmannAlgebra(("xi",))
    D = displacement(algebra, "xi")
    return hadjoint(D).max_abs_difference(reflect(D, "xi"))


# Correspondence matrix

def _random_operator(rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


def _random_canonical(rng: np.random.Generator) -> CanonicalParams:
    theta, phi = rng.uniform(0.0, 2 * math.pi, size=2)
    return CanonicalParams(theta, phi, float(rng.choice([0.0, 0.3, 0.7, 1.0])))


def char_roundtrip(rng: np.random.Generator, samples: int) -> float:
    return max(
        float(np.max(np.abs(invert(char_of(T)) - T))) for T in (_random_operator(rng) for _ in range(samples))
    )


def density_validity(rng: np.random.Generator, samples: int) -> float:
    """Number of disagreements with the oracle spectrum test."""
    disagreements = 0
    for _ in range(samples):
        V = oracle.random_kraus(rng, rank=1)[0]
        top = rng.uniform(-0.5, 1.5)
        H = V @ np.diag([top, 1 - top]) @ V.conj().T
        oracle_density = bool(np.min(np.linalg.eigvalsh(H)) >= -oracle.DENSITY_TOLERANCE)
        disagreements += density_checks(char_of(H)).is_density != oracle_density
    return float(disagreements)


def green_action(rng: np.random.Generator, samples: int) -> float:
    residual = 0.0
    for _ in range(samples):
        kraus = oracle.random_kraus(rng, rank=int(rng.integers(1, 5)))
        rho = oracle.random_density(rng)
        image = apply_green(green_from_kraus(kraus), char_of(rho))
        residual = max(residual, image.max_abs_difference(char_of(oracle.apply_channel(kraus, rho))))
    return residual


def composition(rng: np.random.Generator, samples: int) -> float:
    residual = 0.0
    for _ in range(samples):
        first, second = oracle.random_kraus(rng, 2), oracle.random_kraus(rng, 2)
        composed = compose_green(green_from_kraus(first), green_from_kraus(second))
        residual = max(residual, composed.max_abs_difference(green_from_kraus(oracle.compose_kraus(second, first))))
    return residual


def gaussian_semigroup(rng: np.random.Generator, samples: int) -> float:
    residual = 0.0
    for _ in range(samples):
        p1, p2 = _random_canonical(rng), _random_canonical(rng)
        predicted = gaussian_kernel(compose_gaussian(gaussian_params(p1), gaussian_params(p2)))
        residual = max(residual, predicted.max_abs_difference(compose_green(canonical_to_green(p1), canonical_to_green(p2))))
    return residual


def cp_condition(rng: np.random.Generator, samples: int) -> float:
    """Number of disagreements with the Choi spectrum."""
    disagreements = 0
    for _ in range(samples):
        l1, l2, t3 = rng.uniform(-1.0, 1.0, size=3)
        data = oracle.AffineChannelData.diagonal((l1, l2, l1 * l2), (0.0, 0.0, t3))
        psd, _ = oracle.cp_check(oracle.choi_from_tT(data))
        disagreements += gaussian_cp_check(l1, l2, t3) != psd
    return float(disagreements)


def dilation_kernel(rng: np.random.Generator, samples: int) -> float:
    residual = 0.0
    for _ in range(samples):
        p = _random_canonical(rng)
        G = canonical_to_green(p)
        residual = max(
            residual,
            G.max_abs_difference(green_from_kraus(dilation_kraus(p))),
            G.max_abs_difference(green_from_tT(affine_data(p))),
        )
    return residual


def complementary_kernel(rng: np.random.Generator, samples: int) -> float:
    return max(
        complementary_green(p).max_abs_difference(green_from_kraus(complementary_kraus(p)))
        for p in (_random_canonical(rng) for _ in range(samples))
    )


def degradation_witness() -> float:
    residual = 0.0
    for p in _WITNESS_POINTS:
        verdict = degradability_classify(p)
        if verdict.witness is not None:
            residual = max(residual, verdict.residual, verify_verdict(verdict, p))
    return residual


def run_selftest(seed: int, samples: int = DEFAULT_SAMPLES) -> List[CheckResult]:
    """
    Runs every anchor and correspondence check.

    :param seed: Seed of the random instances.
    :param samples: Random instances per correspondence check.
    :return: One CheckResult per check, anchors first.
    """
    rng = np.random.default_rng(seed)
    results = [
        run_check("delta_sifting", ANCHOR_TOLERANCE, delta_sifting),
        run_check("characteristic_coefficients", ANCHOR_TOLERANCE, characteristic_coefficients),
        run_check("identity_kernel", ANCHOR_TOLERANCE, identity_kernel),
        run_check("trace_preservation", ANCHOR_TOLERANCE, lambda: trace_preservation(rng)),
        run_check("displacement_adjoint", ANCHOR_TOLERANCE, displacement_adjoint),
        run_check("char_roundtrip", ANCHOR_TOLERANCE, lambda: char_roundtrip(rng, samples)),
        run_check("density_validity", 0.0, lambda: density_validity(rng, samples)),
        run_check("green_action", ANCHOR_TOLERANCE, lambda: green_action(rng, samples)),
        run_check("composition", ANCHOR_TOLERANCE, lambda: composition(rng, samples)),
        run_check("gaussian_semigroup", ANCHOR_TOLERANCE, lambda: gaussian_semigroup(rng, samples)),
        run_check("cp_condition", 0.0, lambda: cp_condition(rng, samples)),
        run_check("dilation_kernel", ANCHOR_TOLERANCE, lambda: dilation_kernel(rng, samples)),
        run_check("complementary_kernel", ANCHOR_TOLERANCE, lambda: complementary_kernel(rng, samples)),
        run_check("degradation_witness", DEGRADATION_TOLERANCE, degradation_witness),
    ]
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("Self-test failed", failed=",".join(failed))
    else:
        logger.info("Self-test passed", checks=len(results))
    return results
