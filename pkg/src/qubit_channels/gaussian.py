"""
Canonical qubit-qubit Gaussian channels

Channels are parametrized by angles (theta, phi) and an environment
population q. They are realized by a single-qubit environment prepared in
q|0><0| + (1 - q)|1><1| and coupled through a fixed 4x4 unitary. This module
builds their kernels, dilations and (weak) complementaries, and classifies
them as degradable, anti-degradable, weakly degradable or of zero quantum
capacity.
"""
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy.optimize import minimize

from src.logger.logger import Logger
from src.qubit_channels import oracle
from src.qubit_channels.errors import ClassificationError, DomainError, QubitChannelsError
from src.qubit_channels.green import (
    GaussianParams,
    GreenFn,
    compose_green,
    gaussian_kernel,
    gaussian_mismatch,
    green_from_kraus,
    mix_green,
)
from src.qubit_channels.oracle import AffineChannelData, KrausSet

logger = Logger(__name__)

TWO_PI: float = 2 * math.pi
Q_TOLERANCE: float = 1e-12
SIGN_EPSILON: float = 1e-12
ARCCOS_TOLERANCE: float = 1e-10
CP_TOLERANCE: float = 1e-10
CLASSIFICATION_TOLERANCE: float = 1e-9
UNITARY_TOLERANCE: float = 1e-10
NUMERIC_GRID_SIZE: int = 360

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class CanonicalParams:
    """
    Canonical parameters; angles are wrapped into [0, 2*pi).
    """

    theta: float
    phi: float
    q: float = 1.0

    def __post_init__(self) -> None:
        if not -Q_TOLERANCE <= self.q <= 1 + Q_TOLERANCE:
            raise DomainError(f"q must lie in [0, 1], got {self.q}")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)
        object.__setattr__(self, "q", min(max(float(self.q), 0.0), 1.0))

    @property
    def cos2theta(self) -> float:
        return math.cos(2 * self.theta)

    @property
    def cos2phi(self) -> float:
        return math.cos(2 * self.phi)

    @property
    def is_pure(self) -> bool:
        return abs(self.q - 1) <= Q_TOLERANCE

    def pure(self) -> "CanonicalParams":
        return CanonicalParams(self.theta, self.phi, 1.0)

    def complementary(self) -> "CanonicalParams":
        """(theta, phi) -> (-theta, phi - pi/2) with a pure environment."""
        return CanonicalParams(-self.theta, self.phi - math.pi / 2, 1.0)


class VerdictKind(str, Enum):
    DEGRADABLE = "Degradable"
    ANTI_DEGRADABLE = "AntiDegradable"
    BOTH = "Both"
    WEAKLY_DEGRADABLE = "WeaklyDegradable"
    Q_ZERO = "QZero"


@dataclass(frozen=True)
class DegradabilityVerdict:
    kind: VerdictKind
    witness: Optional[CanonicalParams]
    residual: float
    tolerance: float = CLASSIFICATION_TOLERANCE
    method: str = "closed_form"

    @property
    def has_witness(self) -> bool:
        return self.witness is not None


@dataclass(frozen=True)
class UnitaryEquivalenceResult:
    mismatch: float
    input_angles: Tuple[float, float, float]
    output_angles: Tuple[float, float, float]
    restarts: int
    gaussian: bool


def params_to_lambdas(p: CanonicalParams) -> Tuple[float, float, float, float]:
    """
    (lambda1, lambda2, lambda3, t3) of the canonical affine form; t1 = t2 = 0.
    """
    l1 = math.cos(p.theta - p.phi)
    l2 = math.cos(p.theta + p.phi)
    t3 = (2 * p.q - 1) * (p.cos2theta - p.cos2phi) / 2
    return l1, l2, l1 * l2, t3


def gaussian_params(p: CanonicalParams) -> GaussianParams:
    """
    Kernel parameters a = cos theta cos phi, b = -sin theta sin phi and
    c = (2q - 1)(cos 2theta - cos 2phi) / 4.
    """
    return GaussianParams(
        a=math.cos(p.theta) * math.cos(p.phi),
        b=-math.sin(p.theta) * math.sin(p.phi),
        c=(2 * p.q - 1) * (p.cos2theta - p.cos2phi) / 4,
    )


def affine_data(p: CanonicalParams) -> AffineChannelData:
    """Diagonal (t, T) form: T = diag(lambda1, lambda2, lambda3), t = (0, 0, t3)."""
    l1, l2, l3, t3 = params_to_lambdas(p)
    return AffineChannelData.diagonal((l1, l2, l3), (0.0, 0.0, t3))


@cached(cache=LRUCache(maxsize=8192), lock=threading.Lock())
def canonical_to_green(p: CanonicalParams) -> GreenFn:
    """
    delta(zeta - xi cos(theta) cos(phi) + xi* sin(theta) sin(phi))
        * exp[(2q - 1) (cos 2theta - cos 2phi)/4 xi xi*]
    """
    return gaussian_kernel(gaussian_params(p))


def gaussian_cp_check(l1: float, l2: float, t3: float, tolerance: float = CP_TOLERANCE) -> bool:
    """
    CPT test for the Gaussian family (lambda3 = lambda1 lambda2, t1 = t2 = 0):
    |l1| <= 1, |l2| <= 1 and |t3| <= sqrt((1 - l1^2)(1 - l2^2)).
    """
    if abs(l1) > 1 + tolerance or abs(l2) > 1 + tolerance:
        return False
    bound = math.sqrt(max((1 - l1 * l1) * (1 - l2 * l2), 0.0))
    return abs(t3) <= bound + tolerance


def kraus_pair(theta: float, phi: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    A0 = diag(cos theta, cos phi), A1 = [[0, sin phi], [sin theta, 0]].
    """
    A0 = np.array([[math.cos(theta), 0], [0, math.cos(phi)]], dtype=complex)
    A1 = np.array([[0, math.sin(phi)], [math.sin(theta), 0]], dtype=complex)
    return A0, A1


def dilation(p: CanonicalParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coupling unitary and environment state of the canonical channel.

    Basis order {|00>, |10>, |01>, |11>} (environment first); block row e and
    block column f map environment f to environment e:

        U = [[A0, -sx A1 sx], [A1, sx A0 sx]],  rho_E = diag(q, 1 - q)

    :param p: Canonical parameters.
    :return: (U, rho_E).
    :raises QubitChannelsError: If the assembled U is not unitary.
    """
    A0, A1 = kraus_pair(p.theta, p.phi)
    U = np.block([[A0, -SIGMA_X @ A1 @ SIGMA_X], [A1, SIGMA_X @ A0 @ SIGMA_X]])
    deviation = float(np.max(np.abs(U.conj().T @ U - np.eye(4))))
    if deviation > UNITARY_TOLERANCE:
        raise QubitChannelsError(f"Dilation unitary check failed (deviation {deviation:.3e})")
    return U, np.diag([p.q, 1 - p.q]).astype(complex)


def dilation_kraus(p: CanonicalParams) -> KrausSet:
    """System-output Kraus set of the canonical dilation."""
    return oracle.channel_from_dilation(*dilation(p))


def complementary_kraus(p: CanonicalParams) -> KrausSet:
    """Environment-output Kraus set; the weak complementary when q < 1."""
    return oracle.weak_complementary(*dilation(p))


def flipped_branch_kraus(theta: float, phi: float) -> KrausSet:
    """Kraus set of rho -> sx N0(sx rho sx) sx"""
    return [SIGMA_X @ M @ SIGMA_X for M in kraus_pair(theta, phi)]


def mixture_kraus(p: CanonicalParams) -> KrausSet:
    """
    sqrt(q) {A0, A1} together with sqrt(1 - q) {sx A0 sx, sx A1 sx}.
    """
    return oracle.mix_kraus(
        [p.q, 1 - p.q],
        [list(kraus_pair(p.theta, p.phi)), flipped_branch_kraus(p.theta, p.phi)],
    )


def gaussian_kraus(params: GaussianParams) -> KrausSet:
    """
    Kraus set of a real Gaussian kernel via its affine form.
    """
    l1, l2, t3 = params.to_affine()
    return oracle.kraus_from_tT(AffineChannelData.diagonal((l1, l2, l1 * l2), (0.0, 0.0, t3)))


def _negated(params: GaussianParams) -> GaussianParams:
    return GaussianParams(a=-params.a, b=-params.b, c=-params.c)


def complementary_green(p: CanonicalParams) -> GreenFn:
    """
    Kernel of the weak complementary channel.

    For q = 1 this is the canonical kernel at (-theta, phi - pi/2). For other q
    it is the mixture of that kernel (weight q) and its sign-flipped partner
    (weight 1 - q), which is not Gaussian for 0 < q < 1.
    """
    pure = gaussian_params(p.pure().complementary())
    if p.is_pure:
        return gaussian_kernel(pure)
    return mix_green([p.q, 1 - p.q], [gaussian_kernel(pure), gaussian_kernel(_negated(pure))])


def complementary_params(p: CanonicalParams) -> Optional[CanonicalParams]:
    """
    Canonical parameters of the complementary kernel; None for 0 < q < 1, where
    it is not Gaussian.
    """
    if p.is_pure:
        return p.complementary()
    if p.q <= Q_TOLERANCE:
        return CanonicalParams(-p.theta, p.phi + math.pi / 2, 0.0)
    return None


def complementary_substitution_residual(p: CanonicalParams) -> float:
    """
    Literal kernel mismatch between the complementary and the canonical kernel
    at the substituted angles.

    :raises DomainError: If the environment is mixed (0 < q < 1).
    """
    target = complementary_params(p)
    if target is None:
        raise DomainError(f"Complementary of q = {p.q} has no canonical form")
    return complementary_green(p).max_abs_difference(canonical_to_green(target))


def _clamped_arccos(value: float, label: str) -> float:
    if abs(value) > 1 + ARCCOS_TOLERANCE:
        raise ClassificationError(f"Witness relation gives {label} = {value:.15g} outside [-1, 1]")
    return math.acos(min(max(value, -1.0), 1.0))


def _numeric_witness(source: GaussianParams, target: GaussianParams) -> CanonicalParams:
    """
    Pure witness by grid search over (theta_x, phi_x) of the composed parameter
    residual, refined with Nelder-Mead.
    """
    a1, b1, c1 = complex(source.a).real, complex(source.b).real, source.c
    ta, tb, tc = complex(target.a).real, complex(target.b).real, target.c

    def composed(theta, phi):
        a2 = np.cos(theta) * np.cos(phi)
        b2 = -np.sin(theta) * np.sin(phi)
        c2 = (np.cos(2 * theta) - np.cos(2 * phi)) / 4
        return a1 * a2 + b1 * b2, a1 * b2 + b1 * a2, c1 * (a2 ** 2 - b2 ** 2) + c2

    grid = np.linspace(0.0, TWO_PI, NUMERIC_GRID_SIZE, endpoint=False)
    th, ph = np.meshgrid(grid, grid, indexing="ij")
    a, b, c = composed(th, ph)
    residual = np.maximum(np.maximum(np.abs(a - ta), np.abs(b - tb)), np.abs(c - tc))
    i, j = np.unravel_index(int(np.argmin(residual)), residual.shape)

    def objective(x):
        a, b, c = composed(x[0], x[1])
        return (a - ta) ** 2 + (b - tb) ** 2 + (c - tc) ** 2

    result = minimize(
        objective,
        x0=np.array([th[i, j], ph[i, j]]),
        method="Nelder-Mead",
        options={"xatol": 1e-14, "fatol": 1e-30, "maxiter": 4000},
    )
    best = result.x if result.fun <= objective([th[i, j], ph[i, j]]) else np.array([th[i, j], ph[i, j]])
    logger.debug("Numeric witness search", grid_residual=f"{residual[i, j]:.3e}", refined=f"{result.fun:.3e}")
    return CanonicalParams(float(best[0]), float(best[1]), 1.0)


def _pure_witness(source: CanonicalParams, target: GaussianParams) -> Tuple[CanonicalParams, str]:
    """
    Pure-environment map T with T o N_source = N_target.

    cos 2theta_x and cos 2phi_x follow from the Gaussian semigroup law; the
    signs of the angles are fixed by solving the linear part for (a_x, b_x).

    :return: (witness, method) with method "closed_form" or "numeric".
    """
    X, Y = source.cos2theta, source.cos2phi
    src = gaussian_params(source)
    if abs(X + Y) <= SIGN_EPSILON:
        return _numeric_witness(src, target), "numeric"

    u = (X - Y + 2 * X * Y) / (X + Y)
    v = (X - Y - 2 * X * Y) / (X + Y)
    alpha = _clamped_arccos(u, "cos 2theta_x") / 2
    beta = _clamped_arccos(v, "cos 2phi_x") / 2

    a1, b1 = src.a, src.b
    ta, tb = complex(target.a).real, complex(target.b).real
    det = a1 * a1 - b1 * b1
    a2 = (a1 * ta - b1 * tb) / det
    b2 = (a1 * tb - b1 * ta) / det

    candidates = [
        CanonicalParams(alpha, beta),
        CanonicalParams(-alpha, beta),
        CanonicalParams(alpha, beta + math.pi),
        CanonicalParams(-alpha, beta + math.pi),
    ]

    def distance(w: CanonicalParams) -> float:
        g = gaussian_params(w)
        return abs(g.a - a2) + abs(g.b - b2)

    return min(candidates, key=distance), "closed_form"


def _certify(residual: float, kind: VerdictKind, p: CanonicalParams) -> None:
    if residual > CLASSIFICATION_TOLERANCE:
        logger.error(
            "Degradability witness failed verification",
            kind=kind.value,
            theta=p.theta,
            phi=p.phi,
            q=p.q,
            residual=f"{residual:.3e}",
        )
        raise ClassificationError(
            f"{kind.value} witness residual {residual:.3e} exceeds {CLASSIFICATION_TOLERANCE:.1e}"
        )


def weak_witness_green(p: CanonicalParams, witness: CanonicalParams) -> GreenFn:
    """
    Connecting kernel q G_x + (1 - q) G_x|flipped built from a pure witness.
    """
    pure = gaussian_params(witness)
    if p.is_pure:
        return gaussian_kernel(pure)
    return mix_green([p.q, 1 - p.q], [gaussian_kernel(pure), gaussian_kernel(_negated(pure))])


def degradability_classify(p: CanonicalParams) -> DegradabilityVerdict:
    """
    Degradability verdict with a verified witness.

    The sign of cos 2theta * cos 2phi decides the branch; |product| below
    1e-12 counts as zero. Pure environments (q = 1) are Degradable, AntiDegradable
    or Both; mixed ones are WeaklyDegradable or QZero.

    :param p: Canonical parameters.
    :return: The verdict.
    :raises ClassificationError: If a witness fails its residual gate.
    """
    product = p.cos2theta * p.cos2phi
    channel = canonical_to_green(p)

    if p.is_pure:
        if product < -SIGN_EPSILON:
            source = p.complementary()
            witness, method = _pure_witness(source, gaussian_params(p))
            residual = compose_green(canonical_to_green(source), canonical_to_green(witness)).max_abs_difference(channel)
            _certify(residual, VerdictKind.ANTI_DEGRADABLE, p)
            return DegradabilityVerdict(VerdictKind.ANTI_DEGRADABLE, witness, residual, method=method)

        kind = VerdictKind.DEGRADABLE if product > SIGN_EPSILON else VerdictKind.BOTH
        witness, method = _pure_witness(p, gaussian_params(p.complementary()))
        residual = compose_green(channel, canonical_to_green(witness)).max_abs_difference(complementary_green(p))
        _certify(residual, kind, p)
        return DegradabilityVerdict(kind, witness, residual, method=method)

    if product < -SIGN_EPSILON:
        return DegradabilityVerdict(VerdictKind.Q_ZERO, None, 0.0, method="none")

    witness, method = _pure_witness(p.pure(), gaussian_params(p.pure().complementary()))
    residual = compose_green(channel, weak_witness_green(p, witness)).max_abs_difference(complementary_green(p))
    _certify(residual, VerdictKind.WEAKLY_DEGRADABLE, p)
    return DegradabilityVerdict(VerdictKind.WEAKLY_DEGRADABLE, witness, residual, method=method)


def intermediate_kraus(verdict: DegradabilityVerdict, p: CanonicalParams) -> KrausSet:
    """
    Kraus set of the certified connecting map.

    :raises DomainError: If the verdict carries no witness.
    """
    if verdict.witness is None:
        raise DomainError(f"{verdict.kind.value} verdict has no connecting map")
    pure = gaussian_params(verdict.witness)
    if p.is_pure:
        return gaussian_kraus(pure)
    return oracle.mix_kraus([p.q, 1 - p.q], [gaussian_kraus(pure), gaussian_kraus(_negated(pure))])


def verify_verdict(verdict: DegradabilityVerdict, p: CanonicalParams) -> float:
    """
    Oracle residual of the verdict's degradation identity on dense matrices.
    """
    connecting = intermediate_kraus(verdict, p)
    if verdict.kind == VerdictKind.ANTI_DEGRADABLE:
        source = p.complementary()
        return oracle.verify_degradation(dilation_kraus(source), dilation_kraus(p), connecting)
    return oracle.verify_degradation(dilation_kraus(p), complementary_kraus(p), connecting)


def _rotation(angles: Sequence[float]) -> np.ndarray:
    """Rz(a) Ry(b) Rz(c)"""
    a, b, c = angles

    def rz(x):
        return np.array([[np.exp(-0.5j * x), 0], [0, np.exp(0.5j * x)]])

    ry = np.array([[np.cos(b / 2), -np.sin(b / 2)], [np.sin(b / 2), np.cos(b / 2)]], dtype=complex)
    return rz(a) @ ry @ rz(c)


def unitary_equivalence_search(
    kraus: Sequence[np.ndarray], seed: int = 0, restarts: int = 3, maxiter: int = 600
) -> UnitaryEquivalenceResult:
    """
    Smallest Gaussian-reconstruction mismatch of V N(W . W^dagger) V^dagger over
    input and output rotations W, V.

    Diagnostic only: a large mismatch does not prove the channel is not
    unitarily equivalent to a Gaussian one. The first restart starts at zero
    angles; the others from seeded random angles.

    :param kraus: Kraus operators of the channel.
    :param seed: Seed for restart points.
    :param restarts: Number of Nelder-Mead runs.
    :param maxiter: Iteration cap per run.
    :return: UnitaryEquivalenceResult.
    """
    kraus = oracle.validate_kraus(kraus)
    rng = np.random.default_rng(seed)

    def objective(x: np.ndarray) -> float:
        W, V = _rotation(x[:3]), _rotation(x[3:])
        return gaussian_mismatch(green_from_kraus([V @ M @ W for M in kraus]))

    best_x, best_value = np.zeros(6), objective(np.zeros(6))
    for run in range(restarts):
        x0 = np.zeros(6) if run == 0 else rng.uniform(0.0, TWO_PI, size=6)
        result = minimize(objective, x0=x0, method="Nelder-Mead", options={"maxiter": maxiter, "xatol": 1e-10, "fatol": 1e-14})
        if result.fun < best_value:
            best_x, best_value = result.x, float(result.fun)
    return UnitaryEquivalenceResult(
        mismatch=float(best_value),
        input_angles=tuple(float(v) for v in best_x[:3]),
        output_angles=tuple(float(v) for v in best_x[3:]),
        restarts=restarts,
        gaussian=best_value <= 1e-10,
    )
