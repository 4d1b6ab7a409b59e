"""
Dense-matrix channel oracle

Plain numpy ground truth for every Grassmann-side computation: Kraus, Choi
and affine (t, T) conversions, channel application and composition, dilations
and their (weak) complementaries, complete-positivity tests and coherent
information. Nothing here imports the Grassmann modules.

Conventions: Choi matrices are sum_ij |i><j| (x) N(|i><j|) with trace 2;
entropies are in bits.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.logger.logger import Logger
from src.qubit_channels.errors import ChannelValidationError, DomainError

logger = Logger(__name__)

KrausSet = List[np.ndarray]

KRAUS_TOLERANCE: float = 1e-10
CHOI_EIGENVALUE_CUTOFF: float = 1e-12
PSD_TOLERANCE: float = 1e-10
DENSITY_TOLERANCE: float = 1e-10
UNITARY_TOLERANCE: float = 1e-10
ENTROPY_CUTOFF: float = 1e-14

IDENTITY = np.eye(2, dtype=complex)
PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def matrix_units(dim: int = 2) -> List[Tuple[int, int, np.ndarray]]:
    """
    Matrix units |i><j| with their indices.

    :param dim: Dimension.
    :return: List of (i, j, |i><j|).
    """
    units = []
    for i in range(dim):
        for j in range(dim):
            E = np.zeros((dim, dim), dtype=complex)
            E[i, j] = 1.0
            units.append((i, j, E))
    return units


@dataclass
class AffineChannelData:
    """
    Bloch-ball form r -> t + T r of a qubit channel.
    """

    t: np.ndarray = field(default_factory=lambda: np.zeros(3))
    T: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float).reshape(3)
        self.T = np.asarray(self.T, dtype=float).reshape(3, 3)

    @classmethod
    def diagonal(cls, lambdas: Sequence[float], t: Sequence[float] = (0.0, 0.0, 0.0)) -> "AffineChannelData":
        return cls(t=np.asarray(t, dtype=float), T=np.diag(np.asarray(lambdas, dtype=float)))

    def is_diagonal(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.T - np.diag(np.diag(self.T)))) <= atol)

    @property
    def lambdas(self) -> Tuple[float, float, float]:
        return tuple(float(x) for x in np.diag(self.T))


def kraus_completeness_residual(kraus: Sequence[np.ndarray]) -> float:
    """
    max |sum_k M_k^dagger M_k - 1| over entries.
    """
    d_in = np.asarray(kraus[0]).shape[1]
    total = sum(np.conj(M).T @ M for M in map(np.asarray, kraus))
    return float(np.max(np.abs(total - np.eye(d_in))))


def validate_kraus(kraus: Sequence[np.ndarray], tolerance: float = KRAUS_TOLERANCE) -> KrausSet:
    """
    Checks trace preservation of a Kraus set.

    :param kraus: Kraus operators.
    :param tolerance: Allowed entrywise deviation from the identity.
    :return: The operators as complex arrays.
    :raises ChannelValidationError: If the set is empty or incomplete.
    """
    if len(kraus) == 0:
        raise ChannelValidationError("Empty Kraus set")
    ops = [np.asarray(M, dtype=complex) for M in kraus]
    residual = kraus_completeness_residual(ops)
    if residual > tolerance:
        raise ChannelValidationError(
            f"Kraus operators are not trace preserving (residual {residual:.3e} > {tolerance:.1e})"
        )
    return ops


def validate_density(rho: np.ndarray, tolerance: float = DENSITY_TOLERANCE) -> np.ndarray:
    """
    :raises DomainError: If rho is not Hermitian, PSD and of unit trace.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"Density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - np.conj(rho).T)) > tolerance:
        raise DomainError("Density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tolerance:
        raise DomainError(f"Density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tolerance:
        raise DomainError("Density matrix has a negative eigenvalue")
    return rho


def validate_unitary(U: np.ndarray, tolerance: float = UNITARY_TOLERANCE) -> np.ndarray:
    """
    Checks a 4x4 dilation unitary.

    :param U: Candidate unitary.
    :param tolerance: Largest allowed entry of U^dagger U - 1.
    :return: U as a complex array.
    :raises DomainError: If U is not 4x4 or not unitary.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise DomainError(f"Dilation unitary must be 4x4, got shape {U.shape}")
    if np.max(np.abs(np.conj(U).T @ U - np.eye(4))) > tolerance:
        raise DomainError("Dilation matrix is not unitary")
    return U


def _apply(kraus: Sequence[np.ndarray], X: np.ndarray) -> np.ndarray:
    return sum(M @ X @ np.conj(M).T for M in kraus)


def apply_channel(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """
    N(rho) = sum_k M_k rho M_k^dagger.

    :param kraus: Kraus operators.
    :param rho: Input density matrix.
    :return: Output density matrix.
    :raises DomainError: If rho is not a density matrix.
    """
    return _apply(kraus, validate_density(rho))


def apply_dual(kraus: Sequence[np.ndarray], X: np.ndarray) -> np.ndarray:
    """Heisenberg picture N_H(X) = sum_k M_k^dagger X M_k"""
    return sum(np.conj(M).T @ X @ M for M in kraus)


def choi(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """
    Choi matrix sum_ij |i><j| (x) N(|i><j|).

    :param kraus: Kraus operators.
    :return: Choi matrix with trace d_in for a trace-preserving channel.
    """
    d_in = np.asarray(kraus[0]).shape[1]
    return sum(np.kron(E, _apply(kraus, E)) for _, _, E in matrix_units(d_in))


def _phase_fixed(vector: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vector)))
    if abs(vector[k]) == 0:
        return vector
    return vector * (abs(vector[k]) / vector[k])


def kraus_from_choi(C: np.ndarray, d_in: int = 2, cutoff: float = CHOI_EIGENVALUE_CUTOFF) -> KrausSet:
    """
    Minimal Kraus set from a Choi matrix via its eigendecomposition.

    Eigenvalues below ``cutoff`` are discarded; each eigenvector is phase fixed
    so that its largest component is real and positive.

    :param C: Choi matrix of shape (d_in * d_out, d_in * d_out).
    :param d_in: Input dimension.
    :param cutoff: Eigenvalue threshold.
    :return: Kraus operators M = sqrt(lambda) unvec(v).
    """
    C = np.asarray(C, dtype=complex)
    d_out = C.shape[0] // d_in
    eigenvalues, eigenvectors = np.linalg.eigh((C + np.conj(C).T) / 2)
    kraus = []
    for value, vector in sorted(zip(eigenvalues, eigenvectors.T), key=lambda ev: -ev[0]):
        if value < cutoff:
            continue
        vector = _phase_fixed(vector)
        kraus.append(np.sqrt(value) * vector.reshape(d_in, d_out).T)
    return kraus


def cp_check(C: np.ndarray, tolerance: float = PSD_TOLERANCE) -> Tuple[bool, float]:
    """
    Complete positivity from the Choi spectrum.

    :param C: Choi matrix.
    :param tolerance: PSD threshold on the smallest eigenvalue.
    :return: (psd, min_eigenvalue).
    """
    C = np.asarray(C, dtype=complex)
    min_eigenvalue = float(np.min(np.linalg.eigvalsh((C + np.conj(C).T) / 2)))
    return min_eigenvalue >= -tolerance, min_eigenvalue


def tT_from_kraus(kraus: Sequence[np.ndarray]) -> AffineChannelData:
    """
    t_i = Tr[sigma_i N(1)] / 2, T_ij = Tr[sigma_i N(sigma_j)] / 2.
    """
    image_identity = _apply(kraus, IDENTITY)
    t = np.array([np.trace(s @ image_identity).real / 2 for s in PAULIS])
    T = np.array([[np.trace(si @ _apply(kraus, sj)).real / 2 for sj in PAULIS] for si in PAULIS])
    return AffineChannelData(t=t, T=T)


def affine_action(data: AffineChannelData, X: np.ndarray) -> np.ndarray:
    """
    Image of an arbitrary 2x2 operator under the affine map (t, T).
    """
    components = np.array([np.trace(s @ X) for s in PAULIS])
    image = np.trace(X) * (IDENTITY + sum(t * s for t, s in zip(data.t, PAULIS)))
    image = image + sum(
        data.T[i, j] * components[j] * PAULIS[i] for i in range(3) for j in range(3)
    )
    return image / 2


def choi_from_tT(data: AffineChannelData) -> np.ndarray:
    """Choi matrix of the affine map, built on the matrix units."""
    return sum(np.kron(E, affine_action(data, E)) for _, _, E in matrix_units(2))


def kraus_from_tT(data: AffineChannelData, tolerance: float = PSD_TOLERANCE) -> KrausSet:
    """
    Kraus set of the channel with affine data (t, T).

    :param data: Affine channel data.
    :param tolerance: PSD threshold for the Choi matrix.
    :return: Minimal Kraus set.
    :raises ChannelValidationError: If the Choi matrix is not PSD.
    """
    C = choi_from_tT(data)
    psd, min_eigenvalue = cp_check(C, tolerance)
    if not psd:
        raise ChannelValidationError(
            f"(t, T) data is not completely positive: min Choi eigenvalue {min_eigenvalue:.3e}",
            min_eigenvalue=min_eigenvalue,
        )
    return kraus_from_choi(C)


def compose_kraus(second: Sequence[np.ndarray], first: Sequence[np.ndarray]) -> KrausSet:
    """
    Kraus set of second o first.

    :param second: Kraus operators of the channel applied last.
    :param first: Kraus operators of the channel applied first.
    :return: All products M2 M1, rank len(second) * len(first).
    """
    return [np.asarray(M2) @ np.asarray(M1) for M2 in second for M1 in first]


def mix_kraus(weights: Sequence[float], kraus_sets: Sequence[Sequence[np.ndarray]]) -> KrausSet:
    """Kraus set of sum_i w_i N_i"""
    if len(weights) != len(kraus_sets):
        raise DomainError("Mixture weights and channels differ in length")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1) > KRAUS_TOLERANCE:
        raise DomainError(f"Mixture weights must be a probability vector, got {list(weights)}")
    return [np.sqrt(w) * np.asarray(M) for w, ks in zip(weights, kraus_sets) if w > 0 for M in ks]


def flagged_mixture_kraus(first: Sequence[np.ndarray], second: Sequence[np.ndarray], q: float) -> KrausSet:
    """
    Kraus set of rho -> q N0(rho) (x) |0><0| + (1 - q) N1(rho) (x) |1><1|.
    """
    e0 = np.array([[1.0], [0.0]], dtype=complex)
    e1 = np.array([[0.0], [1.0]], dtype=complex)
    flagged = [np.sqrt(q) * np.kron(M, e0) for M in first]
    flagged += [np.sqrt(1 - q) * np.kron(M, e1) for M in second]
    return flagged


def action_distance(first: Sequence[np.ndarray], second: Sequence[np.ndarray]) -> float:
    """
    Largest entry difference of the two channels on the matrix units.
    """
    d_in = np.asarray(first[0]).shape[1]
    return float(
        max(np.max(np.abs(_apply(first, E) - _apply(second, E))) for _, _, E in matrix_units(d_in))
    )


def _environment_decomposition(rhoE: np.ndarray) -> List[Tuple[float, np.ndarray]]:
    rhoE = validate_density(rhoE)
    eigenvalues, eigenvectors = np.linalg.eigh(rhoE)
    return [
        (float(p), _phase_fixed(v))
        for p, v in zip(eigenvalues, eigenvectors.T)
        if p > CHOI_EIGENVALUE_CUTOFF
    ]


def partial_trace_env(joint: np.ndarray, d_env: int = 2, d_sys: int = 2) -> np.ndarray:
    """
    Traces the environment out of an environment-first joint operator.

    :param joint: Operator on E (x) S, index d_sys * e + s.
    :param d_env: Environment dimension.
    :param d_sys: System dimension.
    :return: Reduced system operator.
    """
    blocks = np.asarray(joint).reshape(d_env, d_sys, d_env, d_sys)
    return np.einsum("ejek->jk", blocks)


def partial_trace_system(joint: np.ndarray, d_env: int = 2, d_sys: int = 2) -> np.ndarray:
    """
    Traces the system out of an environment-first joint operator.

    :param joint: Operator on E (x) S, index d_sys * e + s.
    :param d_env: Environment dimension.
    :param d_sys: System dimension.
    :return: Reduced environment operator.
    """
    blocks = np.asarray(joint).reshape(d_env, d_sys, d_env, d_sys)
    return np.einsum("jeke->jk", blocks)


def dilation_outputs(U: np.ndarray, rho: np.ndarray, rhoE: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    System and environment marginals of U (rho_E (x) rho) U^dagger.

    :param U: 4x4 unitary in the environment-first basis.
    :param rho: System input.
    :param rhoE: Environment state.
    :return: (Tr_E, Tr_S) of the joint output.
    """
    U = validate_unitary(U)
    joint = U @ np.kron(validate_density(rhoE), validate_density(rho)) @ np.conj(U).T
    return partial_trace_env(joint), partial_trace_system(joint)


def channel_from_dilation(U: np.ndarray, rhoE: np.ndarray) -> KrausSet:
    """
    Kraus set of rho -> Tr_E[U (rho (x) rho_E) U^dagger].

    The joint basis is {|00>, |10>, |01>, |11>}: index 2e + s with e the
    environment and s the system qubit.

    :param U: 4x4 unitary.
    :param rhoE: Environment state.
    :return: System-output Kraus operators.
    :raises DomainError: On a non-unitary U or invalid rho_E.
    """
    blocks = validate_unitary(U).reshape(2, 2, 2, 2)  # [e, s, f, t]
    kraus = []
    for p, v in _environment_decomposition(rhoE):
        for e in range(2):
            M = np.sqrt(p) * np.einsum("sft,f->st", blocks[e], v)
            if np.max(np.abs(M)) > CHOI_EIGENVALUE_CUTOFF:
                kraus.append(M)
    return kraus


def weak_complementary(U: np.ndarray, rhoE: np.ndarray) -> KrausSet:
    """
    Kraus set of rho -> Tr_S[U (rho (x) rho_E) U^dagger].

    rho_E is purified in its eigenbasis; for a pure environment this is the
    complementary channel.

    :param U: 4x4 unitary.
    :param rhoE: Environment state.
    :return: Environment-output Kraus operators.
    :raises DomainError: On a non-unitary U or invalid rho_E.
    """
    blocks = validate_unitary(U).reshape(2, 2, 2, 2)  # [e, s, f, t]
    kraus = []
    for p, v in _environment_decomposition(rhoE):
        for s in range(2):
            K = np.sqrt(p) * np.einsum("eft,f->et", blocks[:, s], v)
            if np.max(np.abs(K)) > CHOI_EIGENVALUE_CUTOFF:
                kraus.append(K)
    return kraus


def complementary_from_kraus(kraus: Sequence[np.ndarray]) -> KrausSet:
    """
    Complementary channel of a Kraus set whose Choi rank fits a qubit environment.

    :param kraus: Kraus operators.
    :return: Environment-output Kraus operators K~_s[k, t] = M_k[s, t].
    :raises ChannelValidationError: If the minimal Kraus rank exceeds 2.
    """
    minimal = kraus_from_choi(choi(kraus))
    if len(minimal) > 2:
        raise ChannelValidationError(
            f"Channel needs {len(minimal)} Kraus operators; a qubit environment holds at most 2"
        )
    while len(minimal) < 2:
        minimal.append(np.zeros((2, 2), dtype=complex))
    stacked = np.stack(minimal)  # [k, s, t]
    return [stacked[:, s, :] for s in range(2)]


def verify_degradation(
    channel: Sequence[np.ndarray], target: Sequence[np.ndarray], connecting: Sequence[np.ndarray]
) -> float:
    """
    Residual of connecting o channel == target over the matrix units.
    """
    return action_distance(compose_kraus(connecting, channel), target)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """
    Von Neumann entropy in bits of the Hermitian part of rho.

    :param rho: Density matrix.
    :return: -sum p log2 p over eigenvalues above ENTROPY_CUTOFF.
    """
    eigenvalues = np.linalg.eigvalsh((rho + np.conj(rho).T) / 2)
    eigenvalues = eigenvalues[eigenvalues > ENTROPY_CUTOFF]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def coherent_information(kraus: Sequence[np.ndarray], rho: np.ndarray) -> float:
    """
    J = S(N(rho)) - S((I (x) N)(|psi><psi|)) in bits, psi purifying rho on a
    reference that is traced out like an environment.

    :param kraus: Kraus operators, possibly with output dimension above 2.
    :param rho: Input density matrix.
    :return: Coherent information.
    """
    rho = validate_density(rho)
    d_in = rho.shape[0]
    d_out = np.asarray(kraus[0]).shape[0]
    eigenvalues, eigenvectors = np.linalg.eigh(rho)
    psi = sum(
        np.sqrt(max(p, 0.0)) * np.kron(v.conj(), v)
        for p, v in zip(eigenvalues, eigenvectors.T)
    )
    psi = psi.reshape(-1, 1)
    joint = sum(
        np.kron(np.eye(d_in), M) @ psi @ psi.conj().T @ np.kron(np.eye(d_in), M).conj().T
        for M in kraus
    )
    output = partial_trace_env(joint, d_env=d_in, d_sys=d_out)
    return von_neumann_entropy(output) - von_neumann_entropy(joint)


def random_density(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """
    Random full-rank density matrix G G^dagger / Tr from a Ginibre matrix.

    :param rng: numpy Generator.
    :param dim: Dimension.
    :return: Density matrix.
    """
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def random_kraus(rng: np.random.Generator, rank: int = 2, dim: int = 2) -> KrausSet:
    """
    Random channel: blocks of a Haar-like isometry from QR of a Ginibre matrix.
    """
    G = rng.normal(size=(rank * dim, dim)) + 1j * rng.normal(size=(rank * dim, dim))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return [Q[k * dim:(k + 1) * dim, :] for k in range(rank)]


def max_coherent_information(
    kraus: Sequence[np.ndarray], rng: np.random.Generator, samples: int, states: Optional[Sequence[np.ndarray]] = None
) -> float:
    """
    Largest single-letter coherent information over sampled input states.

    The maximally mixed state is always included.
    """
    candidates = list(states) if states is not None else [random_density(rng) for _ in range(samples)]
    candidates.append(IDENTITY / 2)
    return max(coherent_information(kraus, rho) for rho in candidates)
