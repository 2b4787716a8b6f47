"""
Quantum States Module
Density matrices, their real parameter vector r, pure-state angles and Bloch vectors
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from config import DEFAULT_TOL
from models.errors import (
    AngleOutOfRange,
    BadRank,
    DimensionMismatch,
    InvalidState,
    OutsideBlochBall,
    WrongLength,
)
from models.matrix_kernel import as_square_matrix, hermitian_eigen
from utils.logger import setup_logger
from utils.rng import make_rng

logger = setup_logger(__name__)

BLOCH_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, unit-trace, positive semidefinite matrix of order d

    Build through DensityMatrix.from_array, which enforces the invariants.
    """

    dim: int
    matrix: np.ndarray

    @classmethod
    def from_array(cls, m, tol: Optional[float] = None) -> "DensityMatrix":
        """
        Validate and wrap a matrix

        Raises:
            InvalidState: Hermiticity, trace or positivity violated beyond tol
        """
        tol = DEFAULT_TOL if tol is None else tol
        a = as_square_matrix(m)

        asymmetry = float(np.max(np.abs(a - a.conj().T)))
        if asymmetry > tol:
            raise InvalidState(f"matrix is not Hermitian (max |m - m^H| = {asymmetry:.3e})")
        trace = complex(np.trace(a))
        if abs(trace - 1.0) > tol:
            raise InvalidState(f"trace is {trace.real:.12g}, expected 1")

        a = 0.5 * (a + a.conj().T)
        lam_min = float(hermitian_eigen(a, tol).eigenvalues[0])
        if lam_min < -tol:
            raise InvalidState(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})")

        a.setflags(write=False)
        return cls(dim=a.shape[0], matrix=a)

    @property
    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigen(self.matrix).eigenvalues

    @property
    def purity(self) -> float:
        return purity(self)

    def rank(self, tol: Optional[float] = None) -> int:
        tol = DEFAULT_TOL if tol is None else tol
        return int(np.sum(self.eigenvalues > tol))


@dataclass(frozen=True, eq=False)
class StateParameters:
    """
    The D = d^2 - 1 real parameters of a state

    Order: xi_11 .. xi_{d-1,d-1}, then xi_mn for m < n row-major, then eta_mn
    in the same order. xi_dd is implied by the trace.
    """

    dim: int
    r: np.ndarray

    def __post_init__(self):
        expected = self.dim * self.dim - 1
        if np.shape(self.r) != (expected,):
            raise DimensionMismatch(
                f"d = {self.dim} needs {expected} parameters, got shape {np.shape(self.r)}"
            )


@dataclass(frozen=True, eq=False)
class PureStateAngles:
    """
    Hyperspherical angles of a pure state of order d = len(polar) + 1

    polar angles lie in [0, pi/2], phases in [0, 2 pi). The last amplitude is
    real and non-negative.
    """

    polar: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        polar = np.atleast_1d(np.asarray(self.polar, dtype=float))
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if polar.ndim != 1 or polar.shape != phases.shape or polar.size < 1:
            raise DimensionMismatch(
                f"need d - 1 >= 1 polar angles and as many phases, got {polar.shape} and {phases.shape}"
            )
        if np.any(polar < 0.0) or np.any(polar > np.pi / 2):
            raise AngleOutOfRange(f"polar angles must lie in [0, pi/2], got {polar.tolist()}")
        if np.any(phases < 0.0) or np.any(phases >= 2 * np.pi):
            raise AngleOutOfRange(f"phases must lie in [0, 2 pi), got {phases.tolist()}")
        object.__setattr__(self, "polar", polar)
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return self.polar.size + 1


@dataclass(frozen=True)
class BlochVector:
    """Bloch vector n of a qubit state (I + n.sigma)/2"""

    n: Tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        if n.shape != (3,):
            raise WrongLength(f"Bloch vector needs 3 components, got shape {n.shape}")
        object.__setattr__(self, "n", tuple(float(x) for x in n))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.n))


StateLike = Union[DensityMatrix, np.ndarray]


def _as_matrix(rho: StateLike) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return as_square_matrix(rho)


def upper_pairs(d: int) -> List[Tuple[int, int]]:
    """Index pairs (m, n), m < n, in row-major order"""
    return [(m, n) for m in range(d) for n in range(m + 1, d)]


def to_parameters(rho: StateLike) -> StateParameters:
    """Extract r = (xi_diag, xi_offdiag, eta_offdiag) from a state"""
    a = _as_matrix(rho)
    d = a.shape[0]
    pairs = upper_pairs(d)
    diagonal = a.diagonal().real[: d - 1]
    xi = np.array([a[m, n].real for m, n in pairs])
    eta = np.array([a[m, n].imag for m, n in pairs])
    return StateParameters(dim=d, r=np.concatenate([diagonal, xi, eta]))


def from_parameters(params: StateParameters) -> np.ndarray:
    """
    Rebuild the Hermitian unit-trace matrix of a parameter vector

    The result is not necessarily positive semidefinite.
    """
    d = params.dim
    r = np.asarray(params.r, dtype=float)
    pairs = upper_pairs(d)
    n_pairs = len(pairs)

    a = np.zeros((d, d), dtype=complex)
    diagonal = r[: d - 1]
    a[np.arange(d - 1), np.arange(d - 1)] = diagonal
    a[d - 1, d - 1] = 1.0 - np.sum(diagonal)

    xi = r[d - 1: d - 1 + n_pairs]
    eta = r[d - 1 + n_pairs:]
    for (m, n), x, y in zip(pairs, xi, eta):
        a[m, n] = complex(x, y)
        a[n, m] = complex(x, -y)
    return a


def pure_vector(angles: PureStateAngles) -> np.ndarray:
    """
    Unit vector of a pure state

    v_d = cos t_1; the first d - 1 amplitudes are sin t_1 times the standard
    hyperspherical point on angles t_2..t_{d-1}, each with phase exp(i a_k).
    For d = 3 this is (sin t cos f e^{ia}, sin t sin f e^{ib}, cos t).
    """
    d = angles.dim
    polar = angles.polar
    moduli = np.empty(d)
    moduli[d - 1] = np.cos(polar[0])

    scale = np.sin(polar[0])
    for k in range(d - 2):
        moduli[k] = scale * np.cos(polar[k + 1])
        scale *= np.sin(polar[k + 1])
    moduli[d - 2] = scale

    vector = moduli.astype(complex)
    vector[: d - 1] *= np.exp(1j * angles.phases)
    return vector


def pure_state(angles: PureStateAngles) -> DensityMatrix:
    """Rank-one state |v><v| of the hyperspherical vector"""
    v = pure_vector(angles)
    return DensityMatrix.from_array(np.outer(v, v.conj()))


def sample_pure_angles(d: int, rng: np.random.Generator) -> PureStateAngles:
    """Draw angles uniformly over their box (not Haar-uniform over states)"""
    polar = rng.uniform(0.0, np.pi / 2, size=d - 1)
    phases = rng.uniform(0.0, 2 * np.pi, size=d - 1)
    return PureStateAngles(polar=polar, phases=phases)


def pauli_matrices() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sigma_x, sigma_y = [[0, -i], [i, 0]], sigma_z"""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def bloch_state(n: BlochVector) -> DensityMatrix:
    """rho = (I + n.sigma)/2, so xi_12 = n_x/2 and eta_12 = -n_y/2"""
    if n.norm > 1.0 + BLOCH_SLACK:
        raise OutsideBlochBall(f"|n| = {n.norm:.12g} exceeds 1")
    sx, sy, sz = pauli_matrices()
    nx, ny, nz = n.n
    return DensityMatrix.from_array(0.5 * (np.eye(2) + nx * sx + ny * sy + nz * sz))


def bloch_vector(rho: StateLike) -> BlochVector:
    """Inverse of bloch_state for qubit matrices (positivity not required)"""
    a = _as_matrix(rho)
    if a.shape != (2, 2):
        raise DimensionMismatch(f"Bloch vectors exist for d = 2 only, got order {a.shape[0]}")
    return BlochVector(n=(2 * a[0, 1].real, -2 * a[0, 1].imag, (a[0, 0] - a[1, 1]).real))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix.from_array(np.eye(d) / d)


def spectral_decompose(
    rho: DensityMatrix, tol: Optional[float] = None
) -> List[Tuple[float, DensityMatrix]]:
    """
    Write a state as a convex combination of at most d pure states

    Components are the eigenprojectors, weights the eigenvalues sorted
    descending. Weights at or below tol are dropped and the rest renormalized.
    """
    tol = DEFAULT_TOL if tol is None else tol
    eig = hermitian_eigen(rho.matrix, tol)
    order = np.argsort(-eig.eigenvalues, kind="stable")
    weights = eig.eigenvalues[order]
    vectors = eig.eigenvectors[:, order]

    keep = weights > tol
    weights = weights[keep] / np.sum(weights[keep])
    vectors = vectors[:, keep]

    terms = []
    for j, weight in enumerate(weights):
        v = vectors[:, j]
        terms.append((float(weight), DensityMatrix.from_array(np.outer(v, v.conj()))))
    return terms


def random_density(d: int, rank: int, seed: int) -> DensityMatrix:
    """
    Seeded random state G G^H / tr(G G^H) with G a complex Gaussian d x rank matrix

    Raises:
        BadRank: rank outside 1..d
    """
    if d < 1 or not 1 <= rank <= d:
        raise BadRank(f"rank must satisfy 1 <= rank <= d = {d}, got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    a = g @ g.conj().T
    a = a / np.trace(a).real
    return DensityMatrix.from_array(0.5 * (a + a.conj().T))


def purity(rho: StateLike) -> float:
    """tr(rho^2)"""
    a = _as_matrix(rho)
    return float(np.real(np.trace(a @ a)))


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    """Half the trace norm of rho - sigma"""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"orders differ: {a.shape[0]} and {b.shape[0]}")
    return float(0.5 * np.sum(np.abs(hermitian_eigen(a - b).eigenvalues)))
