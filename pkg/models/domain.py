"""
Probability Domain Module
Maps states to outcome probabilities and tests points against the convex image of the state space
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import DEFAULT_TOL, DOMAIN_CONFIG
from models.errors import DimensionMismatch, TooFewPoints, WrongLength
from models.matrix_kernel import hermitian_eigen, numerical_rank, pseudo_inverse
from models.povm import AffineMap, Povm, build_affine_map
from models.states import (
    DensityMatrix,
    StateParameters,
    from_parameters,
    pauli_matrices,
    pure_vector,
    sample_pure_angles,
)
from utils.logger import setup_logger
from utils.rng import make_rng

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class MembershipVerdict:
    """
    Whether a probability point is the image of a state

    Attributes:
        inside: consistency_residual <= tol and min_eigenvalue >= -tol
        witness_state: the state mapping to q, present iff inside
        min_eigenvalue: smallest eigenvalue of the least-squares preimage
        consistency_residual: ||M r + c - q||_2, distance from the affine image
        non_unique: M has a nontrivial nullspace, r is the minimum-norm solution
        parameters: the least-squares preimage r
        matrix: from_parameters(r), Hermitian and unit-trace, maybe not positive
    """

    inside: bool
    witness_state: Optional[DensityMatrix]
    min_eigenvalue: float
    consistency_residual: float
    non_unique: bool
    parameters: StateParameters
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def on_boundary(self) -> bool:
        """Inside with a vanishing eigenvalue (rank-deficient preimage)"""
        return self.inside and abs(self.min_eigenvalue) <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inside": self.inside,
            "min_eigenvalue": self.min_eigenvalue,
            "consistency_residual": self.consistency_residual,
            "non_unique": self.non_unique,
        }


class ProbabilityDomain:
    """The convex set of outcome points reachable by one POVM"""

    def __init__(self, povm: Povm, tol: Optional[float] = None):
        self.povm = povm
        self.tol = DEFAULT_TOL if tol is None else tol
        self.logger = setup_logger(self.__class__.__name__)

        self.affine_map: AffineMap = build_affine_map(povm)
        self.effective_dimension = numerical_rank(self.affine_map.matrix, self.tol)
        self._pinv = pseudo_inverse(self.affine_map.matrix, self.tol)
        self._effects = povm.stacked()
        self.logger.debug(
            f"Affine map with {povm.n_outcomes} outcomes and {self.parameter_dimension} parameters "
            f"has rank {self.effective_dimension}"
        )

    @property
    def parameter_dimension(self) -> int:
        return self.povm.dim ** 2 - 1

    @property
    def non_unique(self) -> bool:
        """Informationally incomplete: several states share each image point"""
        return self.effective_dimension < self.parameter_dimension

    @property
    def redundant_outcomes(self) -> int:
        """Outcomes beyond the N - 1 = effective dimension that an efficient design needs"""
        return self.povm.n_outcomes - 1 - self.effective_dimension

    def probabilities(self, rho: DensityMatrix) -> np.ndarray:
        """p_mu = tr(rho A_mu)"""
        matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        if matrix.shape != (self.povm.dim, self.povm.dim):
            raise DimensionMismatch(
                f"state of order {matrix.shape[0]} does not match POVM of order {self.povm.dim}"
            )
        return np.einsum("ij,mji->m", matrix, self._effects).real

    def solve(self, q: Sequence[float]) -> Tuple[StateParameters, float]:
        """Minimum-norm least-squares r of M r = q - c, with the residual norm"""
        q = np.asarray(q, dtype=float)
        if q.shape != (self.povm.n_outcomes,):
            raise DimensionMismatch(
                f"point has shape {q.shape}, POVM has {self.povm.n_outcomes} outcomes"
            )
        r = self._pinv @ (q - self.affine_map.offset)
        residual = float(np.linalg.norm(self.affine_map.matrix @ r + self.affine_map.offset - q))
        return StateParameters(dim=self.povm.dim, r=r), residual

    def membership(self, q: Sequence[float]) -> MembershipVerdict:
        """Least-squares preimage of q, then subspace and positivity tests"""
        params, residual = self.solve(q)
        matrix = from_parameters(params)
        lam_min = float(hermitian_eigen(matrix, self.tol).eigenvalues[0])
        inside = residual <= self.tol and lam_min >= -self.tol

        witness = DensityMatrix.from_array(matrix, self.tol) if inside else None
        return MembershipVerdict(
            inside=inside,
            witness_state=witness,
            min_eigenvalue=lam_min,
            consistency_residual=residual,
            non_unique=self.non_unique,
            parameters=params,
            matrix=matrix,
            tol=self.tol,
        )


def probabilities(rho: DensityMatrix, povm: Povm) -> np.ndarray:
    """Outcome probabilities tr(rho A_mu) of a state"""
    if rho.dim != povm.dim:
        raise DimensionMismatch(f"state of order {rho.dim} does not match POVM of order {povm.dim}")
    return np.einsum("ij,mji->m", rho.matrix, povm.stacked()).real


def is_probability_point(p: Sequence[float], tol: float = 1e-10) -> bool:
    """Entries in [-1e-12, 1 + 1e-12] summing to one within tol"""
    p = np.asarray(p, dtype=float)
    return bool(
        p.ndim == 1
        and np.all(p >= -1e-12)
        and np.all(p <= 1.0 + 1e-12)
        and abs(p.sum() - 1.0) <= tol
    )


def membership(q: Sequence[float], povm: Povm, tol: Optional[float] = None) -> MembershipVerdict:
    """Decide whether q lies in the convex domain of the POVM"""
    return ProbabilityDomain(povm, tol).membership(q)


def subspace_dimension(points: Sequence[Sequence[float]], tol: Optional[float] = None) -> int:
    """
    Affine dimension of a set of probability points

    Raises:
        TooFewPoints: fewer than two points
        DimensionMismatch: points of different lengths
    """
    try:
        data = np.array(points, dtype=float)
    except ValueError:
        raise DimensionMismatch("probability points have different lengths")
    if data.ndim != 2:
        raise DimensionMismatch(f"expected a list of equal-length points, got shape {data.shape}")
    if data.shape[0] < 2:
        raise TooFewPoints(f"need at least 2 points, got {data.shape[0]}")
    return numerical_rank(data - data.mean(axis=0), tol)


def extreme_point_sample(povm: Povm, count: int, seed: int) -> np.ndarray:
    """
    Images of `count` pure states with angles drawn uniformly over their box

    Returns:
        Array of shape (count, N), one probability point per row
    """
    if count < 1:
        raise TooFewPoints(f"count must be at least 1, got {count}")
    rng = make_rng(seed)
    effects = povm.stacked()
    points = np.empty((count, povm.n_outcomes))
    for i in range(count):
        v = pure_vector(sample_pure_angles(povm.dim, rng))
        points[i] = np.einsum("i,mij,j->m", v.conj(), effects, v).real
    return points


def extreme_point_dimension(d: int) -> int:
    """Real parameters of a pure state, the dimension of the extreme-point hypersurface"""
    return 2 * (d - 1)


def tetrahedron_coordinates(q: Sequence[float]) -> Tuple[float, float, float]:
    """x = p1+p2-p3-p4, y = p1-p2+p3-p4, z = p1-p2-p3+p4"""
    p = np.asarray(q, dtype=float)
    if p.shape != (4,):
        raise WrongLength(f"tetrahedron coordinates need 4 probabilities, got shape {p.shape}")
    p1, p2, p3, p4 = p
    return (float(p1 + p2 - p3 - p4), float(p1 - p2 + p3 - p4), float(p1 - p2 - p3 + p4))


def tetrahedral_radius_squared(q: Sequence[float]) -> float:
    """sum (q_mu - 1/4)^2, equal to |n|^2 / 12 for tetrahedral images"""
    p = np.asarray(q, dtype=float)
    if p.shape != (4,):
        raise WrongLength(f"expected 4 probabilities, got shape {p.shape}")
    return float(np.sum((p - DOMAIN_CONFIG["tetrahedral_center"]) ** 2))


def implied_bloch_norm(q: Sequence[float]) -> float:
    """|n| of the qubit state whose tetrahedral image is q"""
    return float(np.sqrt(tetrahedral_radius_squared(q) / DOMAIN_CONFIG["tetrahedral_radius_squared"]))


def ellipsoid_coordinates(q: Sequence[float]) -> Tuple[float, float, float]:
    """(p1, p2, p3) with p4 = 1 - p1 - p2 - p3 eliminated"""
    p = np.asarray(q, dtype=float)
    if p.shape != (4,):
        raise WrongLength(f"expected 4 probabilities, got shape {p.shape}")
    return (float(p[0]), float(p[1]), float(p[2]))


def bloch_images(povm: Povm, vectors: np.ndarray) -> np.ndarray:
    """Outcome probabilities of the qubit states (I + n.sigma)/2 for rows n"""
    if povm.dim != 2:
        raise DimensionMismatch(f"Bloch images need a qubit POVM, got order {povm.dim}")
    n = np.atleast_2d(np.asarray(vectors, dtype=float))
    if n.shape[1] != 3:
        raise WrongLength(f"Bloch vectors need 3 components, got shape {n.shape}")
    sigma = np.stack(pauli_matrices())
    rho = 0.5 * (np.eye(2)[None, :, :] + np.einsum("ka,aij->kij", n, sigma))
    return np.einsum("kij,mji->km", rho, povm.stacked()).real


def figure_table(povm: Povm, n_theta: int, n_phi: int) -> pd.DataFrame:
    """
    Pure-state images on a Bloch angle grid

    theta_b spans [0, pi] inclusive, phi_b spans [0, 2 pi) exclusive. Columns:
    theta_b, phi_b, p1..p4, x, y, z.
    """
    if povm.dim != 2 or povm.n_outcomes != 4:
        raise DimensionMismatch(
            f"figure data needs a qubit POVM with 4 outcomes, got d = {povm.dim}, N = {povm.n_outcomes}"
        )
    if n_theta < 1 or n_phi < 1:
        raise ValueError(f"grid must be positive, got {n_theta}x{n_phi}")

    theta = np.linspace(0.0, np.pi, n_theta) if n_theta > 1 else np.zeros(1)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    theta_grid, phi_grid = np.meshgrid(theta, phi, indexing="ij")
    theta_flat, phi_flat = theta_grid.ravel(), phi_grid.ravel()
    vectors = np.column_stack(
        [np.sin(theta_flat) * np.cos(phi_flat), np.sin(theta_flat) * np.sin(phi_flat), np.cos(theta_flat)]
    )
    p = bloch_images(povm, vectors)

    table = pd.DataFrame(
        {
            "theta_b": theta_flat,
            "phi_b": phi_flat,
            "p1": p[:, 0],
            "p2": p[:, 1],
            "p3": p[:, 2],
            "p4": p[:, 3],
        }
    )
    table["x"] = table.p1 + table.p2 - table.p3 - table.p4
    table["y"] = table.p1 - table.p2 + table.p3 - table.p4
    table["z"] = table.p1 - table.p2 - table.p3 + table.p4
    logger.info(f"Figure grid {n_theta}x{n_phi}: {len(table)} boundary points")
    return table
