"""
Matrix Kernel Module
Dense linear algebra for small Hermitian matrices built on Jacobi rotations
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import KERNEL_CONFIG, DEFAULT_TOL
from models.errors import DimensionMismatch, NoConvergence, NotHermitian
from utils.logger import setup_logger

logger = setup_logger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvectors as columns"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return sum_j lambda_j v_j v_j^H"""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


@dataclass(frozen=True)
class SingularValueDecomposition:
    """
    Thin singular value decomposition of a real matrix

    Attributes:
        singular_values: descending, one per column of the input
        right_vectors: orthogonal matrix whose columns are the right singular vectors
        scaled_left: input times right_vectors; column i equals sigma_i * u_i
    """

    singular_values: np.ndarray
    right_vectors: np.ndarray
    scaled_left: np.ndarray


def as_square_matrix(m) -> np.ndarray:
    """Coerce input to a complex square matrix of order >= 1"""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix of order >= 1, got shape {a.shape}")
    return a


def hermiticity_residual(m) -> float:
    """Largest entry of |m - m^H|"""
    a = as_square_matrix(m)
    return float(np.max(np.abs(a - a.conj().T)))


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a complex Jacobi rotation, in place"""
    b = a[p, q]
    magnitude = abs(b)
    if magnitude == 0.0:
        return

    # Phase factor makes the (p, q) entry real, then a real rotation zeroes it
    phase = np.conj(b / magnitude)
    theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    w = np.array([[c, s], [-s * phase, c * phase]], dtype=complex)
    a[:, [p, q]] = a[:, [p, q]] @ w
    a[[p, q], :] = w.conj().T @ a[[p, q], :]
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, [p, q]] = v[:, [p, q]] @ w


def hermitian_eigen(m, tol: Optional[float] = None) -> EigenDecomposition:
    """
    Diagonalize a Hermitian matrix with cyclic Jacobi sweeps

    Args:
        m: square complex (or real) matrix, Hermitian within tol
        tol: Hermiticity tolerance on max |m - m^H|

    Returns:
        EigenDecomposition with ascending eigenvalues

    Raises:
        NotHermitian: input is not Hermitian within tol
        NoConvergence: off-diagonal mass survives the sweep budget
    """
    tol = DEFAULT_TOL if tol is None else tol
    a = as_square_matrix(m)
    residual = float(np.max(np.abs(a - a.conj().T)))
    if residual > tol:
        raise NotHermitian(f"max |m - m^H| = {residual:.3e} exceeds tolerance {tol:.1e}")

    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    max_sweeps = KERNEL_CONFIG["max_sweeps"]

    sweep = 0
    while True:
        off = _off_diagonal_norm(a)
        if off == 0.0 or off <= _EPS * scale:
            break
        if sweep == max_sweeps:
            raise NoConvergence(
                f"Jacobi iteration left off-diagonal norm {off:.3e} after {max_sweeps} sweeps"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
        sweep += 1

    logger.debug(f"Jacobi eigensolver converged in {sweep} sweeps (order {n})")

    eigenvalues = np.diag(a).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    return EigenDecomposition(eigenvalues=eigenvalues[order], eigenvectors=v[:, order])


def eigenvalues(m, tol: Optional[float] = None) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix"""
    return hermitian_eigen(m, tol).eigenvalues


def min_eigenvalue(m, tol: Optional[float] = None) -> float:
    """Smallest eigenvalue of a Hermitian matrix"""
    return float(eigenvalues(m, tol)[0])


def is_psd(m, tol: Optional[float] = None) -> bool:
    """True iff the smallest eigenvalue is >= -tol"""
    tol = DEFAULT_TOL if tol is None else tol
    return min_eigenvalue(m, tol) >= -tol


def jacobi_svd(m) -> SingularValueDecomposition:
    """
    One-sided Jacobi (Hestenes) singular value decomposition of a real matrix

    Each rotation is the Jacobi rotation of the 2x2 block of m^T m spanned by a
    column pair, applied to the columns themselves, so small singular values
    keep absolute accuracy of order eps * sigma_max.

    Raises:
        ValueError: non-finite entries
        NoConvergence: columns still not orthogonal after the sweep budget
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")

    rows, cols = a.shape
    u = a.copy()
    v = np.eye(cols)
    threshold = max(rows, 1) * _EPS
    max_sweeps = KERNEL_CONFIG["max_sweeps"]

    for sweep in range(max_sweeps + 1):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = float(u[:, p] @ u[:, p])
                beta = float(u[:, q] @ u[:, q])
                gamma = float(u[:, p] @ u[:, q])
                if gamma == 0.0 or abs(gamma) <= threshold * np.sqrt(alpha * beta):
                    continue
                if sweep == max_sweeps:
                    raise NoConvergence(f"one-sided Jacobi not converged after {max_sweeps} sweeps")
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = 1.0 / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            logger.debug(f"one-sided Jacobi converged in {sweep} sweeps ({rows}x{cols})")
            break

    sigma = np.linalg.norm(u, axis=0) if rows else np.zeros(cols)
    order = np.argsort(-sigma, kind="stable")
    return SingularValueDecomposition(
        singular_values=sigma[order],
        right_vectors=v[:, order],
        scaled_left=u[:, order],
    )


def singular_values(m) -> np.ndarray:
    """Descending singular values of a real matrix"""
    return jacobi_svd(m).singular_values


def numerical_rank(m, tol: Optional[float] = None) -> int:
    """Count singular values above tol times the largest one"""
    tol = DEFAULT_TOL if tol is None else tol
    sigma = singular_values(m)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > tol * sigma[0]))


def pseudo_inverse(m, tol: Optional[float] = None) -> np.ndarray:
    """
    Moore-Penrose pseudo-inverse of a real matrix

    Singular values at or below tol times the largest are treated as zero,
    which yields minimum-norm least-squares solutions for rank-deficient input.
    """
    tol = DEFAULT_TOL if tol is None else tol
    a = np.array(m, dtype=float)
    svd = jacobi_svd(a)
    sigma = svd.singular_values
    rows, cols = a.shape
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros((cols, rows))

    keep = sigma > tol * sigma[0]
    v = svd.right_vectors[:, keep]
    scaled_left = svd.scaled_left[:, keep]
    # A^+ = V S^-1 U^T = V S^-2 (A V)^T
    return (v / sigma[keep] ** 2) @ scaled_left.T
