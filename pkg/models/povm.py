"""
POVM Module
Builds and validates generalized measurements and their affine probability map p = M r + c
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULT_TOL
from models.errors import BadRank, DimensionMismatch, NotOrthonormal, PovmDomainError
from models.matrix_kernel import as_square_matrix, hermitian_eigen, hermiticity_residual, numerical_rank
from models.states import StateLike, StateParameters, pauli_matrices, to_parameters, upper_pairs
from utils.logger import setup_logger
from utils.rng import make_rng

logger = setup_logger(__name__)

# Vertices of the regular tetrahedron used by tetrahedral_povm
TETRAHEDRON_VERTICES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered effects A_mu of a common order d"""

    dim: int
    effects: Tuple[np.ndarray, ...]

    @classmethod
    def from_effects(cls, effects: Sequence[Any]) -> "Povm":
        """
        Wrap a list of effect matrices

        Raises:
            DimensionMismatch: empty list or effects of different orders
        """
        matrices = [as_square_matrix(e) for e in effects]
        if not matrices:
            raise DimensionMismatch("a POVM needs at least one effect")
        dim = matrices[0].shape[0]
        for index, matrix in enumerate(matrices):
            if matrix.shape != (dim, dim):
                raise DimensionMismatch(
                    f"effect {index} has order {matrix.shape[0]}, expected {dim}"
                )
            matrix.setflags(write=False)
        return cls(dim=dim, effects=tuple(matrices))

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def stacked(self) -> np.ndarray:
        """Effects as an array of shape (N, d, d)"""
        return np.stack(self.effects)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """
    p = M r + c for all N outcomes

    M has N rows and d^2 - 1 columns; every row is kept, so the column sums
    vanish and the offsets sum to one.
    """

    dim: int
    matrix: np.ndarray
    offset: np.ndarray

    def apply(self, params: StateParameters) -> np.ndarray:
        return self.matrix @ params.r + self.offset

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def offset_sum(self) -> float:
        return float(self.offset.sum())


@dataclass
class EffectCheck:
    """Per-effect diagnostics of a validation run"""

    index: int
    hermiticity_residual: float
    min_eigenvalue: float
    operator_norm: float


@dataclass
class ValidationReport:
    """Outcome of validate(); ok iff violations is empty"""

    ok: bool
    completeness_residual: float
    effects: List[EffectCheck] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    cone_candidates: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "completeness_residual": self.completeness_residual,
            "violations": list(self.violations),
            "cone_candidates": list(self.cone_candidates),
            "effects": [
                {
                    "index": check.index,
                    "hermiticity_residual": check.hermiticity_residual,
                    "min_eigenvalue": check.min_eigenvalue,
                    "operator_norm": check.operator_norm,
                }
                for check in self.effects
            ],
        }


def validate(povm: Povm, tol: Optional[float] = None) -> ValidationReport:
    """
    Check Hermiticity and positivity of every effect and completeness of the set

    Effects of unit operator norm are listed as cone candidates: their outcome
    can reach probability one, which turns the image boundary into a cone.
    """
    tol = DEFAULT_TOL if tol is None else tol
    violations: List[str] = []
    checks: List[EffectCheck] = []
    cone_candidates: List[int] = []
    total = np.zeros((povm.dim, povm.dim), dtype=complex)

    for index, effect in enumerate(povm.effects):
        if effect.shape != (povm.dim, povm.dim):
            raise DimensionMismatch(f"effect {index} has shape {effect.shape}, expected order {povm.dim}")
        residual = hermiticity_residual(effect)
        hermitian_part = 0.5 * (effect + effect.conj().T)
        spectrum = hermitian_eigen(hermitian_part).eigenvalues
        lam_min = float(spectrum[0])
        norm = float(np.max(np.abs(spectrum)))
        checks.append(EffectCheck(index, residual, lam_min, norm))

        if residual > tol:
            violations.append(f"effect {index}: not Hermitian (max |A - A^H| = {residual:.3e})")
        if lam_min < -tol:
            violations.append(f"effect {index}: not positive (min eigenvalue {lam_min:.3e})")
        if abs(norm - 1.0) <= tol:
            cone_candidates.append(index)
        total += effect

    completeness = float(np.max(np.abs(total - np.eye(povm.dim))))
    if completeness > tol:
        violations.append(f"effects sum to identity only within {completeness:.3e}")

    report = ValidationReport(
        ok=not violations,
        completeness_residual=completeness,
        effects=checks,
        violations=violations,
        cone_candidates=cone_candidates,
    )
    logger.debug(f"Validated POVM with {povm.n_outcomes} effects: ok={report.ok}")
    return report


def build_affine_map(povm: Povm) -> AffineMap:
    """
    Row mu: (x_mm - x_dd for m < d, 2 x_mn, 2 y_mn for m < n); c_mu = x_dd

    x and y are the real and imaginary parts of A_mu, off-diagonal pairs in the
    same row-major order as StateParameters.
    """
    d = povm.dim
    pairs = upper_pairs(d)
    rows = []
    offset = []
    for effect in povm.effects:
        x, y = effect.real, effect.imag
        diagonal = x.diagonal()[: d - 1] - x[d - 1, d - 1]
        off_x = [2.0 * x[m, n] for m, n in pairs]
        off_y = [2.0 * y[m, n] for m, n in pairs]
        rows.append(np.concatenate([diagonal, off_x, off_y]))
        offset.append(x[d - 1, d - 1])

    matrix = np.array(rows, dtype=float).reshape(povm.n_outcomes, d * d - 1)
    return AffineMap(dim=d, matrix=matrix, offset=np.array(offset, dtype=float))


def effective_dimension(povm: Povm, tol: Optional[float] = None) -> int:
    """Numerical rank of M, the dimension of the affine hull of all outcome points"""
    return numerical_rank(build_affine_map(povm).matrix, tol)


def is_informationally_complete(povm: Povm, tol: Optional[float] = None) -> bool:
    return effective_dimension(povm, tol) == povm.dim ** 2 - 1


def apply_affine_map(affine: AffineMap, rho: StateLike) -> np.ndarray:
    """M r(rho) + c"""
    return affine.apply(to_parameters(rho))


def tetrahedral_povm() -> Povm:
    """Qubit POVM A_mu = (I + a_mu . sigma)/4 over the tetrahedron vertices"""
    sigma = pauli_matrices()
    effects = []
    for vertex in TETRAHEDRON_VERTICES:
        bloch = sum(component * s for component, s in zip(vertex, sigma))
        effects.append(0.25 * (np.eye(2) + bloch))
    return Povm.from_effects(effects)


def computational_basis(d: int) -> np.ndarray:
    """Standard basis vectors as rows"""
    return np.eye(d, dtype=complex)


def fourier_basis(d: int) -> np.ndarray:
    """Discrete Fourier basis vectors as rows"""
    m, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * m * k / d) / np.sqrt(d)


def projective_povm(basis: Sequence[Sequence[complex]], tol: Optional[float] = None) -> Povm:
    """
    Rank-one projectors |b_m><b_m| of an orthonormal basis

    Args:
        basis: d vectors of length d (rows)

    Raises:
        NotOrthonormal: Gram matrix differs from identity beyond tol
    """
    tol = DEFAULT_TOL if tol is None else tol
    vectors = np.array(basis, dtype=complex)
    if vectors.ndim != 2 or vectors.shape[0] != vectors.shape[1]:
        raise NotOrthonormal(f"need d vectors of length d, got shape {vectors.shape}")
    gram = vectors.conj() @ vectors.T
    deviation = float(np.max(np.abs(gram - np.eye(vectors.shape[0]))))
    if deviation > tol:
        raise NotOrthonormal(f"Gram matrix deviates from identity by {deviation:.3e}")
    return Povm.from_effects([np.outer(b, b.conj()) for b in vectors])


def random_povm(d: int, n_outcomes: int, seed: int, rank: Optional[int] = None) -> Povm:
    """
    Seeded random POVM A_mu = S^-1/2 B_mu S^-1/2 with S = sum B_mu

    Each B_mu = G G^H for a complex Gaussian d x rank matrix G, so completeness
    holds by construction.
    """
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise BadRank(f"effect rank must satisfy 1 <= rank <= d = {d}, got {rank}")
    if n_outcomes < 1 or n_outcomes * rank < d:
        raise BadRank(f"{n_outcomes} effects of rank {rank} cannot sum to the identity in d = {d}")

    rng = make_rng(seed)
    blocks = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
        blocks.append(g @ g.conj().T)

    total = sum(blocks)
    eig = hermitian_eigen(0.5 * (total + total.conj().T))
    inv_sqrt = (eig.eigenvectors / np.sqrt(eig.eigenvalues)) @ eig.eigenvectors.conj().T

    effects = []
    for block in blocks:
        effect = inv_sqrt @ block @ inv_sqrt
        effects.append(0.5 * (effect + effect.conj().T))
    return Povm.from_effects(effects)


def builtin_povm(name: str) -> Povm:
    """
    Resolve a named POVM: tetrahedral, sigma-z, computational:<d>, fourier:<d>

    Raises:
        PovmDomainError: unknown name or malformed order
    """
    key, _, argument = name.strip().lower().partition(":")
    if key == "tetrahedral" and not argument:
        return tetrahedral_povm()
    if key == "sigma-z" and not argument:
        return projective_povm(computational_basis(2))
    if key in ("computational", "fourier"):
        try:
            d = int(argument)
        except ValueError:
            raise PovmDomainError(f"POVM name {name!r} needs an integer order, e.g. {key}:3")
        if d < 1:
            raise PovmDomainError(f"order must be positive in {name!r}")
        basis = computational_basis(d) if key == "computational" else fourier_basis(d)
        return projective_povm(basis)
    raise PovmDomainError(f"unknown POVM name {name!r}")
