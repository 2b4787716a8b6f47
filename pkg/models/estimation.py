"""
Estimation Module
Finite-sample simulation, binomial error boxes, linear inversion and feasibility classification
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULT_TOL, ESTIMATION_CONFIG
from models.domain import MembershipVerdict, ProbabilityDomain, probabilities
from models.errors import InvalidCounts, InvalidState
from models.matrix_kernel import as_square_matrix, hermitian_eigen
from models.povm import Povm
from models.states import DensityMatrix, StateParameters
from utils.logger import setup_logger
from utils.rng import make_rng

logger = setup_logger(__name__)


@dataclass(frozen=True)
class CountRecord:
    """n shots with n_mu occurrences of outcome mu"""

    n: int
    counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if self.n < 1:
            raise InvalidCounts(f"shot count must be positive, got {self.n}")
        if not counts:
            raise InvalidCounts("count record needs at least one outcome")
        if any(c < 0 for c in counts):
            raise InvalidCounts(f"counts must be non-negative, got {list(counts)}")
        if sum(counts) != self.n:
            raise InvalidCounts(f"counts sum to {sum(counts)}, expected n = {self.n}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "CountRecord":
        return cls(n=int(sum(counts)), counts=tuple(counts))

    @property
    def frequencies(self) -> np.ndarray:
        """q_mu = n_mu / n"""
        return np.array(self.counts, dtype=float) / self.n


@dataclass(frozen=True, eq=False)
class ErrorBox:
    """Per-outcome box q_mu +- k * dq_mu around the observed frequencies"""

    center: np.ndarray
    halfwidths: np.ndarray
    k: float

    def contains(self, point: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
        return bool(np.all(np.abs(np.asarray(point) - self.center) <= self.halfwidths + tol))

    def scale_of(self, point: Sequence[float], tol: float = DEFAULT_TOL) -> float:
        """
        Smallest factor t with point inside the box stretched to t * halfwidths

        Zero-width outcomes must match the center within tol, otherwise inf.
        """
        diff = np.abs(np.asarray(point, dtype=float) - self.center)
        pinned = self.halfwidths <= 0.0
        if np.any(diff[pinned] > tol):
            return float("inf")
        ratios = diff[~pinned] / self.halfwidths[~pinned]
        return float(ratios.max()) if ratios.size else 0.0


@dataclass(frozen=True, eq=False)
class InversionResult:
    """Linear-inversion estimate with its diagnostics"""

    matrix: np.ndarray
    parameters: StateParameters
    consistency_residual: float
    effective_dimension: int
    non_unique: bool
    min_eigenvalue: float

    def is_physical(self, tol: float = DEFAULT_TOL) -> bool:
        return self.min_eigenvalue >= -tol


class Verdict(str, Enum):
    FEASIBLE = "feasible"
    MARGINAL = "marginal"
    INSUFFICIENT = "insufficient"


@dataclass(frozen=True, eq=False)
class FeasibilityVerdict:
    """
    Classification of observed frequencies

    FEASIBLE carries the estimate; MARGINAL carries the in-domain box point and
    its positivity-repaired estimate; INSUFFICIENT carries neither.
    box_scale is the smallest k at which the search found an in-domain point
    (inf if none), evaluations the membership tests spent.
    """

    kind: Verdict
    estimate: Optional[DensityMatrix] = None
    boundary_point: Optional[np.ndarray] = None
    box_scale: float = float("inf")
    evaluations: int = 0
    min_eigenvalue: float = float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.kind.value,
            "boundary_point": None if self.boundary_point is None else self.boundary_point.tolist(),
            "box_scale": self.box_scale,
            "evaluations": self.evaluations,
            "min_eigenvalue": self.min_eigenvalue,
        }


def simulate_counts(rho: DensityMatrix, povm: Povm, n: int, seed: int) -> CountRecord:
    """
    Multinomial shot counts drawn as sequential conditional binomials

    Outcome mu gets Binomial(remaining shots, p_mu / remaining mass).
    """
    if n < 1:
        raise InvalidCounts(f"shot count must be positive, got {n}")
    p = np.clip(probabilities(rho, povm), 0.0, None)
    p = p / p.sum()

    rng = make_rng(seed)
    counts = []
    remaining = n
    mass = 1.0
    for p_mu in p[:-1]:
        if remaining == 0 or mass <= 0.0:
            counts.append(0)
            continue
        ratio = min(max(p_mu / mass, 0.0), 1.0)
        drawn = int(rng.binomial(remaining, ratio))
        counts.append(drawn)
        remaining -= drawn
        mass -= p_mu
    counts.append(remaining)
    return CountRecord(n=n, counts=tuple(counts))


def dispersion(rec: CountRecord) -> np.ndarray:
    """Empirical binomial dispersion dn_mu = sqrt(n_mu (n - n_mu) / n)"""
    counts = np.array(rec.counts, dtype=float)
    return np.sqrt(counts * (rec.n - counts) / rec.n)


def expected_dispersion(p: Sequence[float], n: int) -> np.ndarray:
    """Binomial dispersion sqrt(n p_mu (1 - p_mu)) for known probabilities"""
    p = np.asarray(p, dtype=float)
    return np.sqrt(n * p * (1.0 - p))


def error_box(rec: CountRecord, k: Optional[float] = None) -> ErrorBox:
    """Box of halfwidths k * dn_mu / n centered at the frequencies"""
    k = ESTIMATION_CONFIG["k"] if k is None else k
    if k <= 0:
        raise ValueError(f"box scale k must be positive, got {k}")
    return ErrorBox(center=rec.frequencies, halfwidths=k * dispersion(rec) / rec.n, k=float(k))


def _inversion_from_verdict(domain: ProbabilityDomain, verdict: MembershipVerdict) -> InversionResult:
    return InversionResult(
        matrix=verdict.matrix,
        parameters=verdict.parameters,
        consistency_residual=verdict.consistency_residual,
        effective_dimension=domain.effective_dimension,
        non_unique=verdict.non_unique,
        min_eigenvalue=verdict.min_eigenvalue,
    )


def linear_inversion(q: Sequence[float], povm: Povm, tol: Optional[float] = None) -> InversionResult:
    """
    Solve M r = q - c in the least-squares, minimum-norm sense

    The reconstructed matrix is Hermitian with unit trace but may fail positivity.
    """
    domain = ProbabilityDomain(povm, tol)
    result = _inversion_from_verdict(domain, domain.membership(q))
    if result.non_unique:
        logger.warning(
            f"POVM is informationally incomplete (rank {result.effective_dimension} < "
            f"{domain.parameter_dimension}); returning the minimum-norm preimage"
        )
    return result


def project_to_physical(m, tol: Optional[float] = None) -> DensityMatrix:
    """
    Closest positive semidefinite unit-trace matrix in Frobenius norm

    Negative eigenvalues are clipped and their total is spread uniformly over
    the surviving eigenvalues, repeating while any survivor turns negative.
    """
    tol = DEFAULT_TOL if tol is None else tol
    a = as_square_matrix(m)
    trace = complex(np.trace(a))
    if abs(trace - 1.0) > tol:
        raise InvalidState(f"projection needs a unit-trace matrix, trace is {trace.real:.12g}")

    eig = hermitian_eigen(a, tol)
    if eig.eigenvalues[0] >= 0.0:
        return DensityMatrix.from_array(a, tol)

    # Descending eigenvalues; peel off the most negative ones
    lam = eig.eigenvalues[::-1].copy()
    vectors = eig.eigenvectors[:, ::-1]
    survivors = lam.size
    deficit = 0.0
    while survivors > 0 and lam[survivors - 1] + deficit / survivors < 0.0:
        deficit += lam[survivors - 1]
        survivors -= 1

    repaired = np.zeros_like(lam)
    repaired[:survivors] = lam[:survivors] + deficit / survivors
    logger.debug(f"Clipped {lam.size - survivors} negative eigenvalues (total {deficit:.3e})")

    result = (vectors * repaired) @ vectors.conj().T
    return DensityMatrix.from_array(0.5 * (result + result.conj().T), tol)


class FeasibilityClassifier:
    """Classify observed frequencies against the probability domain of one POVM"""

    def __init__(self, povm: Povm, tol: Optional[float] = None):
        self.config = ESTIMATION_CONFIG
        self.domain = ProbabilityDomain(povm, tol)
        self.tol = self.domain.tol
        self.logger = setup_logger(self.__class__.__name__)

    def classify(
        self,
        rec: CountRecord,
        k: Optional[float] = None,
        budget: Optional[int] = None,
        seed: int = 0,
    ) -> FeasibilityVerdict:
        """
        Feasible if q itself is in the domain, else Marginal if the error box
        reaches the domain, else Insufficient

        The candidate sequence of the box search depends on q, the dispersions,
        the seed and the budget, never on k, and the search stops at the first
        candidate within scale k. A larger k therefore never loses a verdict.
        """
        k = self.config["k"] if k is None else k
        budget = self.config["budget"] if budget is None else budget
        if k <= 0:
            raise ValueError(f"box scale k must be positive, got {k}")
        if budget < 1:
            raise ValueError(f"budget must be at least 1, got {budget}")
        if len(rec.counts) != self.domain.povm.n_outcomes:
            raise InvalidCounts(
                f"record has {len(rec.counts)} outcomes, POVM has {self.domain.povm.n_outcomes}"
            )

        q = rec.frequencies
        verdict = self.domain.membership(q)
        if verdict.inside:
            self.logger.info("Frequencies lie in the probability domain: feasible")
            return FeasibilityVerdict(
                kind=Verdict.FEASIBLE,
                estimate=verdict.witness_state,
                boundary_point=None,
                box_scale=0.0,
                min_eigenvalue=verdict.min_eigenvalue,
            )

        search = _BoxSearch(self.domain, error_box(rec, 1.0), budget, seed, self.config)
        best_scale, best_point, best_verdict = search.run(k, verdict)

        if best_verdict is not None and best_scale <= k:
            estimate = project_to_physical(best_verdict.matrix, self.tol)
            self.logger.info(
                f"Error box reaches the domain at scale {best_scale:.4g} <= k = {k}: marginal "
                f"({search.evaluations} evaluations)"
            )
            return FeasibilityVerdict(
                kind=Verdict.MARGINAL,
                estimate=estimate,
                boundary_point=best_point,
                box_scale=best_scale,
                evaluations=search.evaluations,
                min_eigenvalue=verdict.min_eigenvalue,
            )

        self.logger.info(
            f"No domain point within scale k = {k} (best {best_scale:.4g}, "
            f"{search.evaluations} evaluations): insufficient"
        )
        return FeasibilityVerdict(
            kind=Verdict.INSUFFICIENT,
            box_scale=best_scale,
            evaluations=search.evaluations,
            min_eigenvalue=verdict.min_eigenvalue,
        )


class _BoxSearch:
    """
    Budgeted, seeded search for domain points close to q in box-scale terms

    Outcomes with zero width (n_mu = 0 or n) pin q'_mu exactly. A state meets
    q'_mu = 0 only if its support lies in the kernel of A_mu, and q'_mu = 1 only
    inside the kernel of I - A_mu, so every candidate state is compressed onto
    the intersection of those kernels before its image is taken.
    """

    def __init__(
        self,
        domain: ProbabilityDomain,
        box: ErrorBox,
        budget: int,
        seed: int,
        config: Dict[str, Any],
    ):
        self.domain = domain
        self.q = box.center
        self.sigma = box.halfwidths / box.k
        self.box = box
        self.budget = budget
        self.rng = make_rng(seed)
        self.bisection_steps = config["bisection_steps"]
        self.initial_scale = config.get("initial_scale", 3.0)
        self.evaluations = 0
        self.logger = setup_logger(self.__class__.__name__)
        self.support = self._support_basis()

    def _support_basis(self) -> np.ndarray:
        """Orthonormal basis of the states compatible with the pinned outcomes"""
        dim = self.domain.povm.dim
        pinned = np.flatnonzero(self.sigma <= 0.0)
        if pinned.size == 0:
            return np.eye(dim, dtype=complex)
        effects = self.domain.povm.stacked()
        constraint = np.zeros((dim, dim), dtype=complex)
        for mu in pinned:
            constraint += effects[mu] if self.q[mu] < 0.5 else np.eye(dim) - effects[mu]
        eig = hermitian_eigen(constraint, self.domain.tol)
        basis = eig.eigenvectors[:, eig.eigenvalues <= self.domain.tol * pinned.size]
        self.logger.debug(f"{pinned.size} pinned outcomes leave a support of dimension {basis.shape[1]}")
        return basis

    def box_scale(self, point: np.ndarray) -> float:
        """Smallest k with |point - q| <= k * sigma componentwise"""
        return self.box.scale_of(point, self.domain.tol) * self.box.k

    def fit(self, point: np.ndarray, scale: float) -> np.ndarray:
        """
        Euclidean projection onto the box of the given scale intersected with the simplex

        The projection is clip(point - lam, lo, hi) with the shift lam chosen by
        bisection so that the entries sum to one.
        """
        lo = np.maximum(self.q - scale * self.sigma, 0.0)
        hi = np.minimum(self.q + scale * self.sigma, 1.0)
        low, high = float(np.min(point - hi)), float(np.max(point - lo))
        for _ in range(100):
            lam = 0.5 * (low + high)
            if np.clip(point - lam, lo, hi).sum() > 1.0:
                low = lam
            else:
                high = lam
        return np.clip(point - 0.5 * (low + high), lo, hi)

    def free_scale(self, point: np.ndarray) -> float:
        """Box scale of a point ignoring the pinned outcomes"""
        free = self.sigma > 0.0
        if not np.any(free):
            return 0.0
        return float(np.max(np.abs(point[free] - self.q[free]) / self.sigma[free]))

    def image(self, matrix: np.ndarray) -> np.ndarray:
        """Probability point of the positivity-repaired matrix compressed onto the support"""
        repaired = project_to_physical(matrix, self.domain.tol).matrix
        projector = self.support @ self.support.conj().T
        compressed = projector @ repaired @ projector
        trace = float(np.trace(compressed).real)
        if trace <= self.domain.tol:
            compressed, trace = projector, float(self.support.shape[1])
        return self.domain.probabilities(compressed / trace)

    def _evaluate(self, point: np.ndarray) -> Optional[MembershipVerdict]:
        if self.evaluations >= self.budget:
            return None
        self.evaluations += 1
        return self.domain.membership(point)

    def _seeds(self, verdict: MembershipVerdict) -> Iterator[np.ndarray]:
        """Deterministic starting points: repaired estimate, then the nearest affine-image point fitted to the box"""
        yield self.image(verdict.matrix)
        if verdict.consistency_residual > self.domain.tol:
            nearest = self.domain.affine_map.apply(verdict.parameters)
            yield self.fit(nearest, self.free_scale(nearest))

    def _push_toward_q(self, inside: np.ndarray, inside_verdict: MembershipVerdict):
        """Bisect the segment from an in-domain point to q for the last in-domain point"""
        low, high = 0.0, 1.0
        point, verdict = inside, inside_verdict
        for _ in range(self.bisection_steps):
            middle = 0.5 * (low + high)
            trial = inside + middle * (self.q - inside)
            trial_verdict = self._evaluate(trial)
            if trial_verdict is None:
                break
            if trial_verdict.inside:
                low, point, verdict = middle, trial, trial_verdict
            else:
                high = middle
        return point, verdict

    def _sample(self, scale: float) -> np.ndarray:
        """Uniform point in the box of the given scale, projected back onto the simplex"""
        point = self.q + scale * self.sigma * self.rng.uniform(-1.0, 1.0, size=self.q.size)
        return self.fit(point, scale)

    def run(self, k: float, verdict: MembershipVerdict):
        best_scale, best_point, best_verdict = float("inf"), None, None
        if self.support.shape[1] == 0:
            self.logger.debug("No state reproduces the pinned outcomes")
            return best_scale, best_point, best_verdict

        def consider(point, point_verdict):
            nonlocal best_scale, best_point, best_verdict
            point, point_verdict = self._push_toward_q(point, point_verdict)
            scale = self.box_scale(point)
            if scale < best_scale:
                best_scale, best_point, best_verdict = scale, point, point_verdict

        def attempt(point):
            """Test a point; when it misses the domain, test its repaired image instead"""
            point_verdict = self._evaluate(point)
            if point_verdict is None:
                return
            if not point_verdict.inside:
                point = self.image(point_verdict.matrix)
                if self.box_scale(point) >= best_scale:
                    return
                point_verdict = self._evaluate(point)
            if point_verdict is not None and point_verdict.inside and self.box_scale(point) < best_scale:
                consider(point, point_verdict)

        for start in self._seeds(verdict):
            attempt(start)
            if best_scale <= k or self.evaluations >= self.budget:
                return best_scale, best_point, best_verdict

        # Coarse to fine: sample inside the box of the best scale found so far
        while self.evaluations < self.budget and best_scale > k:
            scale = best_scale if np.isfinite(best_scale) else self.initial_scale
            attempt(self._sample(scale))

        self.logger.debug(
            f"Box search used {self.evaluations}/{self.budget} evaluations, best scale {best_scale:.4g}"
        )
        return best_scale, best_point, best_verdict


def classify(
    rec: CountRecord,
    povm: Povm,
    k: Optional[float] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    tol: Optional[float] = None,
) -> FeasibilityVerdict:
    """Feasible / Marginal / Insufficient verdict for a count record"""
    return FeasibilityClassifier(povm, tol).classify(rec, k=k, budget=budget, seed=seed)
