"""
Tests for the probability domain: Born probabilities, affine dimension, membership and qubit geometry
"""
import numpy as np
import pytest

from models.domain import (
    ProbabilityDomain,
    bloch_images,
    ellipsoid_coordinates,
    extreme_point_dimension,
    extreme_point_sample,
    figure_table,
    implied_bloch_norm,
    is_probability_point,
    membership,
    probabilities,
    subspace_dimension,
    tetrahedral_radius_squared,
    tetrahedron_coordinates,
)
from models.errors import DimensionMismatch, TooFewPoints, WrongLength
from models.matrix_kernel import singular_values
from models.povm import (
    TETRAHEDRON_VERTICES,
    Povm,
    computational_basis,
    effective_dimension,
    projective_povm,
    random_povm,
    tetrahedral_povm,
)
from models.states import (
    BlochVector,
    DensityMatrix,
    bloch_state,
    maximally_mixed,
    pauli_matrices,
    random_density,
    spectral_decompose,
)

SPIN_UP_IMAGE = [0.394338, 0.105662, 0.105662, 0.394338]


@pytest.fixture(scope="module")
def tetrahedral():
    return tetrahedral_povm()


def test_probability_examples(tetrahedral):
    np.testing.assert_allclose(probabilities(maximally_mixed(2), tetrahedral), [0.25] * 4, atol=1e-15)
    np.testing.assert_allclose(
        probabilities(bloch_state(BlochVector((0, 0, 1))), tetrahedral), SPIN_UP_IMAGE, atol=1e-6
    )
    computational = projective_povm(computational_basis(2))
    rho = DensityMatrix.from_array(np.diag([0.2, 0.8]))
    np.testing.assert_allclose(probabilities(rho, computational), [0.2, 0.8])


def test_probabilities_are_probability_points(tetrahedral):
    for seed in range(20):
        p = probabilities(random_density(2, 2, seed), tetrahedral)
        assert is_probability_point(p)


def test_probability_dimension_mismatch(tetrahedral):
    with pytest.raises(DimensionMismatch):
        probabilities(maximally_mixed(3), tetrahedral)


def test_domain_object_agrees_with_function(tetrahedral):
    domain = ProbabilityDomain(tetrahedral)
    rho = random_density(2, 2, 7)
    np.testing.assert_allclose(domain.probabilities(rho), probabilities(rho, tetrahedral), atol=1e-15)
    assert domain.parameter_dimension == 3
    assert domain.effective_dimension == 3
    assert not domain.non_unique
    assert domain.redundant_outcomes == 0


def test_sphere_law_pure_states(tetrahedral):
    points = extreme_point_sample(tetrahedral, 1000, 12)
    radii = np.sum((points - 0.25) ** 2, axis=1)
    assert np.max(np.abs(radii - 1 / 12)) <= 1e-12


def test_sphere_law_mixed_states(tetrahedral):
    for seed in range(1000):
        p = probabilities(random_density(2, 2, seed), tetrahedral)
        assert tetrahedral_radius_squared(p) <= 1 / 12 + 1e-15


def test_coordinate_sphere(tetrahedral):
    for seed in range(200):
        rank = 1 + seed % 2
        x, y, z = tetrahedron_coordinates(probabilities(random_density(2, rank, seed), tetrahedral))
        radius = x * x + y * y + z * z
        assert radius <= 1 / 3 + 1e-12
        if rank == 1:
            assert radius == pytest.approx(1 / 3, abs=1e-12)
        else:
            assert radius < 1 / 3 - 1e-12


def test_tetrahedron_coordinates_examples():
    np.testing.assert_allclose(tetrahedron_coordinates([0.25] * 4), (0, 0, 0), atol=1e-15)
    x, y, z = tetrahedron_coordinates(SPIN_UP_IMAGE)
    assert (x, y) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert z == pytest.approx(0.577350, abs=1e-6)
    with pytest.raises(WrongLength):
        tetrahedron_coordinates([0.5, 0.5])


def test_coordinates_are_scaled_bloch_vectors(tetrahedral):
    n = np.array([0.3, -0.2, 0.5])
    p = probabilities(bloch_state(BlochVector(tuple(n))), tetrahedral)
    np.testing.assert_allclose(tetrahedron_coordinates(p), n / np.sqrt(3), atol=1e-15)
    assert implied_bloch_norm(p) == pytest.approx(np.linalg.norm(n))
    np.testing.assert_allclose(ellipsoid_coordinates(p), p[:3])


def test_subspace_dimension_of_qubit_images(tetrahedral):
    points = [probabilities(random_density(2, 2, seed), tetrahedral) for seed in range(100)]
    assert subspace_dimension(points) == 3

    povm = random_povm(2, 6, 3)
    points = [probabilities(random_density(2, 2, seed), povm) for seed in range(50)]
    assert subspace_dimension(points) <= 3


def test_subspace_dimension_degenerate_input():
    assert subspace_dimension([[0.5, 0.5]] * 5) == 0
    with pytest.raises(TooFewPoints):
        subspace_dimension([[0.5, 0.5]])
    with pytest.raises(DimensionMismatch):
        subspace_dimension([[0.5, 0.5], [1.0, 0.0, 0.0]])


def test_extreme_point_sample_is_deterministic(tetrahedral):
    np.testing.assert_array_equal(
        extreme_point_sample(tetrahedral, 1, 5), extreme_point_sample(tetrahedral, 1, 5)
    )
    assert extreme_point_sample(tetrahedral, 3, 5).shape == (3, 4)


def test_extreme_point_dimension():
    assert extreme_point_dimension(2) == 2
    assert extreme_point_dimension(3) == 4


@pytest.mark.parametrize("seed", range(20))
def test_confinement_for_qubits(seed):
    povm = random_povm(2, 5 + seed % 6, 300 + seed)
    points = extreme_point_sample(povm, 200, seed)

    sampled = subspace_dimension(points)
    assert sampled <= 3
    assert sampled == effective_dimension(povm)
    sigma = singular_values(points - points.mean(axis=0))
    assert sigma[3] < 1e-9 * sigma[0]


@pytest.mark.parametrize("n_outcomes", [10, 12])
def test_confinement_for_qutrits(n_outcomes):
    povm = random_povm(3, n_outcomes, 40 + n_outcomes)
    points = extreme_point_sample(povm, 200, n_outcomes)

    sampled = subspace_dimension(points)
    assert sampled <= 8
    assert sampled == effective_dimension(povm)
    sigma = singular_values(points - points.mean(axis=0))
    assert sigma[8] < 1e-9 * sigma[0]


def test_confinement_nine_outcome_qutrit():
    povm = random_povm(3, 9, 77)
    assert subspace_dimension(extreme_point_sample(povm, 500, 1)) <= 8


def test_convexity():
    rng = np.random.default_rng(2)
    povm = random_povm(3, 7, 8)
    for trial in range(1000):
        first = random_density(3, 3, 2 * trial)
        second = random_density(3, 1, 2 * trial + 1)
        x = rng.uniform()
        mixture = DensityMatrix.from_array(x * first.matrix + (1 - x) * second.matrix)
        expected = x * probabilities(first, povm) + (1 - x) * probabilities(second, povm)
        assert np.max(np.abs(probabilities(mixture, povm) - expected)) <= 1e-12


def test_membership_of_the_center(tetrahedral):
    verdict = membership([0.25] * 4, tetrahedral)
    assert verdict.inside
    assert not verdict.on_boundary
    assert verdict.min_eigenvalue == pytest.approx(0.5)
    np.testing.assert_allclose(verdict.witness_state.matrix, np.eye(2) / 2, atol=1e-14)


def test_membership_outside(tetrahedral):
    verdict = membership([0.5, 0.5, 0.0, 0.0], tetrahedral)
    assert not verdict.inside
    assert verdict.witness_state is None
    assert verdict.consistency_residual <= 1e-12
    assert verdict.min_eigenvalue == pytest.approx((1 - np.sqrt(3)) / 2, abs=1e-12)


def test_membership_on_the_boundary(tetrahedral):
    verdict = membership(probabilities(bloch_state(BlochVector((0, 0, 1))), tetrahedral), tetrahedral)
    assert verdict.inside
    assert verdict.on_boundary


def test_boundary_uses_the_verdict_tolerance(tetrahedral):
    # smallest eigenvalue 1e-6
    q = probabilities(bloch_state(BlochVector((0, 0, 1 - 2e-6))), tetrahedral)
    assert not membership(q, tetrahedral).on_boundary
    loose = membership(q, tetrahedral, tol=1e-5)
    assert loose.tol == 1e-5
    assert loose.on_boundary


def test_membership_residual_off_the_affine_image():
    sx, _, sz = pauli_matrices()
    identity = np.eye(2)
    povm = Povm.from_effects(
        [(identity + sx) / 4, (identity - sx) / 4, (identity + sz) / 4, (identity - sz) / 4]
    )
    verdict = membership([0.4, 0.3, 0.2, 0.1], povm)
    assert not verdict.inside
    assert verdict.non_unique
    assert verdict.consistency_residual == pytest.approx(0.2, abs=1e-12)


def test_membership_round_trip(tetrahedral):
    for seed in range(100):
        rho = random_density(2, 2, seed)
        verdict = membership(probabilities(rho, tetrahedral), tetrahedral)
        assert verdict.inside
        assert np.linalg.norm(verdict.witness_state.matrix - rho.matrix) <= 1e-10


def test_membership_wrong_length(tetrahedral):
    with pytest.raises(DimensionMismatch):
        membership([0.5, 0.5], tetrahedral)


def test_extreme_point_decomposition():
    povm = random_povm(3, 9, 5)
    for seed in range(100):
        rho = random_density(3, 3, seed)
        terms = spectral_decompose(rho)
        assert len(terms) <= 3
        recombined = sum(weight * probabilities(component, povm) for weight, component in terms)
        assert np.max(np.abs(recombined - probabilities(rho, povm))) <= 1e-10


@pytest.mark.parametrize("mu", range(4))
def test_tangency_to_coordinate_planes(tetrahedral, mu):
    p = probabilities(bloch_state(BlochVector(tuple(-TETRAHEDRON_VERTICES[mu]))), tetrahedral)
    expected = np.full(4, 1 / 3)
    expected[mu] = 0.0
    np.testing.assert_allclose(p, expected, atol=1e-12)


def test_bloch_images_match_states(tetrahedral):
    vectors = np.array([[0.0, 0.0, 1.0], [0.3, -0.2, 0.5]])
    images = bloch_images(tetrahedral, vectors)
    for n, image in zip(vectors, images):
        np.testing.assert_allclose(image, probabilities(bloch_state(BlochVector(tuple(n))), tetrahedral), atol=1e-15)


def test_figure_table(tetrahedral):
    table = figure_table(tetrahedral, 5, 8)
    assert list(table.columns) == ["theta_b", "phi_b", "p1", "p2", "p3", "p4", "x", "y", "z"]
    assert len(table) == 40
    assert table.theta_b.min() == 0.0
    assert table.theta_b.max() == pytest.approx(np.pi)
    assert table.phi_b.max() < 2 * np.pi

    np.testing.assert_allclose(table[["p1", "p2", "p3", "p4"]].sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(table.x ** 2 + table.y ** 2 + table.z ** 2, 1 / 3, atol=1e-12)


def test_figure_table_requires_four_outcome_qubit():
    with pytest.raises(DimensionMismatch):
        figure_table(projective_povm(computational_basis(2)), 4, 4)
