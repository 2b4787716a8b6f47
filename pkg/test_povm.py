"""
Tests for POVM construction, validation and the affine probability map
"""
import numpy as np
import pytest

from models.errors import BadRank, DimensionMismatch, NotOrthonormal, PovmDomainError
from models.povm import (
    TETRAHEDRON_VERTICES,
    Povm,
    apply_affine_map,
    build_affine_map,
    builtin_povm,
    computational_basis,
    effective_dimension,
    fourier_basis,
    is_informationally_complete,
    projective_povm,
    random_povm,
    tetrahedral_povm,
    validate,
)
from models.states import maximally_mixed, random_density


def test_tetrahedral_povm_is_valid():
    report = validate(tetrahedral_povm())
    assert report.ok
    assert report.violations == []
    assert report.completeness_residual <= 1e-15
    assert all(check.min_eigenvalue >= -1e-15 for check in report.effects)


def test_completeness_violation():
    povm = Povm.from_effects([np.diag([1.0, 0.0]), np.diag([0.0, 0.9])])
    report = validate(povm)
    assert not report.ok
    assert report.completeness_residual == pytest.approx(0.1)
    assert len(report.violations) == 1


def test_positivity_violation_names_the_effect():
    povm = Povm.from_effects([np.diag([0.0, 1.01]), np.diag([1.0, -0.01])])
    report = validate(povm)
    assert not report.ok
    assert report.completeness_residual <= 1e-15
    assert len(report.violations) == 1
    assert report.violations[0].startswith("effect 1: not positive")
    assert report.effects[1].min_eigenvalue == pytest.approx(-0.01)


def test_hermiticity_violation():
    povm = Povm.from_effects([np.array([[0.5, 0.2], [0.0, 0.5]]), np.array([[0.5, -0.2], [0.0, 0.5]])])
    report = validate(povm)
    assert any("not Hermitian" in message for message in report.violations)


def test_cone_candidates_are_unit_norm_effects():
    assert validate(projective_povm(computational_basis(2))).cone_candidates == [0, 1]
    assert validate(tetrahedral_povm()).cone_candidates == []


def test_report_serializes():
    payload = validate(tetrahedral_povm()).to_dict()
    assert payload["ok"] is True
    assert [effect["index"] for effect in payload["effects"]] == [0, 1, 2, 3]


def test_mixed_orders_are_rejected():
    with pytest.raises(DimensionMismatch):
        Povm.from_effects([np.eye(2), np.eye(3)])
    with pytest.raises(DimensionMismatch):
        Povm.from_effects([])


def test_sigma_z_affine_map():
    affine = build_affine_map(projective_povm(computational_basis(2)))
    np.testing.assert_allclose(affine.matrix, [[1, 0, 0], [-1, 0, 0]])
    np.testing.assert_allclose(affine.offset, [0, 1])


def test_tetrahedral_affine_rows():
    affine = build_affine_map(tetrahedral_povm())
    for row, offset, a in zip(affine.matrix, affine.offset, TETRAHEDRON_VERTICES):
        np.testing.assert_allclose(row, [a[2] / 2, a[0] / 2, -a[1] / 2], atol=1e-15)
        assert offset == pytest.approx((1 - a[2]) / 4, abs=1e-15)


def test_maximally_mixed_image_is_effect_trace():
    povm = random_povm(3, 5, 2)
    p = apply_affine_map(build_affine_map(povm), maximally_mixed(3))
    np.testing.assert_allclose(p, [np.trace(e).real / 3 for e in povm.effects], atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_affine_map_matches_born_rule(d):
    for seed in range(34):
        povm = random_povm(d, d * d + seed % 4, 1000 * d + seed)
        rho = random_density(d, 1 + seed % d, 2000 * d + seed)
        affine = build_affine_map(povm)

        born = np.array([np.trace(rho.matrix @ e).real for e in povm.effects])
        assert np.max(np.abs(apply_affine_map(affine, rho) - born)) <= 1e-12
        assert np.max(np.abs(affine.column_sums())) <= 1e-12
        assert affine.offset_sum() == pytest.approx(1.0, abs=1e-12)


def test_random_povm_is_valid_and_deterministic():
    povm = random_povm(3, 6, 11)
    assert validate(povm).ok
    np.testing.assert_array_equal(povm.stacked(), random_povm(3, 6, 11).stacked())


def test_random_povm_rank():
    povm = random_povm(3, 9, 4, rank=1)
    assert validate(povm).ok
    assert all(np.linalg.matrix_rank(e, tol=1e-10) == 1 for e in povm.effects)
    with pytest.raises(BadRank):
        random_povm(3, 2, 4, rank=1)


def test_effective_dimension_examples():
    assert effective_dimension(tetrahedral_povm()) == 3
    assert effective_dimension(projective_povm(computational_basis(2))) == 1
    assert effective_dimension(Povm.from_effects([np.eye(2) / 2, np.eye(2) / 2])) == 0


def test_effective_dimension_is_bounded():
    for seed in range(10):
        povm = random_povm(2, 5 + seed % 6, seed)
        assert effective_dimension(povm) <= 3


def test_effective_dimension_invariances():
    povm = random_povm(2, 3, 21)
    rank = effective_dimension(povm)
    effects = list(povm.effects)

    permuted = Povm.from_effects(effects[::-1])
    split = Povm.from_effects(effects[:-1] + [effects[-1] / 2, effects[-1] / 2])
    assert effective_dimension(permuted) == rank
    assert effective_dimension(split) == rank


def test_informational_completeness():
    assert is_informationally_complete(tetrahedral_povm())
    assert is_informationally_complete(random_povm(3, 9, 6))
    assert not is_informationally_complete(projective_povm(fourier_basis(3)))


def test_computational_basis_projectors():
    povm = projective_povm(computational_basis(2))
    np.testing.assert_allclose(povm.effects[0], np.diag([1.0, 0.0]))
    np.testing.assert_allclose(povm.effects[1], np.diag([0.0, 1.0]))


def test_fourier_basis_qutrit():
    povm = projective_povm(fourier_basis(3))
    assert validate(povm).ok
    assert effective_dimension(povm) == 2


def test_non_orthonormal_basis():
    with pytest.raises(NotOrthonormal):
        projective_povm([[1, 0], [1, 1]])
    with pytest.raises(NotOrthonormal):
        projective_povm([[1, 0, 0], [0, 1, 0]])


def test_builtin_names():
    assert builtin_povm("tetrahedral").n_outcomes == 4
    assert builtin_povm("sigma-z").n_outcomes == 2
    assert builtin_povm("computational:3").dim == 3
    assert builtin_povm("Fourier:4").n_outcomes == 4

    with pytest.raises(PovmDomainError):
        builtin_povm("fourier:x")
    with pytest.raises(PovmDomainError):
        builtin_povm("sic:2")
