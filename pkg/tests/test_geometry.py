import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wradon.geometry import (
    DegenerateDirection,
    Frame,
    Hyperplane,
    IntersectionKind,
    Ray,
    alpha_3d_legacy,
    alpha_hodge,
    alpha_of_theta,
    classify_intersection,
    complete_orthonormal,
    frame_on_hyperplane,
    hodge_star,
    is_degenerate,
    remark2_frame,
)


def det_oracle(alpha, theta):
    """Permutation-sum determinant of rows (alpha, theta, e3, ..., ed)."""
    d = len(theta)
    m = np.eye(d)
    m[0], m[1] = alpha, theta
    total = 0.0
    for perm in itertools.permutations(range(d)):
        sign = np.linalg.det(np.eye(d)[list(perm)])
        prod = 1.0
        for i, j in enumerate(perm):
            prod *= m[i, j]
        total += sign * prod
    return total


def unit_vectors(d):
    return arrays(np.float64, d, elements=st.floats(-1, 1)).map(
        lambda v: v / np.linalg.norm(v) if np.linalg.norm(v) > 1e-3 else np.eye(d)[0]
    )


def test_alpha_of_e1_and_e2():
    assert np.allclose(alpha_of_theta(np.array([1.0, 0, 0])), [0, -1, 0], atol=0)
    assert np.allclose(alpha_of_theta(np.array([0, 1.0, 0])), [1, 0, 0], atol=0)


def test_alpha_d4_e2_hodge_matches():
    th = np.array([0, 1.0, 0, 0])
    assert np.allclose(alpha_hodge(th), [1, 0, 0, 0], atol=1e-15)
    assert np.allclose(alpha_of_theta(th), [1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_alpha_orientation_against_permutation_determinant(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        th = rng.standard_normal(d)
        th /= np.linalg.norm(th)
        a = alpha_of_theta(th)
        assert det_oracle(a, th) > 0
        assert abs(a @ th) < 1e-15
        assert np.all(a[2:] == 0)


def test_legacy_3d_with_minus_e3():
    rng = np.random.default_rng(0)
    for _ in range(50):
        th = rng.standard_normal(3)
        th /= np.linalg.norm(th)
        assert np.allclose(alpha_3d_legacy(th, np.array([0, 0, -1.0])), alpha_of_theta(th), atol=1e-14)


def test_legacy_rejects_parallel():
    with pytest.raises(DegenerateDirection):
        alpha_3d_legacy(np.array([0, 0, 1.0]), np.array([0, 0, -1.0]))


def test_hodge_star_is_cross_product_in_3d():
    u, v = np.array([1.0, 2, 3]), np.array([-1.0, 0.5, 2])
    assert np.allclose(hodge_star(np.array([u, v])), np.cross(u, v))


def test_degenerate_detection_and_errors():
    assert is_degenerate(np.array([0, 0, 1.0]))
    assert is_degenerate(np.array([1e-10, -1e-10, 1.0]))
    assert not is_degenerate(np.array([1e-8, 0, 1.0]))
    with pytest.raises(DegenerateDirection):
        alpha_of_theta(np.array([0, 0, 1.0]))
    with pytest.raises(ValueError):
        is_degenerate(np.array([1.0, 0.0]))


def test_gram_schmidt_by_hand():
    # {theta=e1, alpha=-e2} in R^3: e1, e2 are skipped, e3 is taken
    added = complete_orthonormal([np.array([1.0, 0, 0]), np.array([0, -1.0, 0])], 3)
    assert np.array_equal(added, [[0, 0, 1.0]])
    # theta = (1,1,0)/sqrt2: e1 residual (1/2,-1/2,0) normalized
    th = np.array([1.0, 1, 0]) / np.sqrt(2)
    added = complete_orthonormal([th], 3)
    assert np.allclose(added[0], [1 / np.sqrt(2), -1 / np.sqrt(2), 0])
    assert np.allclose(added[1], [0, 0, 1])


def test_frame_and_hyperplane_types():
    th = np.array([0.6, 0.8, 0.0])
    fr = frame_on_hyperplane(th)
    assert np.allclose(fr.full_basis() @ fr.full_basis().T, np.eye(3), atol=1e-14)
    with pytest.raises(ValueError):
        Frame(alpha=np.array([1.0, 0, 0]), betas=np.array([[1.0, 0, 0]]), theta=th)
    with pytest.raises(ValueError):
        Hyperplane(0.0, np.array([1.0, 1.0, 0]))
    with pytest.raises(ValueError):
        Ray(np.array([1.0, 0]), np.array([1.0, 0]))
    r2 = remark2_frame(np.array([0, 0, 1.0]))
    assert np.array_equal(r2.alpha, [1.0, 0, 0])


@settings(max_examples=200, deadline=None)
@given(unit_vectors(4), st.integers(0, 50))
def test_frame_orthonormal_any_seed(th, seed):
    assume(not is_degenerate(th, 1e-6))
    fr = frame_on_hyperplane(th, seed=seed)
    g = fr.full_basis() @ fr.full_basis().T
    assert np.max(np.abs(g - np.eye(4))) < 1e-12
    assert np.allclose(fr.alpha, alpha_of_theta(th))


@settings(max_examples=200, deadline=None)
@given(unit_vectors(5))
def test_alpha_hodge_agrees(th):
    assume(not is_degenerate(th, 1e-6))
    assert np.max(np.abs(alpha_hodge(th) - alpha_of_theta(th))) < 1e-12


@settings(max_examples=200, deadline=None)
@given(unit_vectors(3), st.floats(-2, 2))
def test_alpha_reverses_with_theta(th, s):
    # Sigma(s, theta) = Sigma(-s, -theta); alpha flips with theta
    assume(not is_degenerate(th, 1e-6))
    assert np.allclose(alpha_of_theta(-th), -alpha_of_theta(th), atol=1e-15)


def test_classification_cases():
    e3 = np.array([0, 0, 1.0])
    assert classify_intersection(Hyperplane(0.0, e3)) is IntersectionKind.PLANE
    assert classify_intersection(Hyperplane(1.0, e3)) is IntersectionKind.EMPTY
    assert classify_intersection(Hyperplane(1.0, np.array([0.6, 0, 0.8]))) is IntersectionKind.LINE
    with pytest.raises(ValueError):
        classify_intersection(Hyperplane(0.0, np.array([1.0, 0])))
