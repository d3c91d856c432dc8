import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wradon.fields import gaussian_oracle
from wradon.geometry import Hyperplane, Ray, frame_on_hyperplane
from wradon.quadrature import (
    FiberRule,
    HyperplaneRule,
    gauss_legendre_rule,
    integrate_along_ray,
    integrate_over_hyperplane,
)


def test_two_point_rule():
    r = gauss_legendre_rule(2, 1.0)
    assert np.allclose(r.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-16)
    assert np.allclose(r.weights, [1, 1], atol=1e-15)
    for k, exact in enumerate([2, 0, 2 / 3, 0]):
        assert abs(r.weights @ r.nodes**k - exact) < 1e-15


def test_rule_guards():
    with pytest.raises(ValueError):
        gauss_legendre_rule(1, 1.0)
    with pytest.raises(ValueError):
        gauss_legendre_rule(10**6 + 1, 1.0)
    with pytest.raises(ValueError):
        gauss_legendre_rule(4, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 200), st.floats(0.01, 50))
def test_rule_invariants(n, R):
    r = gauss_legendre_rule(n, R)
    assert abs(r.weights.sum() - 2 * R) <= 1e-12 * max(1, R)
    assert np.all(np.diff(r.nodes) > 0) and np.all(np.abs(r.nodes) <= R)


def test_fiber_grid_order():
    fr = FiberRule.uniform(3, 1.0, 2)
    nodes, w = fr.grid()
    assert len(fr) == 9 and nodes.shape == (9, 2)
    assert nodes[0, 0] == nodes[1, 0] and nodes[0, 1] != nodes[1, 1]  # axis 0 outermost
    assert np.all(w > 0) and abs(w.sum() - 4) < 1e-14
    n0, w0 = FiberRule(axes=()).grid()
    assert n0.shape == (1, 0) and w0.tolist() == [1.0]


def test_gaussian_line():
    r = gauss_legendre_rule(64, 6.0)
    ray = Ray(np.zeros(2), np.array([0.6, 0.8]))
    assert abs(integrate_along_ray(gaussian_oracle(2), ray, r) - math.sqrt(math.pi)) < 1e-12


def test_ray_missing_support():
    f = gaussian_oracle(2)
    ray = Ray(np.array([7.0, 0]), np.array([0, 1.0]))
    assert integrate_along_ray(f, ray, gauss_legendre_rule(16, 6.0)) == 0.0


def test_gaussian_plane_3d():
    f = gaussian_oracle(3)
    th = np.array([1.0, 2, 2]) / 3
    plane = Hyperplane(0.0, th)
    val = integrate_over_hyperplane(f, plane, frame_on_hyperplane(th), HyperplaneRule.uniform(64, 6.0, 3))
    assert abs(val - math.pi) < 1e-10
    far = Hyperplane(6.5, th)
    assert integrate_over_hyperplane(f, far, frame_on_hyperplane(th), HyperplaneRule.uniform(8, 6.0, 3),
                                     support_radius=6.0) == 0.0


def test_convergence_monotone():
    f = gaussian_oracle(3)
    th = np.array([0.48, 0.6, 0.64])
    fr = frame_on_hyperplane(th)
    errs = [abs(integrate_over_hyperplane(f, Hyperplane(0.5, th), fr, HyperplaneRule.uniform(n, 6.0, 3))
                - math.pi * math.exp(-0.25)) for n in (8, 16, 32, 64, 128)]
    for a, b in zip(errs, errs[1:]):
        assert b < a or b < 1e-13


def test_frame_invariance_and_linearity():
    d = 4
    th = np.array([0.5, -0.5, 0.5, 0.5])
    plane = Hyperplane(0.3, th)
    rule = HyperplaneRule.uniform(32, 6.0, d)
    g = gaussian_oracle(d)

    def h(x):
        return np.exp(-np.sum((x - 0.2) ** 2, axis=1))

    i0 = integrate_over_hyperplane(g, plane, frame_on_hyperplane(th, 0), rule)
    i1 = integrate_over_hyperplane(g, plane, frame_on_hyperplane(th, 1), rule)
    assert abs(i0 - i1) < 1e-8
    fr = frame_on_hyperplane(th)
    lin = integrate_over_hyperplane(lambda x: 2 * g(x) - 3 * h(x), plane, fr, rule)
    sep = 2 * integrate_over_hyperplane(g, plane, fr, rule) - 3 * integrate_over_hyperplane(h, plane, fr, rule)
    assert abs(lin - sep) < 1e-14 * max(1, abs(sep)) * 10


def test_basis_shape_check():
    with pytest.raises(ValueError):
        integrate_over_hyperplane(lambda x: x[:, 0], Hyperplane(0, np.array([0, 0, 1.0])), np.eye(3),
                                  HyperplaneRule.uniform(4, 1.0, 3))
