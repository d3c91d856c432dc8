import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wradon.fields import gaussian_oracle
from wradon.geometry import DegenerateDirection, Hyperplane, Ray, frame_on_hyperplane, is_degenerate
from wradon.quadrature import FiberRule, HyperplaneRule, gauss_legendre_rule
from wradon.transforms import (
    RadonWeight,
    RayWeight,
    WeightBoundError,
    certify_bounds,
    constant_radon_weight,
    constant_ray_weight,
    perp2d,
    radon2d_from_ray,
    radon_direct,
    radon_via_rays,
    ray_transform,
    weight_from_ray_weight,
)


def separable(d):
    c = np.linspace(0.4, -0.3, d)

    def ev(x, a):
        return (1.5 + 0.5 * np.tanh(x @ c)) * (1.1 + 0.1 * a[0])

    return RayWeight(ev, d, 1.0, 2.4)


def test_ray_transform_gaussian_and_homogeneity():
    f = gaussian_oracle(2)
    rule = gauss_legendre_rule(64, 6.0)
    ray = Ray(np.zeros(2), np.array([0.0, 1.0]))
    one = ray_transform(constant_ray_weight(2), f, ray, rule)
    assert abs(one - math.sqrt(math.pi)) < 1e-12
    assert ray_transform(constant_ray_weight(2, 2.0), f, ray, rule) == 2 * one
    assert ray_transform(constant_ray_weight(2), f, Ray(np.array([7.0, 0]), np.array([0, 1.0])), rule) == 0.0
    with pytest.raises(ValueError):
        ray_transform(constant_ray_weight(3), f, ray, rule)


@pytest.mark.parametrize("d,s,exact,tol", [(3, 0.0, math.pi, 1e-10), (4, 1.0, math.pi**1.5 / math.e, 1e-9)])
def test_radon_direct_gaussian(d, s, exact, tol):
    th = np.ones(d) / math.sqrt(d)
    val = radon_direct(constant_radon_weight(d), gaussian_oracle(d), Hyperplane(s, th),
                       HyperplaneRule.uniform(64, 6.0, d))
    assert abs(val - exact) < tol


def test_radon_direct_degenerate_theta_uses_completion():
    d = 3
    val = radon_direct(constant_radon_weight(d), gaussian_oracle(d), Hyperplane(0.0, np.array([0, 0, 1.0])),
                       HyperplaneRule.uniform(64, 6.0, d))
    assert abs(val - math.pi) < 1e-10


def test_via_rays_matches_direct_and_guards():
    d = 3
    f = gaussian_oracle(d)
    w = separable(d)
    W = weight_from_ray_weight(w, lambda x: w.evaluator(x, np.eye(d)[0]), certify=False)
    th = np.array([0.36, 0.48, 0.8])
    plane = Hyperplane(0.4, th)
    fr = frame_on_hyperplane(th)
    via = radon_via_rays(w, f, plane, fr, FiberRule.uniform(64, 6.0, 1), gauss_legendre_rule(64, 6.0))
    direct = radon_direct(W, f, plane, HyperplaneRule.uniform(64, 6.0, d))
    assert abs(via - direct) <= 1e-8 * (1 + abs(direct))
    with pytest.raises(DegenerateDirection):
        radon_via_rays(w, f, Hyperplane(0, np.array([0, 0, 1.0])), fr, FiberRule.uniform(4, 6.0, 1),
                       gauss_legendre_rule(4, 6.0))
    with pytest.raises(ValueError):
        radon_via_rays(w, f, Hyperplane(0, np.array([0.8, 0.6, 0])), fr, FiberRule.uniform(4, 6.0, 1),
                       gauss_legendre_rule(4, 6.0))


def test_radon2d():
    f = gaussian_oracle(2)
    rule = gauss_legendre_rule(64, 6.0)
    th = np.array([0.6, -0.8])
    assert abs(perp2d(th) @ th) < 1e-16
    assert np.array_equal(perp2d(np.array([1.0, 0])), [0.0, 1.0])
    val = radon2d_from_ray(constant_ray_weight(2), f, 0.7, th, rule)
    assert abs(val - math.sqrt(math.pi) * math.exp(-0.49)) < 1e-12
    with pytest.raises(ValueError):
        radon2d_from_ray(constant_ray_weight(3), gaussian_oracle(3), 0.0, np.array([1.0, 0, 0]), rule)


def test_weight_from_ray_weight():
    d = 3
    def ev(x, a):
        return np.full(x.shape[0], 1.0 + 0.5 * a[1])

    w = RayWeight(ev, d, 0.5, 1.5)
    W = weight_from_ray_weight(w, lambda x: np.full(x.shape[0], 0.7), certify=False)
    assert W(np.zeros((1, d)), np.array([1.0, 0, 0]))[0] == 0.5  # alpha(e1) = -e2
    assert W(np.zeros((1, d)), np.array([0, 0, 1.0]))[0] == 0.7
    assert W.provenance is w
    with pytest.raises(ValueError):
        weight_from_ray_weight(w)
    with pytest.raises(WeightBoundError):
        weight_from_ray_weight(w, lambda x: np.full(x.shape[0], 3.0))
    W1 = weight_from_ray_weight(constant_ray_weight(d), lambda x: np.ones(x.shape[0]))
    assert W1.lower == W1.upper == 1.0 and W1.is_admissible


def test_certify_and_bounds():
    with pytest.raises(ValueError):
        RayWeight(lambda x, a: x[:, 0], 2, 1.0, 0.0)
    lo, hi = certify_bounds(separable(3))
    assert 1.0 <= lo <= hi <= 2.4
    assert not RadonWeight(lambda x, t: x[:, 0], 2, -1.0, 1.0).is_admissible


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(0.5, 3.0))
def test_positivity_transfer_and_homogeneity(v, c):
    th = np.array(v)
    assume(np.linalg.norm(th) > 0.1)
    th = th / np.linalg.norm(th)
    assume(not is_degenerate(th, 1e-6))
    w = separable(3)
    W = weight_from_ray_weight(w, lambda x: w.evaluator(x, np.eye(3)[0]), certify=False)
    pts = np.random.default_rng(0).uniform(-2, 2, (50, 3))
    vals = W(pts, th)
    assert np.all((vals >= w.lower) & (vals <= w.upper))
    plane = Hyperplane(0.2, th)
    f3 = gaussian_oracle(3)
    rule = HyperplaneRule.uniform(16, 6.0, 3)
    base = radon_direct(constant_radon_weight(3), f3, plane, rule)
    scaled = radon_direct(constant_radon_weight(3, c), f3, plane, rule)
    assert abs(scaled - c * base) <= 1e-14 * abs(c * base) * 10
