"""Weighted ray transform P_w, weighted Radon transform R_W (direct
hyperplane quadrature and ray decomposition) and the weight correspondence
W(x, theta) = w(x, alpha(theta))."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .geometry import (
    DegenerateDirection,
    Frame,
    Hyperplane,
    Ray,
    alpha_of_theta,
    as_direction,
    hyperplane_basis,
    is_degenerate,
)
from .quadrature import (
    CHUNK_POINTS,
    FiberRule,
    HyperplaneRule,
    LineRule,
    integrate_along_ray,
    integrate_over_hyperplane,
)

BOUND_SLACK = 1e-12


class WeightBoundError(ValueError):
    """Sampled weight values fall outside the declared bounds."""


@dataclass(frozen=True)
class RayWeight:
    """w(x, direction) on R^d x S^{d-1}; evaluator maps ``(N, d)`` points and
    one direction to ``(N,)`` values in [lower, upper]."""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dimension: int
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def __call__(self, x, direction):
        return self.evaluator(np.atleast_2d(np.asarray(x, dtype=float)), np.asarray(direction, dtype=float))

    @property
    def is_admissible(self):
        """Bounded and strictly positive."""
        return self.lower > 0


@dataclass(frozen=True)
class RadonWeight:
    """W(x, theta) on R^d x S^{d-1}; same evaluator convention as RayWeight."""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dimension: int
    lower: float
    upper: float
    provenance: Optional[RayWeight] = field(default=None, compare=False)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def __call__(self, x, theta):
        return self.evaluator(np.atleast_2d(np.asarray(x, dtype=float)), np.asarray(theta, dtype=float))

    @property
    def is_admissible(self):
        return self.lower > 0


def constant_ray_weight(d, c=1.0):
    return RayWeight(lambda x, a: np.full(x.shape[0], float(c)), d, float(c), float(c))


def constant_radon_weight(d, c=1.0):
    return RadonWeight(lambda x, t: np.full(x.shape[0], float(c)), d, float(c), float(c))


def sample_pairs(d, n_dirs, n_pts, radius, seed=0, extra_dirs=()):
    """Quasi-random directions (Sobol-mapped Gaussians, normalized) and points
    in the ball of the given radius."""
    dir_sob = qmc.Sobol(d, scramble=True, seed=seed)
    g = qmc.MultivariateNormalQMC(np.zeros(d), engine=dir_sob).random(n_dirs)
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    if len(extra_dirs):
        dirs = np.vstack([dirs, np.asarray(extra_dirs, dtype=float)])
    u = qmc.Sobol(d, scramble=True, seed=seed + 1).random(n_pts)
    pts = radius * (2.0 * u - 1.0)
    norms = np.linalg.norm(pts, axis=1)
    pts[norms > radius] *= (radius / norms[norms > radius])[:, None]
    return dirs, pts


def sampled_range(weight, n_dirs=128, n_pts=1024, radius=2.0, seed=0, extra_dirs=()):
    """(min, max) of `weight` over the quasi-random (x, direction) sample."""
    dirs, pts = sample_pairs(weight.dimension, n_dirs, n_pts, radius, seed, extra_dirs)
    lo, hi = np.inf, -np.inf
    for a in dirs:
        v = weight(pts, a)
        lo = min(lo, float(v.min()))
        hi = max(hi, float(v.max()))
    return lo, hi


def certify_bounds(weight, n_dirs=128, n_pts=1024, radius=2.0, seed=0, extra_dirs=()):
    """Evaluate `weight` on ~1e5 quasi-random (x, direction) pairs and return
    the realized (min, max); raise WeightBoundError if they leave the
    declared interval."""
    lo, hi = sampled_range(weight, n_dirs, n_pts, radius, seed, extra_dirs)
    slack = BOUND_SLACK * max(1.0, abs(weight.upper), abs(weight.lower))
    if lo < weight.lower - slack or hi > weight.upper + slack:
        raise WeightBoundError(
            f"sampled weight range [{lo:.6g}, {hi:.6g}] leaves declared [{weight.lower:.6g}, {weight.upper:.6g}]"
        )
    return lo, hi


def degenerate_samples(d, seed=0, n=8):
    """Seeded unit vectors of Theta(e1, e2) used when certifying a RadonWeight."""
    if d < 3:
        return np.zeros((0, d))
    g = np.random.default_rng(seed).standard_normal((n, d))
    g[:, :2] = 0.0
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _check_dims(weight, f, d):
    if weight.dimension != d or f.dimension != d:
        raise ValueError(
            f"dimension mismatch: weight in R^{weight.dimension}, field in R^{f.dimension}, geometry in R^{d}"
        )


def ray_transform(w, f, ray, rule):
    """P_w f along `ray`: quadrature of t -> w(x + t a, a) f(x + t a)."""
    _check_dims(w, f, ray.dim)
    a = ray.direction
    return integrate_along_ray(lambda p: w.evaluator(p, a) * f(p), ray, rule)


def radon_direct(W, f, plane, rule, frame=None):
    """R_W f(s, theta) by (d-1)-dimensional quadrature over the hyperplane.

    Without an explicit `frame` the in-plane basis is the seed-0 frame for
    non-degenerate theta and an index-ordered completion otherwise.
    """
    _check_dims(W, f, plane.dim)
    theta = plane.theta
    basis = frame if frame is not None else hyperplane_basis(theta)
    return integrate_over_hyperplane(
        lambda p: W.evaluator(p, theta) * f(p), plane, basis, rule, support_radius=f.support_radius
    )


def radon_via_rays(w, f, plane, frame, fiber, line):
    """R_W f(s, theta) as the fiber integral over tau in R^{d-2} of
    P_w f(s theta + sum tau_i beta_i, alpha(theta)).

    Equivalent to summing :func:`ray_transform` over the fiber nodes; the rays
    are batched for speed.
    """
    d = plane.dim
    _check_dims(w, f, d)
    theta = plane.theta
    if is_degenerate(theta):
        raise DegenerateDirection("the ray decomposition needs alpha(theta); theta is degenerate")
    if np.max(np.abs(frame.alpha - alpha_of_theta(theta))) > 1e-12 or np.max(np.abs(frame.theta - theta)) > 1e-12:
        raise ValueError("frame does not belong to this theta")
    if fiber.ndim != d - 2:
        raise ValueError(f"fiber rule must have {d - 2} axes")
    if abs(plane.s) > f.support_radius:
        return 0.0
    alpha = frame.alpha
    taus, tau_w = fiber.grid()
    bases = plane.s * theta + taus @ frame.betas
    total = 0.0
    step = max(1, CHUNK_POINTS // len(line))
    for start in range(0, bases.shape[0], step):
        b = bases[start:start + step]
        pts = (b[:, None, :] + line.nodes[None, :, None] * alpha).reshape(-1, d)
        vals = (w.evaluator(pts, alpha) * f(pts)).reshape(b.shape[0], len(line))
        total += float(tau_w[start:start + step] @ (vals @ line.weights))
    return total


def perp2d(theta):
    """theta^perp = (-theta_2, theta_1)."""
    theta = np.asarray(theta, dtype=float)
    return np.array([-theta[1], theta[0]])


def radon2d_from_ray(w, f, s, theta, rule):
    """R_W f(s, theta) in the plane as P_w f(s theta, theta^perp), which is the
    weighted Radon transform for W(x, theta) = w(x, theta^perp)."""
    theta = as_direction(theta)
    if theta.shape[0] != 2 or w.dimension != 2:
        raise ValueError("radon2d_from_ray is planar (d = 2)")
    return ray_transform(w, f, Ray(s * theta, perp2d(theta)), rule)


def weight_from_ray_weight(w, degenerate_policy=None, certify=True, sample_radius=2.0, seed=0):
    """Radon weight W(x, theta) = w(x, alpha(theta)).

    For theta in Theta(e1, e2) the value is ``degenerate_policy(x)``; in the
    plane alpha(theta) is replaced by theta^perp. With `certify`, ~1e5
    sampled values (degenerate directions included) must stay inside w's
    bounds.
    """
    d = w.dimension
    if d >= 3 and degenerate_policy is None:
        raise ValueError("a degenerate-set policy is required for d >= 3")

    if d == 2:
        def ev(x, theta):
            return w.evaluator(x, perp2d(theta))
    else:
        def ev(x, theta):
            if is_degenerate(theta):
                return degenerate_policy(x)
            return w.evaluator(x, alpha_of_theta(theta))

    W = RadonWeight(ev, d, w.lower, w.upper, provenance=w)
    if certify:
        certify_bounds(W, radius=sample_radius, seed=seed, extra_dirs=degenerate_samples(d, seed))
    return W
