"""Gauss-Legendre rules on truncated lines, tensor-product rules over the
fiber R^{d-2} and over hyperplanes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Frame

MAX_NODES = 10**6
# points per integrand call when summing over a hyperplane
CHUNK_POINTS = 1 << 20


@dataclass(frozen=True)
class LineRule:
    nodes: np.ndarray
    weights: np.ndarray
    truncation_radius: float

    def __len__(self):
        return self.nodes.shape[0]


def gauss_legendre_rule(n, R):
    """n-point Gauss-Legendre rule on [-R, R]; exact for degree <= 2n - 1."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if n > MAX_NODES:
        raise ValueError(f"refusing to build a {n}-point rule (limit {MAX_NODES})")
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    x, w = np.polynomial.legendre.leggauss(n)
    return LineRule(nodes=R * x, weights=R * w, truncation_radius=float(R))


@dataclass(frozen=True)
class FiberRule:
    """Tensor product of per-axis line rules; axis 0 varies slowest."""

    axes: tuple

    @classmethod
    def uniform(cls, n, R, m):
        rule = gauss_legendre_rule(n, R)
        return cls(axes=(rule,) * m)

    @property
    def ndim(self):
        return len(self.axes)

    def __len__(self):
        return int(np.prod([len(a) for a in self.axes])) if self.axes else 1

    def grid(self):
        """(K, m) node coordinates and (K,) product weights."""
        if not self.axes:
            return np.zeros((1, 0)), np.ones(1)
        coords = np.meshgrid(*[a.nodes for a in self.axes], indexing="ij")
        wts = np.meshgrid(*[a.weights for a in self.axes], indexing="ij")
        nodes = np.column_stack([c.ravel() for c in coords])
        weights = np.prod(np.column_stack([w.ravel() for w in wts]), axis=1)
        return nodes, weights


@dataclass(frozen=True)
class HyperplaneRule:
    """Rule over the d-1 in-plane coordinates: `alpha_rule` along the first
    frame vector and `fiber` along the remaining d-2."""

    alpha_rule: LineRule
    fiber: FiberRule

    @classmethod
    def uniform(cls, n, R, d):
        rule = gauss_legendre_rule(n, R)
        return cls(alpha_rule=rule, fiber=FiberRule(axes=(rule,) * (d - 2)))

    @property
    def ndim(self):
        return 1 + self.fiber.ndim

    def __len__(self):
        return len(self.alpha_rule) * len(self.fiber)


def integrate_along_ray(field_product, ray, rule):
    """sum_k w_k * field_product(base + t_k * direction).

    The base is the foot of the perpendicular, so a truncation radius at
    least the support radius of the integrand loses nothing.
    """
    pts = ray.base + rule.nodes[:, None] * ray.direction
    return float(rule.weights @ field_product(pts))


def _basis_rows(frame):
    if isinstance(frame, Frame):
        return frame.vectors
    return np.atleast_2d(np.asarray(frame, dtype=float))


def integrate_over_hyperplane(integrand, plane, frame, rule, support_radius=None):
    """Tensor-product sum of `integrand` over x = s*theta + c_0 v_0 + ... on the
    hyperplane, where v_0 is alpha (or the first basis row) and v_1, ... the
    fiber directions.

    With `support_radius` given, planes with |s| beyond it return 0 without
    evaluating the integrand.
    """
    V = _basis_rows(frame)
    d = plane.dim
    if V.shape != (d - 1, d):
        raise ValueError(f"need {d - 1} in-plane basis vectors, got {V.shape}")
    if support_radius is not None and abs(plane.s) > support_radius:
        return 0.0
    fib_nodes, fib_w = rule.fiber.grid()
    a_nodes, a_w = rule.alpha_rule.nodes, rule.alpha_rule.weights
    origin = plane.s * plane.theta
    base = origin + fib_nodes @ V[1:]  # (K, d)
    total = 0.0
    step = max(1, CHUNK_POINTS // max(1, len(a_nodes)))
    for start in range(0, base.shape[0], step):
        b = base[start:start + step]
        pts = b[:, None, :] + a_nodes[None, :, None] * V[0]
        vals = integrand(pts.reshape(-1, d)).reshape(b.shape[0], len(a_nodes))
        total += float(fib_w[start:start + step] @ (vals @ a_w))
    return total

