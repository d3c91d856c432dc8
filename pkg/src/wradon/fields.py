"""Compactly supported scalar fields on R^d.

A :class:`ScalarField` wraps a vectorized evaluator ``(N, d) -> (N,)`` and
guarantees an exact zero outside its declared support ball.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SMOOTHNESS_TAGS = ("analytic", "smooth", "piecewise")


@dataclass(frozen=True)
class ScalarField:
    """Real function on R^d vanishing outside the closed ball of radius
    `support_radius`."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    dimension: int
    support_radius: float
    smoothness_tag: str = "smooth"
    name: str = field(default="field", compare=False)

    def __post_init__(self):
        if self.smoothness_tag not in SMOOTHNESS_TAGS:
            raise ValueError(f"unknown smoothness tag {self.smoothness_tag!r}")
        if self.support_radius <= 0:
            raise ValueError("support radius must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.shape[-1] != self.dimension:
            raise ValueError(
                f"{self.name} lives in R^{self.dimension}, got points of dimension {pts.shape[-1]}"
            )
        inside = np.einsum("ij,ij->i", pts, pts) <= self.support_radius**2
        out = np.zeros(pts.shape[0])
        if np.any(inside):
            out[inside] = self.evaluator(pts[inside])
        return out[0] if single else out

    def scaled(self, a):
        """The field a * f (same support)."""
        ev = self.evaluator
        return ScalarField(lambda p: a * ev(p), self.dimension, self.support_radius,
                           self.smoothness_tag, name=f"{a}*{self.name}")

    def abs(self):
        ev = self.evaluator
        return ScalarField(lambda p: np.abs(ev(p)), self.dimension, self.support_radius,
                           "piecewise", name=f"|{self.name}|")


def _unit_bump_exponent(r2):
    """1/(1 - r^2) on r^2 < 1; caller masks the rest."""
    return 1.0 / (1.0 - r2)


def bump_psi(dimension_m):
    """psi(y) = exp(1 - 1/(1 - |y|^2)) on the open unit ball of R^m, else 0."""
    if dimension_m <= 0:
        raise ValueError("psi needs m = d - 2 >= 1")

    def ev(y):
        r2 = np.einsum("ij,ij->i", y, y)
        out = np.zeros(y.shape[0])
        m = r2 < 1.0
        out[m] = np.exp(1.0 - _unit_bump_exponent(r2[m]))
        return out

    return ScalarField(ev, dimension_m, 1.0, "smooth", name="psi")


def default_f0():
    """Radial planar field (1 - 2|x|^2) exp(-1/(1 - |x|^2)) on the unit disk.

    One sign change, at |x| = 1/sqrt(2).
    """

    def ev(x):
        r2 = np.einsum("ij,ij->i", x, x)
        out = np.zeros(x.shape[0])
        m = r2 < 1.0
        out[m] = (1.0 - 2.0 * r2[m]) * np.exp(-_unit_bump_exponent(r2[m]))
        return out

    return ScalarField(ev, 2, 1.0, "smooth", name="f0")


def positive_bump_2d():
    """exp(-1/(1 - |x|^2)) on the unit disk: a one-signed field that no
    positive weight can annihilate on any line."""

    def ev(x):
        r2 = np.einsum("ij,ij->i", x, x)
        out = np.zeros(x.shape[0])
        m = r2 < 1.0
        out[m] = np.exp(-_unit_bump_exponent(r2[m]))
        return out

    return ScalarField(ev, 2, 1.0, "smooth", name="positive_bump")


def lift_field(f0, psi, d):
    """f(x) = psi(x_3, ..., x_d) * f0(x_1, x_2)."""
    if d < 3:
        raise ValueError("lift needs d >= 3")
    if f0.dimension != 2 or psi.dimension != d - 2:
        raise ValueError(
            f"cannot lift: f0 is {f0.dimension}-D and psi is {psi.dimension}-D for d={d}"
        )

    def ev(x):
        return psi(x[:, 2:]) * f0(x[:, :2])

    radius = math.hypot(f0.support_radius, psi.support_radius)
    return ScalarField(ev, d, radius, f0.smoothness_tag, name=f"lift({f0.name})")


def gaussian_oracle(d, truncation_R=6.0):
    """exp(-|x|^2) cut to zero for |x| > R; see :func:`gaussian_radon`."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if truncation_R < 6:
        raise ValueError("truncation radius must be >= 6 (tail below 1e-15)")

    def ev(x):
        return np.exp(-np.einsum("ij,ij->i", x, x))

    return ScalarField(ev, d, float(truncation_R), "analytic", name="gaussian")


def gaussian_radon(d, s):
    """Classical Radon transform of exp(-|x|^2) in R^d: pi^((d-1)/2) e^{-s^2}."""
    return math.pi ** ((d - 1) / 2) * math.exp(-s * s)


def _keys_kernel(z, a=-0.5):
    z = np.abs(z)
    z2 = z * z
    z3 = z2 * z
    near = (a + 2) * z3 - (a + 3) * z2 + 1
    far = a * z3 - 5 * a * z2 + 8 * a * z - 4 * a
    return np.where(z <= 1, near, np.where(z < 2, far, 0.0))


@dataclass(frozen=True)
class GridField2D:
    """Samples on the uniform n x n grid over [-L, L]^2 with bicubic
    (cubic-convolution) interpolation. The outer ring of samples must be 0."""

    values: np.ndarray
    L: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 4:
            raise ValueError("values must be an n x n array with n >= 4")
        ring = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
        if np.any(ring != 0.0):
            raise ValueError("boundary ring of a GridField2D must be identically zero")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "L", float(self.L))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def h(self):
        return 2.0 * self.L / (self.n - 1)

    @classmethod
    def from_field(cls, f, L, n):
        """Sample a planar ScalarField; the boundary ring is forced to 0."""
        ax = np.linspace(-L, L, n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        v = f(np.column_stack([X.ravel(), Y.ravel()])).reshape(n, n)
        v[0, :] = v[-1, :] = v[:, 0] = v[:, -1] = 0.0
        return cls(v, L)

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, h = self.n, self.h
        u = (x[:, 0] + self.L) / h
        w = (x[:, 1] + self.L) / h
        i0 = np.floor(u).astype(int)
        j0 = np.floor(w).astype(int)
        padded = np.pad(self.values, 2)
        out = np.zeros(x.shape[0])
        for di in (-1, 0, 1, 2):
            ki = _keys_kernel(u - (i0 + di))
            ii = np.clip(i0 + di, -2, n + 1) + 2
            for dj in (-1, 0, 1, 2):
                kj = _keys_kernel(w - (j0 + dj))
                jj = np.clip(j0 + dj, -2, n + 1) + 2
                out += ki * kj * padded[ii, jj]
        outside = (np.abs(x[:, 0]) > self.L) | (np.abs(x[:, 1]) > self.L)
        out[outside] = 0.0
        return out

    def to_scalar_field(self):
        return ScalarField(self.evaluate, 2, self.L * math.sqrt(2.0), "piecewise", name="grid_f0")

    def to_csv(self, path):
        """Header ``L,h,n``, one line of those values, then the rows."""
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["L", "h", "n"])
            wr.writerow([repr(self.L), repr(self.h), self.n])
            for row in self.values:
                wr.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["L", "h", "n"]:
            raise ValueError(f"{path}: expected header 'L,h,n'")
        L, n = float(rows[1][0]), int(rows[1][2])
        values = np.array([[float(v) for v in r] for r in rows[2:2 + n]])
        if values.shape != (n, n):
            raise ValueError(f"{path}: expected {n}x{n} values, got {values.shape}")
        return cls(values, L)
