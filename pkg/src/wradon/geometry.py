"""Vector geometry on R^d: hyperplanes, oriented rays, the distinguished
in-plane direction alpha(theta) and orthonormal frames on hyperplanes.

Directions are plain numpy arrays of shape ``(d,)``; functions that act on
many directions at once take ``(N, d)`` arrays. The fixed basis is the
canonical one, so ``e1 = (1, 0, ..., 0)`` and ``e2 = (0, 1, 0, ..., 0)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

DEGENERACY_TOL = 1e-9
UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10
GS_SKIP_TOL = 1e-6


class DegenerateDirection(ValueError):
    """theta is orthogonal to both e1 and e2, so alpha(theta) is undefined."""


class IntersectionKind(enum.Enum):
    LINE = "Line"
    PLANE = "Plane"
    EMPTY = "Empty"


def as_direction(v, tol=UNIT_TOL):
    """Return `v` as a float array after checking it is a unit vector of
    dimension at least 2."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError(f"direction must be a vector with d >= 2, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"direction is not unit length (norm={np.linalg.norm(v)!r})")
    return v


def basis_vector(d, i):
    """i-th canonical basis vector of R^d (0-based)."""
    e = np.zeros(d)
    e[i] = 1.0
    return e


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane {x : x . theta = s}. (s, theta) and (-s, -theta) are the
    same point set; no canonical form is imposed."""

    s: float
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "theta", as_direction(self.theta))

    @property
    def dim(self):
        return self.theta.shape[0]


@dataclass(frozen=True)
class Ray:
    """Oriented line {base + t * direction}, with base the foot of the
    perpendicular from the origin."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        direction = as_direction(self.direction)
        if base.shape != direction.shape:
            raise ValueError("base and direction dimensions differ")
        if abs(base @ direction) > ORTHO_TOL * max(1.0, np.linalg.norm(base)):
            raise ValueError("ray base must be orthogonal to its direction")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @property
    def dim(self):
        return self.direction.shape[0]

    def points(self, t):
        t = np.asarray(t, dtype=float)
        return self.base + t[..., None] * self.direction


@dataclass(frozen=True)
class Frame:
    """Orthonormal basis (alpha, beta_1, ..., beta_{d-2}) of the directions
    parallel to a hyperplane with normal `theta`."""

    alpha: np.ndarray
    betas: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        d = theta.shape[0]
        betas = np.asarray(self.betas, dtype=float).reshape(d - 2, d)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "theta", theta)
        gram = self.full_basis() @ self.full_basis().T
        if np.max(np.abs(gram - np.eye(d))) > ORTHO_TOL:
            raise ValueError("frame vectors are not orthonormal to each other and to theta")

    @property
    def vectors(self):
        """(d-1, d) array whose rows are alpha, beta_1, ..., beta_{d-2}."""
        return np.vstack([self.alpha[None, :], self.betas])

    def full_basis(self):
        """(d, d) array with rows theta, alpha, beta_1, ..., beta_{d-2}."""
        return np.vstack([self.theta[None, :], self.alpha[None, :], self.betas])


def _check_dim3(d):
    if d < 3:
        raise ValueError(f"the degenerate set Theta(e1, e2) needs d >= 3, got d={d}")


def is_degenerate(theta, tol=DEGENERACY_TOL):
    """True iff |theta . e1| <= tol and |theta . e2| <= tol.

    Accepts a single direction or an ``(N, d)`` array (returns a bool array).
    """
    theta = np.asarray(theta, dtype=float)
    _check_dim3(theta.shape[-1])
    return (np.abs(theta[..., 0]) <= tol) & (np.abs(theta[..., 1]) <= tol)


def _det_rows_alpha_theta(alpha, theta):
    """det of the d x d matrix with rows (alpha, theta, e3, ..., ed)."""
    alpha = np.atleast_2d(alpha)
    theta = np.atleast_2d(theta)
    n, d = theta.shape
    m = np.zeros((n, d, d))
    m[:, 0, :] = alpha
    m[:, 1, :] = theta
    idx = np.arange(2, d)
    m[:, idx, idx] = 1.0
    return np.linalg.det(m)


def alpha_of_theta(theta):
    """Oriented unit direction of the line Sigma(s, theta) ∩ Span(e1, e2).

    The orientation makes det(alpha, theta, e3, ..., ed) positive. Works on a
    single direction or row-wise on an ``(N, d)`` array.

    Raises
    ------
    DegenerateDirection
        If theta is (numerically) orthogonal to both e1 and e2.
    """
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    th = np.atleast_2d(theta)
    if np.any(is_degenerate(th)):
        raise DegenerateDirection("alpha(theta) is undefined for theta in Theta(e1, e2)")
    rho = np.hypot(th[:, 0], th[:, 1])
    cand = np.zeros_like(th)
    cand[:, 0] = -th[:, 1] / rho
    cand[:, 1] = th[:, 0] / rho
    det = _det_rows_alpha_theta(cand, th)
    cand[det < 0] *= -1.0
    det = np.abs(det)
    if np.any(det <= 0):
        raise DegenerateDirection("orientation determinant vanished")
    return cand[0] if single else cand


def hodge_star(blade):
    """Hodge dual of the (d-1)-vector v_1 ∧ ... ∧ v_{d-1}.

    `blade` has shape ``(d-1, d)`` or ``(N, d-1, d)``. The result is the vector
    h with h . u = det(v_1, ..., v_{d-1}, u) for every u (generalized cross
    product), computed by cofactor expansion along the last row.
    """
    blade = np.asarray(blade, dtype=float)
    single = blade.ndim == 2
    b = blade[None] if single else blade
    n, k, d = b.shape
    if k != d - 1:
        raise ValueError("hodge_star expects d-1 vectors in R^d")
    out = np.empty((n, d))
    for j in range(d):
        minor = np.delete(b, j, axis=2)
        out[:, j] = (-1.0) ** (d - 1 + j) * np.linalg.det(minor)
    return out[0] if single else out


def alpha_hodge(theta):
    """alpha(theta) as (-1)^(d-1) * star(theta ∧ e3 ∧ ... ∧ ed), normalized.

    Independent of :func:`alpha_of_theta`; the blade has norm
    |proj_{Span(e1,e2)} theta| so the dual is rescaled to unit length.
    """
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    th = np.atleast_2d(theta)
    n, d = th.shape
    if np.any(is_degenerate(th)):
        raise DegenerateDirection("the blade theta ∧ e3 ∧ ... ∧ ed vanishes")
    blade = np.zeros((n, d - 1, d))
    blade[:, 0, :] = th
    for i in range(2, d):
        blade[:, i - 1, i] = 1.0
    v = (-1.0) ** (d - 1) * hodge_star(blade)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[0] if single else v


def alpha_3d_legacy(theta, eta):
    """[eta, theta] / |[eta, theta]| in R^3."""
    theta = as_direction(theta)
    eta = as_direction(eta)
    if theta.shape[0] != 3 or eta.shape[0] != 3:
        raise ValueError("the vector-product form of alpha is only defined for d = 3")
    c = np.cross(eta, theta)
    nrm = np.linalg.norm(c)
    if nrm <= DEGENERACY_TOL:
        raise DegenerateDirection("theta = ±eta: the vector product vanishes")
    return c / nrm


def complete_orthonormal(vectors, d):
    """Extend orthonormal rows `vectors` to an orthonormal basis of R^d.

    Candidates are the canonical basis vectors in index order; a candidate
    whose residual after projection has norm below 1e-6 is skipped. Returns
    only the added vectors, shape ``(d - len(vectors), d)``.
    """
    basis = [np.asarray(v, dtype=float) for v in vectors]
    added = []
    for i in range(d):
        if len(basis) == d:
            break
        r = basis_vector(d, i)
        # two passes of classical Gram-Schmidt keep the result orthogonal to 1e-16
        for _ in range(2):
            for b in basis:
                r = r - (r @ b) * b
        nrm = np.linalg.norm(r)
        if nrm < GS_SKIP_TOL:
            continue
        r = r / nrm
        basis.append(r)
        added.append(r)
    return np.array(added).reshape(-1, d)


def random_orthogonal(m, seed):
    """Haar-distributed m x m orthogonal matrix from a seeded generator."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def frame_on_hyperplane(theta, seed=0):
    """Frame (alpha(theta), betas) spanning the directions of Sigma(s, theta).

    The betas come from index-ordered Gram-Schmidt completion of
    {theta, alpha}. For ``seed != 0`` they are mixed by a seeded random
    orthogonal transform of their span.
    """
    theta = as_direction(theta)
    d = theta.shape[0]
    alpha = alpha_of_theta(theta)
    betas = complete_orthonormal([theta, alpha], d)
    if seed != 0 and d > 2:
        betas = random_orthogonal(d - 2, seed) @ betas
    return Frame(alpha=alpha, betas=betas, theta=theta)


def remark2_frame(theta):
    """Frame for a degenerate theta with alpha = e1 (any unit vector of
    Span(e1, e2) is admissible there)."""
    theta = as_direction(theta)
    d = theta.shape[0]
    e1 = basis_vector(d, 0)
    return Frame(alpha=e1, betas=complete_orthonormal([theta, e1], d), theta=theta)


def hyperplane_basis(theta):
    """Orthonormal basis (rows) of the directions of Sigma(s, theta).

    Uses the frame when theta is non-degenerate, otherwise (or for d = 2) an
    index-ordered completion of theta; the hyperplane integral itself does not
    depend on this choice.
    """
    theta = as_direction(theta)
    d = theta.shape[0]
    if d >= 3 and not is_degenerate(theta):
        return frame_on_hyperplane(theta).vectors
    return complete_orthonormal([theta], d)


def classify_intersection(plane):
    """Kind of Sigma(s, theta) ∩ Span(e1, e2): a line unless theta is in the
    degenerate set, then the whole plane (s = 0) or nothing."""
    _check_dim3(plane.dim)
    if not is_degenerate(plane.theta):
        return IntersectionKind.LINE
    if abs(plane.s) <= 1e-12:
        return IntersectionKind.PLANE
    return IntersectionKind.EMPTY
