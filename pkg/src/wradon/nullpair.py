"""Planar null pair (w0, f0) with P_{w0} f0 = 0 on a discrete line family,
its lift to R^d and residual verification.

The weight is w0 = 1 - lambda(line) * f0 with lambda = (int f0) / (int f0^2)
per family line, so the discrete weighted sum vanishes on every family line.
Between family lines lambda is interpolated through the smooth quantities
mu = g / sqrt(h) and log h (lambda = mu * exp(-log(h) / 2)); interpolating
lambda itself is unstable because it grows like 1/f0 near the support edge.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .fields import ScalarField, bump_psi, default_f0, lift_field, positive_bump_2d
from .geometry import (
    Hyperplane,
    basis_vector,
    frame_on_hyperplane,
    is_degenerate,
    remark2_frame,
)
from .quadrature import FiberRule, HyperplaneRule, gauss_legendre_rule
from .report import ResidualReport
from .transforms import (
    RayWeight,
    constant_ray_weight,
    constant_radon_weight,
    radon_direct,
    radon_via_rays,
    degenerate_samples,
    sampled_range,
    weight_from_ray_weight,
)

DEFAULT_RATIO_LIMIT = 2.0 / 3.0
# relative floor: only lines on which f0 vanishes at every node are floored
DEFAULT_H_FLOOR_REL = 1e-280
# extra phi rows on each side of the table, filled by the line symmetry
PHI_PAD = 4

F0_REGISTRY = {"default_f0": default_f0, "f0": default_f0, "positive_bump": positive_bump_2d}


class WeightBoundViolation(ValueError):
    """sup |lambda f0| over the family nodes exceeds the allowed ratio."""

    def __init__(self, ratio, limit):
        super().__init__(
            f"sup |lambda*f0| = {ratio:.6g} exceeds the limit {limit:.6g}; "
            "supply a better-balanced f0 or disable the limit"
        )
        self.ratio = float(ratio)
        self.limit = float(limit)


class DegenerateF0(ValueError):
    """f0 vanishes (below the floor) on every family line."""


@dataclass(frozen=True)
class LineFamily2D:
    """Lines {s u_perp + t u}, u = (cos phi, sin phi), for phi = i pi / n_phi
    and s on a uniform grid of [-r0, r0]; each carries the same GL rule."""

    n_phi: int = 64
    n_s: int = 64
    n_line: int = 128
    r0: float = 1.0

    def __post_init__(self):
        if self.n_phi < 8 or self.n_s < 8:
            raise ValueError("line family needs n_phi >= 8 and n_s >= 8")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    @property
    def angles(self):
        return np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def offsets(self):
        return np.linspace(-self.r0, self.r0, self.n_s)

    @property
    def rule(self):
        return gauss_legendre_rule(self.n_line, self.r0)

    def directions(self):
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])

    def points(self):
        """(n_phi, n_s, n_line, 2) quadrature nodes of every family line."""
        u = self.directions()
        up = np.column_stack([-u[:, 1], u[:, 0]])
        s = self.offsets
        t = self.rule.nodes
        return (s[None, :, None, None] * up[:, None, None, :]
                + t[None, None, :, None] * u[:, None, None, :])

    def to_dict(self):
        return {"n_phi": self.n_phi, "n_s": self.n_s, "n_line": self.n_line, "r0": self.r0}


def line_coordinates(x, direction):
    """(s, phi) of the line through `x` with `direction`, phi in [0, pi).

    Reversing the direction maps (s, phi) to the same pair, so lambda is a
    function of the unoriented line.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.hypot(d[0], d[1])
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = x @ np.array([-d[1], d[0]])
    phi = math.atan2(d[1], d[0])
    if phi < 0.0:
        phi += math.pi
        s = -s
    if phi >= math.pi:
        phi -= math.pi
        s = -s
    return s, phi


@dataclass(frozen=True)
class NullPair2D:
    """Tables of the planar null pair and the interpolant built from them.

    The interpolant is a function of (g_table, h_table, floored) only, so a
    pair rebuilt from exported tables evaluates bit-identically.
    """

    f0: ScalarField
    family: LineFamily2D
    g_table: np.ndarray
    h_table: np.ndarray
    lambda_table: np.ndarray
    floored: np.ndarray
    rescale: float
    bounds: tuple
    ratio: float
    h_min: float
    _mu: RectBivariateSpline = field(init=False, repr=False, compare=False)
    _logh: RectBivariateSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu, logh = _spline_tables(self.g_table, self.h_table, self.floored)
        phi = _padded_angles(self.family)
        s = self.family.offsets
        object.__setattr__(self, "_mu", RectBivariateSpline(phi, s, mu, kx=3, ky=3, s=0))
        object.__setattr__(self, "_logh", RectBivariateSpline(phi, s, logh, kx=3, ky=3, s=0))

    @property
    def lower(self):
        return self.bounds[0]

    @property
    def upper(self):
        return self.bounds[1]

    def lambda_at(self, s, phi):
        """Interpolated lambda on lines (s, phi) with phi in [0, pi)."""
        s = np.asarray(s, dtype=float)
        phi = np.broadcast_to(np.asarray(phi, dtype=float), s.shape)
        out = np.zeros(s.shape)
        inside = np.abs(s) <= self.family.r0
        if np.any(inside):
            mu = self._mu.ev(phi[inside], s[inside])
            lh = self._logh.ev(phi[inside], s[inside])
            out[inside] = mu * np.exp(-0.5 * lh)
        return out

    def export(self, json_path, csv_path):
        """JSON header plus one CSV holding the g, h and lambda tables."""
        header = {
            "family": self.family.to_dict(),
            "f0": self.f0.name,
            "rescale": repr(self.rescale),
            "bounds": [repr(b) for b in self.bounds],
            "ratio": repr(self.ratio),
            "h_min": repr(self.h_min),
        }
        with open(json_path, "w") as fh:
            json.dump(header, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["table", "i_phi"] + [f"s{j}" for j in range(self.family.n_s)])
            for name, tab in (("g", self.g_table), ("h", self.h_table), ("lambda", self.lambda_table),
                              ("floored", self.floored.astype(float))):
                for i, row in enumerate(tab):
                    wr.writerow([name, i] + [repr(float(v)) for v in row])

    @classmethod
    def load(cls, json_path, csv_path, f0=None):
        with open(json_path) as fh:
            header = json.load(fh)
        fam = LineFamily2D(**header["family"])
        if f0 is None:
            if header["f0"] not in F0_REGISTRY:
                raise ValueError(f"unknown f0 {header['f0']!r}; pass the field explicitly")
            f0 = F0_REGISTRY[header["f0"]]()
        tabs = {"g": [], "h": [], "lambda": [], "floored": []}
        with open(csv_path, newline="") as fh:
            rd = csv.reader(fh)
            next(rd)
            for row in rd:
                tabs[row[0]].append([float(v) for v in row[2:]])
        return cls(
            f0=f0, family=fam,
            g_table=np.array(tabs["g"]), h_table=np.array(tabs["h"]),
            lambda_table=np.array(tabs["lambda"]), floored=np.array(tabs["floored"]) != 0.0,
            rescale=float(header["rescale"]), bounds=tuple(float(b) for b in header["bounds"]),
            ratio=float(header["ratio"]), h_min=float(header["h_min"]),
        )


def _padded_angles(family):
    step = np.pi / family.n_phi
    return np.arange(-PHI_PAD, family.n_phi + PHI_PAD) * step


def _spline_tables(g, h, floored):
    """mu = g/sqrt(h) and log h, padded in phi via lambda(s, phi - pi) =
    lambda(-s, phi). Floored entries get mu = 0 and log h continued from the
    nearest valid entry of the same row."""
    mu = np.zeros_like(g)
    ok = ~floored
    mu[ok] = g[ok] / np.sqrt(h[ok])
    logh = np.zeros_like(h)
    logh[ok] = np.log(h[ok])
    cols = np.arange(g.shape[1])
    for i in range(g.shape[0]):
        good = cols[ok[i]]
        if good.size == 0:
            continue
        nearest = good[np.argmin(np.abs(cols[:, None] - good[None, :]), axis=1)]
        logh[i] = logh[i, nearest]
    n = g.shape[0]

    def pad(t):
        before = t[n - PHI_PAD:, ::-1]
        after = t[:PHI_PAD, ::-1]
        return np.vstack([before, t, after])

    return pad(mu), pad(logh)


def build_null_pair_2d(f0, family=None, ratio_limit=DEFAULT_RATIO_LIMIT, h_floor_rel=DEFAULT_H_FLOOR_REL):
    """Construct the null pair on `family`.

    Parameters
    ----------
    f0 : ScalarField
        Planar field supported in the disk of radius ``family.r0``.
    family : LineFamily2D, optional
        Defaults to 64 x 64 lines with 128 nodes each.
    ratio_limit : float or None
        Maximum allowed sup |lambda f0| over family nodes. ``None`` accepts
        any ratio, in which case the weight may change sign; the recorded
        bounds then say so.
    h_floor_rel : float
        Lines with int f0^2 <= h_floor_rel * max|f0|^2 * 2 r0 get lambda = 0.

    Raises
    ------
    WeightBoundViolation
        If the ratio exceeds `ratio_limit`.
    DegenerateF0
        If every family line is floored.
    """
    family = family or LineFamily2D()
    if f0.dimension != 2:
        raise ValueError("f0 must be planar")
    rule = family.rule
    pts = family.points()
    F = f0(pts.reshape(-1, 2)).reshape(pts.shape[:3])
    g = F @ rule.weights
    h = (F * F) @ rule.weights
    fmax = float(np.max(np.abs(F)))
    h_min = h_floor_rel * fmax**2 * 2.0 * family.r0
    floored = ~(h > h_min)
    if fmax == 0.0 or np.all(floored):
        raise DegenerateF0("f0 vanishes on every family line")
    lam = np.zeros_like(g)
    lam[~floored] = g[~floored] / h[~floored]
    lf = lam[:, :, None] * F
    ratio = float(np.max(np.abs(lf)))
    if ratio_limit is not None and ratio > ratio_limit:
        raise WeightBoundViolation(ratio, ratio_limit)
    w_raw = 1.0 - lf
    top = float(w_raw.max())
    if top <= 0.0:
        raise DegenerateF0("weight is non-positive on every family node")
    rescale = 1.0 / top
    bounds = (float(w_raw.min()) * rescale, 1.0)
    return NullPair2D(f0=f0, family=family, g_table=g, h_table=h, lambda_table=lam, floored=floored,
                      rescale=rescale, bounds=bounds, ratio=ratio, h_min=h_min)


def eval_w0(pair, x, direction):
    """Rescaled w0(x, direction) = rescale * (1 - lambda(line) f0(x))."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s, phi = line_coordinates(x, direction)
    lam = pair.lambda_at(s, phi)
    return pair.rescale * (1.0 - lam * pair.f0(x))


def _family_line_sums(pair, use_interpolant):
    fam = pair.family
    rule = fam.rule
    pts = fam.points()
    F = pair.f0(pts.reshape(-1, 2)).reshape(pts.shape[:3])
    mass = np.abs(F) @ rule.weights
    if use_interpolant:
        W = np.empty_like(F)
        for i, u in enumerate(fam.directions()):
            W[i] = eval_w0(pair, pts[i].reshape(-1, 2), u).reshape(F.shape[1:])
    else:
        W = pair.rescale * (1.0 - pair.lambda_table[:, :, None] * F)
    return (W * F) @ rule.weights, mass


def verify_null_pair_2d(pair, offgrid_lines=200, seed=0, use_interpolant=True):
    """Residuals of P_{w0} f0 on every family line and on random lines.

    Family residuals are divided by the line's own mass int |f0| (0 when the
    line misses the support); off-family residuals by the largest family
    mass. Tags: ``family`` and ``offgrid``.
    """
    t0 = time.perf_counter()
    fam = pair.family
    sums, mass = _family_line_sums(pair, use_interpolant)
    rep = ResidualReport(weight_bounds=pair.bounds)
    for i, phi in enumerate(fam.angles):
        for j, s in enumerate(fam.offsets):
            norm = sums[i, j] / mass[i, j] if mass[i, j] > 0 else abs(sums[i, j])
            rep.add(s, [phi], sums[i, j], norm, "family")
    scale = float(mass.max())
    rng = np.random.default_rng(seed)
    rule = fam.rule
    for _ in range(offgrid_lines):
        phi = rng.uniform(0.0, np.pi)
        s = rng.uniform(-fam.r0, fam.r0)
        u = np.array([math.cos(phi), math.sin(phi)])
        pts = s * np.array([-u[1], u[0]]) + rule.nodes[:, None] * u
        val = float(rule.weights @ (eval_w0(pair, pts, u) * pair.f0(pts)))
        rep.add(s, [phi], val, val / scale, "offgrid")
    rep.normalization = scale
    rep.wall_time = time.perf_counter() - t0
    rep.extra = {"ratio": pair.ratio, "rescale": pair.rescale, "h_min": pair.h_min,
                 "floored_lines": int(pair.floored.sum())}
    return rep


@dataclass(frozen=True)
class LiftedPair:
    W: object
    f: ScalarField
    w: RayWeight
    d: int
    pair: NullPair2D

    def remark2_policy(self, x):
        return eval_w0(self.pair, np.atleast_2d(x)[:, :2], np.array([1.0, 0.0]))


def lift_to_dimension(pair, d, certify=True, seed=0):
    """Lift the planar pair to R^d.

    w(x, alpha) = w0((x1, x2), (alpha1, alpha2)/|(alpha1, alpha2)|), with the
    direction e1 when alpha has no Span(e1, e2) component; f = psi * f0; W
    is w(x, alpha(theta)) off the degenerate set and w0((x1, x2), e1) on it.

    The recorded bounds of w are the pair's family-node bounds widened by
    the values met while certifying, since the interpolated weight on
    off-family lines can step slightly outside the family range.
    """
    if d < 3:
        raise ValueError("lift needs d >= 3")
    e1 = np.array([1.0, 0.0])

    def w_eval(x, alpha):
        a = np.asarray(alpha, dtype=float)[:2]
        nrm = math.hypot(a[0], a[1])
        return eval_w0(pair, x[:, :2], a / nrm if nrm > 1e-12 else e1)

    def policy(x):
        return eval_w0(pair, np.atleast_2d(x)[:, :2], e1)

    lo, hi = pair.bounds
    if certify:
        # widen to everything the certification samples of w and W will see
        probe = RayWeight(w_eval, d, lo, hi)
        W_probe = weight_from_ray_weight(probe, policy, certify=False)
        for rng_lo, rng_hi in (sampled_range(probe, seed=seed),
                               sampled_range(W_probe, seed=seed, extra_dirs=degenerate_samples(d, seed))):
            lo, hi = min(lo, rng_lo), max(hi, rng_hi)
    w = RayWeight(w_eval, d, lo, hi)
    f = lift_field(pair.f0, bump_psi(d - 2), d)
    W = weight_from_ray_weight(w, policy, certify=certify, seed=seed)
    return LiftedPair(W=W, f=f, w=w, d=d, pair=pair)


def aligned_grid(pair, d, n_angles=8, n_offsets=9):
    """Hyperplanes whose reduction rays are exactly family lines.

    theta = (cos t, sin t, 0, ...) with t = phi_i + pi/2 gives alpha(theta)
    at angle phi_i, and the inner rays then sit at offset s on Span(e1, e2).
    """
    fam = pair.family
    ii = np.unique(np.linspace(0, fam.n_phi - 1, n_angles).round().astype(int))
    jj = np.unique(np.linspace(0, fam.n_s - 1, n_offsets).round().astype(int))
    planes = []
    for i in ii:
        t = fam.angles[i] + 0.5 * np.pi
        theta = np.zeros(d)
        theta[0], theta[1] = math.cos(t), math.sin(t)
        for j in jj:
            planes.append(Hyperplane(fam.offsets[j], theta))
    return planes


def generic_grid(d, n_s=9, n_theta=24, seed=0, s_max=math.sqrt(2.0), special=True):
    """Seeded normalized-Gaussian directions crossed with uniform offsets,
    plus the special directions +-e1, +-e2, +-e3 and degenerate samples."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_theta, d))
    thetas = list(g / np.linalg.norm(g, axis=1, keepdims=True))
    if special:
        for i in range(min(3, d)):
            e = basis_vector(d, i)
            thetas += [e, -e]
        g = rng.standard_normal((2, d))
        g[:, :2] = 0.0
        thetas += list(g / np.linalg.norm(g, axis=1, keepdims=True))
    offsets = np.linspace(-s_max, s_max, n_s)
    return [Hyperplane(s, th) for th in thetas for s in offsets]


def _reduction_value(w, f, plane, fiber, line):
    """Ray decomposition; degenerate theta uses the alpha = e1 frame."""
    if is_degenerate(plane.theta):
        frame = remark2_frame(plane.theta)
        alpha = frame.alpha
        taus, tau_w = fiber.grid()
        bases = plane.s * plane.theta + taus @ frame.betas
        pts = (bases[:, None, :] + line.nodes[None, :, None] * alpha).reshape(-1, plane.dim)
        vals = (w.evaluator(pts, alpha) * f(pts)).reshape(bases.shape[0], len(line))
        return float(tau_w @ (vals @ line.weights)), "reduction-remark2"
    frame = frame_on_hyperplane(plane.theta)
    return radon_via_rays(w, f, plane, frame, fiber, line), "reduction"


def verify_lifted_pair(lp, grid, mode="reduction", n=64, line=None):
    """Residuals of R_W f over `grid`.

    ``reduction`` sums ray transforms with direction alpha(theta) (the
    family line rule by default, so aligned grids hit family lines exactly);
    ``direct`` integrates W f over each hyperplane with n nodes per axis.
    Values are normalized by the largest unweighted transform of |f| over
    the grid, computed with the same quadrature.
    """
    if mode not in ("reduction", "direct"):
        raise ValueError(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    d = lp.d
    f_abs = lp.f.abs()
    rep = ResidualReport(weight_bounds=(lp.W.lower, lp.W.upper))
    rows = []
    if mode == "reduction":
        line = line or lp.pair.family.rule
        fiber = FiberRule.uniform(n, lp.f.support_radius, d - 2)
        one = constant_ray_weight(d)
        for plane in grid:
            val, tag = _reduction_value(lp.w, lp.f, plane, fiber, line)
            ref, _ = _reduction_value(one, f_abs, plane, fiber, line)
            rows.append((plane, val, ref, tag))
    else:
        rule = HyperplaneRule.uniform(n, lp.f.support_radius, d)
        one = constant_radon_weight(d)
        for plane in grid:
            val = radon_direct(lp.W, lp.f, plane, rule)
            ref = radon_direct(one, f_abs, plane, rule)
            tag = "direct-degenerate" if is_degenerate(plane.theta) else "direct"
            rows.append((plane, val, ref, tag))
    norm = max((abs(r[2]) for r in rows), default=0.0) or 1.0
    for plane, val, _, tag in rows:
        rep.add(plane.s, plane.theta, val, val / norm, tag)
    rep.normalization = norm
    rep.wall_time = time.perf_counter() - t0
    rep.extra = {"mode": mode, "d": d, "n": n}
    return rep


__all__ = [
    "DegenerateF0", "LiftedPair", "LineFamily2D", "NullPair2D", "WeightBoundViolation",
    "aligned_grid", "build_null_pair_2d", "eval_w0", "generic_grid",
    "lift_to_dimension", "line_coordinates", "verify_lifted_pair", "verify_null_pair_2d",
]
