"""Batch experiment runner.

Subcommands: verify-reduction, null-pair, lift-verify, classify, convergence.
Each writes deterministic CSV data and a JSON summary into the output
directory. Exit codes: 0 success, 1 tolerance breach, 2 construction
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .fields import gaussian_oracle, gaussian_radon
from .geometry import (
    DEGENERACY_TOL,
    Hyperplane,
    IntersectionKind,
    Ray,
    basis_vector,
    classify_intersection,
    frame_on_hyperplane,
    is_degenerate,
)
from .nullpair import (
    F0_REGISTRY,
    DegenerateF0,
    LineFamily2D,
    NullPair2D,
    WeightBoundViolation,
    aligned_grid,
    build_null_pair_2d,
    eval_w0,
    generic_grid,
    lift_to_dimension,
    verify_lifted_pair,
    verify_null_pair_2d,
)
from .quadrature import FiberRule, HyperplaneRule, gauss_legendre_rule, integrate_along_ray
from .report import ResidualReport
from .transforms import (
    RayWeight,
    constant_ray_weight,
    radon_direct,
    radon_via_rays,
    weight_from_ray_weight,
)

log = logging.getLogger("wradon")

EXIT_OK, EXIT_TOLERANCE, EXIT_CONSTRUCTION, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


DEFAULT_TOLERANCES = {
    "reduction": 1e-8,      # cross-path agreement, verify-reduction
    "frame": 1e-8,          # seed-0 vs seed-1 frames
    "family": 1e-13,        # per-line null-pair residual
    "aligned": 1e-12,       # lifted residual on family-aligned grids
    "generic": 1e-4,        # lifted residual, reduction path, generic grid
    "direct": 1e-3,         # lifted residual, direct path
    "gaussian": 1e-10,      # convergence sweep, finest n
}


@dataclasses.dataclass
class ExperimentConfig:
    """Run parameters; every field can come from a JSON config file."""

    dimension: int = 3
    n_s: int = 9
    n_theta: int = 24
    quad_n: int = 64
    family_n_phi: int = 64
    family_n_s: int = 64
    line_nodes: int = 128
    generic_family_n: int = 128
    samples: int = 100
    classify_samples: int = 2000
    convergence_ns: tuple = (8, 16, 32, 64, 128)
    convergence_family: tuple = (32, 64, 128)
    f0: str = "default_f0"
    weight_ratio_limit: float | None = None
    tolerances: dict = dataclasses.field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str = "wradon_out"
    seed: int = 0

    def __post_init__(self):
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances or {})
        self.tolerances = tol
        self.convergence_ns = tuple(self.convergence_ns)
        self.convergence_family = tuple(self.convergence_family)
        self.validate()

    def validate(self):
        if not 2 <= self.dimension <= 6:
            raise UsageError(f"dimension must lie in [2, 6], got {self.dimension}")
        sizes = {k: getattr(self, k) for k in ("n_s", "n_theta", "quad_n", "family_n_phi", "family_n_s",
                                                "line_nodes", "generic_family_n", "samples",
                                                "classify_samples")}
        sizes.update({f"convergence_ns[{i}]": n for i, n in enumerate(self.convergence_ns)})
        sizes.update({f"convergence_family[{i}]": n for i, n in enumerate(self.convergence_family)})
        for k, v in sizes.items():
            if not isinstance(v, int) or v < 2:
                raise UsageError(f"{k} must be an integer >= 2, got {v!r}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise UsageError(f"tolerance {k} must be positive, got {v!r}")
        if self.f0 not in F0_REGISTRY:
            raise UsageError(f"unknown f0 {self.f0!r}; choose from {sorted(F0_REGISTRY)}")

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["convergence_ns"] = list(self.convergence_ns)
        d["convergence_family"] = list(self.convergence_family)
        return d


def _out_dir(cfg):
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _random_directions(d, n, rng, nondegenerate=True):
    out = []
    while len(out) < n:
        g = rng.standard_normal(d)
        g /= np.linalg.norm(g)
        if nondegenerate and d >= 3 and is_degenerate(g, 1e-3):
            continue
        out.append(g)
    return np.array(out)


def separable_weight(d):
    """Smooth positive control weight a(x) b(direction)."""
    c = np.linspace(0.3, -0.2, d)
    e = np.linspace(0.5, 1.0, d) / np.linalg.norm(np.linspace(0.5, 1.0, d))

    def ev(x, a):
        return (1.5 + 0.5 * np.tanh(x @ c)) * (1.2 + 0.2 * float(np.asarray(a) @ e))

    return RayWeight(ev, d, 1.0 * 1.0, 2.0 * 1.4)


def cmd_verify_reduction(cfg, tolerance=None):
    """Cross-path agreement (direct vs ray decomposition) on control weights."""
    d = cfg.dimension
    if d < 3:
        raise UsageError("verify-reduction needs d >= 3 (the ray decomposition starts at d = 3)")
    tol = tolerance if tolerance is not None else cfg.tolerances["reduction"]
    ftol = cfg.tolerances["frame"]
    t0 = time.perf_counter()
    f = gaussian_oracle(d)
    R = f.support_radius
    n = cfg.quad_n
    line = gauss_legendre_rule(n, R)
    fiber = FiberRule.uniform(n, R, d - 2)
    hrule = HyperplaneRule.uniform(n, R, d)
    rng = np.random.default_rng(cfg.seed)
    rep = ResidualReport()
    worst_frame = 0.0
    weights = {"unit": constant_ray_weight(d), "separable": separable_weight(d)}
    for name, w in weights.items():
        W = weight_from_ray_weight(w, degenerate_policy=lambda x: w.evaluator(x, basis_vector(d, 0)),
                                   certify=False)
        for theta in _random_directions(d, cfg.samples, rng):
            s = rng.uniform(-2.0, 2.0)
            plane = Hyperplane(s, theta)
            direct = radon_direct(W, f, plane, hrule)
            via = radon_via_rays(w, f, plane, frame_on_hyperplane(theta), fiber, line)
            via1 = radon_via_rays(w, f, plane, frame_on_hyperplane(theta, seed=1), fiber, line)
            rel = abs(via - direct) / (1.0 + abs(direct))
            worst_frame = max(worst_frame, abs(via1 - via) / (1.0 + abs(via)))
            rep.add(s, theta, via - direct, rel, name)
    rep.wall_time = time.perf_counter() - t0
    rep.extra = {"d": d, "n": n, "tolerance": tol, "frame_max": worst_frame, "frame_tolerance": ftol}
    rep.write(_out_dir(cfg), "verify_reduction")
    ok = rep.max() <= tol and worst_frame <= ftol
    log.info("verify-reduction d=%d: max rel diff %.3e (tol %.1e), frame diff %.3e", d, rep.max(), tol,
             worst_frame)
    return rep, ok


def _build_pair(cfg, n_phi=None, n_s=None):
    fam = LineFamily2D(n_phi or cfg.family_n_phi, n_s or cfg.family_n_s, cfg.line_nodes, 1.0)
    return build_null_pair_2d(F0_REGISTRY[cfg.f0](), fam, ratio_limit=cfg.weight_ratio_limit)


def cmd_null_pair(cfg, tolerance=None):
    """Build the planar pair, verify it, export it and check the round trip."""
    tol = tolerance if tolerance is not None else cfg.tolerances["family"]
    out = _out_dir(cfg)
    pair = _build_pair(cfg)
    rep = verify_null_pair_2d(pair, offgrid_lines=cfg.samples, seed=cfg.seed)
    pair.export(out / "null_pair_table.json", out / "null_pair_table.csv")
    back = NullPair2D.load(out / "null_pair_table.json", out / "null_pair_table.csv", f0=pair.f0)
    rep2 = verify_null_pair_2d(back, offgrid_lines=cfg.samples, seed=cfg.seed)
    same = [r["value"] for r in rep.records] == [r["value"] for r in rep2.records]
    rep.extra.update({"tolerance": tol, "roundtrip_identical": same, "f0": cfg.f0,
                      "positive": pair.lower > 0})
    rep.write(out, "null_pair")
    log.info("null-pair: family max %.3e (tol %.1e), off-family max %.3e, bounds [%.4g, %.4g]",
             rep.max("family"), tol, rep.max("offgrid"), *pair.bounds)
    return rep, rep.max("family") <= tol and same


def remark2_check(lp, n_pts=256, seed=0):
    """max |W(x, theta) - w0((x1, x2), e1)| over degenerate theta samples."""
    d = lp.d
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.2, 1.2, size=(n_pts, d))
    thetas = [basis_vector(d, i) for i in range(2, d)]
    thetas += [-t for t in thetas]
    worst = 0.0
    ref = eval_w0(lp.pair, x[:, :2], np.array([1.0, 0.0]))
    for th in thetas:
        worst = max(worst, float(np.max(np.abs(lp.W(x, th) - ref))))
    return worst


def cmd_lift_and_verify(cfg, tolerance=None):
    """Lift to d and verify R_W f = 0 on aligned, generic and degenerate planes."""
    d = cfg.dimension
    if d < 3:
        raise UsageError("lift-verify needs d >= 3")
    tols = dict(cfg.tolerances)
    if tolerance is not None:
        tols["generic"] = tolerance
    out = _out_dir(cfg)
    t0 = time.perf_counter()
    pair = _build_pair(cfg)
    lp = lift_to_dimension(pair, d, seed=cfg.seed)
    aligned = verify_lifted_pair(lp, aligned_grid(pair, d), "reduction", n=cfg.quad_n)
    gpair = pair if cfg.generic_family_n == cfg.family_n_phi == cfg.family_n_s else \
        _build_pair(cfg, cfg.generic_family_n, cfg.generic_family_n)
    glp = lp if gpair is pair else lift_to_dimension(gpair, d, seed=cfg.seed)
    grid = generic_grid(d, cfg.n_s, cfg.n_theta, cfg.seed)
    generic = verify_lifted_pair(glp, grid, "reduction", n=cfg.quad_n)
    direct = verify_lifted_pair(glp, grid, "direct", n=cfg.quad_n)
    r2 = remark2_check(glp, seed=cfg.seed)
    for name, rep in (("aligned", aligned), ("generic", generic), ("direct", direct)):
        rep.write(out, f"lift_{name}")
    summary = {
        "d": d,
        "aligned_max": aligned.max(), "generic_max": generic.max(), "direct_max": direct.max(),
        "direct_degenerate_max": direct.max("direct-degenerate"),
        "remark2_max_diff": r2,
        "weight_bounds": [glp.W.lower, glp.W.upper],
        "tolerances": {k: tols[k] for k in ("aligned", "generic", "direct")},
        "wall_time": time.perf_counter() - t0,
    }
    with open(out / "lift_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    ok = (aligned.max() <= tols["aligned"] and generic.max() <= tols["generic"]
          and direct.max() <= tols["direct"] and r2 == 0.0)
    log.info("lift-verify d=%d: aligned %.3e, generic %.3e, direct %.3e, remark-2 diff %.1e",
             d, aligned.max(), generic.max(), direct.max(), r2)
    return summary, ok


def classification_samples(d, n, seed=0):
    """(s, theta) pairs mixing random, exactly degenerate and nearly
    degenerate directions with s = 0 and s != 0."""
    rng = np.random.default_rng(seed)
    rows = []
    offsets = (0.0, 1.0, -0.5, 1e-13, 1e-6)
    k = 0
    while len(rows) < n:
        kind = k % 4
        k += 1
        g = rng.standard_normal(d)
        if kind == 1:
            g[:2] = 0.0
        elif kind == 2:
            g[:2] = rng.uniform(-1, 1, 2) * 1e-11
        elif kind == 3:
            g[:2] = rng.uniform(-1, 1, 2) * 1e-7
        theta = g / np.linalg.norm(g)
        s = offsets[(k // 4) % len(offsets)] if kind else rng.uniform(-2, 2)
        rows.append((s, theta))
    for i in range(2, d):
        rows += [(0.0, basis_vector(d, i)), (1.0, basis_vector(d, i))]
    return rows


def expected_kind(s, theta):
    """Independent statement of the three cases."""
    degenerate = max(abs(theta[0]), abs(theta[1])) <= DEGENERACY_TOL
    if not degenerate:
        return IntersectionKind.LINE
    return IntersectionKind.PLANE if abs(s) <= 1e-12 else IntersectionKind.EMPTY


def cmd_classify(cfg, tolerance=None):
    d = max(cfg.dimension, 3)
    rows = classification_samples(d, cfg.classify_samples, cfg.seed)
    counts = {k.value: 0 for k in IntersectionKind}
    mismatches = 0
    out = _out_dir(cfg)
    with open(out / "classify.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["s", "theta", "kind", "expected"])
        for s, theta in rows:
            got = classify_intersection(Hyperplane(s, theta))
            exp = expected_kind(s, theta)
            counts[got.value] += 1
            mismatches += got is not exp
            wr.writerow([repr(float(s)), " ".join(repr(float(t)) for t in theta), got.value, exp.value])
    print(f"{'kind':<8}{'count':>8}")
    for k, v in counts.items():
        print(f"{k:<8}{v:>8}")
    for s, theta in rows[-2:]:
        print(f"s={s:<5} theta=e{int(np.argmax(np.abs(theta))) + 1}: "
              f"{classify_intersection(Hyperplane(s, theta)).value}")
    print(f"mismatches: {mismatches}")
    return {"counts": counts, "mismatches": mismatches}, mismatches == 0


def cmd_convergence(cfg, tolerance=None):
    """Error-vs-n CSV: Gaussian oracle, null-pair off-family residual and a
    constant-field control."""
    d = max(cfg.dimension, 3)
    tol = tolerance if tolerance is not None else cfg.tolerances["gaussian"]
    rng = np.random.default_rng(cfg.seed)
    thetas = _random_directions(d, 5, rng)
    f = gaussian_oracle(d)
    rows = []
    for n in cfg.convergence_ns:
        rule = HyperplaneRule.uniform(n, f.support_radius, d)
        one = weight_from_ray_weight(constant_ray_weight(d), lambda x: np.ones(x.shape[0]), certify=False)
        err = 0.0
        for th in thetas:
            exact = gaussian_radon(d, 0.5)
            err = max(err, abs(radon_direct(one, f, Hyperplane(0.5, th), rule) - exact) / exact)
        rows.append(("gaussian", n, err))
    for n in cfg.convergence_ns:
        rule = gauss_legendre_rule(n, 1.0)
        val = integrate_along_ray(lambda p: np.ones(p.shape[0]), Ray(np.zeros(2), np.array([0.0, 1.0])), rule)
        rows.append(("constant", n, abs(val - 2.0)))
    for n in cfg.convergence_family:
        n_fam = max(n, 8)
        pair = build_null_pair_2d(F0_REGISTRY[cfg.f0](), LineFamily2D(n_fam, n_fam, cfg.line_nodes),
                                  ratio_limit=cfg.weight_ratio_limit)
        rep = verify_null_pair_2d(pair, offgrid_lines=cfg.samples, seed=cfg.seed)
        rows.append(("nullpair_offgrid", n_fam, rep.max("offgrid")))
    out = _out_dir(cfg)
    with open(out / "convergence.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["study", "n", "error"])
        for study, n, err in rows:
            wr.writerow([study, n, repr(float(err))])
    g = [e for st, _, e in rows if st == "gaussian"]
    fam = [e for st, _, e in rows if st == "nullpair_offgrid"]
    orders = [math.log2(a / b) for a, b in zip(fam, fam[1:]) if a > 0 and b > 0]
    ok = g[-1] <= tol and all(o >= 2.0 for o in orders)
    log.info("convergence: gaussian finest %.3e, null-pair orders %s", g[-1],
             ", ".join(f"{o:.2f}" for o in orders))
    return {"rows": rows, "orders": orders}, ok


COMMANDS = {
    "verify-reduction": cmd_verify_reduction,
    "null-pair": cmd_null_pair,
    "lift-verify": cmd_lift_and_verify,
    "classify": cmd_classify,
    "convergence": cmd_convergence,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="wradon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--dim", type=int, help="dimension d (overrides config)")
        sp.add_argument("--out", type=str, help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="random seed (overrides config)")
        sp.add_argument("--tolerance", type=float, help="primary tolerance of the command")
    return p


def load_config(args):
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    over = {}
    if args.dim is not None:
        over["dimension"] = args.dim
    if args.out is not None:
        over["out"] = args.out
    if args.seed is not None:
        over["seed"] = args.seed
    if over:
        cfg = dataclasses.replace(cfg, **over)
    if args.tolerance is not None and not args.tolerance > 0:
        raise UsageError("--tolerance must be positive")
    return cfg


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        _, ok = COMMANDS[args.command](cfg, tolerance=args.tolerance)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except WeightBoundViolation as e:
        print(f"construction failed: {e} (ratio={e.ratio!r})", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (DegenerateF0, FileNotFoundError, json.JSONDecodeError) as e:
        code = EXIT_CONSTRUCTION if isinstance(e, DegenerateF0) else EXIT_USAGE
        print(f"error: {e}", file=sys.stderr)
        return code
    if not ok:
        print(f"{args.command}: tolerance breached", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
