"""Command-line front end.

    python3 -m wienerinf --config job.cfg --command wiener --out results/

Exit codes: 0 success, 2 a solver did not converge, 3 invalid input.  Every
CSV starts with a ``#`` line recording command, variant and parameters,
followed by a header row; floats carry 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .capacity import GeometryError, normalized_grid_capacity, truncated_capacity
from .condensers import Unsupported
from .config import (JobConfig, ParseError, job_variant, job_weight, parse_config, print_config,
                     resolve_domain, validate, with_overrides)
from .estimates import poincare_constant_estimate
from .geometry import (Condenser, DomainError, ValidationError, bounding_box,
                       weight_ball_mass)
from .inversion import invert_set
from .solver import Grid, GridBudgetError, NotConverged
from .variants import CLI_VARIANTS
from .wiener import WholeSpaceRefused, classify_infinity, wiener_partial_sum

log = logging.getLogger("wienerinf")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INVALID = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wienerinf", description="Capacities, Wiener-type integrals and "
                 "regularity at infinity for p-Laplace type equations.")
    ap.add_argument("--config", metavar="PATH", help="job file")
    ap.add_argument("--command", metavar="NAME", help="capacity, wiener, classify, invert, "
                    "solve, examples or poincare (overrides the job file)")
    ap.add_argument("--out", metavar="DIR", default=".", help="output directory")
    ap.add_argument("--seed", type=int, help="seed for random initial guesses (0 = warm start)")
    ap.add_argument("--grid-h", type=float, dest="grid_h", help="grid spacing relative to the "
                    "condenser half-width")
    ap.add_argument("--rmax", type=float, help="upper end of the sampled scale range")
    ap.add_argument("--variant", choices=sorted(CLI_VARIANTS), help="integral to sample")
    ap.add_argument("--which", choices=("7.1", "7.2"), help="example family for 'examples'")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


# ------------------------------------------------------------ output

def _g(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _provenance(cfg: JobConfig, command: str, extra: str = "") -> str:
    parts = [f"command={command}", f"n={cfg.n}", f"p={cfg.p!r}", f"weight={cfg.weight}",
             f"seed={cfg.seed}", f"grid_h={cfg.grid_h!r}"]
    if command in ("wiener", "classify"):
        parts.insert(1, f"variant={job_variant(cfg).label}")
    if extra:
        parts.append(extra)
    return "# wienerinf " + " ".join(parts)


def write_csv(path: str, provenance: str, header: list, rows) -> str:
    with open(path, "w", newline="") as fh:
        fh.write(provenance + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_g(v) for v in row])
    return path


# ------------------------------------------------------------ commands

def _seed(cfg: JobConfig) -> Optional[int]:
    return cfg.seed if cfg.seed else None


def cmd_capacity(cfg: JobConfig, out: str) -> int:
    exp = cfg.exponents
    cond = Condenser(cfg.K, cfg.G, job_weight(cfg))
    kw = dict(tol=cfg.tol, max_iter=cfg.max_iter, seed=_seed(cfg))
    if bounding_box(cfg.G, exp.n) is not None:
        est = normalized_grid_capacity(cond, exp, cfg.grid_h, **kw)
    else:
        rk = cond.bounding_radius(exp.n)
        if rk is None:
            raise ValidationError("K must be bounded")
        est = truncated_capacity(cfg.K, cfg.G, exp, cond.weight, 2 * max(rk, 1e-12),
                                 cfg.grid_h, **kw)
    lo, hi = est.analytic_bounds if est.analytic_bounds is not None else (None, None)
    path = write_csv(os.path.join(out, "capacity.csv"), _provenance(cfg, "capacity"),
                     ["value", "method", "h", "iterations", "converged", "k_nodes",
                      "exact_lower", "exact_upper"],
                     [[est.value, est.method, est.grid["h"] if est.grid else None,
                       est.iterations, est.converged, est.k_nodes, lo, hi]])
    print(f"capacity {est.value:.10g} ({est.method}, {est.iterations} iterations)")
    if lo is not None:
        print(f"closed form {lo:.10g}")
    for note in est.notes:
        print(f"note: {note}")
    print(f"wrote {path}")
    return EXIT_OK if est.converged else EXIT_NOT_CONVERGED


def _sampling(cfg: JobConfig) -> dict:
    return dict(r_min=cfg.r_min, r_max=cfg.r_max, samples_per_decade=cfg.samples_per_decade,
                h_rel=cfg.grid_h)


def cmd_wiener(cfg: JobConfig, out: str) -> int:
    exp = cfg.exponents
    dom = resolve_domain(cfg)
    v = job_variant(cfg)
    weight = job_weight(cfg) if cfg.weight != "constant" else None
    rep = wiener_partial_sum(v, dom, exp, weight=weight, **_sampling(cfg))
    prov = _provenance(cfg, "wiener", f"verdict={rep.verdict.kind}")
    path = write_csv(os.path.join(out, "wiener.csv"), prov,
                     ["r", "capacity", "integrand", "partial_sum"],
                     ([s.r, s.capacity, s.integrand, s.partial_sum] for s in rep.samples))
    spath = os.path.join(out, "wiener_summary.txt")
    with open(spath, "w") as fh:
        fh.write(f"variant: {v.label}\nsamples: {len(rep.samples)}\n"
                 f"total: {rep.total:.17g}\ntrend: {rep.trend:.17g}\nverdict: {rep.verdict}\n")
        for note in rep.notes:
            fh.write(f"note: {note}\n")
    print(f"{v.label}: {len(rep.samples)} samples, partial sum {rep.total:.10g}")
    print(f"verdict: {rep.verdict}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_classify(cfg: JobConfig, out: str) -> int:
    exp = cfg.exponents
    dom = resolve_domain(cfg)
    res = classify_infinity(dom, exp, job_variant(cfg), **_sampling(cfg))
    path = write_csv(os.path.join(out, "classify.csv"), _provenance(cfg, "classify"),
                     ["status", "verdict", "certificate"],
                     [[res.status, res.verdict.kind, res.certificate]])
    print(f"infinity: {res.status}")
    print(f"certificate: {res.certificate}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_invert(cfg: JobConfig, out: str) -> int:
    dom = resolve_domain(cfg)
    inv = invert_set(dom)
    new = with_overrides(JobConfig(n=cfg.n, p=cfg.p, command=cfg.command, variant=cfg.variant,
                                   weight=cfg.weight, delta=cfg.delta), domain=inv)
    path = os.path.join(out, "inverted.cfg")
    with open(path, "w") as fh:
        fh.write("# image of the domain under x -> x/|x|^2\n")
        fh.write(print_config(new))
    print(f"wrote {path}")
    return EXIT_OK


def _data_fn(cfg: JobConfig):
    spec = cfg.data
    if spec is None or spec.kind == "indicator":
        center = np.asarray(spec.get("center", (0.0,) * cfg.n) if spec else (0.0,) * cfg.n)
        radius = spec.get("radius", 0.5) if spec else 0.5
        a = spec.get("inside", 1.0) if spec else 1.0
        b = spec.get("outside", 0.0) if spec else 0.0
        return lambda X: np.where(np.linalg.norm(X - center, axis=-1) <= radius, a, b)
    if spec.kind == "coordinate":
        k = spec.get("axis", 0)
        return lambda X: X[:, k].astype(float)
    c = spec.get("value", 0.0)
    return lambda X: np.full(len(X), c)


def cmd_solve(cfg: JobConfig, out: str) -> int:
    from .pdelab import (DirichletProblem, probe_regularity, refinement_verdict,
                         solve_dirichlet)
    exp = cfg.exponents
    dom = resolve_domain(cfg)
    box = bounding_box(dom, 2)
    if box is None:
        raise ValidationError("solve needs a bounded domain; intersect it with a ball")
    lo, hi = box
    half = float(np.max(hi - lo)) / 2
    weight = job_weight(cfg)
    data = _data_fn(cfg)

    def solve_at(h):
        pad = 2 * h
        grid = Grid(tuple(lo - pad), tuple(hi + pad), h)
        prob = DirichletProblem.from_set(grid, dom, data, exp, weight)
        return solve_dirichlet(prob, tol=min(cfg.tol, 1e-10), max_iter=cfg.max_iter,
                               seed=_seed(cfg))

    h = cfg.grid_h * half
    sol = solve_at(h)
    X = sol.problem.grid.nodes().reshape(-1, 2)
    path = write_csv(os.path.join(out, "solution.csv"), _provenance(cfg, "solve"),
                     ["x", "y", "u", "inside"],
                     ([x[0], x[1], u, bool(i)] for x, u, i in
                      zip(X, sol.u.ravel(), sol.problem.inside.ravel())))
    print(f"solved on {sol.problem.grid.shape} nodes in {sol.iterations} iterations, "
          f"energy {sol.energy:.10g}")
    print(f"wrote {path}")
    if cfg.point is not None:
        radii = cfg.radii
        if radii is None:
            # down to two spacings of the coarser grid
            k = max(1, int(math.floor(math.log2(half / 2 / (4 * h)))))
            radii = tuple(half / 2 / 2 ** i for i in range(k + 1))
        coarse = solve_at(2 * h)
        probes = [probe_regularity(s, cfg.point, radii) for s in (coarse, sol)]
        verdict = refinement_verdict(probes)
        ppath = write_csv(os.path.join(out, "probe.csv"),
                          _provenance(cfg, "solve", f"point={cfg.point}"),
                          ["h", "radius", "oscillation", "deviation"],
                          ([pr.h, r, o, d] for pr in probes
                           for r, o, d in zip(pr.radii, pr.oscillations, pr.deviations)))
        meta = probes[-1].metadata()
        print(f"probe at {cfg.point}: {verdict} (threshold {meta['threshold']:g} of the data "
              f"range, refinement factor {meta['refinement_factor']})")
        print(f"wrote {ppath}")
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def cmd_examples(cfg: JobConfig, out: str) -> int:
    from .families import (Example71, example71_upper_series, example72_I1_bound,
                           example72_I2_lower, verify_example_verdicts)
    from .geometry import Exponents
    which = (cfg.which,) if cfg.which else ("7.1", "7.2")
    verdicts = verify_example_verdicts()
    if "7.1" in which:
        rows = [[J, Fraction(example71_upper_series(J)), float(example71_upper_series(J))]
                for J in range(1, 21)]
        path = write_csv(os.path.join(out, "example_7_1.csv"),
                         _provenance(cfg, "examples", "family=sparse-ball-sequence"),
                         ["J", "partial_sum_exact", "partial_sum"], rows)
        res = classify_infinity(Example71(2).descriptor(), Exponents(2, 2))
        print("sparse ball sequence, square-shell bound partial sums:")
        for J, _, v in rows:
            print(f"  J={J:2d}  {v:.17g}")
        print(f"infinity (n = p = 2): {res.status}; {res.certificate}")
        print(f"wrote {path}")
    if "7.2" in which:
        rows = [[J, example72_I1_bound(J), example72_I2_lower(J) if J >= 2 else None]
                for J in range(1, 31)]
        path = write_csv(os.path.join(out, "example_7_2.csv"),
                         _provenance(cfg, "examples", "family=point-cluster"),
                         ["J", "half_shell_partial_sum", "ball_partial_sum"], rows)
        print("point cluster at the origin (n = p = 2):")
        for J, a, b in rows[:5] + rows[-1:]:
            print(f"  J={J:2d}  half-shell {a:.10g}  ball {'' if b is None else f'{b:.10g}'}")
        print(f"half-shell integral: {verdicts['example72_I1']}; "
              f"ball integral: {verdicts['example72_I2']}")
        print(f"wrote {path}")
    return EXIT_OK


def cmd_poincare(cfg: JobConfig, out: str) -> int:
    exp = cfg.exponents
    w = job_weight(cfg)
    grid = Grid.cube(1.0 + 2 * cfg.grid_h, cfg.grid_h, exp.n)
    c = poincare_constant_estimate(exp, w, grid, max_iter=cfg.max_iter)
    mass = weight_ball_mass(w, 1.0, exp.n)
    path = write_csv(os.path.join(out, "poincare.csv"), _provenance(cfg, "poincare"),
                     ["n", "p", "delta", "h", "constant", "ball_mass"],
                     [[exp.n, exp.p, 0.0 if w.is_trivial else w.delta, cfg.grid_h, c, mass]])
    print(f"Poincare constant on the unit ball: {c:.10g}")
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {
    "capacity": cmd_capacity, "wiener": cmd_wiener, "classify": cmd_classify,
    "invert": cmd_invert, "solve": cmd_solve, "examples": cmd_examples,
    "poincare": cmd_poincare,
}


def load_config(args) -> JobConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), check=False)
    else:
        cfg = JobConfig()
    variant = args.variant
    cfg = with_overrides(cfg, command=args.command, seed=args.seed, grid_h=args.grid_h,
                         r_max=args.rmax, variant=variant, which=args.which)
    return validate(cfg)


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if cfg.command is None:
            raise ValidationError("no command given; use --command or 'command =' in the job file")
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[cfg.command](cfg, args.out)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ParseError, ValidationError, WholeSpaceRefused, GeometryError, DomainError,
            GridBudgetError, Unsupported, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
