"""Command-line front end.

``proxsplit run <config> [--out DIR] [--seed N]`` executes the CT
reconstruction experiment described by a flat ``key = value`` config file
and writes results.csv, per-run trace CSVs, and PGM reconstructions.
``proxsplit selftest`` runs the fast invariant suite.

Config keys (defaults in parentheses):

    scene.n (64)                scene.n_views (20)      scene.n_rays (95)
    scene.geometry (fan)        scene.noise_var_b (0.01)
    scene.noise_var_prior (0.01)
    scene.seed (20170520)       scene.lambda1 (0.4)     scene.lambda2 (0.5)
    run.solvers (dfb,pdfb,admm) run.eps (1e-6)          run.max_outer (40000)
    run.out (.)
    <algo>.gamma, dfb.lambda, dfb.inner_iters, dfb.mode,
    pdfb.sigma, pdfb.tau, pdfb.inner_iters, admm.rho1, admm.rho2

Exit codes: 0 ok, 1 solver failure, 2 usage error.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .errors import ProxsplitError
from .ct import Scene, build_instance, run_experiment
from .solvers import ALGORITHMS, SolverConfig

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_USAGE = 2


class ConfigError(ProxsplitError):
    pass


def parse_config(path):
    """Parse a flat 'key = value' file into a dict; '#' starts a comment."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        out[key] = value
    return out


def _get(cfg, key, conv, default):
    if key not in cfg:
        return default
    try:
        return conv(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {cfg[key]!r} ({exc})")


def build_runspec(cfg, out_override=None, seed_override=None):
    scene = Scene(
        n=_get(cfg, "scene.n", int, 64),
        n_views=_get(cfg, "scene.n_views", int, 20),
        n_rays=_get(cfg, "scene.n_rays", int, 95),
        geometry=_get(cfg, "scene.geometry", str, "fan"),
        noise_var_b=_get(cfg, "scene.noise_var_b", float, 0.01),
        noise_var_prior=_get(cfg, "scene.noise_var_prior", float, 0.01),
        seed=(seed_override if seed_override is not None
              else _get(cfg, "scene.seed", int, 20170520)),
        lambda1=_get(cfg, "scene.lambda1", float, 0.4),
        lambda2=_get(cfg, "scene.lambda2", float, 0.5),
    )
    solvers = [s.strip() for s in
               _get(cfg, "run.solvers", str, "dfb,pdfb,admm").split(",")]
    for s in solvers:
        if s not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {s!r}; valid options: "
                f"{', '.join(ALGORITHMS)}")
    eps_list = [float(e) for e in
                _get(cfg, "run.eps", str, "1e-6").split(",")]
    max_outer = _get(cfg, "run.max_outer", int, 40_000)
    out_dir = Path(out_override if out_override is not None
                   else _get(cfg, "run.out", str, "."))

    configs = []
    for algo in solvers:
        for eps in eps_list:
            configs.append(SolverConfig(
                algorithm=algo,
                gamma=_get(cfg, f"{algo}.gamma", float, None),
                lam=_get(cfg, f"{algo}.lambda", float, None),
                sigma=_get(cfg, f"{algo}.sigma", float, None),
                tau=_get(cfg, f"{algo}.tau", float, None),
                rho1=_get(cfg, f"{algo}.rho1", float, None),
                rho2=_get(cfg, f"{algo}.rho2", float, None),
                inner_iters=_get(cfg, f"{algo}.inner_iters", int, 1),
                max_outer=max_outer,
                eps=eps,
                convergence_mode=_get(cfg, f"{algo}.mode", str,
                                      "strict-weak"),
            ))
    return scene, configs, out_dir


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_pgm(path, image_vec, n):
    """8-bit binary PGM, min-max normalized; bounds go to a sidecar file."""
    img = np.asarray(image_vec, dtype=float).reshape((n, n), order="F")
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    data = np.round((img - lo) * scale).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n} {n}\n255\n".encode())
        fh.write(data.tobytes())
    Path(str(path) + ".txt").write_text(
        f"min = {lo!r}\nmax = {hi!r}\n")


def run(config_path, out_override=None, seed_override=None):
    cfg = parse_config(config_path)
    scene, configs, out_dir = build_runspec(cfg, out_override, seed_override)
    out_dir.mkdir(parents=True, exist_ok=True)
    instance = build_instance(scene)
    rows = run_experiment(scene, configs, instance=instance)

    results_lines = ["algorithm,eps,snr_db,nmsd,iterations,"
                     "final_objective,terminated_by"]
    failures = []
    for row in rows:
        if "error" in row:
            failures.append(f"{row['algorithm']} (eps={row['eps']}): "
                            f"{row['error']}")
            continue
        results_lines.append(",".join([
            row["algorithm"], _fmt(row["eps"]), _fmt(row["snr_db"]),
            _fmt(row["nmsd"]), str(row["iterations"]),
            _fmt(row["final_objective"]), row["terminated_by"]]))
        tag = f"{row['algorithm']}_eps{row['eps']:g}"
        report = row["report"]
        trace_lines = ["iteration,objective,snr_db,residual"]
        for i, res in enumerate(report.residual_trace, start=1):
            trace_lines.append(",".join([
                str(i), _fmt(report.objective_trace[i]),
                _fmt(report.metric_trace[i]), _fmt(res)]))
        (out_dir / f"trace_{tag}.csv").write_text(
            "\n".join(trace_lines) + "\n")
        write_pgm(out_dir / f"recon_{tag}.pgm", report.x_final, scene.n)
    (out_dir / "results.csv").write_text("\n".join(results_lines) + "\n")

    if failures:
        print("solver failures:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def selftest():
    """Fast invariant suite; prints one pass/fail line per property."""
    import numpy.linalg as la
    from . import linops, prox
    from .product import BlockStack
    from .solvers import (CompositeProblem, SmoothTerm, SolverConfig,
                          solve_dfb, solve_pdfb)

    checks = []

    def check(name, fn):
        try:
            ok = bool(fn())
            detail = ""
        except Exception as exc:
            ok, detail = False, f" ({type(exc).__name__}: {exc})"
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}{detail}")

    rng = np.random.default_rng(0)

    def adjoint_ok():
        ops = [linops.identity(7), linops.first_difference(9),
               linops.tv_gradient(5, 4),
               linops.dense(rng.standard_normal((6, 8)))]
        for op in ops:
            for _ in range(50):
                x = rng.standard_normal(op.cols)
                y = rng.standard_normal(op.rows)
                lhs = op.apply(x) @ y
                rhs = x @ op.adjoint_apply(y)
                if abs(lhs - rhs) > 1e-10 * (1 + abs(lhs)):
                    return False
        return True
    check("adjoint identity", adjoint_ok)

    def moreau_ok():
        terms = [prox.L1Norm(6), prox.GroupL21(6),
                 prox.BoxIndicator(6, 0.0, 1.0)]
        for f in terms:
            for t in (0.1, 1.0, 10.0):
                for _ in range(50):
                    u = rng.standard_normal(6) * 3
                    resid = la.norm(
                        f.prox(u, t)
                        + t * prox.prox_conjugate(f, u / t, 1.0 / t) - u)
                    if resid > 1e-12 * (1 + la.norm(u)):
                        return False
        return True
    check("Moreau decomposition residual", moreau_ok)

    def tv_ok():
        for n, m in [(5, 4), (8, 8), (16, 12)]:
            d = linops.tv_gradient(n, m)
            for _ in range(20):
                u = rng.standard_normal(n * m)
                du = d.apply(u)
                a = linops.atv(u, n, m)
                if abs(a - np.abs(du).sum()) > 1e-12 * (1 + a):
                    return False
                i = linops.itv(u, n, m)
                p = n * m
                l21 = np.hypot(du[:p], du[p:]).sum()
                if abs(i - l21) > 1e-12 * (1 + i):
                    return False
        return True
    check("TV equivalences", tv_ok)

    def reduction_ok():
        b = np.array([3.0, -1.0, 2.0])
        B = linops.first_difference(3)
        smooth = SmoothTerm(lambda x: 0.5 * ((x - b) @ (x - b)),
                            lambda x: x - b, 1.0)
        problem = CompositeProblem(
            smooth, prox.ZeroTerm(3),
            BlockStack([(B, prox.L1Norm(3))]))
        S = problem.stack.norm_sq_bound()
        gamma, lam = 1.5, 0.5 / S
        cfg = SolverConfig("dfb", gamma=gamma, lam=lam, max_outer=10,
                           eps=1e-300)
        rep = solve_dfb(problem, cfg)
        # direct single-block fixed-point scheme
        x = np.zeros(3)
        y = np.zeros(3)
        for _ in range(10):
            v = x - gamma * (x - b) - gamma * B.adjoint_apply(y)
            y = prox.prox_conjugate(
                prox.L1Norm(3), y + (lam / gamma) * B.apply(v), lam / gamma)
            x = x - gamma * (x - b) - gamma * B.adjoint_apply(y)
        return la.norm(rep.x_final - x) <= 1e-12 * (1 + la.norm(x))
    check("single-block reduction identity", reduction_ok)

    def agreement_ok():
        b = np.array([0.0, 0.0, 1.0, 1.0])
        B = linops.first_difference(4)
        smooth = SmoothTerm(lambda x: 0.5 * ((x - b) @ (x - b)),
                            lambda x: x - b, 1.0)
        problem = CompositeProblem(
            smooth, prox.ZeroTerm(4),
            BlockStack([(B, prox.Scaled(prox.L1Norm(4), 0.5))]))
        cfg1 = SolverConfig("dfb", max_outer=20000, eps=1e-12)
        cfg2 = SolverConfig("pdfb", max_outer=20000, eps=1e-12)
        r1 = solve_dfb(problem, cfg1)
        r2 = solve_pdfb(problem, cfg2)
        from .solvers import objective
        o1, o2 = objective(problem, r1.x_final), objective(problem,
                                                           r2.x_final)
        return abs(o1 - o2) <= 1e-6 * (1 + abs(o1))
    check("cross-algorithm agreement (TV denoise)", agreement_ok)

    return EXIT_OK if all(checks) else EXIT_SOLVER


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="proxsplit",
        description="Proximal-splitting CT reconstruction experiments")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override scene.seed")
    sub.add_parser("selftest", help="run the fast invariant suite")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "run":
        try:
            return run(args.config, args.out, args.seed)
        except (ConfigError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if args.command == "selftest":
        return selftest()
    parser.print_usage(sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
