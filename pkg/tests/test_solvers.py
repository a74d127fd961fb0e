import numpy as np
import pytest

from proxsplit import linops, prox
from proxsplit.errors import DimensionError, DivergenceError, ParameterError
from proxsplit.product import BlockStack
from proxsplit.solvers import (CompositeProblem, PiccsProblem, SmoothTerm,
                               SolverConfig, objective, quadratic_data_term,
                               solve_admm, solve_dfb, solve_pdfb,
                               validate_params)

from oracles import problem_oracle


def least_squares_smooth(b):
    b = np.asarray(b, dtype=float)
    return SmoothTerm(lambda x: 0.5 * float((x - b) @ (x - b)),
                      lambda x: x - b, 1.0)


def tv_denoise_problem(b, weight=0.5, n=None):
    """min 0.5||x - b||^2 + weight ||Bx||_1 with B the forward difference."""
    b = np.asarray(b, dtype=float)
    n = b.size if n is None else n
    B = linops.first_difference(n)
    return CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(n),
        BlockStack([(B, prox.Scaled(prox.L1Norm(n), weight))]))


FOUR_PIXEL_B = np.array([0.0, 0.0, 1.0, 1.0])


def four_pixel_objective(x):
    x = np.asarray(x, dtype=float)
    d = np.diff(x)
    return 0.5 * float((x - FOUR_PIXEL_B) @ (x - FOUR_PIXEL_B)) \
        + 0.5 * float(np.abs(d).sum())


# ------------------------------------------------------------- SmoothTerm


def test_quadratic_data_term_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    A = linops.dense(rng.standard_normal((6, 4)))
    b = rng.standard_normal(6)
    f = quadratic_data_term(A, b)
    x = rng.standard_normal(4)
    g = f.gradient(x)
    h = 1e-6
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fd = (f.value(x + e) - f.value(x - e)) / (2 * h)
        assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-7)


def test_quadratic_data_term_lipschitz_bound():
    rng = np.random.default_rng(6)
    A = linops.dense(rng.standard_normal((5, 5)))
    f = quadratic_data_term(A, rng.standard_normal(5))
    for _ in range(50):
        x, y = rng.standard_normal(5), rng.standard_normal(5)
        lhs = np.linalg.norm(f.gradient(x) - f.gradient(y))
        rhs = f.lipschitz * np.linalg.norm(x - y)
        assert lhs <= rhs + 1e-9 * rhs


def test_quadratic_data_term_rejects_bad_rhs():
    A = linops.identity(3)
    with pytest.raises(DimensionError):
        quadratic_data_term(A, np.zeros(4))


# --------------------------------------------------------- validate_params


def test_validate_accepts_reference_settings():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    L = problem.smooth.lipschitz
    S = problem.stack.norm_sq_bound()
    cfg = validate_params(problem, SolverConfig(
        "dfb", gamma=1.9 / L, lam=0.9 / S))
    assert cfg.gamma == 1.9 / L and cfg.lam == 0.9 / S
    validate_params(problem, SolverConfig("pdfb", gamma=1.9 / L, tau=1.0))


def test_validate_fills_defaults():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    cfg = validate_params(problem, SolverConfig("dfb"))
    assert cfg.gamma == pytest.approx(1.9 / problem.smooth.lipschitz)
    assert cfg.lam == pytest.approx(0.9 / problem.stack.norm_sq_bound())
    cfg = validate_params(problem, SolverConfig("pdfb"))
    assert cfg.tau == 1.0
    assert cfg.sigma * cfg.tau < 1.0 / problem.stack.norm_sq_bound()


def test_validate_rejects_boundary_gamma():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig(
            "dfb", gamma=2.0 / problem.smooth.lipschitz))


def test_validate_rejects_boundary_lambda_strict_weak():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    S = problem.stack.norm_sq_bound()
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("dfb", lam=1.0 / S))


def test_validate_relaxed_mode_widens_lambda():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    S = problem.stack.norm_sq_bound()
    cfg = SolverConfig("dfb", lam=1.5 / S, convergence_mode="relaxed-finite")
    assert validate_params(problem, cfg).lam == 1.5 / S
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("dfb", lam=1.5 / S))
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig(
            "dfb", lam=2.0 / S, convergence_mode="relaxed-finite"))


def test_validate_rejects_boundary_sigma_tau_product():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    S = problem.stack.norm_sq_bound()
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("pdfb", sigma=1.0 / S, tau=1.0))


def test_validate_rejects_unknown_algorithm_and_mode():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("newton"))
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("dfb", convergence_mode="fast"))


def test_validate_admm_gamma_bound():
    n = 4
    A = linops.identity(n)
    D = linops.first_difference(n)
    problem = PiccsProblem(A=A, b=np.zeros(n), D1=D, D2=D,
                           x_p=np.zeros(n), phi1=prox.L1Norm(n),
                           phi2=prox.L1Norm(n), lam1=0.4, lam2=0.5)
    bound = (linops.safe_norm_sq(A) + 2 * linops.safe_norm_sq(D))
    validate_params(problem, SolverConfig("admm", gamma=1.9 / bound))
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("admm", gamma=2.0 / bound))
    with pytest.raises(ParameterError):
        validate_params(problem, SolverConfig("admm", rho1=-1.0))


# --------------------------------------------------------------- objective


def test_objective_zero_at_clean_point():
    problem = tv_denoise_problem(np.zeros(3))
    assert objective(problem, np.zeros(3)) == 0.0


def test_objective_infinite_outside_indicator():
    b = np.array([1.0, 1.0])
    problem = CompositeProblem(
        least_squares_smooth(b), prox.BoxIndicator(2, 0.0, np.inf),
        BlockStack([(linops.identity(2), prox.ZeroTerm(2))]))
    assert objective(problem, [-0.1, 1.0]) == np.inf


def test_objective_matches_termwise_sum():
    rng = np.random.default_rng(9)
    problem = tv_denoise_problem(rng.standard_normal(5), weight=0.3)
    x = rng.standard_normal(5)
    want = problem.smooth.value(x) + 0.3 * np.abs(np.diff(x)).sum()
    assert objective(problem, x) == pytest.approx(want, rel=1e-12)


def test_objective_dimension_mismatch():
    problem = tv_denoise_problem(np.zeros(3))
    with pytest.raises(DimensionError):
        objective(problem, np.zeros(4))


# ------------------------------------------------------------- solve_dfb


def test_dfb_unconstrained_least_squares_converges_to_b():
    b = np.array([3.0, -1.0, 0.5])
    problem = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(3),
        BlockStack([(linops.identity(3), prox.ZeroTerm(3))]))
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=5000, eps=1e-12))
    assert rep.termination == "tolerance-met"
    assert np.allclose(rep.x_final, b, atol=1e-8)


def test_dfb_scalar_soft_threshold_problem():
    # min 0.5 (x - 3)^2 + |x|  ->  x* = 2
    problem = CompositeProblem(
        least_squares_smooth([3.0]), prox.ZeroTerm(1),
        BlockStack([(linops.identity(1), prox.L1Norm(1))]))
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=20000, eps=1e-12))
    assert abs(rep.x_final[0] - 2.0) <= 1e-6


def test_dfb_four_pixel_tv_denoise_matches_oracle():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=50000, eps=1e-12))
    want = problem_oracle(four_pixel_objective, 4, lo=-0.5, hi=1.5, points=9)
    assert np.allclose(rep.x_final, want, atol=1e-4)


def test_dfb_stops_at_first_tolerance_crossing():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=50000, eps=1e-6))
    res = rep.residual_trace
    assert rep.termination == "tolerance-met"
    assert res[-1] < 1e-6
    assert all(r >= 1e-6 for r in res[:-1])
    assert rep.outer_iters == len(res)


def test_dfb_objective_trace_finite_after_first_iteration():
    b = np.array([1.0, -2.0, 0.5])
    problem = CompositeProblem(
        least_squares_smooth(b), prox.BoxIndicator(3, 0.0, np.inf),
        BlockStack([(linops.first_difference(3), prox.L1Norm(3))]))
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=20, eps=1e-300))
    assert all(np.isfinite(v) for v in rep.objective_trace[1:])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_dfb_divergence_detection():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    smooth = SmoothTerm(problem.smooth.value,
                        lambda x: (x - FOUR_PIXEL_B) * 1e30,
                        problem.smooth.lipschitz)
    bad = CompositeProblem(smooth, problem.simple, problem.stack)
    with pytest.raises(DivergenceError):
        solve_dfb(bad, SolverConfig("dfb", max_outer=100, eps=1e-12))


def test_dfb_relaxed_mode_is_flagged_in_report():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    S = problem.stack.norm_sq_bound()
    rep = solve_dfb(problem, SolverConfig(
        "dfb", lam=1.5 / S, convergence_mode="relaxed-finite",
        max_outer=10, eps=1e-300))
    assert "finite-dimensional" in rep.notes


# ------------------------------------------------------------- solve_pdfb


def test_pdfb_unconstrained_least_squares_converges_to_b():
    b = np.array([3.0, -1.0, 0.5])
    problem = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(3),
        BlockStack([(linops.identity(3), prox.ZeroTerm(3))]))
    rep = solve_pdfb(problem, SolverConfig("pdfb", max_outer=5000, eps=1e-12))
    assert np.allclose(rep.x_final, b, atol=1e-8)


def test_pdfb_scalar_soft_threshold_problem():
    problem = CompositeProblem(
        least_squares_smooth([3.0]), prox.ZeroTerm(1),
        BlockStack([(linops.identity(1), prox.L1Norm(1))]))
    rep = solve_pdfb(problem,
                     SolverConfig("pdfb", max_outer=20000, eps=1e-12))
    assert abs(rep.x_final[0] - 2.0) <= 1e-6


def test_pdfb_four_pixel_agrees_with_dfb_objective():
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    r1 = solve_dfb(problem, SolverConfig("dfb", max_outer=50000, eps=1e-12))
    r2 = solve_pdfb(problem,
                    SolverConfig("pdfb", max_outer=50000, eps=1e-12))
    o1, o2 = objective(problem, r1.x_final), objective(problem, r2.x_final)
    assert abs(o1 - o2) <= 1e-6 * (1 + abs(o1))


# ------------------------------------------------------------- solve_admm


def four_pixel_admm_problem():
    n = 4
    return PiccsProblem(
        A=linops.identity(n), b=FOUR_PIXEL_B,
        D1=linops.zero(n, n), D2=linops.first_difference(n),
        x_p=np.zeros(n), phi1=prox.L1Norm(n), phi2=prox.L1Norm(n),
        lam1=0.0, lam2=0.5, lo=-np.inf, hi=np.inf)


def test_admm_pure_least_squares():
    n = 3
    b = np.array([1.0, -2.0, 0.5])
    problem = PiccsProblem(
        A=linops.identity(n), b=b, D1=linops.zero(n, n),
        D2=linops.zero(n, n), x_p=np.zeros(n), phi1=prox.L1Norm(n),
        phi2=prox.L1Norm(n), lam1=0.3, lam2=0.7, lo=-np.inf, hi=np.inf)
    rep = solve_admm(problem, SolverConfig("admm", max_outer=5000, eps=1e-12))
    assert np.allclose(rep.x_final, b, atol=1e-8)


def test_admm_zero_weights_projected_least_squares():
    n = 3
    b = np.array([1.0, -2.0, 0.5])
    problem = PiccsProblem(
        A=linops.identity(n), b=b, D1=linops.first_difference(n),
        D2=linops.first_difference(n), x_p=np.zeros(n),
        phi1=prox.L1Norm(n), phi2=prox.L1Norm(n),
        lam1=0.0, lam2=0.0, lo=0.0, hi=np.inf)
    rep = solve_admm(problem, SolverConfig("admm", max_outer=5000, eps=1e-12))
    assert np.allclose(rep.x_final, np.clip(b, 0.0, None), atol=1e-6)


def test_admm_four_pixel_matches_oracle_objective():
    problem = four_pixel_admm_problem()
    rep = solve_admm(problem,
                     SolverConfig("admm", max_outer=50000, eps=1e-10))
    want_x = problem_oracle(four_pixel_objective, 4, lo=-0.5, hi=1.5,
                            points=9)
    want = four_pixel_objective(want_x)
    got = problem.objective(rep.x_final)
    assert abs(got - want) <= 1e-6 * (1 + abs(want))


# ------------------------------------------------------ reduction identities


def capture_iterates(solve, problem, cfg, **kw):
    rep = solve(problem, cfg, metric_fn=lambda x: x.copy(), **kw)
    return rep.metric_trace


def test_dfb_single_block_reproduces_fixed_point_scheme():
    # hand-rolled iteration: v = prox_g(x - g*grad - g*B'y);
    # y+ = conj-prox(y + (lam/g) B v); x+ = prox_g(x - g*grad - g*B'y+)
    b = np.array([3.0, -1.0, 2.0, 0.5])
    B = linops.first_difference(4)
    h = prox.L1Norm(4)
    problem = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(4), BlockStack([(B, h)]))
    gamma, lam = 1.5, 0.5 / problem.stack.norm_sq_bound()
    cfg = SolverConfig("dfb", gamma=gamma, lam=lam, max_outer=10, eps=1e-300)
    iterates = capture_iterates(solve_dfb, problem, cfg)

    x, y = np.zeros(4), np.zeros(4)
    for k in range(10):
        u = x - gamma * (x - b)
        v = u - gamma * B.adjoint_apply(y)
        y = prox.prox_conjugate(h, y + (lam / gamma) * B.apply(v),
                                lam / gamma)
        x = u - gamma * B.adjoint_apply(y)
        err = np.linalg.norm(iterates[k + 1] - x)
        assert err <= 1e-12 * (1 + np.linalg.norm(x))


def test_pdfb_single_block_reproduces_primal_dual_scheme():
    # hand-rolled iteration in the rescaled variables:
    #   x+ = prox_{t' g}(x - t' grad - t' B' yb)
    #   yb+ = conj-prox_{s'}(yb + s' B (2x+ - x))
    # with s' = sigma/gamma, t' = tau*gamma/(1+tau), yb = y/gamma
    b = np.array([3.0, -1.0, 2.0, 0.5])
    B = linops.first_difference(4)
    h = prox.L1Norm(4)
    problem = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(4), BlockStack([(B, h)]))
    S = problem.stack.norm_sq_bound()
    gamma, tau = 1.5, 1.0
    sigma = 0.9 / (tau * S)
    cfg = SolverConfig("pdfb", gamma=gamma, sigma=sigma, tau=tau,
                       max_outer=10, eps=1e-300)
    iterates = capture_iterates(solve_pdfb, problem, cfg)

    sp, tp = sigma / gamma, tau * gamma / (1.0 + tau)
    x, yb = np.zeros(4), np.zeros(4)
    for k in range(10):
        x_new = x - tp * (x - b) - tp * B.adjoint_apply(yb)
        yb = prox.prox_conjugate(h, yb + sp * B.apply(2 * x_new - x), sp)
        x = x_new
        err = np.linalg.norm(iterates[k + 1] - x)
        assert err <= 1e-12 * (1 + np.linalg.norm(x))


def test_weighted_unweighted_equivalence():
    # equal weights w = 1/2 with dual step lam match the unweighted run
    # with rescaled step w*lam, primal iterates identical
    rng = np.random.default_rng(51)
    b = rng.standard_normal(5)
    B1 = linops.first_difference(5)
    B2 = linops.dense(rng.standard_normal((3, 5)))
    blocks = [(B1, prox.L1Norm(5)), (B2, prox.Scaled(prox.L1Norm(3), 0.4))]
    weighted = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(5),
        BlockStack(blocks, weights=[0.5, 0.5]))
    unweighted = CompositeProblem(
        least_squares_smooth(b), prox.ZeroTerm(5), BlockStack(blocks))
    Sw = weighted.stack.norm_sq_bound()
    lam = 0.5 / Sw
    gamma = 1.5
    cfg_w = SolverConfig("dfb", gamma=gamma, lam=lam, max_outer=10,
                         eps=1e-300)
    cfg_u = SolverConfig("dfb", gamma=gamma, lam=0.5 * lam, max_outer=10,
                         eps=1e-300)
    xs_w = capture_iterates(solve_dfb, weighted, cfg_w)
    xs_u = capture_iterates(solve_dfb, unweighted, cfg_u)
    for xw, xu in zip(xs_w, xs_u):
        assert np.linalg.norm(xw - xu) <= 1e-12 * (1 + np.linalg.norm(xu))


def test_fixed_point_stays_fixed():
    # x* = (0.25, 0.25, 0.75, 0.75) solves the 4-pixel problem; with the
    # consistent dual y* the iteration stays within 1e-8 for 100 iterations
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    x_star = np.array([0.25, 0.25, 0.75, 0.75])
    y_star = np.array([0.25, 0.5, 0.25, 0.0])
    x0 = x_star + 1e-10
    gamma = 1.0
    lam = 0.5 / problem.stack.norm_sq_bound()
    cfg = SolverConfig("dfb", gamma=gamma, lam=lam, max_outer=100,
                       eps=1e-300)
    xs = capture_iterates(solve_dfb, problem, cfg, x0=x0, y0=[y_star])
    assert all(np.linalg.norm(x - x_star) <= 1e-8 for x in xs)
    cfg_p = SolverConfig("pdfb", gamma=gamma, tau=1.0,
                         sigma=0.5 / problem.stack.norm_sq_bound(),
                         max_outer=100, eps=1e-300)
    xs = capture_iterates(solve_pdfb, problem, cfg_p, x0=x0,
                          y0=[gamma * y_star], xbar0=x0)
    assert all(np.linalg.norm(x - x_star) <= 1e-8 for x in xs)


def test_residual_uses_absolute_change_at_zero():
    # starting from the zero vector the first residual divides by ||x0|| = 0;
    # the absolute change is used instead, so no NaN appears
    problem = tv_denoise_problem(FOUR_PIXEL_B)
    rep = solve_dfb(problem, SolverConfig("dfb", max_outer=5, eps=1e-300))
    assert all(np.isfinite(r) for r in rep.residual_trace)
