"""Product-space identities, demonstrated numerically.

Two facts about stacks of penalty blocks h_i(B_i x):

1.  With a single block and one inner iteration, the dual forward-backward
    solver is exactly the classic primal-dual fixed-point iteration, and
    the primal-dual forward-backward solver is exactly the Condat-Vu
    iteration after a change of variables.  Both are checked per iterate.

2.  Running the weighted solver with equal weights w and dual step lam is
    identical to running the unweighted solver with step w * lam.

Run:  python3 demos/product_space_equivalences.py
"""

import numpy as np

from proxsplit import (BlockStack, CompositeProblem, L1Norm, Scaled,
                       SmoothTerm, SolverConfig, ZeroTerm, dense,
                       first_difference, prox_conjugate, solve_dfb)
from proxsplit.rng import Stream


def make_problem(b, blocks, weights=None):
    smooth = SmoothTerm(lambda x: 0.5 * float((x - b) @ (x - b)),
                        lambda x: x - b, 1.0)
    return CompositeProblem(smooth, ZeroTerm(b.size),
                            BlockStack(blocks, weights=weights))


def single_block_reduction():
    b = np.array([3.0, -1.0, 2.0, 0.5])
    B = first_difference(4)
    h = L1Norm(4)
    problem = make_problem(b, [(B, h)])
    S = problem.stack.norm_sq_bound()
    gamma, lam = 1.5, 0.5 / S

    rep = solve_dfb(problem, SolverConfig("dfb", gamma=gamma, lam=lam,
                                          max_outer=10, eps=1e-300),
                    metric_fn=lambda x: x.copy())

    # the classic fixed-point iteration, written out by hand
    x, y = np.zeros(4), np.zeros(4)
    worst = 0.0
    for k in range(10):
        u = x - gamma * (x - b)
        v = u - gamma * B.adjoint_apply(y)
        y = prox_conjugate(h, y + (lam / gamma) * B.apply(v), lam / gamma)
        x = u - gamma * B.adjoint_apply(y)
        worst = max(worst, float(np.linalg.norm(rep.metric_trace[k + 1] - x)))
    print(f"single-block reduction: max per-iterate gap = {worst:.2e}")


def weight_rescaling():
    stream = Stream(11)
    b = stream.gaussians(5)
    blocks = [(first_difference(5), L1Norm(5)),
              (dense(stream.gaussians(15).reshape(3, 5)),
               Scaled(L1Norm(3), 0.4))]
    weighted = make_problem(b, blocks, weights=[0.5, 0.5])
    unweighted = make_problem(b, blocks)
    lam = 0.5 / weighted.stack.norm_sq_bound()

    xs_w = solve_dfb(weighted, SolverConfig(
        "dfb", gamma=1.5, lam=lam, max_outer=10, eps=1e-300),
        metric_fn=lambda x: x.copy()).metric_trace
    xs_u = solve_dfb(unweighted, SolverConfig(
        "dfb", gamma=1.5, lam=0.5 * lam, max_outer=10, eps=1e-300),
        metric_fn=lambda x: x.copy()).metric_trace
    worst = max(float(np.linalg.norm(xw - xu))
                for xw, xu in zip(xs_w, xs_u))
    print(f"equal-weight rescaling: max per-iterate gap = {worst:.2e}")


if __name__ == "__main__":
    single_block_reduction()
    weight_rescaling()
