import math

import numpy as np
import pytest

from conecert.conespace import (GridFunction, RegionSpec, in_cone_p,
                                min_window, sup_norm)
from conecert.errors import ConfigError
from conecert.expr import parse_expr
from conecert.hypotheses import BoxIneq, grid_oracle
from conecert.interval import Interval
from conecert.kernels import (DirichletNeumann, ReactionConvectionDiffusion,
                              kernel_row_integral, make_rule)
from conecert.solver import (ProblemSpec, SolverParams, apply_T, multi_start,
                             residual, solve_from)

RULE = make_rule(129)


def dirichlet_problem(f1_src, f2_src, region=None, mode="nine"):
    region = region or RegionSpec(d=(0.5, 0.5), a=(1.0, 1.0), c=(5.0, 5.0),
                                  b=(2.0, 2.0))
    return ProblemSpec(DirichletNeumann(), DirichletNeumann(),
                       parse_expr(f1_src), parse_expr(f2_src), region, mode)


def const_fn(level, rule=RULE):
    return GridFunction(rule, np.full(rule.n, float(level)))


# ---------------------------------------------------------------------------
# apply_T / residual

def test_apply_T_constant_nonlinearity_matches_closed_form():
    problem = dirichlet_problem("1", "1")
    u = const_fn(0.0)
    t1, t2 = apply_T(problem, u, u)
    expected = RULE.nodes - RULE.nodes**2 / 2.0
    assert float(np.max(np.abs(t1.values - expected))) <= 1e-4
    assert float(t1.values[-1]) == pytest.approx(0.5, abs=1e-12)


def test_apply_T_zero_nonlinearity():
    problem = dirichlet_problem("0", "0")
    u = const_fn(1.0)
    t1, t2 = apply_T(problem, u, u)
    assert np.all(t1.values == 0.0)
    assert np.all(t2.values == 0.0)


def test_apply_T_rcd_constant_matches_row_integral():
    kappa = 2.0
    beta = 1.0
    region = RegionSpec(d=(0.5, 0.5), a=(1.0, 1.0), c=(5.0, 5.0),
                        window=(0.0, 0.0))
    problem = ProblemSpec(ReactionConvectionDiffusion(beta),
                          ReactionConvectionDiffusion(beta),
                          parse_expr(f"{kappa}"), parse_expr(f"{kappa}"),
                          region, "thm53")
    u = const_fn(0.0)
    t1, _ = apply_T(problem, u, u)
    expected0 = kappa * beta * (1.0 - math.exp(-1.0 / beta))
    assert float(t1.values[0]) == pytest.approx(expected0, abs=1e-4)


def test_apply_T_rejects_mismatched_rules():
    problem = dirichlet_problem("1", "1")
    with pytest.raises(ValueError):
        apply_T(problem, const_fn(0.0), const_fn(0.0, make_rule(65)))


def test_apply_T_eval_error_names_grid_node():
    from conecert.expr import EvalError
    problem = dirichlet_problem("1/(x1 - 2)", "1")
    values = np.ones(RULE.n)
    values[7] = 2.0  # the only node where the denominator vanishes
    u = GridFunction(RULE, values)
    with pytest.raises(EvalError) as err:
        apply_T(problem, u, const_fn(1.0))
    assert "grid node 7" in err.value.message


def test_residual_zero_function_with_unit_forcing():
    problem = dirichlet_problem("1", "0")
    u = const_fn(0.0)
    assert residual(problem, u, u) == pytest.approx(0.5, abs=1e-12)


def test_residual_at_discrete_fixed_point_is_roundoff():
    problem = dirichlet_problem("1", "1")
    u = const_fn(0.0)
    t1, t2 = apply_T(problem, u, u)
    assert residual(problem, t1, t2) <= 1e-14  # T is constant in u here


def test_residual_grows_linearly_under_perturbation(nine_problem):
    params = SolverParams()
    sols = multi_start(nine_problem, params, seed_list=["S-S"])
    assert len(sols) == 1
    sol = sols[0]
    eps = 1e-4
    u1 = GridFunction(RULE, sol.u1.values + eps)
    u2 = GridFunction(RULE, sol.u2.values + eps)
    res = residual(nine_problem, u1, u2)
    # the Dirichlet kernel vanishes at t=0, so the shift survives exactly there
    assert eps * 0.99 <= res <= 30 * eps


# ---------------------------------------------------------------------------
# solve_from / multi_start

def test_solve_from_small_region_solution(nine_problem):
    seed = GridFunction(RULE, 0.2 * np.minimum(2 * RULE.nodes, 1.0))
    sol = solve_from(nine_problem, seed, seed, SolverParams(), seed_id="s")
    assert sol is not None
    assert sol.residual <= 1e-8
    assert str(sol.region) == "S-S"
    assert sup_norm(sol.u1) < 0.5


def test_solve_rejects_negative_seeds(nine_problem):
    bad = GridFunction(RULE, -np.ones(RULE.n))
    with pytest.raises(ValueError):
        solve_from(nine_problem, bad, bad, SolverParams())


def test_zero_nonlinearity_single_trivial_solution():
    # T is identically zero, so every seed collapses onto u = 0 (up to the
    # solver tolerance) and dedupe keeps a single representative
    problem = dirichlet_problem("0", "0")
    sols = multi_start(problem, SolverParams())
    assert len(sols) == 1
    assert sup_norm(sols[0].u1) <= 1e-8
    assert sup_norm(sols[0].u2) <= 1e-8
    assert sols[0].nontrivial == (False, False)
    assert sols[0].residual <= 1e-8


def test_multi_start_symmetric_example(nine_problem):
    sols = multi_start(nine_problem, SolverParams())
    assert len(sols) >= 3
    labels = {str(s.region) for s in sols}
    assert len(labels) >= 3
    for sol in sols:
        assert sol.residual <= 1e-8
        assert sup_norm(sol.u1) > 1e-3 and sup_norm(sol.u2) > 1e-3
        assert sol.nontrivial == (True, True)


def test_multi_start_dedupe_soundness(nine_problem):
    params = SolverParams()
    sols = multi_start(nine_problem, params)
    delta = 1e-3 * 5.0
    for i, a in enumerate(sols):
        for b in sols[i + 1:]:
            dist1 = float(np.max(np.abs(a.u1.values - b.u1.values)))
            dist2 = float(np.max(np.abs(a.u2.values - b.u2.values)))
            assert max(dist1, dist2) > delta


def test_multi_start_seed_list_filter(nine_problem):
    sols = multi_start(nine_problem, SolverParams(), seed_list=["S-S", "B-B"])
    assert {s.seed_id for s in sols} <= {"S-S", "B-B"}
    with pytest.raises(ConfigError):
        multi_start(nine_problem, SolverParams(), seed_list=["X-Y"])


def test_multi_start_requires_odd_grid(nine_problem):
    with pytest.raises(ConfigError):
        multi_start(nine_problem, SolverParams(grid_n=128))


def test_classification_stable_under_refinement(nine_problem):
    coarse = multi_start(nine_problem, SolverParams(grid_n=129))
    fine_rule = make_rule(257)
    for sol in coarse:
        seed1 = GridFunction(fine_rule,
                             np.interp(fine_rule.nodes, RULE.nodes, sol.u1.values))
        seed2 = GridFunction(fine_rule,
                             np.interp(fine_rule.nodes, RULE.nodes, sol.u2.values))
        fine = solve_from(nine_problem, seed1, seed2, SolverParams(grid_n=257),
                          seed_id=sol.seed_id)
        assert fine is not None
        assert str(fine.region) == str(sol.region)


# ---------------------------------------------------------------------------
# cone invariance and kernel bound

NONNEG_POOL = [
    "4.5 + 5*phi(x1)*psi(x2) - 4*capphi(x1)",
    "0.5 + 5*phi(x1)*psi(x2)",
    "exp(x2^2/32) + 0.1*cos(pi*x1)",
    "1 + x1*x2/25",
]


def test_cone_invariance_on_random_nonnegative_inputs():
    rng = np.random.default_rng(2718)
    trees = [parse_expr(src) for src in NONNEG_POOL]
    failures = 0
    for trial in range(100):
        f = trees[trial % len(trees)]
        problem = ProblemSpec(DirichletNeumann(), DirichletNeumann(), f, f,
                              RegionSpec(d=(0.5, 0.5), a=(1, 1), c=(5, 5)),
                              "nine")
        u1 = GridFunction(RULE, rng.uniform(0.0, 5.0, RULE.n))
        u2 = GridFunction(RULE, rng.uniform(0.0, 5.0, RULE.n))
        t1, t2 = apply_T(problem, u1, u2)
        if float(np.min(t1.values)) < 0 or float(np.min(t2.values)) < 0:
            failures += 1
            continue
        slack = min_window(t2, 0.5) - 0.5 * sup_norm(t2)
        if slack < -1e-10 or not in_cone_p(t2):
            failures += 1
    assert failures == 0


def test_operator_bounded_by_kernel_row_integral():
    rng = np.random.default_rng(11)
    for src in NONNEG_POOL:
        f = parse_expr(src)
        problem = ProblemSpec(DirichletNeumann(), DirichletNeumann(), f, f,
                              RegionSpec(d=(0.5, 0.5), a=(1, 1), c=(5, 5)),
                              "nine")
        q = BoxIneq(f, (Interval(0, 5), Interval(0, 5)), "<=", 0.0, "bound")
        f_sup = grid_oracle(q, 101).sup
        row = kernel_row_integral(DirichletNeumann(), 1.0)
        for _ in range(10):
            u1 = GridFunction(RULE, rng.uniform(0.0, 5.0, RULE.n))
            u2 = GridFunction(RULE, rng.uniform(0.0, 5.0, RULE.n))
            t1, t2 = apply_T(problem, u1, u2)
            assert sup_norm(t1) <= f_sup * row * (1 + 1e-12)
            assert sup_norm(t2) <= f_sup * row * (1 + 1e-12)


def test_hybrid_mode_multi_start_runs(hybrid_problem):
    sols = multi_start(hybrid_problem, SolverParams())
    assert len(sols) >= 1
    for sol in sols:
        assert sol.residual <= 1e-8


def test_problem_spec_mode_kernel_consistency():
    region = RegionSpec(d=(0.5, 0.5), a=(1, 1), c=(5, 5))
    with pytest.raises(ConfigError):
        ProblemSpec(ReactionConvectionDiffusion(1.0),
                    ReactionConvectionDiffusion(1.0),
                    parse_expr("1"), parse_expr("1"), region, "nine")
    with pytest.raises(ConfigError):
        ProblemSpec(DirichletNeumann(), DirichletNeumann(),
                    parse_expr("1"), parse_expr("1"), region, "thm53")
    with pytest.raises(ConfigError):
        ProblemSpec(DirichletNeumann(), DirichletNeumann(),
                    parse_expr("1"), parse_expr("1"), region, "hybrid")
