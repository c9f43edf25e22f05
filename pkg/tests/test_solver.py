import numpy as np
import pytest

from afba.momentum import (
    chambolle_dossal,
    check_momentum_condition,
    classic_nesterov,
    generalized_nesterov,
    no_momentum,
)
from afba.problems import make_lasso, make_quadratic
from afba.prox import prox_l1
from afba.solver import (
    TRACE_COLUMNS,
    NonFiniteError,
    Problem,
    SolveConfig,
    compute_trace_row,
    fb_operator,
    fixed_point_residual,
    solve,
)

from conftest import central_gradient


def shifted_abs():
    """f = 0.5 (x - 3)^2, g = |x|; minimizer 2."""
    return Problem(
        smooth_value=lambda x: 0.5 * float((x[0] - 3.0) ** 2),
        smooth_grad=lambda x: x - 3.0,
        lipschitz=1.0,
        nonsmooth_value=lambda x: float(abs(x[0])),
        nonsmooth_prox=lambda v, s: prox_l1(v, s),
        dimension=1,
    )


def half_norm(n=2):
    return Problem(
        smooth_value=lambda x: 0.5 * float(x @ x),
        smooth_grad=lambda x: x.copy(),
        lipschitz=1.0,
        nonsmooth_value=lambda x: 0.0,
        nonsmooth_prox=lambda v, s: v,
        dimension=n,
    )


def test_fb_operator_examples():
    np.testing.assert_array_equal(fb_operator(shifted_abs(), 1.0, np.array([0.0])), [2.0])
    np.testing.assert_array_equal(fb_operator(half_norm(), 1.0, np.array([1.0, -2.0])), [0, 0])


def test_fb_operator_rejects_bad_shape_and_step():
    with pytest.raises(ValueError):
        fb_operator(half_norm(), 1.0, np.zeros(3))
    with pytest.raises(ValueError):
        fb_operator(half_norm(), 1.5, np.zeros(2))
    with pytest.raises(ValueError):
        fb_operator(half_norm(), 0.0, np.zeros(2))


def test_solve_shifted_abs_converges():
    x, trace = solve(shifted_abs(), SolveConfig(no_momentum(), max_iters=60, beta=1.0))
    assert abs(x[0] - 2.0) < 1e-8


@pytest.mark.parametrize("sched", [no_momentum(), classic_nesterov(), chambolle_dossal(4.0)],
                         ids=lambda s: s.name)
def test_solve_half_norm_any_schedule(sched):
    cfg = SolveConfig(sched, max_iters=50, x0=np.ones(2), x1=np.ones(2))
    x, _ = solve(half_norm(), cfg)
    np.testing.assert_allclose(x, 0.0, atol=1e-12)


def test_solve_rejects_invalid_step():
    with pytest.raises(ValueError, match="beta"):
        solve(half_norm(), SolveConfig(beta=2.0))


def test_nonfinite_iterate_raises():
    blowup = Problem(
        smooth_value=lambda x: 0.0,
        smooth_grad=lambda x: np.full_like(x, np.inf),
        lipschitz=1.0,
        nonsmooth_value=lambda x: 0.0,
        nonsmooth_prox=lambda v, s: v,
        dimension=2,
    )
    with pytest.raises(NonFiniteError) as info:
        solve(blowup, SolveConfig(max_iters=5))
    assert info.value.k == 1


def test_lasso_gn_beats_fba():
    problem, _, _ = make_lasso(20, 50, 0.1, seed=0)
    x_star, _ = solve(problem, SolveConfig(no_momentum(), max_iters=10**6, trace_every=10**6))
    f_star = problem.objective(x_star)
    cfg = dict(max_iters=5000, trace_every=5000)
    x_fba, _ = solve(problem, SolveConfig(no_momentum(), **cfg))
    x_gn, _ = solve(problem, SolveConfig(generalized_nesterov(1.0, 1 / 2.01, 1.0), **cfg))
    gap_fba = problem.objective(x_fba) - f_star
    gap_gn = problem.objective(x_gn) - f_star
    assert gap_gn * 10 <= gap_fba


def test_trace_row_nofv_example():
    row = compute_trace_row(half_norm(), 3, np.zeros(2), np.zeros(2), np.zeros(2), 1.0,
                            no_momentum(), f_ref=2.0, f0=10.0, fv=4.0)
    assert row["nofv"] == 0.25
    assert row["eta"] == 2.0


def test_trace_row_zero_step():
    x = np.array([0.5, 1.5])
    row = compute_trace_row(half_norm(), 2, x, x, x, 1.0, classic_nesterov())
    assert row["dci"] == 0.0 and row["tau"] == 0.0 and row["scaled_dci"] == 0.0


def test_trace_row_epsilon_matches_definition():
    rng = np.random.default_rng(0)
    xk, xp, y, xr = rng.standard_normal((4, 2))
    s = classic_nesterov()
    row = compute_trace_row(half_norm(), 5, xk, xp, y, 0.5, s, f_ref=0.0, x_ref=xr)
    z = s.t(5) * y + (1 - s.t(5)) * xk
    eta = 0.5 * xk @ xk
    expected = 2 * 0.5 * s.t(4) ** 2 * eta + np.sum((z - xr) ** 2)
    assert row["epsilon"] == pytest.approx(expected, rel=1e-14)


def test_fba_descent_on_lasso():
    problem, _, _ = make_lasso(20, 50, 0.1, seed=3)
    _, trace = solve(problem, SolveConfig(no_momentum(), max_iters=3000))
    fv = trace["fv"]
    assert np.all(np.diff(fv) <= 1e-12 * np.abs(fv[1:]))


def test_fba_fixed_point_residual(lasso_ref):
    problem, x_ref, _, iters = lasso_ref
    assert iters < 10**6
    assert fixed_point_residual(problem, 1.0 / problem.lipschitz, x_ref) < 1e-6


def test_quadratic_converges_and_epsilon_decreases():
    problem, c = make_quadratic(10, seed=0)
    sched = generalized_nesterov(0.75, 0.3, 1.0)
    rep = check_momentum_condition(sched, 2000)
    x, trace = solve(problem, SolveConfig(sched, max_iters=2000), f_ref=0.0, x_ref=c)
    assert np.linalg.norm(x - c) < 1e-8
    eps = trace["epsilon"][rep.K_observed:]
    assert np.all(np.diff(eps) <= 1e-9 * (1 + eps[0]))


def test_trace_sampling_and_csv(tmp_path):
    problem, c = make_quadratic(5, seed=1)
    _, trace = solve(problem, SolveConfig(classic_nesterov(), max_iters=25, trace_every=10),
                     f_ref=0.0)
    assert list(trace["k"]) == [1, 10, 20, 25]
    path = tmp_path / "t.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 5
    # no reference minimizer and no classifier: epsilon and accuracies empty
    assert lines[1].split(",")[-3:] == ["", "", ""]


def test_fixed_point_stop():
    _, trace = solve(shifted_abs(), SolveConfig(no_momentum(), max_iters=100,
                                                fixed_point_tol=1e-12))
    assert trace.stopped_early and trace.iters_run < 100


def test_metrics_columns():
    problem, _ = make_quadratic(4, seed=2)
    _, trace = solve(problem, SolveConfig(max_iters=3), metrics={"test_acc": lambda x: 0.5})
    np.testing.assert_array_equal(trace["test_acc"], [0.5, 0.5, 0.5])


def test_exact_fixed_point_stops_at_first_step():
    _, trace = solve(half_norm(), SolveConfig(max_iters=10))
    assert trace.iters_run == 1 and trace.stopped_early


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_contract_lasso_and_quadratic(seed):
    rng = np.random.default_rng(seed)
    lasso_problem, _, _ = make_lasso(8, 12, 0.1, seed=seed)
    quad, _ = make_quadratic(6, seed=seed)
    for p in (lasso_problem, quad):
        for _ in range(5):
            x = rng.standard_normal(p.dimension)
            fd = central_gradient(p.smooth_value, x)
            g = p.smooth_grad(x)
            assert np.linalg.norm(fd - g) <= 1e-5 * max(np.linalg.norm(g), 1.0)
