import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imexdimsim.converge import convergence_study, least_squares_order
from imexdimsim.integrator import (
    GridMismatch,
    NewtonError,
    NewtonSolver,
    SingularNewtonMatrix,
    SplitProblem,
    StepFailure,
    StepperState,
    finish,
    integrate,
    newton_stage_solve,
    start,
    step,
)
from imexdimsim.problems import stiff_relaxation, test_equation, zero_problem
from imexdimsim.stability import stability_matrix
from imexdimsim.tableau import CATALOG_NAMES, Tableau, catalog


def plain_euler_tableau(lam=0.5):
    # single stage at c = 1, no split abscissae
    return Tableau([1.0], [[0.0]], [[lam]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], 1, 1)


# ---------------------------------------------------------------------------
# one step on the test equation is multiplication by M


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_step_is_stability_matrix_product(name):
    t = catalog(name)
    rng = np.random.default_rng(7)
    h = 0.1
    for _ in range(5):
        l0 = complex(-5 * rng.random(), 5 * rng.standard_normal())
        l1 = complex(-50 * rng.random(), 50 * rng.standard_normal())
        prob = test_equation(l0, l1)
        y = rng.standard_normal((t.r, 1)) + 1j * rng.standard_normal((t.r, 1))
        new = step(t, prob, StepperState(0.0, h, y), tol=1e-15)
        M = stability_matrix(t, h * l0, h * l1)
        assert np.max(np.abs(new.y_ext - M @ y)) <= 1e-13 * max(1.0, np.abs(M @ y).max())


def test_zero_step_keeps_the_state():
    t = catalog("DIMSIM3A")
    y = np.arange(6.0).reshape(3, 2)
    new = step(t, zero_problem(2), StepperState(0.0, 0.0, y))
    assert np.array_equal(new.y_ext, t.V @ y)


def test_negative_step_rejected():
    with pytest.raises(ValueError):
        step(catalog("DIMSIM2A"), zero_problem(1), StepperState(0.0, -0.1, np.ones((2, 1))))


def test_terminal_value_is_matrix_power():
    t = catalog("DIMSIM2A")
    l0, l1, h = -1.0, -10.0, 0.05
    prob = test_equation(l0, l1)
    res = integrate(t, prob, h, starting="exact", store="stages", newton_tol=1e-15)
    y0 = start(t, prob, h, "exact").y_ext
    M = stability_matrix(t, h * l0, h * l1).real
    ext = np.linalg.matrix_power(M, 20) @ y0
    assert np.allclose(res.state.y_ext, ext, atol=1e-12, rtol=0)


def test_second_order_halving_ratio():
    t = catalog("DIMSIM2A")
    prob = test_equation(-1.0, -2.0)
    e = []
    for h in (0.05, 0.025):
        res = integrate(t, prob, h, starting="exact", store="final")
        e.append(abs(res.y_final[0] - np.exp(-3.0)))
    assert 3.5 < e[0] / e[1] < 4.5


# ---------------------------------------------------------------------------
# Newton


def test_newton_linear_converges_in_one_correction():
    solver = NewtonSolver()
    prob = test_equation(0.0, -3.0)
    Y, it, _, trace = solver.solve(prob, 0.0, 0.5, np.array([1.0]), np.array([1.0]), 1e-14)
    assert Y[0] == pytest.approx(1.0 / 2.5, abs=1e-15)
    assert it <= 2 and trace[-1] <= 1e-14


def test_newton_quadratic_root():
    Y = newton_stage_solve(1.0, 1.0, lambda y: -(y**2), lambda y: -2 * y, 1.0, 1.0)
    assert Y[0] == pytest.approx((np.sqrt(5) - 1) / 2, abs=1e-12)
    Y = newton_stage_solve(0.5, 0.2, lambda y: -(y**2), lambda y: -2 * y, 1.0, 1.0)
    assert Y[0] == pytest.approx(0.91608, abs=1e-5)


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_newton_singular_matrix():
    with pytest.raises(SingularNewtonMatrix):
        newton_stage_solve(1.0, 1.0, lambda y: y, lambda y: np.ones(1), 1.0, 0.0)


def test_newton_failure_reports_trace():
    # Jacobian deliberately wrong: the iteration diverges like (-10)^k
    with pytest.raises(NewtonError) as info:
        newton_stage_solve(1.0, 1.0, lambda y: -10 * y, lambda y: -np.ones(1) * 1e-9, 2.0, 2.0, max_iters=3)
    assert len(info.value.trace) == 3


def test_non_finite_g_raises():
    prob = SplitProblem(f=lambda t, y: 0 * y, g=lambda t, y: np.full_like(y, np.nan), y0=[1.0], t_span=(0, 1))
    with pytest.raises(StepFailure, match="non-finite"):
        step(catalog("DIMSIM2L"), prob, StepperState(0.0, 0.5, np.ones((2, 1))))


def test_finite_difference_jacobian_fallback():
    prob = stiff_relaxation(1e-3)
    with_j = integrate(catalog("DIMSIM3L"), prob, 0.05, starting="exact", store="final").y_final
    prob.jac_g = None
    without = integrate(catalog("DIMSIM3L"), prob, 0.05, starting="exact", store="final").y_final
    assert np.allclose(with_j, without, atol=1e-9)


# ---------------------------------------------------------------------------
# starting and finishing


def test_start_for_single_stage_tableau():
    # f only: y^[0] = y0 + h y'(t0)
    t = plain_euler_tableau()
    prob = test_equation(-2.0, 0.0)
    st0 = start(t, prob, 0.1, "exact")
    assert st0.y_ext[0, 0] == pytest.approx(1.0 + 0.1 * -2.0, abs=1e-15)


@pytest.mark.parametrize("name,lam", [("DIMSIM1A", 0.5), ("DIMSIM1L", 1.0)])
def test_start_for_composition_methods(name, lam):
    # forward Euler then the implicit stage: y^[0] = y0 + h (1 - lam) g(y0)
    prob = test_equation(-2.0, -3.0)
    st0 = start(catalog(name), prob, 0.1, "exact")
    assert st0.y_ext[0, 0] == pytest.approx(1.0 + 0.1 * (1 - lam) * -3.0, abs=1e-15)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_start_on_zero_problem_is_q0_times_y0(name):
    t = catalog(name)
    prob = zero_problem(3)
    st0 = start(t, prob, 0.1, "exact")
    u = np.linalg.solve(t.U, np.ones(t.s)) if t.s > 1 else np.ones(1) / t.U[0, 0]
    assert np.allclose(st0.y_ext, np.outer(u, prob.y0), atol=1e-14)


def test_bootstrap_start_matches_exact_start():
    t = catalog("DIMSIM3L")
    prob = stiff_relaxation(1.0)
    a = start(t, prob, 0.05, "exact").y_ext
    b = start(t, prob, 0.05, "bootstrap").y_ext
    assert np.allclose(a, b, atol=1e-9)


def test_finish_needs_a_step():
    with pytest.raises(ValueError):
        finish(StepperState(0.0, 0.1, np.ones((2, 1))))


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        integrate(catalog("DIMSIM2A"), zero_problem(), 0.3)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_zero_problem_is_preserved(name):
    res = integrate(catalog(name), zero_problem(4), 0.125, starting="exact")
    assert np.allclose(res.y, zero_problem(4).y0, atol=1e-14)


def test_counters_and_time_grid():
    t = catalog("DIMSIM3L")
    res = integrate(t, stiff_relaxation(1e-4), 0.1, starting="exact")
    c = res.counters()
    assert c["steps"] == 10 and c["f_evals"] == 30
    assert c["g_evals"] >= c["newton_iters"] >= 30
    assert c["factorizations"] >= 1
    assert np.array_equal(res.t, np.arange(11) * 0.1)
    assert res.y.shape == (11, 2)


# ---------------------------------------------------------------------------
# accuracy


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_stage_values_have_stage_order(name):
    # every stage Y_i approximates y(t_n + c_i h) with global error O(h^q)
    t = catalog(name)
    prob = stiff_relaxation(1.0)
    errs = []
    for h in (0.025, 0.0125):
        res = integrate(t, prob, h, starting="exact", store="stages")
        Y = res.stages[-1]
        tn = prob.t_span[1] - h
        ex = np.array([prob.reference(tn + ci * h) for ci in t.c])
        errs.append(np.max(np.abs(Y - ex)))
    assert np.log2(errs[0] / errs[1]) > t.q - 0.3


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_order_on_nonstiff_relaxation(name):
    t = catalog(name)
    hs = [2.0**-k for k in range(5, 10)]
    rep = convergence_study(t, stiff_relaxation(1.0), hs, starting="exact")
    assert abs(rep.order - t.p) <= 0.2


@pytest.mark.parametrize("name", ["DIMSIM1L", "DIMSIM2A", "DIMSIM2L", "DIMSIM3A", "DIMSIM3L"])
def test_order_in_the_stiff_regime(name):
    t = catalog(name)
    hs = [2.0**-k for k in range(4, 10)]
    rep = convergence_study(t, stiff_relaxation(1e-6), hs, starting="exact")
    assert all(r.failure is None for r in rep.rows)
    assert abs(rep.order - t.p) <= 0.2


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-3.0, -0.5))
def test_least_squares_order_recovers_power_law(p, logc):
    hs = np.array([0.1, 0.05, 0.025, 0.0125])
    errs = np.exp(logc) * hs**p
    assert least_squares_order(hs, errs) == pytest.approx(p, abs=1e-10)
