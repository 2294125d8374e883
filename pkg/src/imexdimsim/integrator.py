"""Fixed-step IMEX GLM integrator for split systems y' = f(t, y) + g(t, y)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.integrate import solve_ivp

from .tableau import Tableau, q_vectors


ROUNDING_FLOOR = 16 * np.finfo(float).eps


class StepFailure(RuntimeError):
    def __init__(self, message, step_index=None, trace=None):
        super().__init__(message if step_index is None else f"step {step_index}: {message}")
        self.step_index = step_index
        self.trace = trace or []


class NewtonError(StepFailure):
    pass


class SingularNewtonMatrix(NewtonError):
    pass


class GridMismatch(ValueError):
    pass


@dataclass
class SplitProblem:
    """``y' = f(t, y) + g(t, y)`` with ``f`` non-stiff and ``g`` stiff.

    ``f`` and ``g`` receive the stage time explicitly.  Every catalog method
    integrates ``t' = 1`` exactly (stage order >= 1), so this is the same as
    augmenting the state with ``t``.

    ``jac_g(t, y)`` may return a dense array or a scipy sparse matrix; if it
    is omitted a dense forward-difference Jacobian is used.  ``reference`` is
    an exact solution ``t -> y`` when one is known, ``derivatives(t, k)``
    returns ``(ys, fs)`` with ``ys[j] = y^(j)(t)`` for ``j <= k`` and
    ``fs[j] = d^j/dt^j f(t, y(t))`` for ``j < k``.  ``newton_max_iters`` is
    the stage-solver budget ``integrate`` uses unless told otherwise.
    """

    f: Callable
    g: Callable
    y0: np.ndarray
    t_span: tuple[float, float]
    jac_g: Callable | None = None
    reference: Callable | None = None
    derivatives: Callable | None = None
    check_state: Callable | None = None
    newton_max_iters: int = 10
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.y0))
        self.y0 = y0.astype(complex if np.iscomplexobj(y0) else float)

    @property
    def m(self) -> int:
        return self.y0.size

    def jacobian(self, t, y):
        if self.jac_g is not None:
            return self.jac_g(t, y)
        return fd_jacobian(lambda v: self.g(t, v), y)


def fd_jacobian(fun, y, eps=None):
    y = np.asarray(y)
    f0 = fun(y)
    J = np.empty((f0.size, y.size), dtype=np.result_type(f0, y))
    for j in range(y.size):
        dj = (eps or math.sqrt(np.finfo(float).eps)) * max(1.0, abs(y[j]))
        yp = y.copy()
        yp[j] += dj
        J[:, j] = (fun(yp) - f0) / dj
    return J


@dataclass
class StepperState:
    t: float
    h: float
    y_ext: np.ndarray  # (r, m)
    stage_values: np.ndarray | None = None  # (s, m), from the last step
    stage_g: np.ndarray | None = None  # (s, m), g at the stages of the last step
    n_steps: int = 0
    f_evals: int = 0
    g_evals: int = 0
    newton_iters: int = 0
    jac_evals: int = 0
    factorizations: int = 0

    def counters(self) -> dict:
        return {
            "steps": self.n_steps,
            "f_evals": self.f_evals,
            "g_evals": self.g_evals,
            "newton_iters": self.newton_iters,
            "jac_evals": self.jac_evals,
            "factorizations": self.factorizations,
        }


# ---------------------------------------------------------------------------
# stage solver


class _Factorized:
    def __init__(self, M, permc_spec="NATURAL"):
        if scipy.sparse.issparse(M):
            try:
                self._lu = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(M), permc_spec=permc_spec)
            except RuntimeError as exc:
                raise SingularNewtonMatrix(f"Newton matrix is singular: {exc}") from exc
            self.solve = self._lu.solve
        else:
            M = np.atleast_2d(np.asarray(M))
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
            d = np.abs(np.diag(lu))
            if d.size and (d.min() == 0 or d.min() <= 1e-14 * d.max()):
                raise SingularNewtonMatrix("Newton matrix is singular")
            self.solve = lambda b: scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


class NewtonSolver:
    """Modified Newton for ``Y - h lam g(t, Y) = rhs``.

    The iteration matrix ``I - h lam J`` is kept across stages and steps and
    refreshed only when the residual ratio of two successive iterations
    exceeds ``stall_ratio``, when that ratio is too slow to reach ``tol``
    within the remaining iterations, or when ``h`` changes.
    """

    def __init__(self, tol=None, max_iters=10, stall_ratio=0.5, permc_spec="NATURAL"):
        # natural column order: the benchmark Jacobians are diagonal blocks
        # that factor without fill, and the solve is several times faster
        self.permc_spec = permc_spec
        self.tol = tol
        self.max_iters = max_iters
        self.stall_ratio = stall_ratio
        self._fac = None
        self._hl = None
        self.jac_evals = 0
        self.factorizations = 0

    def _refresh(self, prob, t, Y, hl):
        J = prob.jacobian(t, Y)
        self.jac_evals += 1
        if scipy.sparse.issparse(J):
            M = scipy.sparse.identity(J.shape[0], format="csc") - hl * J
        else:
            M = np.eye(np.shape(J)[0]) - hl * np.asarray(J)
        self._fac = _Factorized(M, self.permc_spec)
        self._hl = hl
        self.factorizations += 1

    def solve(self, prob: SplitProblem, t, hl, rhs, guess, tol):
        """Return ``(Y, iters, g_evals, trace)``."""
        Y = np.array(guess)
        # below a few ulp of the state the residual is rounding noise
        tol = max(tol, ROUNDING_FLOOR * max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 1.0))
        if self._fac is None or self._hl != hl:
            self._refresh(prob, t, Y, hl)
        fresh = True
        trace = []
        prev = None
        g_evals = 0
        for it in range(1, self.max_iters + 1):
            G = prob.g(t, Y)
            g_evals += 1
            if not np.all(np.isfinite(G)):
                raise StepFailure("non-finite value of g in stage solve", trace=trace)
            F = Y - hl * G - rhs
            res = float(np.max(np.abs(F))) if F.size else 0.0
            trace.append(res)
            if res <= tol:
                # the residual is already paid for, so apply its correction too
                if res > 0:
                    Y = Y + self._fac.solve(-F)
                return Y, it, g_evals, trace
            if prev is not None and not fresh:
                rate = res / prev
                # stalled, or too slow to reach tol in the iterations left
                if rate > self.stall_ratio or res * rate ** (self.max_iters - it) > tol:
                    self._refresh(prob, t, Y, hl)
                    fresh = True
            else:
                fresh = False
            delta = self._fac.solve(-F)
            Y = Y + delta
            prev = res
            if float(np.max(np.abs(delta))) <= tol * max(1.0, float(np.max(np.abs(Y)))):
                # rounding in stiff g keeps the residual above an absolute tol
                return Y, it, g_evals, trace
        raise NewtonError(f"Newton did not converge in {self.max_iters} iterations", trace=trace)


def newton_stage_solve(lam, h, g, jac_g, rhs, guess, tol=1e-12, max_iters=10, t=0.0):
    """Solve ``Y - h lam g(Y) = rhs`` for ``Y``; ``g`` and ``jac_g`` take ``Y`` only."""
    prob = SplitProblem(
        f=lambda t_, y: 0 * y,
        g=lambda t_, y: np.atleast_1d(g(y)),
        jac_g=(lambda t_, y: np.atleast_2d(jac_g(y))) if jac_g is not None else None,
        y0=np.atleast_1d(guess),
        t_span=(0.0, 1.0),
    )
    solver = NewtonSolver(max_iters=max_iters)
    Y, _, _, _ = solver.solve(prob, t, h * lam, np.atleast_1d(np.asarray(rhs, float)), np.atleast_1d(guess), tol)
    return Y


# ---------------------------------------------------------------------------
# one step


def default_newton_tol(t: Tableau, h: float) -> float:
    return min(1e-12, h ** (t.p + 1)) if h > 0 else 1e-12


def _stage_g(prob, ti, Y, rhs, hl):
    # g(Y) from the implicit relation avoids amplifying rounding by the stiffness
    if hl > 0:
        return (Y - rhs) / hl
    return prob.g(ti, Y)


def step(t: Tableau, prob: SplitProblem, state: StepperState, newton: NewtonSolver | None = None, tol=None):
    """Advance ``state`` by one step of size ``state.h``; returns a new state."""
    newton = newton or NewtonSolver()
    h = state.h
    if h < 0:
        raise ValueError("step size must be non-negative")
    tol = default_newton_tol(t, h) if tol is None else tol
    hl = h * t.lam
    y_ext = state.y_ext
    m = y_ext.shape[1]
    dtype = np.result_type(y_ext, prob.y0, float)
    fe = ge = iters = 0
    jac0, fac0 = newton.jac_evals, newton.factorizations

    prev_g = state.stage_g

    def solve_stage(ti, rhs, i=0):
        nonlocal ge, iters
        if hl == 0:
            return rhs.copy()
        # predictor: this stage's g from the previous step; in the stiff limit
        # rhs alone is O(h lam |g|) away from the root
        guess = rhs + hl * prev_g[i] if prev_g is not None else rhs
        try:
            Y, it, ng, _ = newton.solve(prob, ti, hl, rhs, guess, tol)
        except StepFailure as exc:
            raise type(exc)(str(exc), state.n_steps, exc.trace) from None
        ge += ng
        iters += it
        return Y

    def eval_f(ti, Y):
        nonlocal fe
        fe += 1
        out = np.asarray(prob.f(ti, Y))
        if not np.all(np.isfinite(out)):
            raise StepFailure("non-finite value of f", state.n_steps)
        return out

    if t.split_abscissae:
        # forward Euler on f at t_n, then the one-stage implicit method on g
        te, ti = state.t + t.explicit_c[0] * h, state.t + t.c[0] * h
        Ye = t.U[0, 0] * y_ext[0]
        Fe = eval_f(te, Ye)
        yhat = t.V[0, 0] * y_ext[0] + h * t.B[0, 0] * Fe
        rhs = t.U[0, 0] * yhat
        Y = solve_stage(ti, rhs)
        G = _stage_g(prob, ti, Y, rhs, hl)
        if hl == 0:
            ge += 1
        y_new = (t.V[0, 0] * yhat + h * t.Bstar[0, 0] * G)[None, :]
        stages = Y[None, :]
        G = G[None, :]
    else:
        s = t.s
        stages = np.empty((s, m), dtype=dtype)
        F = np.empty((s, m), dtype=dtype)
        G = np.empty((s, m), dtype=dtype)
        for i in range(s):
            ti = state.t + t.c[i] * h
            rhs = t.U[i] @ y_ext
            if i:
                rhs = rhs + h * (t.A[i, :i] @ F[:i] + t.Astar[i, :i] @ G[:i])
            Y = solve_stage(ti, rhs, i)
            G[i] = _stage_g(prob, ti, Y, rhs, hl)
            if hl == 0:
                ge += 1
            F[i] = eval_f(ti, Y)
            stages[i] = Y
        y_new = t.V @ y_ext + h * (t.B @ F + t.Bstar @ G)
    if not np.all(np.isfinite(y_new)):
        raise StepFailure("non-finite external stages", state.n_steps)
    if prob.check_state is not None:
        msg = prob.check_state(stages[-1])
        if msg:
            raise StepFailure(msg, state.n_steps)
    return StepperState(
        t=state.t + h,
        h=h,
        y_ext=y_new,
        stage_values=stages,
        stage_g=G,
        n_steps=state.n_steps + 1,
        f_evals=state.f_evals + fe,
        g_evals=state.g_evals + ge,
        newton_iters=state.newton_iters + iters,
        jac_evals=state.jac_evals + newton.jac_evals - jac0,
        factorizations=state.factorizations + newton.factorizations - fac0,
    )


# ---------------------------------------------------------------------------
# starting and finishing


STARTING_MODES = ("exact", "bootstrap")


def _fit_scaled_derivatives(ts_theta, values, kmax):
    """Given samples at ``t0 + theta h``, return ``k! a_k``, i.e. ``h^k d^k/dt^k``."""
    deg = len(ts_theta) - 1
    V = np.vander(ts_theta, deg + 1, increasing=True)
    coef = np.linalg.solve(V, values)
    return [math.factorial(k) * coef[k] for k in range(kmax + 1)]


def scaled_derivatives(prob: SplitProblem, h: float, p: int, mode: str = "bootstrap", rtol=1e-13, atol=1e-15):
    """``D[k] = h^k y^(k)(t0)`` for ``k <= p`` and ``E[k] = h^k F^(k-1)(t0)`` for ``1 <= k <= p``.

    ``F(t) = f(t, y(t))``.  The derivatives come from ``prob.derivatives``
    when available, otherwise from a polynomial fit of degree ``p + 2`` to
    the solution on ``[t0, t0 + h]``: the exact ``prob.reference`` in
    ``"exact"`` mode, a tight-tolerance Radau trajectory in ``"bootstrap"``.
    """
    t0 = prob.t_span[0]
    if mode not in STARTING_MODES:
        raise ValueError(f"starting mode must be one of {STARTING_MODES}")
    if mode == "exact" and prob.derivatives is not None:
        ys, fs = prob.derivatives(t0, p)
        dtype = np.result_type(prob.y0, float)
        D = [h**k * np.asarray(ys[k], dtype) for k in range(p + 1)]
        E = [None] + [h**k * np.asarray(fs[k - 1], dtype) for k in range(1, p + 1)]
        return D, E
    K = p + 2
    theta = np.arange(K + 1) / K
    times = t0 + theta * h
    if mode == "exact":
        if prob.reference is None:
            raise ValueError("exact starting mode needs prob.reference or prob.derivatives")
        Ys = np.array([prob.reference(tt) for tt in times])
    else:
        Ys = reference_trajectory(prob, times, rtol=rtol, atol=atol)
    Fs = np.array([prob.f(tt, yy) for tt, yy in zip(times, Ys)])
    D = _fit_scaled_derivatives(theta, Ys, p)
    Fd = _fit_scaled_derivatives(theta, Fs, p)
    E = [None] + [h * Fd[k - 1] for k in range(1, p + 1)]
    return D, E


def reference_trajectory(prob: SplitProblem, times, rtol=1e-12, atol=1e-14, method="Radau"):
    """Solution at ``times`` from scipy's implicit Runge-Kutta solver."""
    times = np.asarray(times, dtype=float)

    def rhs(tt, y):
        return prob.f(tt, y) + prob.g(tt, y)

    jac = None
    if prob.jac_g is not None:
        # the stiff part dominates the Jacobian; f is left out
        def jac(tt, y):
            return prob.jac_g(tt, y)

    if times[-1] == times[0]:
        return np.array([prob.y0 for _ in times])
    sol = solve_ivp(rhs, (times[0], times[-1]), prob.y0, method=method, t_eval=times, rtol=rtol, atol=atol, jac=jac)
    if not sol.success:
        raise StepFailure(f"reference solver failed: {sol.message}")
    return sol.y.T


def start(t: Tableau, prob: SplitProblem, h: float, mode: str = "bootstrap") -> StepperState:
    """Starting vector ``y^[0]`` matching the method's q-vectors.

    The explicit and implicit parts have their own q-vectors, so
    ``y^[0] = q_0 y0 + sum_k (q_k h^k F^(k-1) + q*_k h^k G^(k-1))`` with
    ``G^(k-1) = y^(k) - F^(k-1)`` along the solution.
    """
    qe = q_vectors(t, "explicit")
    qi = q_vectors(t, "implicit")
    D, E = scaled_derivatives(prob, h, t.p, mode)
    y_ext = np.outer(qe[0], D[0])
    for k in range(1, t.p + 1):
        y_ext += np.outer(qe[k], E[k]) + np.outer(qi[k], D[k] - E[k])
    return StepperState(t=prob.t_span[0], h=h, y_ext=y_ext)


def finish(state: StepperState) -> np.ndarray:
    """The last stage value, which sits at ``c_s = 1``."""
    if state.stage_values is None:
        raise ValueError("finish() needs at least one step")
    return state.stage_values[-1].copy()


# ---------------------------------------------------------------------------
# driver


@dataclass
class IntegrationResult:
    t: np.ndarray
    y: np.ndarray
    state: StepperState
    wall_time: float
    stages: list | None = None

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]

    def counters(self) -> dict:
        return self.state.counters()


def n_steps_for(t_span, h) -> int:
    span = t_span[1] - t_span[0]
    n = round(span / h)
    if n < 1 or abs(n * h - span) > 4 * np.finfo(float).eps * max(abs(span), 1.0) * max(n, 1):
        raise GridMismatch(f"step {h!r} does not divide the interval {t_span}")
    return n


def integrate(
    t: Tableau,
    prob: SplitProblem,
    h: float,
    starting: str = "bootstrap",
    store: str = "all",
    newton_tol=None,
    max_iters: int | None = None,
    initial_state: StepperState | None = None,
) -> IntegrationResult:
    """start -> N steps -> finish on the uniform grid ``t0 + n h``.

    ``store`` is ``"all"`` (solution at every grid point), ``"final"``, or
    ``"stages"`` (additionally keep every step's stage values).
    """
    n = n_steps_for(prob.t_span, h)
    t0 = prob.t_span[0]
    wall = time.perf_counter()
    state = initial_state if initial_state is not None else start(t, prob, h, starting)
    newton = NewtonSolver(tol=newton_tol, max_iters=max_iters or prob.newton_max_iters)
    ts = [t0]
    ys = [prob.y0.copy()]
    stages = [] if store == "stages" else None
    for k in range(n):
        state.t = t0 + k * h
        state = step(t, prob, state, newton, newton_tol)
        if store in ("all", "stages"):
            ts.append(t0 + (k + 1) * h)
            ys.append(finish(state))
        if stages is not None:
            stages.append(state.stage_values.copy())
    state.t = t0 + n * h
    if store == "final":
        ts.append(state.t)
        ys.append(finish(state))
    return IntegrationResult(
        t=np.array(ts), y=np.array(ys), state=state, wall_time=time.perf_counter() - wall, stages=stages
    )
