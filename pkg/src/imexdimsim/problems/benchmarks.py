"""Split test problems: the scalar test equation and three PDE benchmarks."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ..integrator import SplitProblem, reference_trajectory
from .spatial import Grid1D, advection_fd4, weno5_derivative, weno5_flux_divergence


def test_equation(lambda0: complex = 0.0, lambda1: complex = 0.0, y0=1.0, t_end: float = 1.0) -> SplitProblem:
    """``y' = lambda0 y + lambda1 y`` with the first term treated explicitly."""
    complex_data = any(isinstance(v, complex) for v in (lambda0, lambda1, y0))
    y0 = np.atleast_1d(np.asarray(y0, dtype=complex if complex_data else float))
    l0 = lambda0 if complex_data else float(np.real(lambda0))
    l1 = lambda1 if complex_data else float(np.real(lambda1))
    mu = l0 + l1

    def derivatives(t, k):
        e = np.exp(mu * t) * y0
        ys = [mu**j * e for j in range(k + 1)]
        return ys, [l0 * y for y in ys[:k]]

    return SplitProblem(
        f=lambda t, y: l0 * y,
        g=lambda t, y: l1 * y,
        jac_g=lambda t, y: np.eye(y0.size) * l1,
        y0=y0,
        t_span=(0.0, t_end),
        reference=lambda t: np.exp(mu * t) * y0,
        derivatives=derivatives,
        name="test",
        params={"lambda0": lambda0, "lambda1": lambda1},
    )


test_equation.__test__ = False  # not a pytest test


def zero_problem(m: int = 3, t_end: float = 1.0) -> SplitProblem:
    y0 = np.linspace(1.0, 2.0, m)
    return SplitProblem(
        f=lambda t, y: np.zeros_like(y),
        g=lambda t, y: np.zeros_like(y),
        jac_g=lambda t, y: np.zeros((m, m)),
        y0=y0,
        t_span=(0.0, t_end),
        reference=lambda t: y0.copy(),
        derivatives=lambda t, k: ([y0] + [np.zeros(m)] * k, [np.zeros(m)] * k),
        name="zero",
    )


def stiff_relaxation(eps: float = 1e-6, t_end: float = 1.0) -> SplitProblem:
    """Prothero-Robinson-type relaxation with exact solution ``(phi, phi^2)``.

    ``phi(t) = 2 + sin t``.  The stiff term pulls ``y_2`` onto ``y_1^2``; the
    non-stiff part ``y_1' = -y_1 y_2 + phi' + phi^3`` keeps a nonlinear slow
    dynamics in the limit ``eps -> 0``.
    """

    def d_phi(t, k):
        return math.sin(t + k * math.pi / 2) + (2.0 if k == 0 else 0.0)

    def d_phi2(t, k):
        # phi^2 = 9/2 + 4 sin t - cos(2t)/2
        return 4 * math.sin(t + k * math.pi / 2) - 2.0 ** (k - 1) * math.cos(2 * t + k * math.pi / 2) + (4.5 if k == 0 else 0.0)

    def exact(t):
        return np.array([d_phi(t, 0), d_phi2(t, 0)])

    def f(t, y):
        p, dp = d_phi(t, 0), d_phi(t, 1)
        return np.array([-y[0] * y[1] + dp + p**3, d_phi2(t, 1)])

    def g(t, y):
        return np.array([0.0, -(y[1] - y[0] ** 2) / eps])

    def derivatives(t, k):
        ys = [np.array([d_phi(t, j), d_phi2(t, j)]) for j in range(k + 1)]
        # g vanishes along the solution, so f(t, y(t)) = y'(t)
        return ys, ys[1:]

    return SplitProblem(
        f=f,
        g=g,
        jac_g=lambda t, y: np.array([[0.0, 0.0], [2.0 * y[0] / eps, -1.0 / eps]]),
        y0=exact(0.0),
        t_span=(0.0, t_end),
        reference=exact,
        derivatives=derivatives,
        name="stiff_relaxation",
        params={"eps": eps},
    )


def advection_reaction(N: int = 400, k1: float = 1e6, t_end: float = 1.0) -> SplitProblem:
    """Linear advection with stiff linear reaction, Dirichlet inflow at x = 0.

    State is ``[u_1..u_N, v_1..v_N]``.  Only ``u`` is advected (unit speed);
    the ``v`` inflow value is never needed.
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    alpha1, k2, s1, s2 = 1.0, 2.0 * k1, 0.0, 1.0
    grid = Grid1D(N, kind="dirichlet-left")
    x = grid.x
    u0 = 1.0 + s2 * x
    v0 = k1 / k2 * u0 + s2 / k2

    def gamma1(t):
        return 1.0 - math.sin(12.0 * t) ** 4

    def f(t, y):
        out = np.zeros_like(y)
        out[:N] = -alpha1 * advection_fd4(y[:N], gamma1(t), grid.dx)
        return out

    def g(t, y):
        u, v = y[:N], y[N:]
        r = -k1 * u + k2 * v
        return np.concatenate([r + s1, -r + s2])

    I = sp.identity(N, format="csc")
    J = sp.bmat([[-k1 * I, k2 * I], [k1 * I, -k2 * I]], format="csc")

    return SplitProblem(
        f=f,
        g=g,
        jac_g=lambda t, y: J,
        y0=np.concatenate([u0, v0]),
        t_span=(0.0, t_end),
        name="advection_reaction",
        params={"N": N, "k1": k1, "k2": k2, "s1": s1, "s2": s2, "alpha1": alpha1},
    )


def adsorption_desorption(N: int = 100, kappa: float = 1e6, k1: float = 50.0, k2: float = 100.0, t_end: float = 1.25) -> SplitProblem:
    """Adsorption (a > 0) then desorption (a < 0) of a solute, WENO5 in space.

    Unknowns at ``x_1..x_N``.  Three ghost cells on the inflow side take the
    boundary value, the outflow side extrapolates the last cell value.
    """
    if N < 16:
        raise ValueError("N must be at least 16")
    grid = Grid1D(N, kind="inflow-outflow")

    def a(t):
        return -math.atan(100.0 * (t - 1.0)) / math.pi

    # odd extension to u < 0: small negative WENO undershoots and Newton
    # iterates never meet the pole at u = -1/k2
    def phi(u):
        return k1 * u / (1.0 + k2 * np.abs(u))

    def dphi(u):
        return k1 / (1.0 + k2 * np.abs(u)) ** 2

    def f(t, y):
        u = y[:N]
        at = a(t)
        if at >= 0:
            ghosts = (1.0 - math.cos(6 * math.pi * t) ** 2, u[-1])
        else:
            ghosts = (u[0], 0.0)
        out = np.zeros_like(y)
        out[:N] = -at * weno5_derivative(u, at, grid, ghosts)
        return out

    def g(t, y):
        u, v = y[:N], y[N:]
        r = kappa * (v - phi(u))
        return np.concatenate([r, -r])

    def jac_g(t, y):
        d = kappa * dphi(y[:N])
        I = sp.identity(N, format="csc")
        D = sp.diags(d, format="csc")
        return sp.bmat([[-D, kappa * I], [D, -kappa * I]], format="csc")

    return SplitProblem(
        f=f,
        g=g,
        jac_g=jac_g,
        y0=np.zeros(2 * N),
        t_span=(0.0, t_end),
        # the Langmuir-type isotherm makes the stage equations strongly
        # nonlinear near u = 0; modified Newton needs more than 10 iterations
        newton_max_iters=15,
        name="adsorption_desorption",
        params={"N": N, "kappa": kappa, "k1": k1, "k2": k2, "a": a, "phi": phi},
    )


def shallow_water(
    N: int = 201, epsilon: float = 1e-8, t_end: float = 0.1, alpha: float | None = None, layer_skip: float = 0.0
) -> SplitProblem:
    """Shallow water with stiff relaxation of ``hv`` towards ``h^2/2``, periodic.

    State is ``[h_0..h_{N-1}, hv_0..hv_{N-1}]``.  ``alpha`` fixes the
    Lax-Friedrichs constant; by default it is the largest characteristic
    speed ``sqrt(1 + h)`` of the current state.

    The initial data sit on ``hv = h^2/2`` rather than on the slow manifold,
    so there is an initial layer of width ``epsilon``.  ``layer_skip > 0``
    advances the initial state through the layer with a tight Radau solve
    and shifts the time span to ``(layer_skip, layer_skip + t_end)``.
    """
    if N < 16:
        raise ValueError("N must be at least 16")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    grid = Grid1D(N, kind="periodic")
    x = grid.x
    h0 = 1.0 + np.sin(8 * math.pi * x) / 5.0

    def f(t, y):
        U = y.reshape(2, N)
        h, q = U
        flux = np.stack([q, h + 0.5 * h * h])
        a = alpha if alpha is not None else float(np.sqrt(1.0 + np.max(np.abs(h))))
        return -weno5_flux_divergence(U, flux, a, grid).ravel()

    def g(t, y):
        h, q = y[:N], y[N:]
        return np.concatenate([np.zeros(N), (0.5 * h * h - q) / epsilon])

    def jac_g(t, y):
        h = y[:N]
        Z = sp.csc_matrix((N, N))
        return sp.bmat(
            [[Z, Z], [sp.diags(h / epsilon), sp.diags(np.full(N, -1.0 / epsilon))]],
            format="csc",
        )

    def check_state(y):
        if np.min(y[:N]) <= 0:
            return "negative water height"
        return None

    prob = SplitProblem(
        f=f,
        g=g,
        jac_g=jac_g,
        y0=np.concatenate([h0, 0.5 * h0 * h0]),
        t_span=(0.0, t_end),
        check_state=check_state,
        name="shallow_water",
        params={"N": N, "epsilon": epsilon, "dx": grid.dx, "layer_skip": layer_skip},
    )
    if layer_skip > 0:
        prob.y0 = reference_trajectory(prob, [0.0, layer_skip])[-1]
        prob.t_span = (layer_skip, layer_skip + t_end)
    return prob


PROBLEMS = {
    "test": test_equation,
    "zero": zero_problem,
    "stiff_relaxation": stiff_relaxation,
    "advection_reaction": advection_reaction,
    "adsorption_desorption": adsorption_desorption,
    "shallow_water": shallow_water,
}


def get_problem(name: str, **kwargs) -> SplitProblem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(PROBLEMS)}") from None
    return factory(**{k: v for k, v in kwargs.items() if v is not None})
