"""Uniform 1-D grids, finite-difference stencils and WENO5."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRID_KINDS = ("dirichlet-left", "periodic", "inflow-outflow")


@dataclass(frozen=True)
class Grid1D:
    """``N`` intervals of width ``dx = length / N``.

    The unknowns sit at ``x_1..x_N`` for ``dirichlet-left`` (``x_0`` carries
    boundary data) and at ``x_0..x_{N-1}`` for ``periodic``.  For
    ``inflow-outflow`` they sit at ``x_1..x_N`` and ghost values are supplied
    by the caller.
    """

    N: int
    length: float = 1.0
    kind: str = "dirichlet-left"

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.N

    @property
    def x(self) -> np.ndarray:
        """Coordinates of the unknowns."""
        i = np.arange(self.N) if self.kind == "periodic" else np.arange(1, self.N + 1)
        return i * self.dx


# u'(x_i) stencils: offsets and weights, all divided by dx
CENTRAL4 = (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
# third order, one upwind and two downwind neighbours
BIASED3_LEFT = (np.array([-1, 0, 1, 2]), np.array([-2.0, -3.0, 6.0, -1.0]) / 6.0)
# third order, two upwind and one downwind neighbour
BIASED3_RIGHT = (np.array([-2, -1, 0, 1]), np.array([1.0, -6.0, 3.0, 2.0]) / 6.0)
# third order, fully one-sided backward
BACKWARD3 = (np.array([-3, -2, -1, 0]), np.array([-2.0, 9.0, -18.0, 11.0]) / 6.0)


def advection_fd4(u: np.ndarray, u_left: float, dx: float) -> np.ndarray:
    """``u_x`` at ``x_1..x_N`` with ``u(x_0) = u_left``.

    Fourth-order central differences in the interior and third-order
    stencils at ``x_1``, ``x_{N-1}`` and ``x_N``.
    """
    n = u.size
    if n < 4:
        raise ValueError("need at least 4 unknowns")
    w = np.empty(n + 1)
    w[0] = u_left
    w[1:] = u
    d = np.empty(n)
    j = np.arange(2, n - 1)  # w index of interior unknowns
    d[j - 1] = (w[j - 2] - 8 * w[j - 1] + 8 * w[j + 1] - w[j + 2]) / 12.0
    d[0] = (-2 * w[0] - 3 * w[1] + 6 * w[2] - w[3]) / 6.0
    d[n - 2] = (w[n - 3] - 6 * w[n - 2] + 3 * w[n - 1] + 2 * w[n]) / 6.0
    d[n - 1] = (-2 * w[n - 3] + 9 * w[n - 2] - 18 * w[n - 1] + 11 * w[n]) / 6.0
    return d / dx


WENO_EPS = 1e-6


def weno5_reconstruct(vm2, vm1, v0, vp1, vp2, eps=WENO_EPS):
    """Left-biased fifth-order value at ``x_{i+1/2}`` from ``v_{i-2}..v_{i+2}``."""
    b0 = 13 / 12 * (vm2 - 2 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4 * vm1 + 3 * v0) ** 2
    b1 = 13 / 12 * (vm1 - 2 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13 / 12 * (v0 - 2 * vp1 + vp2) ** 2 + 0.25 * (3 * v0 - 4 * vp1 + vp2) ** 2
    a0 = 0.1 / (eps + b0) ** 2
    a1 = 0.6 / (eps + b1) ** 2
    a2 = 0.3 / (eps + b2) ** 2
    q0 = (2 * vm2 - 7 * vm1 + 11 * v0) / 6
    q1 = (-vm1 + 5 * v0 + 2 * vp1) / 6
    q2 = (2 * v0 + 5 * vp1 - vp2) / 6
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def pad(values: np.ndarray, grid: Grid1D, ghosts=None, width: int = 3) -> np.ndarray:
    """Extend along the last axis by ``width`` ghost values on each side."""
    if grid.kind == "periodic":
        return np.concatenate([values[..., -width:], values, values[..., :width]], axis=-1)
    if ghosts is None:
        raise ValueError("non-periodic grids need explicit ghost values")
    left, right = (np.broadcast_to(np.asarray(g, dtype=float), values.shape[:-1] + (width,)) for g in ghosts)
    return np.concatenate([left, values, right], axis=-1)


def weno5_interface_plus(P: np.ndarray, eps=WENO_EPS) -> np.ndarray:
    """Left-biased values at ``x_{i+1/2}``, ``i = -1..n-1``, from 3-ghost padded ``P``."""
    n = P.shape[-1] - 6
    s = lambda k: P[..., k : k + n + 1]  # noqa: E731
    return weno5_reconstruct(s(0), s(1), s(2), s(3), s(4), eps)


def weno5_interface_minus(P: np.ndarray, eps=WENO_EPS) -> np.ndarray:
    """Right-biased values at ``x_{i+1/2}``, ``i = -1..n-1``."""
    n = P.shape[-1] - 6
    s = lambda k: P[..., k : k + n + 1]  # noqa: E731
    return weno5_reconstruct(s(5), s(4), s(3), s(2), s(1), eps)


def weno5_derivative(values: np.ndarray, velocitysign: float, grid: Grid1D, ghosts=None, eps=WENO_EPS) -> np.ndarray:
    """Upwind WENO5 approximation of ``u_x``; the stencil leans against the flow."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] < 6:
        raise ValueError("WENO5 needs at least 6 unknowns")
    P = pad(values, grid, ghosts)
    F = weno5_interface_plus(P, eps) if velocitysign >= 0 else weno5_interface_minus(P, eps)
    return (F[..., 1:] - F[..., :-1]) / grid.dx


def weno5_flux_divergence(U: np.ndarray, flux: np.ndarray, alpha: float, grid: Grid1D, ghosts=None, eps=WENO_EPS):
    """``d/dx flux(U)`` with global Lax-Friedrichs splitting, componentwise.

    ``U`` and ``flux`` have shape ``(components, n)``.
    """
    fp = pad(0.5 * (flux + alpha * U), grid, ghosts)
    fm = pad(0.5 * (flux - alpha * U), grid, ghosts)
    F = weno5_interface_plus(fp, eps) + weno5_interface_minus(fm, eps)
    return (F[..., 1:] - F[..., :-1]) / grid.dx
