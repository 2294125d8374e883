"""SSP coefficient of the explicit part via the Spijker conditions."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.linalg import solve_triangular

from .tableau import Tableau

SSP_TOL = 1e-12


@dataclass(frozen=True)
class SspCertificate:
    C: float
    C_eff: float
    gamma_feasible: float
    gamma_infeasible: float
    tolerance: float
    infeasible_at_zero: bool = False
    n_bisections: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def spijker_matrices(t: Tableau, gamma: float):
    """The four matrices whose entries must all be nonnegative."""
    A, U, B, V = t.A, t.U, t.B, t.V
    s = A.shape[0]
    K = solve_triangular(np.eye(s) + gamma * A, np.eye(s), lower=True)
    KU = K @ U
    return KU, np.eye(s) - K, V - gamma * (B @ KU), gamma * (B @ K)


def spijker_feasible(t: Tableau, gamma: float, tol: float = SSP_TOL) -> bool:
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return all(m.min() >= -tol for m in spijker_matrices(t, gamma))


def ssp_coefficient(t: Tableau, bracket_tol: float = 1e-10, tol: float = SSP_TOL, max_gamma: float = 1e6) -> SspCertificate:
    """Largest feasible gamma, bracketed by bisection.

    Feasibility in gamma is an interval ``[0, C]`` for a fixed tableau, so
    monotone bisection gives a certified bracket.
    """
    s = t.s
    if not spijker_feasible(t, 0.0, tol):
        return SspCertificate(0.0, 0.0, 0.0, 0.0, 0.0, infeasible_at_zero=True)
    lo, hi = 0.0, 2.0 * s
    while spijker_feasible(t, hi, tol):
        lo, hi = hi, 2 * hi
        if hi > max_gamma:
            return SspCertificate(np.inf, np.inf, lo, np.inf, np.inf)
    n = 0
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        if spijker_feasible(t, mid, tol):
            lo = mid
        else:
            hi = mid
        n += 1
    return SspCertificate(C=lo, C_eff=lo / s, gamma_feasible=lo, gamma_infeasible=hi, tolerance=hi - lo, n_bisections=n)
