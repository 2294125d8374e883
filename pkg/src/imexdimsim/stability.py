"""Linear stability of IMEX GLMs on y' = lambda0 y + lambda1 y.

With ``z0 = h lambda0`` (explicit) and ``z1 = h lambda1`` (implicit) the
external stages obey ``y^[n+1] = M(z0, z1) y^[n]``.  This module evaluates
``M``, its characteristic polynomial scaled by ``(1 - lambda z1)^s``, the
Schur-Cohn recursion on the imaginary axis, and the regions S_E, S_{alpha,y}
and S_alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tableau import Tableau

STABLE_TOL = 1e-10
DEFAULT_N_ANGLES = 720
DEFAULT_RADIAL_TOL = 1e-4


class PoleError(ZeroDivisionError):
    """The stage matrix I - z0 A - z1 A* is singular (z1 = 1/lambda)."""


# ---------------------------------------------------------------------------
# stability matrix


def stability_matrices(t: Tableau, z0, z1) -> np.ndarray:
    """Batched ``M(z0, z1)``; ``z0`` and ``z1`` broadcast, result ``(..., r, r)``."""
    z0, z1 = np.broadcast_arrays(np.asarray(z0, dtype=complex), np.asarray(z1, dtype=complex))
    if t.split_abscissae:
        # composition of the two one-stage methods (see Tableau docstring)
        zero = np.zeros_like(z0)
        me = _glm_matrix(t.A, 0 * t.Astar, t.U, t.B, t.Bstar, t.V, z0, zero)
        mi = _glm_matrix(t.A, t.Astar, t.U, t.B, t.Bstar, t.V, zero, z1)
        return mi @ me
    return _glm_matrix(t.A, t.Astar, t.U, t.B, t.Bstar, t.V, z0, z1)


def _glm_matrix(A, Astar, U, B, Bstar, V, z0, z1):
    s = A.shape[0]
    z0e = z0[..., None, None]
    z1e = z1[..., None, None]
    stage = np.eye(s) - z0e * A - z1e * Astar
    with np.errstate(all="ignore"):
        X = np.linalg.solve(stage, np.broadcast_to(U, stage.shape[:-2] + U.shape))
    return V + (z0e * B + z1e * Bstar) @ X


def stability_matrix(t: Tableau, z0: complex, z1: complex) -> np.ndarray:
    """``M(z0, z1) = V + (z0 B + z1 B*)(I - z0 A - z1 A*)^{-1} U``."""
    if abs(1 - t.lam * z1) < 1e-14:
        raise PoleError(f"z1 = {z1} is the pole 1/lambda of the stage equations")
    return stability_matrices(t, z0, z1)


def spectral_radius(M: np.ndarray) -> np.ndarray:
    r = M.shape[-1]
    if r == 1:
        out = np.abs(M[..., 0, 0])
    elif r == 2:
        tr = M[..., 0, 0] + M[..., 1, 1]
        det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
        disc = np.sqrt(tr * tr - 4 * det)
        out = np.maximum(np.abs(tr + disc), np.abs(tr - disc)) / 2
    else:
        out = np.abs(np.linalg.eigvals(M)).max(axis=-1)
    return np.where(np.isfinite(out), out, np.inf)


def classify_point(t: Tableau, z0: complex, z1: complex) -> str:
    """``"stable"``, ``"boundary"`` (|rho - 1| <= 1e-10), ``"unstable"`` or ``"pole"``."""
    try:
        rho = float(spectral_radius(stability_matrix(t, z0, z1)))
    except PoleError:
        return "pole"
    if not np.isfinite(rho):
        return "pole"
    if rho < 1 - STABLE_TOL:
        return "stable"
    if rho <= 1 + STABLE_TOL:
        return "boundary"
    return "unstable"


def is_stable_point(t: Tableau, z0: complex, z1: complex) -> bool:
    return classify_point(t, z0, z1) == "stable"


# ---------------------------------------------------------------------------
# stability polynomial


@dataclass(frozen=True)
class StabilityPolynomial:
    """``(1 - lambda z1)^s det(w I - M(z0, z1))`` as a trivariate polynomial.

    ``coef[k, i, j]`` multiplies ``w^k z0^i z1^j``.
    """

    coef: np.ndarray
    lam: float
    s: int

    @property
    def degree_w(self) -> int:
        return self.coef.shape[0] - 1

    def implicit(self, tol: float = 1e-11) -> list[np.ndarray]:
        """Coefficients in z (ascending) of each w-power at ``z0 = 0``.

        Entry k of the list belongs to ``w^k``.  Trailing coefficients below
        ``tol`` relative to the largest are dropped.
        """
        out = []
        for k in range(self.coef.shape[0]):
            c = self.coef[k, 0, :].copy()
            scale = max(np.abs(self.coef[:, 0, :]).max(), 1.0)
            c[np.abs(c) < tol * scale] = 0.0
            nz = np.nonzero(c)[0]
            out.append(c[: nz[-1] + 1] if nz.size else np.zeros(1))
        return out

    def p_polys(self, tol: float = 1e-11) -> list[np.ndarray]:
        """``p_1(z) ... p_s(z)`` with the sign convention
        ``p* = (1 - lambda z)^s w^s - p_1 w^{s-1} + p_2 w^{s-2} - ...``."""
        imp = self.implicit(tol)
        r = self.degree_w
        return [(-1) ** i * imp[r - i] for i in range(1, r + 1)]

    def __call__(self, w, z0, z1):
        K, I, J = self.coef.shape
        val = 0
        for k in range(K):
            for i in range(I):
                for j in range(J):
                    if self.coef[k, i, j] != 0:
                        val = val + self.coef[k, i, j] * w**k * z0**i * z1**j
        return val

    def w_coefficients(self, z0, z1) -> np.ndarray:
        """Coefficients in w (highest power first) at given (z0, z1)."""
        K, I, J = self.coef.shape
        z0 = np.asarray(z0, dtype=complex)
        z1 = np.asarray(z1, dtype=complex)
        p0 = z0[..., None] ** np.arange(I)
        p1 = z1[..., None] ** np.arange(J)
        c = np.einsum("kij,...i,...j->...k", self.coef, p0, p1)
        return c[..., ::-1]


def stability_polynomial(t: Tableau) -> StabilityPolynomial:
    """Interpolate the scaled characteristic polynomial on a torus grid.

    Every w-coefficient is a polynomial of degree at most ``s`` in each of
    z0, z1, so a 2-D FFT over roots of unity recovers it up to rounding.
    The z1 circle is shrunk away from the pole ``1/lambda``; z0 has no pole
    and uses the unit circle.
    """
    s, r = t.s, t.r
    n = 2 * (s + 1)  # oversampled; the aliased upper half is discarded
    rad0 = 1.0  # no pole in z0
    rad1 = min(1.0, 0.5 / t.lam)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    Z0, Z1 = np.meshgrid(rad0 * roots, rad1 * roots, indexing="ij")
    M = stability_matrices(t, Z0, Z1)
    charpoly = np.empty((n, n, r + 1), dtype=complex)
    for a in range(n):
        for b in range(n):
            charpoly[a, b] = np.poly(M[a, b])[::-1]  # ascending in w
    vals = charpoly * ((1 - t.lam * Z1) ** s)[..., None]
    coef = np.fft.fft2(vals, axes=(0, 1))[: s + 1, : s + 1] / (n * n)
    coef = coef / (rad0 ** np.arange(s + 1))[:, None, None] / (rad1 ** np.arange(s + 1))[None, :, None]
    coef = np.moveaxis(coef.real, -1, 0).copy()
    coef[np.abs(coef) < 1e-13 * np.abs(coef).max()] = 0.0
    return StabilityPolynomial(coef=coef, lam=t.lam, s=s)


# ---------------------------------------------------------------------------
# Schur-Cohn recursion


@dataclass(frozen=True)
class SchurStep:
    phi: np.ndarray  # coefficients, highest power first, normalized
    phi_hat: np.ndarray
    gap: float  # |phi_hat(0)| - |phi(0)| after normalization


def schur_steps(coeffs) -> list[SchurStep]:
    """Run the recursion ``phi_{k-1} = (phi_hat(0) phi - phi(0) phi_hat) / w``.

    ``coeffs`` are highest power first.  Each polynomial is scaled to unit
    max-norm before its gap is measured, so gaps are comparable across z.
    """
    phi = np.asarray(coeffs, dtype=complex)
    steps = []
    while phi.size > 1:
        phi = phi / np.abs(phi).max()
        phi_hat = np.conj(phi[::-1])
        a0, b0 = phi_hat[-1], phi[-1]
        steps.append(SchurStep(phi=phi, phi_hat=phi_hat, gap=float(abs(a0) - abs(b0))))
        nxt = a0 * phi - b0 * phi_hat
        phi = nxt[:-1]  # constant term cancels; divide by w
        if not np.any(phi):
            break
    return steps


def is_schur(coeffs, tol: float = 0.0) -> bool:
    steps = schur_steps(coeffs)
    return len(steps) == len(coeffs) - 1 and all(st.gap > tol for st in steps)


def schur_gaps_batch(coeffs: np.ndarray) -> np.ndarray:
    """Vectorized Schur gaps; ``coeffs`` is ``(n, k+1)`` highest first -> ``(n, k)``."""
    phi = np.asarray(coeffs, dtype=complex)
    gaps = []
    while phi.shape[-1] > 1:
        phi = phi / np.abs(phi).max(axis=-1, keepdims=True)
        phi_hat = np.conj(phi[..., ::-1])
        a0, b0 = phi_hat[..., -1:], phi[..., -1:]
        gaps.append(np.abs(a0[..., 0]) - np.abs(b0[..., 0]))
        phi = (a0 * phi - b0 * phi_hat)[..., :-1]
    return np.stack(gaps, axis=-1)


# ---------------------------------------------------------------------------
# A- and L-stability of the implicit part


@dataclass
class AStabilityReport:
    a_stable: bool
    strict: bool
    min_gaps: list[float]
    n_samples: int
    y_range: tuple[float, float]
    asymptotic_moduli: list[float]
    boundary_tol: float

    def as_dict(self) -> dict:
        return {
            "a_stable": self.a_stable,
            "strict": self.strict,
            "min_gaps": self.min_gaps,
            "n_samples": self.n_samples,
            "y_range": list(self.y_range),
            "asymptotic_moduli": self.asymptotic_moduli,
        }


def imaginary_axis_samples(y_max: float = 1e4, n_samples: int = 2000, y_min: float = 1e-2) -> np.ndarray:
    return np.geomspace(y_min, y_max, n_samples)


def a_stability_check(
    t: Tableau,
    y_max: float = 1e4,
    n_samples: int = 2000,
    y_min: float = 1e-2,
    boundary_tol: float = 1e-12,
) -> AStabilityReport:
    """Sample the Schur gaps of ``p*(w, iy)`` for ``y`` in ``[y_min, y_max]``.

    Negative y needs no sampling: the coefficients are real, so roots at
    ``-iy`` are conjugates of those at ``iy``.  Below ``y ~ 1e-2`` the gap
    of the root near ``exp(iy)`` shrinks like ``y^(p+1)`` or faster and
    drops under the rounding level of the coefficients.  ``strict`` asks for every gap
    to be positive; the A-stable verdict tolerates gaps down to
    ``-boundary_tol`` (roots on the unit circle, as for the trapezoidal
    rule) and additionally requires the ``|y| -> inf`` root moduli <= 1.
    """
    poly = stability_polynomial(t)
    ys = imaginary_axis_samples(y_max, n_samples, y_min)
    coeffs = poly.w_coefficients(np.zeros_like(ys), 1j * ys)
    gaps = schur_gaps_batch(coeffs)
    min_gaps = gaps.min(axis=0).tolist()
    lead = [p[-1] if p.size == t.s + 1 else 0.0 for p in poly.implicit()]
    lim = np.array(lead[::-1], dtype=float)
    if lim[0] == 0:
        moduli = [np.inf]
    else:
        moduli = np.abs(np.roots(lim)).tolist() if lim.size > 1 else []
    asym_ok = all(m <= 1 + STABLE_TOL for m in moduli)
    strict = bool(np.all(gaps > 0)) and asym_ok
    a_stable = bool(np.all(gaps > -boundary_tol)) and asym_ok
    return AStabilityReport(
        a_stable=a_stable,
        strict=strict,
        min_gaps=min_gaps,
        n_samples=n_samples,
        y_range=(float(ys[0]), float(ys[-1])),
        asymptotic_moduli=[float(m) for m in moduli],
        boundary_tol=boundary_tol,
    )


@dataclass
class LStabilityReport:
    l_stable: bool
    a_stable: bool
    degrees: list[int]
    s: int
    stiff_limit_radius: dict[int, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "l_stable": self.l_stable,
            "a_stable": self.a_stable,
            "p_degrees": self.degrees,
            "s": self.s,
            "stiff_limit_radius": {f"-1e{k}": v for k, v in self.stiff_limit_radius.items()},
        }


def l_stability_check(t: Tableau, a_report: AStabilityReport | None = None) -> LStabilityReport:
    """L-stable iff A-stable and every ``p_i`` has degree below ``s``."""
    if a_report is None:
        a_report = a_stability_check(t)
    poly = stability_polynomial(t)
    degrees = [int(p.size - 1) if np.any(p) else -1 for p in poly.p_polys()]
    radii = {}
    for k in range(2, 9):
        radii[k] = float(spectral_radius(stability_matrix(t, 0.0, -(10.0**k))))
    l_stable = a_report.a_stable and all(d < t.s for d in degrees)
    return LStabilityReport(
        l_stable=l_stable, a_stable=a_report.a_stable, degrees=degrees, s=t.s, stiff_limit_radius=radii
    )


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class PolarGrid:
    n_angles: int = DEFAULT_N_ANGLES
    radial_tol: float = DEFAULT_RADIAL_TOL
    n_radial: int = 48
    center: complex | None = None  # None: midpoint of the real-axis interval
    interval_step: float = 0.01
    interval_max: float = 50.0


@dataclass
class Region:
    kind: str
    alpha: float | None
    y: float | None
    center: complex
    theta: np.ndarray
    radii: np.ndarray
    area: float
    interval: tuple[float, float]
    flags: list[str]
    z1_values: np.ndarray
    tableau: Tableau = field(repr=False)

    @property
    def boundary(self) -> np.ndarray:
        return self.center + self.radii * np.exp(1j * self.theta)

    def contains(self, z0) -> np.ndarray:
        """Membership oracle: stable for every sampled ``z1``."""
        z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
        return _stable_for_all(self.tableau, z0, self.z1_values, mirror=False)

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "y": self.y,
            "area": self.area,
            "interval": list(self.interval),
            "center": [self.center.real, self.center.imag],
            "flags": self.flags,
        }


def _stable_for_all(t: Tableau, z0: np.ndarray, z1s: np.ndarray, mirror: bool) -> np.ndarray:
    """Pointwise AND over ``z1s`` of rho(M) < 1 - tol.

    With ``mirror`` the conjugate set ``conj(z1s)`` is included by also
    testing ``conj(z0)`` (M(conj z0, conj z1) = conj M(z0, z1)).
    Points are dropped from later evaluations once found unstable.
    """
    shape = z0.shape
    pts = z0.ravel()
    if mirror:
        pts = np.concatenate([pts, np.conj(pts)])
    ok = np.ones(pts.shape, dtype=bool)
    for z1 in z1s:
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            break
        rho = spectral_radius(stability_matrices(t, pts[idx], z1))
        ok[idx] = rho < 1 - STABLE_TOL
    if mirror:
        n = z0.size
        ok = ok[:n] & ok[n:]
    return ok.reshape(shape)


def _real_interval(member, grid: PolarGrid) -> float:
    xs = -grid.interval_step * np.arange(1, int(grid.interval_max / grid.interval_step) + 1)
    ok = member(xs.astype(complex))
    bad = np.nonzero(~ok)[0]
    if bad.size == 0:
        return -np.inf
    k = bad[0]
    if k == 0:
        hi, lo = 0.0, xs[0]
    else:
        hi, lo = xs[k - 1], xs[k]
    while hi - lo > grid.radial_tol * 1e-2:
        mid = 0.5 * (hi + lo)
        if member(np.array([mid], dtype=complex))[0]:
            hi = mid
        else:
            lo = mid
    return 0.5 * (hi + lo)


def _polar_scan(member, center: complex, grid: PolarGrid, r_guess: np.ndarray | float):
    n = grid.n_angles
    theta = 2 * np.pi * np.arange(n) / n
    direc = np.exp(1j * theta)
    r_guess = np.broadcast_to(np.asarray(r_guess, dtype=float), (n,)).copy()
    flags = []
    lo = np.zeros(n)
    hi = np.full(n, np.nan)
    transitions = np.zeros(n, dtype=int)
    todo = np.arange(n)
    reach = r_guess
    for _ in range(8):
        frac = np.arange(1, grid.n_radial + 1) / grid.n_radial
        rr = reach[todo, None] * frac[None, :]
        pts = center + rr * direc[todo, None]
        ok = member(pts)
        first_bad = np.argmax(~ok, axis=1)
        has_bad = (~ok).any(axis=1)
        trans = np.abs(np.diff(ok.astype(int), axis=1)).sum(axis=1)
        transitions[todo] = trans
        found = todo[has_bad]
        fb = first_bad[has_bad]
        hi[found] = rr[has_bad, fb]
        lo[found] = np.where(fb > 0, rr[has_bad, np.maximum(fb - 1, 0)], 0.0)
        todo = todo[~has_bad]
        if todo.size == 0:
            break
        reach = reach.copy()
        reach[todo] *= 2
    if todo.size:
        flags.append("unbounded")
        hi[todo] = reach[todo]
        lo[todo] = reach[todo]
    if np.any(transitions > 1):
        flags.append(f"not-star-shaped:{int(np.sum(transitions > 1))}-rays")
    active = np.nonzero(hi - lo > grid.radial_tol)[0]
    while active.size:
        mid = 0.5 * (lo[active] + hi[active])
        ok = member(center + mid * direc[active])
        lo[active] = np.where(ok, mid, lo[active])
        hi[active] = np.where(ok, hi[active], mid)
        active = active[hi[active] - lo[active] > grid.radial_tol]
    radii = 0.5 * (lo + hi)
    area = 0.5 * np.sum(radii**2) * (2 * np.pi / n)
    return theta, radii, float(area), flags


def _region(t, kind, alpha, y, z1s, grid, mirror, r_guess=None) -> Region:
    z1s = np.atleast_1d(np.asarray(z1s, dtype=complex))

    def member(z0):
        return _stable_for_all(t, np.asarray(z0, dtype=complex), z1s, mirror)

    x_min = _real_interval(member, grid)
    flags = []
    if not np.isfinite(x_min):
        flags.append("interval-unbounded")
        x_min = -grid.interval_max
    if grid.center is not None:
        center = complex(grid.center)
        if not member(np.array([center]))[0]:
            flags.append("center-outside")
    else:
        center = complex(0.5 * x_min, 0.0)
    if r_guess is None:
        r_guess = 2.0 * abs(x_min) + 1.0
    theta, radii, area, scan_flags = _polar_scan(member, center, grid, r_guess)
    if mirror:
        # the region is symmetric about the real axis
        n = theta.size
        radii = np.minimum(radii, radii[(-np.arange(n)) % n])
        area = float(0.5 * np.sum(radii**2) * (2 * np.pi / n))
    all_z1 = np.concatenate([z1s, np.conj(z1s)]) if mirror else z1s
    return Region(
        kind=kind,
        alpha=alpha,
        y=y,
        center=center,
        theta=theta,
        radii=radii,
        area=area,
        interval=(float(x_min), 0.0),
        flags=flags + scan_flags,
        z1_values=all_z1,
        tableau=t,
    )


def _check_alpha(alpha: float):
    if not (0 < alpha <= np.pi / 2 + 1e-15):
        raise ValueError(f"alpha must lie in (0, pi/2], got {alpha}")


def implicit_point(alpha: float, y: float) -> complex:
    """``z1 = -|y|/tan(alpha) + i y``; exactly ``i y`` at ``alpha = pi/2``."""
    _check_alpha(alpha)
    if abs(alpha - np.pi / 2) < 1e-15:
        return complex(0.0, y)
    return complex(-abs(y) / np.tan(alpha), y)


def region_SE(t: Tableau, grid: PolarGrid = PolarGrid()) -> Region:
    """Absolute stability region of the explicit part (z1 = 0)."""
    return _region(t, "S_E", None, 0.0, [0.0], grid, mirror=False)


def region_S_alpha_y(t: Tableau, alpha: float, y: float, grid: PolarGrid = PolarGrid()) -> Region:
    z1 = implicit_point(alpha, y)
    return _region(t, "S_alpha_y", alpha, y, [z1], grid, mirror=False)


def default_y_grid(n: int = 60, y_min: float = 1e-3, y_max: float = 1e4) -> np.ndarray:
    """0 together with +-logspace(y_min, y_max, n), symmetric and sorted."""
    pos = np.geomspace(y_min, y_max, n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def region_S_alpha(
    t: Tableau,
    alpha: float,
    y_grid=None,
    grid: PolarGrid = PolarGrid(),
    refine_check: bool = False,
) -> Region:
    """Intersection of S_{alpha,y} over ``y_grid``.

    Only the non-negative half of a symmetric grid is evaluated; the
    negative half is covered by conjugate symmetry.  With
    ``refine_check`` the area is recomputed on a grid with twice the
    points and a flag is raised if it moves by more than 1%.
    """
    _check_alpha(alpha)
    ys = default_y_grid() if y_grid is None else np.asarray(y_grid, dtype=float)
    pos = np.unique(np.abs(ys))
    symmetric = np.allclose(np.sort(ys), np.sort(-ys))
    if symmetric:
        # largest |y| first: those usually reject most points early
        z1s = [implicit_point(alpha, y) for y in pos[::-1]]
    else:
        z1s = [implicit_point(alpha, y) for y in ys]
    se = region_SE(t, grid)
    r_guess = np.abs(se.boundary - complex(0.5 * se.interval[0])).max() * 1.05
    reg = _region(t, "S_alpha", alpha, None, z1s, grid, mirror=symmetric, r_guess=r_guess)
    m_inf = stability_matrices(t, 0.0, implicit_point(alpha, 1e12))
    if spectral_radius(m_inf) >= 1 - STABLE_TOL:
        reg.flags.append("unstable-at-infinity")
    if refine_check:
        pos_f = np.geomspace(pos[pos > 0].min(), pos.max(), 2 * (pos > 0).sum())
        fine = region_S_alpha(t, alpha, np.concatenate([-pos_f, [0.0], pos_f]), grid)
        if abs(fine.area - reg.area) > 0.01 * max(reg.area, 1e-300):
            reg.flags.append("y-grid-insufficient")
    return reg


def stability_interval(t: Tableau, alpha: float | None = None, y_grid=None, grid: PolarGrid = PolarGrid()) -> tuple[float, float]:
    """Real-axis interval ``(x, 0)`` of S_E (``alpha=None``) or S_alpha.

    Cheaper than the full region: only the negative real axis is scanned.
    For real ``z0`` the conjugate ``z1`` values add nothing, so only
    ``y >= 0`` is used.
    """
    if alpha is None:
        z1s = np.array([0.0], dtype=complex)
    else:
        _check_alpha(alpha)
        ys = default_y_grid() if y_grid is None else np.asarray(y_grid, dtype=float)
        z1s = np.array([implicit_point(alpha, y) for y in np.unique(np.abs(ys))[::-1]])

    def member(z0):
        return _stable_for_all(t, np.asarray(z0, dtype=complex), z1s, mirror=False)

    return float(_real_interval(member, grid)), 0.0
