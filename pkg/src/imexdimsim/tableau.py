"""IMEX DIMSIM tableaux: construction, order verification, transformation.

A tableau couples an explicit GLM ``(c, A, U, B, V)`` and an implicit GLM
``(c, Astar, U, Bstar, V)`` sharing ``U`` and ``V``.  The printed method
coefficients omit ``B`` and ``Bstar``; they are rebuilt here from the
stage-order ``p = q`` conditions using exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np

from ._coefficients import APPENDIX, EULER_LAMBDA

ORDER_TOL = 1e-10

CATALOG_NAMES = (
    "DIMSIM1A",
    "DIMSIM1L",
    "DIMSIM2A",
    "DIMSIM2L",
    "DIMSIM3A",
    "DIMSIM3L",
    "DIMSIM4A",
)


class TableauError(ValueError):
    """Malformed or inconsistent tableau data."""


class DegenerateBasisError(TableauError):
    pass


class ReconstructionError(TableauError):
    pass


class UnknownMethodError(KeyError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Tableau:
    """Coefficients of an IMEX general linear method.

    ``c_explicit`` is only set for the first-order pairs, whose explicit
    and implicit parts sit at different abscissae (forward Euler at 0, the
    implicit stage at 1).  Those are advanced as the composition of the two
    one-stage methods; see :mod:`imexdimsim.integrator`.
    """

    c: np.ndarray
    A: np.ndarray
    Astar: np.ndarray
    U: np.ndarray
    B: np.ndarray
    Bstar: np.ndarray
    V: np.ndarray
    p: int
    q: int
    name: str = ""
    c_explicit: np.ndarray | None = None
    lam: float = field(init=False)

    def __post_init__(self):
        for key in ("c", "A", "Astar", "U", "B", "Bstar", "V"):
            object.__setattr__(self, key, _frozen(getattr(self, key)))
        if self.c_explicit is not None:
            object.__setattr__(self, "c_explicit", _frozen(self.c_explicit))
        s, r = self.s, self.r
        shapes = {
            "c": (s,),
            "A": (s, s),
            "Astar": (s, s),
            "U": (s, r),
            "B": (r, s),
            "Bstar": (r, s),
            "V": (r, r),
        }
        for key, shape in shapes.items():
            if getattr(self, key).shape != shape:
                raise TableauError(f"{key} has shape {getattr(self, key).shape}, expected {shape}")
        if np.any(np.triu(self.A) != 0):
            raise TableauError("A must be strictly lower triangular")
        if np.any(np.triu(self.Astar, 1) != 0):
            raise TableauError("Astar must be lower triangular")
        diag = np.diag(self.Astar)
        if np.any(diag != diag[0]) or diag[0] <= 0:
            raise TableauError("Astar must carry one positive value on its diagonal")
        object.__setattr__(self, "lam", float(diag[0]))

    @property
    def s(self) -> int:
        return self.c.shape[0]

    @property
    def r(self) -> int:
        return self.V.shape[0]

    @property
    def split_abscissae(self) -> bool:
        return self.c_explicit is not None

    @property
    def explicit_c(self) -> np.ndarray:
        return self.c if self.c_explicit is None else self.c_explicit

    def to_dict(self) -> dict:
        d = {
            "s": self.s,
            "r": self.r,
            "p": self.p,
            "q": self.q,
            "c": self.c.tolist(),
            "A": self.A.tolist(),
            "Astar": self.Astar.tolist(),
            "U": self.U.tolist(),
            "B": self.B.tolist(),
            "Bstar": self.Bstar.tolist(),
            "V": self.V.tolist(),
            "lambda": self.lam,
        }
        if self.name:
            d["name"] = self.name
        if self.c_explicit is not None:
            d["c_explicit"] = self.c_explicit.tolist()
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "Tableau":
        t = cls(
            c=d["c"],
            A=d["A"],
            Astar=d["Astar"],
            U=d["U"],
            B=d["B"],
            Bstar=d["Bstar"],
            V=d["V"],
            p=int(d["p"]),
            q=int(d["q"]),
            name=d.get("name", ""),
            c_explicit=d.get("c_explicit"),
        )
        if int(d["s"]) != t.s or int(d["r"]) != t.r:
            raise TableauError("s/r fields disagree with matrix shapes")
        if "lambda" in d and float(d["lambda"]) != t.lam:
            raise TableauError("lambda field disagrees with the diagonal of Astar")
        return t

    @classmethod
    def from_json(cls, text: str) -> "Tableau":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AppendixData:
    """The printed part of a transformed method: c, A, A*, U-bar, V-bar."""

    c: Sequence
    Abar: Sequence
    Astarbar: Sequence
    Ubar: Sequence
    Vbar: Sequence
    p: int
    name: str = ""

    @classmethod
    def from_strings(cls, name: str, raw: dict) -> "AppendixData":
        conv = _to_fraction_matrix
        return cls(
            c=[Fraction(x) for x in raw["c"]],
            Abar=conv(raw["A"]),
            Astarbar=conv(raw["Astar"]),
            Ubar=conv(raw["U"]),
            Vbar=conv(raw["V"]),
            p=len(raw["c"]),
            name=name,
        )


# ---------------------------------------------------------------------------
# small exact-capable linear algebra on nested lists


def _to_fraction_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


def _as_rows(M) -> list[list]:
    if isinstance(M, np.ndarray) and M.dtype != object:
        return M.tolist()
    return [list(row) for row in M]


def _matmul(X, Y):
    n, k, m = len(X), len(Y), len(Y[0])
    return [[sum((X[i][l] * Y[l][j] for l in range(k)), 0 * X[0][0]) for j in range(m)] for i in range(n)]


def _matadd(X, Y, sign=1):
    return [[x + sign * y for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def _inverse(M):
    """Gauss-Jordan inverse; exact for Fraction entries."""
    n = len(M)
    one = M[0][0] ** 0
    aug = [list(M[i]) + [one if i == j else 0 * one for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(aug[i][col]))
        if aug[piv][col] == 0:
            raise TableauError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                fac = aug[i][col]
                aug[i] = [x - fac * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _poly_from_roots(roots):
    coeffs = [roots[0] ** 0 if roots else 1]
    for rt in roots:
        shifted = [0 * rt] + coeffs
        scaled = [-rt * a for a in coeffs] + [0 * rt]
        coeffs = [a + b for a, b in zip(shifted, scaled)]
    return coeffs


def _polyval(coeffs, x):
    acc = 0 * x
    for a in reversed(coeffs):
        acc = acc * x + a
    return acc


def _polyint_at(coeffs, x):
    # integral from 0 to x, term by term
    return sum((a * x ** (k + 1) / (k + 1) for k, a in enumerate(coeffs)), 0 * x)


def b_basis_matrices(c) -> tuple[list, list, list]:
    """The Lagrange-basis matrices B0, B1, B2 for abscissae ``c``."""
    c = list(c)
    s = len(c)
    if len(set(c)) != s:
        raise DegenerateBasisError(f"abscissae must be distinct, got {c}")
    B0 = [[None] * s for _ in range(s)]
    B1 = [[None] * s for _ in range(s)]
    B2 = [[None] * s for _ in range(s)]
    for j in range(s):
        phi = _poly_from_roots([c[k] for k in range(s) if k != j])
        den = _polyval(phi, c[j])
        for i in range(s):
            B0[i][j] = _polyint_at(phi, 1 + c[i]) / den
            B1[i][j] = _polyval(phi, 1 + c[i]) / den
            B2[i][j] = _polyint_at(phi, c[i]) / den
    return B0, B1, B2


def build_b_matrices(c, A, Astar, V, c_implicit=None):
    """B and B* giving order and stage order ``s`` for the given A, A*, V.

    Works on floats or on :class:`fractions.Fraction` entries; the result
    has the input's element type (float input gives ndarrays).
    ``c_implicit`` overrides the abscissae of the implicit part.
    """
    exact = _is_exact(c, A, Astar, V)
    c_l = list(c) if exact else [float(x) for x in c]
    A_l, As_l, V_l = _as_rows(A), _as_rows(Astar), _as_rows(V)
    c_i = c_l if c_implicit is None else list(c_implicit)

    def one(cc, Amat):
        B0, B1, B2 = b_basis_matrices(cc)
        out = _matadd(B0, _matmul(Amat, B1), -1)
        out = _matadd(out, _matmul(V_l, B2), -1)
        return _matadd(out, _matmul(V_l, Amat))

    B, Bs = one(c_l, A_l), one(c_i, As_l)
    if exact:
        return B, Bs
    return np.array(B, dtype=float), np.array(Bs, dtype=float)


def _is_exact(*objs) -> bool:
    def first(x):
        while isinstance(x, (list, tuple, np.ndarray)):
            x = x[0]
        return x

    return all(isinstance(first(o), Fraction) for o in objs)


def reconstruct_from_appendix(data: AppendixData, check: bool = True) -> Tableau:
    """Rebuild the full transformed tableau from printed coefficients.

    With ``U = I`` for the underlying DIMSIM, ``Ubar = T^{-1}``.  The
    untransformed ``V`` is recovered, B and B* are built for it, and the
    result is mapped back through ``T``.
    """
    c = list(data.c)
    Ubar = [list(r) for r in data.Ubar]
    Vbar = [list(r) for r in data.Vbar]
    try:
        T = _inverse(Ubar)
    except TableauError as exc:
        raise ReconstructionError(f"{data.name}: Ubar is singular") from exc
    V = _matmul(_matmul(Ubar, Vbar), T)
    B, Bs = build_b_matrices(c, data.Abar, data.Astarbar, V)
    Bbar, Bsbar = _matmul(T, B), _matmul(T, Bs)
    tab = Tableau(
        c=_f(c),
        A=_f(data.Abar),
        Astar=_f(data.Astarbar),
        U=_f(Ubar),
        B=_f(Bbar),
        Bstar=_f(Bsbar),
        V=_f(Vbar),
        p=data.p,
        q=data.p,
        name=data.name,
    )
    if check:
        res = verify_order(tab)
        if res.max > ORDER_TOL:
            raise ReconstructionError(f"{data.name}: order residual {res.max:.3e} exceeds {ORDER_TOL}")
    return tab


def _f(x):
    return np.array([[float(v) for v in row] for row in x] if isinstance(x[0], (list, tuple)) else [float(v) for v in x])


def transform(t: Tableau, T) -> Tableau:
    """Change of external-stage basis ``ybar = T y``."""
    T = np.asarray(T, dtype=float)
    Tinv = np.linalg.inv(T)
    return Tableau(
        c=t.c,
        A=t.A,
        Astar=t.Astar,
        U=t.U @ Tinv,
        B=T @ t.B,
        Bstar=T @ t.Bstar,
        V=T @ t.V @ Tinv,
        p=t.p,
        q=t.q,
        name=t.name,
        c_explicit=t.c_explicit,
    )


def untransform(t: Tableau) -> Tableau:
    """The equivalent method with ``U = I`` (requires invertible U)."""
    return transform(t, t.U)


# ---------------------------------------------------------------------------
# order conditions


@dataclass(frozen=True)
class QVectors:
    """Coefficients ``q_k`` of ``y^[n] ~ sum_k q_k h^k y^(k)(t_n)``."""

    q: tuple[np.ndarray, ...]

    def __getitem__(self, k):
        return self.q[k]

    def __len__(self):
        return len(self.q)

    def as_matrix(self) -> np.ndarray:
        """r x (p+1) matrix whose column k is q_k."""
        return np.column_stack(self.q)


def _exact_q(c, A, U, p):
    s = len(c)
    Uinv = _inverse(U)
    qs = []
    for k in range(p + 1):
        vec = [ci**k / factorial(k) for ci in c]
        if k >= 1:
            prev = [ci ** (k - 1) / factorial(k - 1) for ci in c]
            Ap = [sum(A[i][j] * prev[j] for j in range(s)) for i in range(s)]
            vec = [v - a for v, a in zip(vec, Ap)]
        qs.append([sum(Uinv[i][j] * vec[j] for j in range(s)) for i in range(len(Uinv))])
    return qs


def q_vectors(t: Tableau, part: str = "explicit") -> QVectors:
    """q-vectors of the explicit (``A``) or implicit (``Astar``) part.

    ``q_k = U^{-1} (c^k/k! - A c^{k-1}/(k-1)!)``; for U = I this is the
    usual DIMSIM formula, for a transformed method it equals ``T q_k``.
    The two parts generally differ; the IMEX starting vector combines them.
    """
    if part == "explicit":
        c, A = t.explicit_c, t.A
    elif part == "implicit":
        c, A = t.c, t.Astar
    else:
        raise ValueError(f"part must be 'explicit' or 'implicit', got {part!r}")
    qs = _exact_q(
        [Fraction(float(x)) for x in c],
        _to_fraction_matrix(A.tolist()),
        _to_fraction_matrix(t.U.tolist()),
        t.p,
    )
    return QVectors(tuple(np.array([float(x) for x in q]) for q in qs))


@dataclass(frozen=True)
class OrderReport:
    explicit_stage: float
    explicit_step: float
    implicit_stage: float
    implicit_step: float

    @property
    def max(self) -> float:
        return max(self.explicit_stage, self.explicit_step, self.implicit_stage, self.implicit_step)

    def as_dict(self) -> dict:
        return {
            "explicit_stage": self.explicit_stage,
            "explicit_step": self.explicit_step,
            "implicit_stage": self.implicit_stage,
            "implicit_step": self.implicit_step,
            "max": self.max,
        }


def _part_residuals(c, A, U, B, V, p):
    """Max Taylor-coefficient mismatch of stage and step conditions.

    stage:  exp(cz) = z A exp(cz) + U W(z)
    step:   exp(z) W(z) = z B exp(cz) + V W(z)
    with W(z) = sum q_k z^k, through z^p.  Exact rational arithmetic.
    """
    s, r = len(c), len(V)
    qs = _exact_q(c, A, U, p)
    stage = Fraction(0)
    step = Fraction(0)
    for k in range(p + 1):
        ek = [ci**k / factorial(k) for ci in c]
        em = [ci ** (k - 1) / factorial(k - 1) for ci in c] if k >= 1 else [Fraction(0)] * s
        for i in range(s):
            val = ek[i] - sum(A[i][j] * em[j] for j in range(s)) - sum(U[i][j] * qs[k][j] for j in range(r))
            stage = max(stage, abs(val))
        for i in range(r):
            lhs = sum(qs[k - j][i] / factorial(j) for j in range(k + 1))
            rhs = sum(B[i][j] * em[j] for j in range(s)) + sum(V[i][j] * qs[k][j] for j in range(r))
            step = max(step, abs(lhs - rhs))
    return float(stage), float(step)


def verify_order(t: Tableau) -> OrderReport:
    """Order/stage-order residuals, with the float entries taken as exact."""
    F = lambda M: [[Fraction(float(x)) for x in row] for row in np.atleast_2d(M).tolist()]
    U, V = F(t.U), F(t.V)
    ce = [Fraction(float(x)) for x in t.explicit_c]
    ci = [Fraction(float(x)) for x in t.c]
    es, ep = _part_residuals(ce, F(t.A), U, F(t.B), V, t.p)
    is_, ip = _part_residuals(ci, F(t.Astar), U, F(t.Bstar), V, t.p)
    return OrderReport(es, ep, is_, ip)


# ---------------------------------------------------------------------------
# catalog


def _euler_pair(name: str) -> Tableau:
    lam = Fraction(EULER_LAMBDA[name])
    one, zero = Fraction(1), Fraction(0)
    B, _ = build_b_matrices([zero], [[zero]], [[lam]], [[one]])
    _, Bs = build_b_matrices([one], [[zero]], [[lam]], [[one]])
    return Tableau(
        c=[1.0],
        A=[[0.0]],
        Astar=[[float(lam)]],
        U=[[1.0]],
        B=_f(B),
        Bstar=_f(Bs),
        V=[[1.0]],
        p=1,
        q=1,
        name=name,
        c_explicit=[0.0],
    )


_CACHE: dict[str, Tableau] = {}


def catalog(name: str) -> Tableau:
    """Catalog method by name, e.g. ``"DIMSIM3L"`` (the ``IMEX`` prefix is optional)."""
    key = name.upper().replace("IMEX", "").replace(" ", "").replace("_", "")
    if key not in CATALOG_NAMES:
        raise UnknownMethodError(f"unknown method {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    if key not in _CACHE:
        if key in EULER_LAMBDA:
            _CACHE[key] = _euler_pair(key)
        else:
            _CACHE[key] = reconstruct_from_appendix(AppendixData.from_strings(key, APPENDIX[key]))
    return _CACHE[key]


def appendix_data(name: str) -> AppendixData:
    key = name.upper()
    if key not in APPENDIX:
        raise UnknownMethodError(f"no printed coefficients for {name!r}")
    return AppendixData.from_strings(key, APPENDIX[key])
