"""Convergence studies against exact or self-convergence references."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .integrator import SplitProblem, StepFailure, integrate, start
from .tableau import Tableau, catalog

REFERENCE_METHOD = "DIMSIM4A"
REFERENCE_FACTOR = 20


@dataclass
class ConvergenceRow:
    h: float
    error: float | None
    order: float | None = None  # against the previous row
    failure: str | None = None
    counters: dict = field(default_factory=dict)
    wall_time: float = 0.0


@dataclass
class ConvergenceReport:
    method: str
    problem: str
    rows: list
    order: float | None
    reference: str
    starting: str
    sensitivity: dict | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def self_reference(prob: SplitProblem, h_min: float, method: str = REFERENCE_METHOD, factor: int = REFERENCE_FACTOR, starting="bootstrap"):
    """Terminal value from ``method`` at step ``h_min / factor``."""
    res = integrate(catalog(method), prob, h_min / factor, starting=starting, store="final")
    return res.y_final


def reference_value(prob: SplitProblem, h_min: float, **kw):
    """``(y_ref, description)``: exact when the problem knows its solution."""
    if prob.reference is not None:
        return np.asarray(prob.reference(prob.t_span[1])), "exact"
    method = kw.get("method", REFERENCE_METHOD)
    factor = kw.get("factor", REFERENCE_FACTOR)
    return self_reference(prob, h_min, **kw), f"{method} at h_min/{factor}"


def least_squares_order(hs, errors) -> float | None:
    pts = [(h, e) for h, e in zip(hs, errors) if e is not None and np.isfinite(e) and e > 0]
    if len(pts) < 2:
        return None
    x, y = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def convergence_study(
    t: Tableau,
    prob: SplitProblem,
    hs,
    reference=None,
    starting: str = "bootstrap",
    reference_label: str | None = None,
    unstable_factor: float = 1.0,
) -> ConvergenceReport:
    """Terminal max-norm errors for each ``h``; failed runs are kept as rows.

    Runs whose error exceeds ``unstable_factor * (1 + max|y_ref|)`` are
    flagged unstable.  Failed and unstable rows are left out of the
    least-squares order.
    """
    hs = sorted(hs, reverse=True)
    if reference is None:
        reference, reference_label = reference_value(prob, min(hs))
    reference = np.asarray(reference)
    scale = float(np.max(np.abs(reference)))
    rows = []
    for h in hs:
        try:
            res = integrate(t, prob, h, starting=starting, store="final")
            err = float(np.max(np.abs(res.y_final - reference)))
            if not np.isfinite(err):
                raise StepFailure("non-finite terminal value")
            failure = None
            if err > unstable_factor * (1.0 + scale):
                failure = "unstable: error exceeds the solution scale"
            rows.append(ConvergenceRow(h, err, failure=failure, counters=res.counters(), wall_time=res.wall_time))
        except (StepFailure, FloatingPointError, ValueError) as exc:
            rows.append(ConvergenceRow(h, None, failure=str(exc)))
    for prev, row in zip(rows, rows[1:]):
        if prev.error and row.error and not (prev.failure or row.failure):
            row.order = float(np.log(prev.error / row.error) / np.log(prev.h / row.h))
    ok = [r for r in rows if r.failure is None]
    order = least_squares_order([r.h for r in ok], [r.error for r in ok])
    return ConvergenceReport(t.name, prob.name, rows, order, reference_label or "given", starting)


def starting_sensitivity(t: Tableau, prob: SplitProblem, h: float, reference, rel_perturbation: float = 1e-8, seed: int = 0) -> dict:
    """Change in terminal error when the starting vector is perturbed.

    Returns the unperturbed error, the perturbed error and their ratio; a
    ratio far from one flags a method whose accuracy depends on the
    starting procedure.
    """
    rng = np.random.default_rng(seed)
    base = start(t, prob, h)
    scale = rel_perturbation * max(1.0, float(np.max(np.abs(base.y_ext))))
    pert = start(t, prob, h)
    pert.y_ext = pert.y_ext + scale * rng.standard_normal(pert.y_ext.shape)
    out = {}
    for label, state in (("error", base), ("perturbed_error", pert)):
        try:
            res = integrate(t, prob, h, store="final", initial_state=state)
            out[label] = float(np.max(np.abs(res.y_final - reference)))
        except StepFailure as exc:
            out[label] = None
            out[label + "_failure"] = str(exc)
    e0, e1 = out.get("error"), out.get("perturbed_error")
    out["ratio"] = (e1 / e0) if e0 and e1 is not None else None
    out["perturbation"] = scale
    out["h"] = h
    return out
