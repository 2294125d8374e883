"""Command line front end: verify, region, converge, solve, replay."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .converge import REFERENCE_FACTOR, REFERENCE_METHOD, convergence_study, self_reference, starting_sensitivity
from .integrator import STARTING_MODES, StepFailure, integrate
from .problems import PROBLEMS, get_problem
from .ssp import ssp_coefficient
from .stability import PolarGrid, a_stability_check, l_stability_check, region_S_alpha, region_S_alpha_y, region_SE
from .tableau import CATALOG_NAMES, UnknownMethodError, catalog, verify_order

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def _clean(o):
    # json has no inf/nan; keep them readable and deterministic
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return str(float(o))
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    return o


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


@dataclass
class RunManifest:
    command: str
    argv: list
    methods: list = field(default_factory=list)
    problem: str | None = None
    overrides: dict = field(default_factory=dict)
    h: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int = 0
    version: str = __version__

    def write(self, out: Path) -> Path:
        """Output paths are stored relative to ``out`` and ``--out`` is
        dropped from ``argv``, so a replay elsewhere gives an identical file."""
        d = asdict(self)
        d["argv"] = _strip_out(self.argv)
        d["outputs"] = [str(Path(p).relative_to(out)) if Path(p).is_relative_to(out) else p for p in self.outputs]
        path = out / "manifest.json"
        write_json(path, d)
        return path


# ---------------------------------------------------------------------------
# verify


def _method(name: str):
    return catalog(name)


def verify_method(name: str, grid: PolarGrid | None = None) -> dict:
    grid = grid or PolarGrid()
    t = _method(name)
    order = verify_order(t)
    cert = ssp_coefficient(t)
    a_rep = a_stability_check(t)
    l_rep = l_stability_check(t, a_rep)
    se = region_SE(t, grid)
    sa = region_S_alpha(t, math.pi / 2, grid=grid)
    return {
        "method": t.name,
        "s": t.s,
        "p": t.p,
        "lambda": t.lam,
        "order_residuals": order.as_dict(),
        "ssp": cert.as_dict(),
        "a_stability": a_rep.as_dict(),
        "l_stability": l_rep.as_dict(),
        "S_E": se.summary(),
        "S_pi2": sa.summary(),
        "table": {
            "C": cert.C,
            "C_eff": cert.C_eff,
            "area_SE": se.area,
            "area_Spi2": sa.area,
            "int_SE": se.interval[0],
            "int_Spi2": sa.interval[0],
            "A_stable": a_rep.a_stable,
            "L_stable": l_rep.l_stable,
        },
        "area_S_RK": "not computed",
    }


TABLE_COLUMNS = ("C", "C_eff", "area_SE", "area_Spi2", "int_SE", "int_Spi2", "A_stable", "L_stable")


def load_expected(spec: str) -> dict:
    if spec == "published":
        text = resources.files("imexdimsim").joinpath("data/published_tables.json").read_text()
    else:
        text = Path(spec).read_text()
    return json.loads(text)


def compare_expected(table: dict, expected: dict) -> list[str]:
    """Mismatch messages; entries are ``{"value": v, "tol": t}`` or plain values."""
    out = []
    for method, cols in expected.items():
        if method not in table:
            continue
        for key, want in cols.items():
            got = table[method].get(key)
            if isinstance(want, dict):
                if got is None or abs(got - want["value"]) > want["tol"]:
                    out.append(f"{method} {key}: got {fmt(got)}, expected {want['value']} +- {want['tol']}")
            elif got != want:
                out.append(f"{method} {key}: got {got}, expected {want}")
    return out


def cmd_verify(args) -> int:
    out = Path(args.out)
    names = list(CATALOG_NAMES) if args.all else args.methods
    if not names:
        print("verify: give method names or --all", file=sys.stderr)
        return EXIT_ERROR
    try:
        tabs = [_method(n) for n in names]
    except UnknownMethodError as exc:
        print(f"verify: {exc.args[0]}", file=sys.stderr)
        return EXIT_ERROR
    manifest = RunManifest("verify", args.argv, methods=[t.name for t in tabs], seed=args.seed)
    if args.ssp:
        certs = {t.name: ssp_coefficient(t).as_dict() for t in tabs}
        path = out / "ssp.json"
        write_json(path, certs)
        manifest.outputs.append(str(path))
        manifest.write(out)
        print(json.dumps(_clean(certs), indent=2, sort_keys=True))
        return EXIT_OK
    table = {}
    for t in tabs:
        tic = time.perf_counter()
        rep = verify_method(t.name)
        path = out / f"verify_{t.name}.json"
        write_json(path, rep)
        manifest.outputs.append(str(path))
        table[t.name] = rep["table"]
        print(f"{t.name}: " + " ".join(f"{k}={fmt(v)}" for k, v in rep["table"].items()), flush=True)
        print(f"  ({time.perf_counter() - tic:.1f} s)", file=sys.stderr)
    path = out / "table.csv"
    write_csv(path, ("method",) + TABLE_COLUMNS, [[m] + [row[c] for c in TABLE_COLUMNS] for m, row in table.items()])
    manifest.outputs.append(str(path))
    code = EXIT_OK
    if args.expect:
        mism = compare_expected(table, load_expected(args.expect))
        write_json(out / "mismatches.json", mism)
        manifest.outputs.append(str(out / "mismatches.json"))
        for m in mism:
            print("MISMATCH " + m)
        code = EXIT_MISMATCH if mism else EXIT_OK
    manifest.write(out)
    return code


# ---------------------------------------------------------------------------
# region


REGION_KINDS = ("SE", "Salpha_y", "Salpha")


def cmd_region(args) -> int:
    out = Path(args.out)
    t = _method(args.method)
    grid = PolarGrid(n_angles=args.n_angles)
    alpha = math.radians(args.alpha) if args.alpha is not None else None
    if args.kind != "SE":
        if alpha is None or not (0 < alpha <= math.pi / 2 + 1e-15):
            print("region: --alpha must lie in (0, 90] degrees", file=sys.stderr)
            return EXIT_ERROR
        alpha = min(alpha, math.pi / 2)
    if args.kind == "SE":
        reg = region_SE(t, grid)
    elif args.kind == "Salpha_y":
        reg = region_S_alpha_y(t, alpha, args.y, grid)
    else:
        reg = region_S_alpha(t, alpha, grid=grid)
    stem = f"region_{t.name}_{args.kind}"
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    b = reg.boundary
    write_csv(csv_path, ("theta", "boundary_re", "boundary_im"), zip(reg.theta, b.real, b.imag))
    summary = reg.summary()
    summary["method"] = t.name
    write_json(json_path, summary)
    RunManifest("region", args.argv, methods=[t.name], overrides={"kind": args.kind, "alpha_deg": args.alpha, "y": args.y}, outputs=[str(csv_path), str(json_path)], seed=args.seed).write(out)
    print(f"{t.name} {args.kind}: area={fmt(reg.area)} interval=({fmt(reg.interval[0])}, 0) flags={reg.flags}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# converge / solve


def problem_overrides(args) -> dict:
    kw = {"t_end": args.t_end}
    if args.problem == "test":
        kw.update(lambda0=args.lambda0, lambda1=args.lambda1)
    elif args.problem == "stiff_relaxation":
        kw.update(eps=args.epsilon)
    elif args.problem == "shallow_water":
        kw.update(N=args.N, epsilon=args.epsilon)
    elif args.problem in ("advection_reaction", "adsorption_desorption"):
        kw.update(N=args.N)
    return {k: v for k, v in kw.items() if v is not None}


def step_list(args) -> list[float]:
    hs = [float(h) for h in args.h]
    if args.halvings:
        if len(hs) != 1:
            raise ValueError("--halvings needs exactly one --h")
        hs = [hs[0] / 2**k for k in range(args.halvings + 1)]
    return hs


def cmd_converge(args) -> int:
    out = Path(args.out)
    t = _method(args.method)
    kw = problem_overrides(args)
    prob = get_problem(args.problem, **kw)
    hs = step_list(args)
    tic = time.perf_counter()
    if prob.reference is not None:
        ref, label = np.asarray(prob.reference(prob.t_span[1])), "exact"
    else:
        ref = self_reference(prob, min(hs), args.reference_method, args.reference_factor)
        label = f"{args.reference_method} at h_min/{args.reference_factor}"
    rep = convergence_study(t, prob, hs, reference=ref, starting=args.starting, reference_label=label)
    if args.sensitivity:
        rep.sensitivity = starting_sensitivity(t, prob, min(hs), ref, seed=args.seed)
    stem = f"converge_{t.name}_{prob.name}"
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    write_csv(csv_path, ("h", "error", "order", "failure"), [(r.h, r.error, r.order, r.failure or "") for r in rep.rows])
    summary = rep.as_dict()
    for row in summary["rows"]:
        row.pop("wall_time", None)
    write_json(json_path, summary)
    RunManifest("converge", args.argv, methods=[t.name], problem=prob.name, overrides=kw, h=hs, outputs=[str(csv_path), str(json_path)], seed=args.seed).write(out)
    for r in rep.rows:
        print(f"h={fmt(r.h)} error={fmt(r.error)} order={fmt(r.order)} {r.failure or ''}".rstrip())
    print(f"least-squares order: {fmt(rep.order)}")
    print(f"  ({time.perf_counter() - tic:.1f} s)", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    out = Path(args.out)
    t = _method(args.method)
    kw = problem_overrides(args)
    prob = get_problem(args.problem, **kw)
    h = float(args.h[0])
    try:
        res = integrate(t, prob, h, starting=args.starting)
    except StepFailure as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_ERROR
    comps = range(prob.m) if args.components is None else [int(c) for c in args.components.split(",")]
    Y = res.y[:, list(comps)]
    if np.iscomplexobj(Y):
        header = ["t"] + [f"{p}{i}" for i in comps for p in ("re_y", "im_y")]
        rows = [[tt] + [v for z in yy for v in (z.real, z.imag)] for tt, yy in zip(res.t, Y)]
    else:
        header = ["t"] + [f"y{i}" for i in comps]
        rows = [[tt, *yy] for tt, yy in zip(res.t, Y)]
    stem = f"solve_{t.name}_{prob.name}"
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    write_csv(csv_path, header, rows)
    write_json(json_path, {"method": t.name, "problem": prob.name, "h": h, "steps": res.state.n_steps, "counters": res.counters(), "starting": args.starting})
    RunManifest("solve", args.argv, methods=[t.name], problem=prob.name, overrides=kw, h=[h], outputs=[str(csv_path), str(json_path)], seed=args.seed).write(out)
    last = res.y[-1]
    print(f"{t.name} on {prob.name}: t={fmt(res.t[-1])} y[0]={fmt(last[0])} counters={res.counters()}")
    print(f"  wall time {res.wall_time:.3f} s", file=sys.stderr)
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    argv = _replace_out(manifest["argv"], args.out or "out")
    return main(argv)


def _strip_out(argv):
    argv = list(argv)
    for i, a in enumerate(argv):
        if a == "--out":
            return argv[:i] + argv[i + 2 :]
        if a.startswith("--out="):
            return argv[:i] + argv[i + 1 :]
    return argv


def _replace_out(argv, out):
    argv = list(argv)
    if "--out" in argv:
        argv[argv.index("--out") + 1] = out
    else:
        argv += ["--out", out]
    return argv


# ---------------------------------------------------------------------------


def _complex(text: str) -> complex:
    z = complex(text.replace("i", "j"))
    return z.real if z.imag == 0 else z


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imexdimsim", description="IMEX DIMSIM analysis and integration")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="order, SSP, A/L-stability and region summaries")
    v.add_argument("methods", nargs="*")
    v.add_argument("--method", dest="extra_methods", action="append", default=[])
    v.add_argument("--all", action="store_true")
    v.add_argument("--ssp", action="store_true", help="only the SSP certificate")
    v.add_argument("--expect", help="expected table JSON, or 'published'")
    common(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("region", help="stability region boundary and area")
    r.add_argument("--method", required=True)
    r.add_argument("--kind", choices=REGION_KINDS, default="SE")
    r.add_argument("--alpha", type=float, help="wedge angle in degrees")
    r.add_argument("--y", type=float, default=0.0)
    r.add_argument("--n-angles", type=int, default=720)
    common(r)
    r.set_defaults(func=cmd_region)

    for name, func, helptext in (("converge", cmd_converge, "error-versus-stepsize study"), ("solve", cmd_solve, "single fixed-step run")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("--method", required=True)
        c.add_argument("--problem", choices=sorted(PROBLEMS), required=True)
        c.add_argument("--h", nargs="+", required=True)
        c.add_argument("--N", type=int)
        c.add_argument("--epsilon", type=float)
        c.add_argument("--t-end", type=float)
        c.add_argument("--lambda0", type=_complex, default=0.0)
        c.add_argument("--lambda1", type=_complex, default=0.0)
        c.add_argument("--starting", choices=STARTING_MODES, default="bootstrap")
        if name == "converge":
            c.add_argument("--halvings", type=int, default=0, help="expand a single --h into a halving sequence")
            c.add_argument("--reference-method", default=REFERENCE_METHOD)
            c.add_argument("--reference-factor", type=int, default=REFERENCE_FACTOR)
            c.add_argument("--sensitivity", action="store_true", help="report starting-vector sensitivity")
        else:
            c.add_argument("--components", help="comma separated state indices to write")
        common(c)
        c.set_defaults(func=func)

    rp = sub.add_parser("replay", help="rerun a manifest")
    rp.add_argument("manifest")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    if getattr(args, "extra_methods", None):
        args.methods = list(args.methods) + args.extra_methods
    try:
        return args.func(args)
    except UnknownMethodError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, StepFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
