"""Command-line entry point: ``spiralflow <command> [options]``.

Exit status: 0 on success, 1 when an asserted check fails (or a simulation
stops on step-size underflow), 2 on usage errors and unwritable outputs.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from . import __version__
from .analysis import simulation_report
from .claims import CLAIMS, report_json, run_all, run_claim
from .curve import gamma_logpolar, gamma_point, gamma_speed, tail_length
from .diffcheck import agreement_table, sample_annulus
from .export import dumps, trajectory_json, write_table, write_trajectory_csv
from .field import (
    DomainError,
    FieldHandle,
    amplitude_expr,
    b_polar,
    f_polar,
    g_polar,
)
from .field import eval as f_eval
from .flow import (
    IntegrationError,
    IntegratorConfig,
    Method,
    StopCondition,
    TrajectoryConvention,
    integrate,
    start_on_curve,
)
from .geom import PolarPoint

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GRADCHECK_SEED = 20240601


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    field: str = "spiral"
    convention: str = "polar_euclidean"
    integrator: IntegratorConfig = dc_field(default_factory=IntegratorConfig)
    stop: StopCondition = dc_field(default_factory=StopCondition)
    output: str = "-"
    format: str = "csv"
    options: dict = dc_field(default_factory=dict)


def _x0(text: str) -> PolarPoint:
    try:
        r, theta = (float(v) for v in text.split(","))
        return PolarPoint(r, theta)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'r,theta' with r > 0, got {text!r}") from exc


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(
        prog="spiralflow",
        description="Gradient flow of a flat spiral cost function: simulation and checks.",
        formatter_class=fmt,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def out_opts(sp, formats=("csv", "json"), default="csv"):
        sp.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
        sp.add_argument("--format", choices=formats, default=default, help="output format")

    sim = sub.add_parser("simulate", help="integrate the normalized descent flow", formatter_class=fmt)
    sim.add_argument("--field", default="spiral", choices=["spiral", "bowl", "paper-displayed"],
                     help="field to descend")
    sim.add_argument(
        "--convention", default="polar-euclidean",
        choices=["polar-euclidean", "polar-paper", "cartesian-euclidean"],
        help="chart and gradient convention",
    )
    sim.add_argument("--x0", type=_x0, default=None,
                     help="start point 'r,theta'; unset means the curve point at t=2")
    sim.add_argument("--rho-max", type=float, default=20.0, help="stop at rho = log(1/r) >= this")
    sim.add_argument("--grad-floor", type=float, default=1e-300,
                     help="stop when the factored gradient magnitude drops below this")
    sim.add_argument("--max-arclength", type=float, default=math.inf, help="arc length budget")
    sim.add_argument("--method", default="rk45_adaptive", choices=[m.value for m in Method],
                     help="integration scheme")
    sim.add_argument("--rel-tol", type=_positive, default=1e-10, help="relative step tolerance")
    sim.add_argument("--abs-tol", type=_positive, default=1e-12, help="absolute step tolerance")
    sim.add_argument("--h-init", type=_positive, default=1e-3, help="first step size")
    sim.add_argument("--h-min", type=_positive, default=1e-6, help="smallest allowed step")
    sim.add_argument("--h-max", type=_positive, default=0.5, help="largest allowed step")
    sim.add_argument("--max-steps", type=int, default=1_000_000, help="accepted-step budget")
    sim.add_argument("--ascent", action="store_true", help="follow +grad f instead of -grad f")
    sim.add_argument("--backend", default="auto", choices=["auto", "compiled", "python"],
                     help="integration kernel")
    sim.add_argument("--report", default=None, help="also write the geometry report (JSON) here")
    out_opts(sim)

    cl = sub.add_parser("claims", help="run the claim checks and emit a JSON report", formatter_class=fmt)
    g = cl.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", help="run every claim (default)")
    g.add_argument("--id", action="append", choices=list(CLAIMS), help="claim to run (repeatable)")
    out_opts(cl, formats=("json",), default="json")

    cu = sub.add_parser("curve", help="closed forms and tail length of the spiral curve", formatter_class=fmt)
    cu.add_argument("--t", type=float, action="append", default=None,
                    help="curve parameter t >= 2 (repeatable; default 2, e, e^e)")
    cu.add_argument("--tol", type=_positive, default=1e-10, help="tail quadrature tolerance")
    out_opts(cu)

    gc = sub.add_parser("gradcheck", help="dual-number vs finite-difference partials", formatter_class=fmt)
    gc.add_argument("--points", type=int, default=200, help="number of sample points")
    gc.add_argument("--seed", type=int, default=GRADCHECK_SEED, help="sampling seed")
    gc.add_argument("--h0", type=_positive, default=1e-5, help="initial finite-difference step")
    gc.add_argument("--rel", type=_positive, default=1e-6, help="relative agreement tolerance")
    gc.add_argument("--abs", dest="abs_", type=_positive, default=1e-9, help="absolute agreement tolerance")
    out_opts(gc)

    ef = sub.add_parser("export-figure", help="contour grid of f plus curve samples", formatter_class=fmt)
    ef.add_argument("--field", default="spiral", choices=["spiral", "bowl", "paper-displayed"],
                    help="field to sample")
    ef.add_argument("--nr", type=int, default=200, help="radial grid size over [1e-3, 0.5]")
    ef.add_argument("--ntheta", type=int, default=400, help="angular grid size over [0, 2 pi)")
    ef.add_argument("--gamma-samples", type=int, default=400, help="points along the curve")
    out_opts(ef)
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, output=args.output, format=args.format)
    if args.command == "simulate":
        try:
            cfg.integrator = IntegratorConfig(
                method=Method(args.method), rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                h_init=args.h_init, h_min=args.h_min, h_max=args.h_max, max_steps=args.max_steps,
            )
            cfg.stop = StopCondition(
                rho_max=args.rho_max, grad_floor=args.grad_floor,
                max_arclength=args.max_arclength,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        cfg.field = args.field
        cfg.convention = args.convention.replace("-", "_")
    if args.command == "export-figure":
        cfg.field = args.field
    cfg.options = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "output", "format")
    }
    return cfg


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


def _simulate(cfg: RunConfig, out) -> int:
    o = cfg.options
    h = FieldHandle.from_name(cfg.field)
    x0 = o["x0"] or start_on_curve(2.0)
    try:
        h.check_domain(x0.r)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    status = EXIT_OK
    try:
        traj = integrate(
            h, x0, TrajectoryConvention(cfg.convention), cfg.integrator, cfg.stop,
            ascent=o["ascent"], backend=o["backend"],
        )
    except IntegrationError as exc:
        print(f"spiralflow: {exc}", file=sys.stderr)
        traj = exc.trajectory
        status = EXIT_FAIL
    rep = simulation_report(traj, cfg.integrator.rel_tol) if len(traj) > 1 else None
    if cfg.format == "csv":
        write_trajectory_csv(out, traj)
    else:
        out.write(dumps(trajectory_json(traj, rep)))
    if o["report"]:
        with open(o["report"], "w") as fh:
            fh.write(dumps(rep))
    return status


def _claims(cfg: RunConfig, out) -> int:
    ids = cfg.options.get("id")
    records = [run_claim(c) for c in ids] if ids else run_all()
    out.write(report_json(records))
    failed = [r.id for r in records if not r.passed]
    if failed:
        print(f"spiralflow: failing claims: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _curve(cfg: RunConfig, out) -> int:
    ts = cfg.options["t"] or [2.0, math.e, math.exp(math.e)]
    rows = []
    for t in ts:
        if not t >= 2.0:
            raise UsageError(f"--t must be >= 2, got {t}")
        p = gamma_point(t)
        tl = tail_length(t, cfg.options["tol"])
        rows.append((t, p.r, p.theta, gamma_speed(t), tl.length, tl.ratio))
    cols = ("t", "r", "theta", "speed", "tail_length", "ratio")
    if cfg.format == "csv":
        write_table(out, cols, rows)
    else:
        out.write(dumps([dict(zip(cols, r)) for r in rows]))
    return EXIT_OK


def _gradcheck(cfg: RunConfig, out) -> int:
    o = cfg.options
    exprs = {"f": f_polar, "g": g_polar, "a": amplitude_expr, "b": b_polar}
    rows = agreement_table(exprs, sample_annulus(o["points"], o["seed"]), o["h0"], o["rel"], o["abs_"])
    cols = ("expr", "which", "r", "theta", "dual", "fd", "fd_error", "agree")
    if cfg.format == "csv":
        write_table(out, cols, ([r[c] for c in cols] for r in rows))
    else:
        out.write(dumps(rows))
    bad = sum(1 for r in rows if not r["agree"])
    print(f"spiralflow: {len(rows) - bad}/{len(rows)} partials agree", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def _export_figure(cfg: RunConfig, out) -> int:
    o = cfg.options
    if o["nr"] < 2 or o["ntheta"] < 1 or o["gamma_samples"] < 2:
        raise UsageError("grid sizes must be at least 2 (radial, curve) and 1 (angular)")
    h = FieldHandle.from_name(cfg.field)
    rs = np.geomspace(1e-3, 0.5, o["nr"])
    ths = np.arange(o["ntheta"]) * (2.0 * math.pi / o["ntheta"])
    rows = []
    for r in rs.tolist():
        for th in ths.tolist():
            v = f_eval(h, PolarPoint(r, th))
            rows.append(("grid", r, th, v.sign, v.log_magnitude))
    # curve samples over the same radial range
    for rho_t in np.linspace(math.log(2.0), math.log(1e3), o["gamma_samples"]).tolist():
        q = gamma_logpolar(rho_t)
        v = f_eval(h, PolarPoint(q.r, q.theta))
        rows.append(("gamma", q.r, q.theta, v.sign, v.log_magnitude))
    cols = ("series", "r", "theta", "f_sign", "f_log")
    if cfg.format == "csv":
        write_table(out, cols, rows)
    else:
        out.write(dumps({"field": h.kind.value, "columns": list(cols), "rows": rows}))
    return EXIT_OK


_COMMANDS = {
    "simulate": _simulate,
    "claims": _claims,
    "curve": _curve,
    "gradcheck": _gradcheck,
    "export-figure": _export_figure,
}


def execute(cfg: RunConfig) -> int:
    try:
        with _open_out(cfg.output) as out:
            return _COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"spiralflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"spiralflow: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        print(f"spiralflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
