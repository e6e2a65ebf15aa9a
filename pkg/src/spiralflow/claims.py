"""Executable checks of the construction's displayed statements.

Each claim produces a :class:`ClaimRecord`. ``assert`` claims carry a
pass/fail verdict at a stated tolerance; ``report`` claims record an oracle
comparison or a measurement without judging it (verdict ``info``).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .analysis import gamma_samples, geometry_report, length_distance_series, on_curve_residual
from .curve import gamma_point, gamma_speed, secant_angle_closed_form, tail_length
from .diffcheck import Dual, cos, log, sin
from .field import FieldHandle, paper_expr, polar_partials
from .field import eval as f_eval
from .flow import (
    IntegrationError,
    IntegratorConfig,
    StopCondition,
    integrate,
    start_on_curve,
    tangency_residual,
)
from .geom import TWO_PI, PolarPoint

ASSERT = "assert"
REPORT = "report"

DEFAULTS = {
    "r_grid": {"lo": 1e-3, "hi": 0.5, "n": 100},
    "r_grid_representable": {"lo": 0.05, "hi": 0.5, "n": 100},
    "t_grid": {"lo": 2.0, "hi": 1e6, "n": 50},
    "speed_t_grid": {"lo": 2.0, "hi": 1e9, "n": 1000},
    "winding_k": [1, 2, 3],
    "simulate": {"t0": 2.0, "rho_max": 20.0, "rel_tol": 1e-10, "abs_tol": 1e-12},
}

TOL = {
    "C2": 1e-13,
    "C3": 1e-10,
    "C4": 1e-4,
    "C5": 1e-12,
    "C6": 1e-13,
    "C7": 1e-10,
    "C9": 1e-12,
    "C12": 1e-9,
}


def _geom(spec: dict) -> list[float]:
    return [float(v) for v in np.geomspace(spec["lo"], spec["hi"], spec["n"])]


def _grid_text(name: str, spec: dict) -> str:
    return f"{spec['n']} log-spaced {name} in [{spec['lo']:g}, {spec['hi']:g}]"


def _finite(x):
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


@dataclass
class ClaimRecord:
    id: str
    kind: str
    paper_ref: str
    inputs: str
    paper_value: object
    oracle_value: object
    residual: float
    tolerance: float
    verdict: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == ASSERT and self.verdict not in ("pass", "fail"):
            raise ValueError("assert claims need a pass/fail verdict")
        if self.kind == REPORT and self.verdict != "info":
            raise ValueError("report claims have verdict 'info'")

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_json(self) -> dict:
        return _finite(asdict(self))


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


# -- curve claims -------------------------------------------------------------


def _c1(g):
    ts = _geom(g["t_grid"])
    rs = [gamma_point(t).r for t in ts]
    decreasing = all(b < a for a, b in zip(rs, rs[1:]))
    # far along the curve, r = exp(-rho_t) keeps going to zero
    deep = [math.exp(-rho) for rho in (10.0, 100.0, 700.0)]
    ok = decreasing and all(b < a for a, b in zip(deep, deep[1:])) and rs[-1] < rs[0]
    return ClaimRecord(
        "C1", ASSERT, "r(t) = 1/t -> 0",
        _grid_text("t", g["t_grid"]) + "; rho_t in {10, 100, 700}",
        0.0, rs[-1], rs[-1], 0.0, _verdict(ok),
        {"r_first": rs[0], "r_last": rs[-1], "strictly_decreasing": decreasing, "r_deep": deep},
    )


def _speed_from_polar(t: float) -> float:
    T = Dual(t, 1.0)
    r = 1.0 / T
    th = log(log(T))
    return math.sqrt(r.deriv * r.deriv + (r.value * th.deriv) ** 2)


def _speed_from_cartesian(t: float) -> float:
    T = Dual(t, 1.0)
    r = 1.0 / T
    th = log(log(T))
    return math.hypot((r * cos(th)).deriv, (r * sin(th)).deriv)


def _c2(g):
    ts = _geom(g["speed_t_grid"])
    tol = TOL["C2"]
    worst_id = worst_polar = worst_cart = 0.0
    for t in ts:
        v = gamma_speed(t)
        L = math.log(t)
        worst_id = max(worst_id, _rel(v * v * t ** 4, 1.0 + 1.0 / (L * L)))
        worst_polar = max(worst_polar, _rel(_speed_from_polar(t), v))
        worst_cart = max(worst_cart, _rel(_speed_from_cartesian(t), v))
    residual = max(worst_id, worst_polar, worst_cart)
    return ClaimRecord(
        "C2", ASSERT, "sqrt(r'(t)^2 + r(t)^2 theta'(t)^2)",
        _grid_text("t", g["speed_t_grid"]),
        gamma_speed(2.0), _speed_from_cartesian(2.0), residual, tol,
        _verdict(residual <= tol),
        {
            "identity_residual": worst_id,
            "polar_dual_residual": worst_polar,
            "cartesian_dual_residual": worst_cart,
        },
    )


def _tails(g):
    out = []
    for s in _geom(g["t_grid"]):
        out.append(tail_length(s, tol=TOL["C3"] / s))
    return out


def _c3(g):
    tails = _tails(g)
    lo_margin = min((r.length - r.lower_bound) * r.s for r in tails)
    hi_margin = min((r.upper_bound - r.length) * r.s for r in tails)
    ok = all(r.lower_bound <= r.length <= r.upper_bound for r in tails)
    ok = ok and all(r.abs_error_estimate <= TOL["C3"] / r.s for r in tails)
    return ClaimRecord(
        "C3", ASSERT, "1/s <= sigma(s) <= 1/s + (1/s)(1/log^2(s))",
        _grid_text("s", g["t_grid"]),
        [r.upper_bound for r in tails], [r.length for r in tails],
        min(lo_margin, hi_margin), TOL["C3"], _verdict(ok),
        {"min_scaled_margin_lower": lo_margin, "min_scaled_margin_upper": hi_margin},
    )


def _c4(g):
    tails = _tails(g)
    ratios = [r.ratio for r in tails]
    bounds = [1.0 + 1.0 / math.log(r.s) ** 2 for r in tails]
    inside = all(1.0 <= q <= b for q, b in zip(ratios, bounds))
    decreasing = all(b <= a for a, b in zip(ratios, ratios[1:]))
    ends_below = ratios[-1] < bounds[-1]

    # the same ratio measured by the path analyzer on closed-form samples
    t_hi = g["t_grid"]["hi"]
    rho_t = np.linspace(math.log(2.0), 2.0 * math.log(t_hi), 20000)
    ld = length_distance_series(gamma_samples(rho_t))
    mask = rho_t <= math.log(t_hi)
    chord_bound = 1.0 + 1.0 / rho_t[mask] ** 2
    excess = float(np.max(ld.ratio[mask] - chord_bound))
    slack = TOL["C4"]
    chord_ok = bool(np.all(ld.ratio[mask] >= 1.0 - 1e-12)) and excess <= slack
    ok = inside and decreasing and ends_below and chord_ok
    return ClaimRecord(
        "C4", ASSERT, "1 + 1/log^2(s) -> 1",
        _grid_text("s", g["t_grid"]) + "; analyzer on 20000 closed-form samples",
        bounds, ratios, max(q - b for q, b in zip(ratios, bounds)), slack, _verdict(ok),
        {
            "inside_bracket": inside,
            "nonincreasing": decreasing,
            "final_ratio": ratios[-1],
            "final_bound": bounds[-1],
            "analyzer_max_excess_over_bound": excess,
        },
    )


def _c5(g):
    ks = list(g["winding_k"])
    angles = [secant_angle_closed_form(math.exp(TWO_PI * k)) for k in ks]
    expect = [TWO_PI * k for k in ks]
    residual = max(abs(a - e) for a, e in zip(angles, expect))
    # analyzer on closed-form samples from t = e (angle 0) to rho_t = e^{2 pi k}
    windings = []
    tangent = []
    for k in ks:
        rep = geometry_report(gamma_samples(np.exp(np.linspace(0.0, TWO_PI * k, 2001))))
        windings.append(rep.winding_count)
        tangent.append(rep.tangent_exists)
    wres = max(abs(w - k) for w, k in zip(windings, ks))
    ok = residual <= TOL["C5"] and wres <= 1e-3 and not any(tangent)
    return ClaimRecord(
        "C5", ASSERT, "theta(t) = log(log(t))",
        f"rho_t = exp(2 pi k), k in {ks}",
        expect, angles, residual, TOL["C5"], _verdict(ok),
        {"winding_counts": windings, "tangent_exists": tangent},
    )


# -- field identities ---------------------------------------------------------


def _on_gamma(r: float) -> PolarPoint:
    return PolarPoint(r, math.log(-math.log(r)))


def _c6(g):
    h = FieldHandle.spiral()
    worst = 0.0
    for t in _geom(g["t_grid"]):
        p = gamma_point(t)
        v = f_eval(h, p)
        expect = -1.0 / p.r
        worst = max(worst, abs(v.log_magnitude - expect) / abs(expect) if v.sign == 1 else math.inf)
    v2 = f_eval(h, gamma_point(2.0))
    return ClaimRecord(
        "C6", ASSERT, "f|gamma = e^(-1/r)", _grid_text("t", g["t_grid"]),
        math.exp(-2.0), v2.to_float(), worst, TOL["C6"], _verdict(worst < TOL["C6"]),
    )


def _c7(g):
    h = FieldHandle.spiral()
    rs = _geom(g["r_grid_representable"])
    paper, oracle, worst = [], [], 0.0
    for r in rs:
        pv = paper_expr("ftheta_on_gamma", r)
        ov = polar_partials(h, _on_gamma(r)).f_theta
        paper.append(pv.to_float())
        oracle.append(ov.to_float())
        worst = max(worst, pv.rel_diff(ov))
    return ClaimRecord(
        "C7", ASSERT, "-e^(-1/r) log(1/r) / (1 + r^2 log^2(1/r))",
        _grid_text("r", g["r_grid_representable"]),
        paper, oracle, worst, TOL["C7"], _verdict(worst <= TOL["C7"]),
    )


def _c8(g):
    spiral = FieldHandle.spiral()
    displayed = FieldHandle.paper_displayed()
    rs = _geom(g["r_grid"])
    paper_lm, oracle_lm, rel = [], [], []
    worst_displayed = 0.0
    for r in rs:
        pv = paper_expr("fr_on_gamma", r)
        ov = polar_partials(spiral, _on_gamma(r)).f_r
        paper_lm.append(pv.log_magnitude)
        oracle_lm.append(ov.log_magnitude)
        rel.append(pv.rel_diff(ov))
        worst_displayed = max(worst_displayed, pv.rel_diff(polar_partials(displayed, _on_gamma(r)).f_r))
    p05 = paper_expr("fr_on_gamma", 0.5).to_float()
    o05 = polar_partials(spiral, _on_gamma(0.5)).f_r.to_float()
    return ClaimRecord(
        "C8", REPORT, "log^2(1/r) / (1 + r^2 log^2(1/r)) times e^(-1/r)",
        _grid_text("r", g["r_grid"]) + "; values are log magnitudes",
        paper_lm, oracle_lm, max(rel), 0.0, "info",
        {
            "at_r_0.5": {"paper_value": p05, "oracle_value": o05, "residual": abs(p05 - o05) / abs(o05)},
            "relative_residuals": rel,
            "displayed_field_vs_formula_residual": worst_displayed,
        },
    )


def _c9(g):
    rs = _geom(g["r_grid"])
    worst_r, worst_t = 0.0, 0.0
    lhs_r, rhs_r = [], []
    for r in rs:
        L = -math.log(r)
        b = paper_expr("b", r)
        fr = paper_expr("fr_on_gamma", r)
        ft = paper_expr("ftheta_on_gamma", r)
        # b(r) (-r^2, r/log(1/r)) against (-f_r, -f_theta / r)
        left_r = b * (r * r)
        left_t = b * (-r / L)
        worst_r = max(worst_r, left_r.rel_diff(fr))
        worst_t = max(worst_t, left_t.rel_diff(ft / r))
        lhs_r.append(left_r.log_magnitude)
        rhs_r.append(fr.log_magnitude)
    residual = max(worst_r, worst_t)
    return ClaimRecord(
        "C9", ASSERT, "b(r) r^2 = df/dr",
        _grid_text("r", g["r_grid"]) + "; values are log magnitudes of b r^2 and f_r|gamma",
        rhs_r, lhs_r, residual, TOL["C9"], _verdict(residual <= TOL["C9"]),
        {"radial_residual": worst_r, "angular_residual": worst_t},
    )


def _c10(g):
    rs = _geom(g["r_grid"]) + [0.5]
    vals = [paper_expr("b", r) for r in rs]
    ok = all(v.sign == 1 and math.isfinite(v.log_magnitude) for v in vals)
    lm = [v.log_magnitude for v in vals]
    return ClaimRecord(
        "C10", ASSERT, "b(r) > 0 for all 0 < r <= 1/2",
        _grid_text("r", g["r_grid"]) + " plus r = 0.5; values are log b",
        0.0, lm, min(lm), 0.0, _verdict(ok),
        {"min_sign": min(v.sign for v in vals)},
    )


def _c11(g):
    rs = sorted((r for r in _geom(g["r_grid"]) if r <= 0.01), reverse=True)
    rs += [math.exp(-rho) for rho in np.linspace(5.0, 690.0, 60)[1:]]
    rs = sorted(set(rs), reverse=True)
    seqs = {}
    for name in ("fr_on_gamma", "ftheta_on_gamma"):
        seqs[name] = [paper_expr(name, r).log_magnitude for r in rs]
    steps = {k: max(b - a for a, b in zip(v, v[1:])) for k, v in seqs.items()}
    mono = all(s < 0.0 for s in steps.values())
    # flatness: |f_r| / r^k -> 0 for each k <= 10
    flat = {}
    for k in range(1, 11):
        w = [lm - k * math.log(r) for lm, r in zip(seqs["fr_on_gamma"], rs)]
        flat[k] = max(b - a for a, b in zip(w, w[1:]))
    flat_ok = all(v < 0.0 for v in flat.values())
    residual = max(max(steps.values()), max(flat.values()))
    return ClaimRecord(
        "C11", ASSERT, "grad f(0) = 0",
        f"{len(rs)} radii in [{rs[-1]:.3g}, 0.01], decreasing; flatness exponents k = 1..10",
        "-inf", seqs["fr_on_gamma"][-1], residual, 0.0, _verdict(mono and flat_ok),
        {
            "max_step_log_fr": steps["fr_on_gamma"],
            "max_step_log_ftheta": steps["ftheta_on_gamma"],
            "final_log_ftheta": seqs["ftheta_on_gamma"][-1],
            "max_step_flatness": {str(k): v for k, v in flat.items()},
        },
    )


# -- tangency -----------------------------------------------------------------


def _profile(h, conv, ts):
    out = []
    for t in ts:
        try:
            out.append(tangency_residual(h, conv, t))
        except ArithmeticError:
            out.append(math.nan)
    return out


def _c12(g):
    h = FieldHandle.paper_displayed()
    ts = _geom(g["t_grid"])
    angles = _profile(h, "paper", ts)
    residual = max(angles)
    deep = [tangency_residual(h, "paper", rho_t=rho) for rho in (50.0, 1e3, 1e5, 1e8)]
    return ClaimRecord(
        "C12", ASSERT, "grad f(gamma(t)) x gamma'(t) = 0",
        _grid_text("t", g["t_grid"]) + "; paper-displayed field, paper convention",
        0.0, angles, residual, TOL["C12"], _verdict(residual < TOL["C12"]),
        {
            "deep_rho_t": [50.0, 1e3, 1e5, 1e8],
            "deep_residuals": deep,
            "euclidean_convention": _profile(h, "euclidean", ts),
        },
    )


def _c13(g):
    h = FieldHandle.spiral()
    ts = _geom(g["t_grid"])
    angles = _profile(h, "euclidean", ts)
    return ClaimRecord(
        "C13", REPORT, "x(s) in gamma",
        _grid_text("t", g["t_grid"]) + "; oracle field, euclidean convention",
        0.0, angles, max(angles), 0.0, "info",
        {"paper_convention": _profile(h, "paper", ts)},
    )


def _simulate(h, conv, spec):
    cfg = IntegratorConfig(rel_tol=spec["rel_tol"], abs_tol=spec["abs_tol"])
    stop = StopCondition(rho_max=spec["rho_max"])
    try:
        return integrate(h, start_on_curve(spec["t0"]), conv, cfg, stop)
    except IntegrationError as exc:
        return exc.trajectory


def _sim_summary(traj) -> dict:
    rep = geometry_report(traj)
    resid = on_curve_residual(traj)
    ratios = [q for _, q in rep.ratio_series]
    idx = np.unique(np.linspace(0, len(ratios) - 1, 11).round().astype(int))
    return {
        "stop_reason": traj.stop_reason.value,
        "n_samples": len(traj),
        "final_rho": float(traj.rho[-1]),
        "final_theta": float(traj.theta[-1]),
        "arc_length": float(traj.s[-1]),
        "winding_count": rep.winding_count,
        "oscillation": rep.oscillation,
        "tangent_exists": rep.tangent_exists,
        "terminal_gap": rep.terminal_gap,
        "ratio_series_s": [rep.ratio_series[i][0] for i in idx],
        "ratio_series": [ratios[i] for i in idx],
        "on_curve_residual_max": float(np.max(resid)),
        "on_curve_residual_final": float(resid[-1]),
    }


def _c14(g):
    spec = g["simulate"]
    oracle = _sim_summary(_simulate(FieldHandle.spiral(), "polar_euclidean", spec))
    displayed = _sim_summary(_simulate(FieldHandle.paper_displayed(), "polar_paper", spec))
    # gamma itself over the same radial range
    rho0 = math.log(spec["t0"])
    gamma_winding = (math.log(spec["rho_max"]) - math.log(rho0)) / TWO_PI
    return ClaimRecord(
        "C14", REPORT, "sigma(s) / |x(s)|",
        f"start gamma({spec['t0']:g}), rho_max = {spec['rho_max']:g}, "
        f"rel_tol = {spec['rel_tol']:g}; oracle field polar_euclidean and "
        "paper-displayed field polar_paper",
        gamma_winding, oracle["winding_count"],
        abs(oracle["winding_count"] - gamma_winding), 0.0, "info",
        {"oracle_polar_euclidean": oracle, "paper_displayed_polar_paper": displayed},
    )


CLAIMS: dict[str, Callable[[dict], ClaimRecord]] = {
    "C1": _c1, "C2": _c2, "C3": _c3, "C4": _c4, "C5": _c5, "C6": _c6, "C7": _c7,
    "C8": _c8, "C9": _c9, "C10": _c10, "C11": _c11, "C12": _c12, "C13": _c13, "C14": _c14,
}
CLAIM_KINDS = {
    cid: (REPORT if cid in ("C8", "C13", "C14") else ASSERT) for cid in CLAIMS
}


def _grids(overrides: dict) -> dict:
    g = json.loads(json.dumps(DEFAULTS))
    for k, v in overrides.items():
        if k not in g:
            raise KeyError(f"unknown grid {k!r}; expected one of {sorted(g)}")
        g[k] = {**g[k], **v} if isinstance(g[k], dict) and isinstance(v, dict) else v
    return g


def run_claim(cid: str, **overrides) -> ClaimRecord:
    """Run one claim; any exception becomes a ``fail`` record with the message."""
    cid = cid.upper()
    if cid not in CLAIMS:
        raise KeyError(f"unknown claim {cid!r}")
    grids = _grids(overrides)
    try:
        return CLAIMS[cid](grids)
    except Exception as exc:  # noqa: BLE001
        return ClaimRecord(
            cid, CLAIM_KINDS[cid], "", "", None, None, math.nan, 0.0,
            "fail" if CLAIM_KINDS[cid] == ASSERT else "info",
            {"error": f"{type(exc).__name__}: {exc}"},
        )


def run_all(**overrides) -> list[ClaimRecord]:
    return [run_claim(cid, **overrides) for cid in CLAIMS]


def config_digest(**overrides) -> str:
    payload = json.dumps(
        {"grids": _grids(overrides), "tolerances": TOL, "version": __version__},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def report(records: list[ClaimRecord], **overrides) -> dict:
    digest = config_digest(**overrides)
    return {
        "run_id": "run-" + digest[:16],
        "config_digest": digest,
        "claims": [r.to_json() for r in records],
    }


def report_json(records: list[ClaimRecord], **overrides) -> str:
    return json.dumps(report(records, **overrides), sort_keys=True, indent=2) + "\n"
