"""Exit criteria 1-7, one PASS/FAIL line each.

Run with ``pytest -m acceptance -s`` (lines also appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from spiralflow.analysis import chord_lengths, descent_violations, length_distance_series
from spiralflow.claims import TOL, report_json, run_all, run_claim
from spiralflow.cli import GRADCHECK_SEED, main
from spiralflow.diffcheck import agreement_table, sample_annulus
from spiralflow.field import FieldHandle, amplitude_expr, b_polar, f_polar, g_polar
from spiralflow.flow import IntegratorConfig, StopCondition, integrate
from spiralflow.geom import PolarPoint

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, tuple[bool, str]] = {}


def _record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def _claims(ids, kind="pass"):
    recs = [run_claim(c) for c in ids]
    bad = [r.id for r in recs if r.verdict != kind]
    return recs, bad


def criterion_1():
    recs, bad = _claims(["C1", "C2", "C3", "C4", "C5"])
    verdicts = ", ".join(f"{r.id} {r.verdict}" for r in recs)
    return not bad, f"curve claims ({verdicts})"


def criterion_2():
    recs, bad = _claims(["C6", "C7", "C9", "C10", "C11"])
    info, bad_info = _claims(["C8", "C13"], kind="info")
    has_resid = all(r.residual is not None for r in info)
    ok = not bad and not bad_info and has_resid
    return ok, (
        "identity claims C6 C7 C9 C10 C11 pass; C8 C13 info with residuals "
        + ", ".join(f"{r.id} {r.residual:.2e}" for r in info)
        + (f"; failing {bad + bad_info}" if bad or bad_info else "")
    )


def criterion_3():
    rec = run_claim("C12")
    ok = rec.verdict == "pass" and rec.residual < 1e-9 and rec.tolerance <= 1e-9
    return ok, f"C12 max tangency angle {rec.residual:.2e} rad (< 1e-9) over 50 t in [2, 1e6]"


def criterion_4():
    exprs = {"f": f_polar, "g": g_polar, "a": amplitude_expr, "b": b_polar}
    pts = sample_annulus(200, GRADCHECK_SEED)
    ok_range = all(0.05 <= p.r <= 0.5 for p in pts)
    rows = agreement_table(exprs, pts, rel=1e-6, abs_=1e-9)
    n_bad = sum(not r["agree"] for r in rows)
    return ok_range and n_bad == 0, f"dual vs finite difference {len(rows) - n_bad}/{len(rows)} agree"


def criterion_5():
    bowl = FieldHandle.bowl()
    x0 = PolarPoint(0.5, 0.9272952)
    cfg = IntegratorConfig()
    stop = StopCondition(rho_max=math.log(1e6))
    lp = integrate(bowl, x0, "polar_euclidean", cfg, stop)
    ca = integrate(bowl, x0, "cartesian_euclidean", cfg, stop)
    checks = {}
    checks["r<=1e-6"] = lp.r[-1] <= 1e-6 * (1 + 1e-12)
    checks["secant"] = float(np.max(np.abs(np.arctan2(lp.y, lp.x) - 0.9272952))) <= 1e-9
    checks["ratio"] = float(np.max(np.abs(length_distance_series(lp).ratio - 1.0))) <= 1e-9
    checks["descent"] = descent_violations(lp, 10 * cfg.rel_tol) == 0
    ds = np.diff(lp.s)
    checks["chord"] = bool(np.all(np.abs(chord_lengths(lp) - ds) <= 5 * (cfg.abs_tol + cfg.rel_tol * ds)))
    gap = np.hypot(np.interp(ca.s, lp.s, lp.x) - ca.x, np.interp(ca.s, lp.s, lp.y) - ca.y)
    checks["charts"] = float(np.max(gap)) <= 1e-6 and abs(ca.s[-1] - lp.s[-1]) <= 1e-6
    failed = [k for k, v in checks.items() if not v]
    return not failed, (
        f"bowl flow r_end={lp.r[-1]:.3e}, chart gap {np.max(gap):.1e}"
        + (f"; failing {failed}" if failed else "; all sub-checks ok")
    )


def criterion_6():
    with tempfile.TemporaryDirectory() as d:
        out, rep = Path(d) / "spiral.csv", Path(d) / "report.json"
        t0 = time.perf_counter()
        code = main(["simulate", "--field", "spiral", "--rho-max", "20",
                     "-o", str(out), "--report", str(rep)])
        secs = time.perf_counter() - t0
        doc = json.loads(rep.read_text()) if rep.exists() else {}
    keys = {"winding_count", "ratio_series", "on_curve_residual"}
    ok = (
        code == 0 and secs < 60 and doc.get("stop_reason") == "rho_max"
        and doc.get("descent_violations") == 0 and keys <= doc.keys()
    )
    return ok, (
        f"simulate exit {code} in {secs:.2f}s, descent violations {doc.get('descent_violations')}, "
        f"winding {doc.get('winding_count', float('nan')):.4f}, "
        f"on-curve residual max {doc.get('on_curve_residual_max', float('nan')):.3f}"
    )


def criterion_7():
    with tempfile.TemporaryDirectory() as d:
        a, b = Path(d) / "a.json", Path(d) / "b.json"
        codes = (main(["claims", "--all", "-o", str(a)]), main(["claims", "--all", "-o", str(b)]))
        same = a.read_bytes() == b.read_bytes()
    in_process = report_json(run_all()) == report_json(run_all())
    return codes == (0, 0) and same and in_process, f"claims --all twice: exit {codes}, byte-identical {same}"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[n]()
    _record(n, ok, detail)
    assert time.perf_counter() - t0 < 60
    assert ok, detail


def test_tolerances_match_criteria():
    assert TOL["C2"] <= 1e-13 and TOL["C5"] <= 1e-12 and TOL["C12"] <= 1e-9


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        _record(n, *fn())
