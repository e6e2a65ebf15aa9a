import json
import math

import pytest

from spiralflow.claims import (
    CLAIM_KINDS,
    CLAIMS,
    ClaimRecord,
    config_digest,
    report,
    report_json,
    run_all,
    run_claim,
)

# every displayed statement of the construction, mapped to the claims that exercise it
COVERAGE = {
    "curve tends to the origin as r = 1/t -> 0": ["C1"],
    "speed of the curve in polar form": ["C2"],
    "finite length with tail bound 1/s + 1/(s log^2 s)": ["C3"],
    "length-distance ratio bounded by 1 + 1/log^2 s": ["C4"],
    "unit secants (1, log log t) do not converge": ["C5"],
    "definition of f with amplitude a(r)": ["C6", "C7", "C9"],
    "tangent of the curve (-r^2, r / log(1/r))": ["C12", "C13"],
    "scaling function b(r) with df/dr = b r^2 and df/dtheta / r = -b r / log(1/r)": ["C9"],
    "radial partial on the curve": ["C8"],
    "angular partial on the curve": ["C7"],
    "b r^2 chain and the angular counterpart": ["C9"],
    "full negative gradient on the curve as b times the tangent": ["C9", "C12"],
    "b positive on the whole disk": ["C10"],
    "negative gradient parallel to the tangent": ["C12", "C13"],
    "flow stays on the curve": ["C13", "C14"],
    "origin is a critical point, flat to all orders": ["C11"],
    "arc length to the origin along the flow": ["C14"],
}


@pytest.fixture(scope="module")
def records():
    return run_all()


def test_coverage_table():
    used = {c for ids in COVERAGE.values() for c in ids}
    assert used <= set(CLAIMS)
    assert set(CLAIMS) <= used
    assert list(CLAIMS) == [f"C{i}" for i in range(1, 15)]


def test_all_records(records):
    assert [r.id for r in records] == list(CLAIMS)
    for r in records:
        assert r.kind == CLAIM_KINDS[r.id]
        assert "error" not in r.details, r.details
        if r.kind == "assert":
            assert r.verdict == "pass", (r.id, r.residual, r.details)
        else:
            assert r.verdict == "info"
            assert isinstance(r.residual, float)


def test_c6_example(records):
    c6 = records[5]
    assert c6.verdict == "pass" and c6.residual < 1e-13


def test_c9_single_radius():
    r = run_claim("C9", r_grid={"lo": 0.5, "hi": 0.5, "n": 1})
    assert r.verdict == "pass"
    # mpmath: b(1/2) / 4 and f_r on the curve from the displayed formula agree
    assert math.exp(r.oracle_value[0]) == pytest.approx(0.058049705704773277, rel=1e-14)
    assert math.exp(r.paper_value[0]) == pytest.approx(0.058049705704773277, rel=1e-14)


def test_c8_reports_both_values():
    r = run_claim("C8", r_grid={"lo": 0.5, "hi": 0.5, "n": 1})
    assert r.verdict == "info"
    at = r.details["at_r_0.5"]
    assert at["paper_value"] == pytest.approx(0.058049705704773277, rel=1e-14)
    assert at["oracle_value"] == pytest.approx(0.29969541932561202, rel=1e-13)
    assert r.details["displayed_field_vs_formula_residual"] < 1e-12


def test_c12_and_c13_report_both_conventions(records):
    c12, c13 = records[11], records[12]
    assert c12.residual < 1e-9
    assert len(c12.details["euclidean_convention"]) == 50
    assert len(c13.details["paper_convention"]) == 50 and len(c13.oracle_value) == 50


def test_c14_simulation_summary(records):
    d = records[13].details
    for key in ("oracle_polar_euclidean", "paper_displayed_polar_paper"):
        run = d[key]
        assert run["stop_reason"] == "rho_max"
        assert math.isfinite(run["winding_count"])
        assert all(q >= 1 - 1e-9 for q in run["ratio_series"])


def test_failure_becomes_record():
    r = run_claim("C3", t_grid={"lo": 1.0})
    assert r.verdict == "fail" and "error" in r.details
    r = run_claim("C13", t_grid={"lo": 1.0})
    assert r.verdict == "info" and "error" in r.details
    with pytest.raises(KeyError):
        run_claim("C99")
    with pytest.raises(KeyError):
        run_claim("C1", nonsense={})


def test_record_invariants():
    with pytest.raises(ValueError):
        ClaimRecord("C1", "assert", "", "", 0, 0, 0.0, 0.0, "info")
    with pytest.raises(ValueError):
        ClaimRecord("C8", "report", "", "", 0, 0, 0.0, 0.0, "pass")


def test_json_report_deterministic(records):
    a = report_json(records)
    b = report_json(run_all())
    assert a == b
    doc = json.loads(a)
    assert set(doc) == {"run_id", "config_digest", "claims"}
    assert doc["config_digest"] == config_digest()
    assert doc["run_id"].startswith("run-")
    assert len(doc["claims"]) == 14
    assert "-inf" in json.dumps(report(records))  # C11 paper value is a string
    assert config_digest(t_grid={"n": 10}) != config_digest()
