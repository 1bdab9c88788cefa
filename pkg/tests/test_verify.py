import json
import math
from dataclasses import replace

import pytest

from cesaro_spaces import norms, verify
from cesaro_spaces.classify import AsymptoticClass, ell_rule, image_class
from cesaro_spaces.sequences import PowerLog


@pytest.fixture(scope="module")
def default_results():
    return verify.run_all(verify.budget("small"))


def test_run_all_defaults_pass(default_results):
    assert [r.id for r in default_results] == [f"V{i}" for i in range(1, 12)]
    assert {r.status for r in default_results} == {"PASS"}
    for r in default_results:
        assert r.paper_ref and r.runtime_ms is None


def test_v1_and_v3_evidence(default_results):
    by_id = {r.id: r for r in default_results}
    assert by_id["V1"].evidence["max_ratio"]["2.0"] <= 2.0
    assert by_id["V3"].evidence["max_rel_err"] < 1e-12


def test_v5_grid_contains_summable_powerlog():
    assert PowerLog(2.0) in verify.example_grid()
    assert image_class(PowerLog(2.0), 1) == AsymptoticClass(1.0, 0.0, 0.0)
    # C^2 picks up a log factor, S ln(n) / n, but the verdicts agree
    assert image_class(PowerLog(2.0), 2) == AsymptoticClass(1.0, -1.0, 0.0)
    for k in (1, 2):
        prof = ell_rule(image_class(PowerLog(2.0), k))
        assert (prof.crit, prof.attained) == (1.0, False)


def test_tiny_budget_never_fails():
    cfg = replace(verify.budget("small"), basis_N=1000, basis_max_n=1000, hardy_N=1000, hardy_families=10)
    results = verify.run_all(cfg)
    assert len(results) == 11
    assert all(r.status in ("PASS", "SKIP") for r in results)


def test_broken_conjugate_fails_v1(monkeypatch):
    real = norms.conjugate

    def broken(p):
        c = real(p)
        return norms.ConjugateExponent(c.p, c.p_prime * 0.5) if p == 2.0 else c

    monkeypatch.setattr(norms, "conjugate", broken)
    r = verify.run_check("V1", verify.budget("small"))
    assert r.status == "FAIL"
    assert {f["p"] for f in r.evidence["failures"]} == {2.0}


def test_unknown_check():
    with pytest.raises(verify.UnknownCheckError):
        verify.run_check("V99")
    with pytest.raises(verify.UnknownCheckError):
        verify.run_all(ids=["V1", "V99"])


def test_render_report(default_results):
    doc = json.loads(verify.render_report(default_results, "json"))
    assert doc["checks"][0]["id"] == "V1" and doc["checks"][0]["status"] == "PASS"
    md = verify.render_report(default_results, "markdown")
    assert len(md.strip().splitlines()) == 2 + 11
    assert json.loads(verify.render_report([], "json")) == {"checks": []}
    with pytest.raises(ValueError):
        verify.render_report([], "xml")


def test_reports_are_deterministic(monkeypatch):
    cfg = verify.budget("small", seed=7)
    monkeypatch.setenv(verify.THREADS_ENV, "1")
    one = verify.render_report(verify.run_all(cfg, ["V1", "V2", "V8"]), "json", cfg)
    monkeypatch.setenv(verify.THREADS_ENV, "0")
    two = verify.render_report(verify.run_all(cfg, ["V1", "V2", "V8"]), "json", cfg)
    assert one == two


def test_timings_flag_records_runtime():
    r = verify.run_check("V3", verify.budget("small", timings=True))
    assert r.runtime_ms is not None and r.runtime_ms >= 0


def test_schedules():
    assert verify.plus_schedule(2.0, 3) == [3.0, 2.5, 2.0 + 1 / 3]
    assert verify.minus_schedule(3.0, 2) == [2.0, 3.0 - 2.0 / 3.0]
    assert verify.minus_schedule(math.inf, 3) == [2.0, 3.0, 4.0]


def test_weighted_seminorm():
    assert verify.weighted_seminorm([0.0, 3.0, -1.0], 1.0) == 3.0 * 2 + 1.0 * 3
