import pytest

from ellipt_vne.scenarios import build_scenario, d3_known, maxwell_bloch
from ellipt_vne.verification import VerificationReport, verify_scenario, verify_system


def test_report_logic():
    r = VerificationReport("x")
    assert r.add("a", 1e-12, 1e-9)
    r.skip("b", 1e-9, "n/a")
    r.record("c", 5.0, "info")
    assert r.passed
    assert not r.add("d", 1.0, 1e-9)
    assert not r.passed
    d = r.to_dict()
    assert d["overall"] == "fail"
    assert [c["status"] for c in d["checks"]] == ["pass", "skipped", "recorded", "fail"]


def test_maxwell_bloch_records_printed_identity_residual():
    rep = verify_scenario(maxwell_bloch())
    assert rep.passed
    rec = {c.name: c for c in rep.checks}["printed_identity_image_residual"]
    assert rec.status == "recorded"
    assert rec.max_defect > 1e-3


def test_k1_case1_derivation_skipped():
    rep = verify_scenario(build_scenario("phase_modulation"))
    status = {c.name: c.status for c in rep.checks}
    assert status["derivation_match"] == "skipped"
    assert status["periodicity"] == "skipped"


def test_wrong_map_fails():
    sc = d3_known()
    rep = verify_system(sc.system, sc.hamiltonian * 1.01, samples=51)
    failed = {c.name for c in rep.checks if c.status == "fail"}
    assert "theorem_residual" in failed
    assert not rep.passed


@pytest.mark.parametrize("nu", [-1.0, 1.0])
def test_verify_other_nu(nu):
    assert verify_scenario(d3_known().with_nu(nu), samples=101).passed
