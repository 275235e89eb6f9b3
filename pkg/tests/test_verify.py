import pytest

import importlib

vf = importlib.import_module("bsq2d.verify")
from bsq2d.verify import SUITES, run_suite, verify


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    rep = run_suite(name)
    assert rep.checks, name
    failed = [c for c in rep.checks if not c.passed]
    assert not failed, failed


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nope")


def test_crashing_suite_reported(monkeypatch):
    def boom():
        raise RuntimeError("kaput")

    monkeypatch.setitem(vf.SUITES, "spectral", boom)
    rep = verify("spectral")
    assert rep["passed"] is False
    (check,) = rep["suites"][0]["checks"]
    assert check["name"] == "suite_error" and "kaput" in check["detail"]


def test_failed_check_fails_report(monkeypatch):
    monkeypatch.setitem(vf.SUITES, "spectral", lambda: [vf._le("x", 2.0, 1.0), vf._ge("y", 2.0, 1.0)])
    rep = verify("spectral")
    assert rep["passed"] is False
    assert [c["passed"] for c in rep["suites"][0]["checks"]] == [False, True]
