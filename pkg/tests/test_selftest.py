import pytest

from sparse_pde import cli
from sparse_pde.selftest import CHECKS, run_selftest

FAST = [name for name, _ in CHECKS if name not in ("Monte-Carlo agreement", "quadrature order doubling")]


def test_fast_checks_pass():
    results = run_selftest(names=FAST)
    assert [r.name for r in results] == FAST
    failed = [(r.name, r.detail) for r in results if not r.passed]
    assert not failed


def test_seed_changes_nothing_structural():
    a = run_selftest(seed=1, names=["gap argmin equals zone index"])
    b = run_selftest(seed=2, names=["gap argmin equals zone index"])
    assert a[0].passed and b[0].passed
    assert a[0].detail.endswith("/1200 mismatches")


def test_exception_reported_as_failure(monkeypatch):
    def broken(rng, rule):
        raise FloatingPointError("bad node")

    monkeypatch.setattr("sparse_pde.selftest.CHECKS", [("broken", broken)])
    (res,) = run_selftest()
    assert not res.passed and "FloatingPointError" in res.detail


def test_cli_selftest_exit_code(capsys, monkeypatch):
    monkeypatch.setattr("sparse_pde.selftest.CHECKS", [("ok", lambda rng, rule: (True, "fine"))])
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "ok" in out
    monkeypatch.setattr("sparse_pde.selftest.CHECKS", [("no", lambda rng, rule: (False, "off"))])
    assert cli.main(["selftest"]) == 1


@pytest.mark.slow
def test_full_battery():
    results = run_selftest()
    assert all(r.passed for r in results), [(r.name, r.detail) for r in results if not r.passed]
