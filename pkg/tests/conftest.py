import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

TITLES = {
    1: "fixed-point consistency of one outer step",
    2: "convergence on H-matrix grid problems",
    3: "convergence on the monotone tridiagonal problem",
    4: "parameter bound formula",
    5: "Gauss-Seidel and Jacobi reductions",
    6: "per-splitting parameters set uniformly",
    7: "determinism across worker counts",
    8: "solver agrees with the Picard oracle",
    9: "exact splitting identities",
    10: "P-bound of the built-in nonlinearities",
}

# criterion number -> outcomes
ACCEPTANCE = {}


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            num = int(mark.split("_")[1])
            ACCEPTANCE.setdefault(num, []).append(report.outcome == "passed")


def pytest_configure(config):
    for k in range(1, 11):
        config.addinivalue_line("markers", f"criterion_{k}: acceptance criterion {k}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        outcomes = ACCEPTANCE[num]
        status = "PASS" if outcomes and all(outcomes) else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:2d}: {status}  ({sum(outcomes)}/{len(outcomes)} tests)  {TITLES[num]}")
