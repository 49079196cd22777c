import numpy as np
import pytest

from cmdp_ids import data, kernels


@pytest.fixture(params=["numpy", "numba"])
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    monkeypatch.setattr(kernels, "active", kernels.get_backend(request.param))
    return request.param


@pytest.fixture(scope="session")
def synthetic_split():
    table = data.synthetic_table(n_samples=600, n_features=8, n_classes=3, separation=8.0, seed=0)
    cleaned, _ = data.clean_generic(table)
    return data.prepare(cleaned, 0.8, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ----------------------------------------------------

_ACCEPTANCE = []
_DETAILS = {}


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the acceptance summary."""
    def add(text):
        _DETAILS[request.node.nodeid] = text
        print(text)
    return add


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE.append((report.nodeid, report.outcome))
    elif "test_acceptance.py" in report.nodeid and report.skipped:
        _ACCEPTANCE.append((report.nodeid, "skipped"))
        if isinstance(report.longrepr, tuple):
            _DETAILS.setdefault(report.nodeid, report.longrepr[2].removeprefix("Skipped: "))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE:
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        detail = _DETAILS.get(nodeid, "")
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"[{tag}] {name}" + (f": {detail}" if detail else ""))
