import pytest

from cascade_opo.model import classify_regime, standard_params


@pytest.fixture
def std():
    """Standard loss/coupling set with chi2 = 0.4 chi1 and no pump."""
    return standard_params()


@pytest.fixture
def eps_c(std):
    return classify_regime(std).eps_c


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(results, key=int):
        entries = results[label]
        ok = all(e[0] for e in entries)
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'}")
        for _, line in entries:
            terminalreporter.write_line(f"    {line}")
