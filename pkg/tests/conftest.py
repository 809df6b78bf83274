import numpy as np
import pytest

_CRITERIA = []


def pytest_addoption(parser):
    parser.addoption(
        "--run-longjob", action="store_true", default=False, help="run opt-in long acceptance jobs"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-longjob"):
        return
    skip = pytest.mark.skip(reason="opt-in long job; use --run-longjob")
    for item in items:
        if "longjob" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def criterion():
    """Record the verdict of one acceptance criterion for the summary."""

    def record(number, ok, detail=""):
        _CRITERIA.append((number, bool(ok), detail))
        return bool(ok)

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20111015)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
