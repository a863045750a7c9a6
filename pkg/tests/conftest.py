import json
import pathlib
import sys

import pytest
from hypothesis import HealthCheck, settings

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))

from pidmaxent import from_pairs  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def _sym(s):
    return tuple(_sym(x) for x in s) if isinstance(s, list) else s


def load_pmf(entry):
    """Frozen ``[[key, p], ...]`` list back to a distribution."""
    return from_pairs([(tuple(_sym(s) for s in k), p) for k, p in entry["pmf"]])


@pytest.fixture(scope="session")
def reference():
    return json.loads((HERE / "reference_values.json").read_text())


@pytest.fixture(scope="session")
def data_dir():
    return HERE / "data"


# criterion number -> one-line verdict, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
