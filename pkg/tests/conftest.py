import numpy as np
import pandas as pd
import pytest

from epsobol.bench import ishigami_variant


def ishigami_frame(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, size=(n, 3))
    return pd.DataFrame({"y": ishigami_variant(x), "x1": x[:, 0], "x2": x[:, 1], "x3": x[:, 2]})


@pytest.fixture
def ishigami_csv(tmp_path):
    path = tmp_path / "ishigami.csv"
    ishigami_frame(600, 0).to_csv(path, index=False)
    return path


# verdict lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
