import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_RESULTS_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = {}


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash[_RESULTS_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rank_matrix(rng, m, n, r, scale=1.0):
    """``m x n`` matrix of exact rank ``r`` with singular values in ``[1, 10] * scale``."""
    U = np.linalg.qr(rng.standard_normal((m, m)))[0][:, :r]
    V = np.linalg.qr(rng.standard_normal((n, n)))[0][:, :r]
    s = scale * rng.uniform(1.0, 10.0, r)
    return (U * s) @ V.T
