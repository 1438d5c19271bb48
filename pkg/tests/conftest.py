import numpy as np
import pytest

from projbound.experiments import equal_rank_ensemble, gen_pair, mixed_ensemble

MIXED_SEED = 20240601
EQUAL_RANK_SEED = 7

_acceptance: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _acceptance[number] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, status = _acceptance[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")


@pytest.fixture(scope="session")
def mixed_specs():
    return mixed_ensemble(1000, MIXED_SEED)


@pytest.fixture(scope="session")
def mixed_pairs(mixed_specs):
    return [gen_pair(s) for s in mixed_specs]


@pytest.fixture(scope="session")
def equal_rank_pairs():
    return [gen_pair(s) for s in equal_rank_ensemble(200, EQUAL_RANK_SEED)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rank_matrix(rng, m, n, r, complex_=True):
    """``m x n`` matrix of exact rank ``r`` with singular values in [0.5, 2]."""
    def gauss(*shape):
        g = rng.standard_normal(shape)
        return g + 1j * rng.standard_normal(shape) if complex_ else g

    u, _ = np.linalg.qr(gauss(m, m))
    v, _ = np.linalg.qr(gauss(n, n))
    s = rng.uniform(0.5, 2.0, r)
    return (u[:, :r] * s) @ v[:, :r].conj().T
