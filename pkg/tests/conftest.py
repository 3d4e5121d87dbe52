import time

import numpy as np
import pytest

from pesto import toy
from pesto.algebra import GF, make_rng
from pesto.scheme import PestoParams, keygen

_CRITERIA: list[tuple[int, str, str, float, list[str]]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        notes = [str(v) for k, v in item.user_properties if k == "note"]
        _CRITERIA.append((mark.args[0], mark.args[1], status, rep.duration, notes))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, title, status, dur, notes in sorted(_CRITERIA):
        tr.write_line(f"{status} criterion {num}: {title} ({dur:.1f} s)")
        for n in notes:
            tr.write_line(f"     note: {n}")


@pytest.fixture(scope="session")
def toy_keys():
    return toy.keypair()


@pytest.fixture(scope="session")
def gf5():
    return GF(5)


@pytest.fixture(scope="session")
def gf64():
    return GF(64)


@pytest.fixture(scope="session")
def small_keys():
    """Key pair at (2^6, 10, 8, 3, 2), reduced A1."""
    params = PestoParams.parse("2^6,10,8,3,2")
    sk, pk = keygen(params, make_rng(2024))
    return params, sk, pk


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def stopwatch():
    class _W:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.t0

    return _W
