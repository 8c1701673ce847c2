import functools
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@functools.lru_cache(maxsize=None)
def bolza():
    from polyakov.hyperbolic import bolza_group

    return bolza_group()


@functools.lru_cache(maxsize=None)
def bolza_spectrum(L, word_bound=None):
    from polyakov.spectrum import DEFAULT_WORD_BOUND, enumerate_spectrum

    return enumerate_spectrum(bolza(), L, word_bound=word_bound or DEFAULT_WORD_BOUND)


@functools.lru_cache(maxsize=None)
def torus_spectrum(tau, n):
    from polyakov.worldsheet import build_torus_mesh, scalar_laplacian_spectrum

    M = build_torus_mesh(tau, n)
    return M, scalar_laplacian_spectrum(M)


@functools.lru_cache(maxsize=None)
def census(n, genus=2):
    from polyakov.covers import enumerate_covers

    return enumerate_covers(genus, n)


@pytest.fixture(scope="session")
def G():
    return bolza()


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n = mark.args[0]
    prev_ok, title = _criteria.get(n, (True, mark.kwargs.get("title", "")))
    _criteria[n] = (prev_ok and rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, title = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")
