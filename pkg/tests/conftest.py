"""Session-scoped fixtures: bundled pipeline runs are computed once and shared."""
import time

import pytest

from son2lab.cli import ExperimentConfig, bundled_config, run_config
from son2lab.datasets import load_bundled
from son2lab.enumeration import CartanCloud, ball, stream_cloud


class BundledRun:
    """Outputs of one bundled config run: directory, summary text, reports, wall time."""

    def __init__(self, out, text, reports, seconds):
        self.out = out
        self.text = text
        self.reports = reports
        self.seconds = seconds

    @property
    def report(self):
        return self.reports[0][1]

    def cloud(self, prefix=""):
        return CartanCloud.load(self.out / f"{prefix}cloud.csv")

    def by_q(self):
        return {q: r for q, r in self.reports}


@pytest.fixture(scope="session")
def bundled_run(tmp_path_factory):
    cache = {}

    def get(name):
        if name not in cache:
            cfg = ExperimentConfig.load(bundled_config(name))
            out = tmp_path_factory.mktemp(name)
            t = time.perf_counter()
            text, reports = run_config(cfg, out)
            cache[name] = BundledRun(out, text, reports, time.perf_counter() - t)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def sl2z_cloud(bundled_run):
    return bundled_run("sl2z_n2").cloud()


@pytest.fixture(scope="session")
def schottky_cloud(bundled_run):
    return bundled_run("schottky_n2").cloud()


@pytest.fixture(scope="session")
def bianchi_cloud(bundled_run):
    return bundled_run("bianchi_n3").cloud()


@pytest.fixture(scope="session")
def small_balls():
    """Radius-6 balls of every bundled system."""
    from son2lab.datasets import bundled_names
    return {name: ball(load_bundled(name), 6 if name not in ("amalgam_n2", "amalgam_n3") else 5)
            for name in bundled_names()}


@pytest.fixture(scope="session")
def cyclic_cloud():
    return stream_cloud(load_bundled("cyclic_n3"), 60)


# -- acceptance reporting ----------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, text): acceptance criterion k")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        k, text = crit
        ok = report.outcome == "passed"
        prev = _CRITERIA.get(k, (True, text))
        _CRITERIA[k] = (prev[0] and ok, text)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, text = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")
