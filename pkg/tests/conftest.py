import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from alpharen import library
from alpharen.graph import FeynmanDiagram, FeynmanGraph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def std():
    """The standard diagrams with unit masses."""
    return {k: f() for k, f in library.STANDARD.items()}


def make_diagram(internal, external=None, vertices=None, mass=1.0, ops=None, name="d"):
    external = external or {}
    if vertices is None:
        vertices = sorted({v for ab in internal.values() for v in ab} | {v for v, _ in external.values()})
    g = FeynmanGraph(tuple(vertices), internal, external)
    return FeynmanDiagram(g, ops or {}, {r: mass for r in internal}, name=name)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
