from importlib import resources

import pytest
from hypothesis import settings

from ckengine.graph import parse_graph_text

settings.register_profile("ck", deadline=None, max_examples=40)
settings.load_profile("ck")

DATA = resources.files("ckengine") / "data"


def load_graph(fname: str, name: str):
    return parse_graph_text((DATA / fname).read_text(encoding="utf-8"), name=name, source=fname)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def o2():
    return load_graph("o2.graph", "O2")


@pytest.fixture(scope="session")
def ex41():
    return load_graph("ex41.graph", "E41")


@pytest.fixture(scope="session")
def split_e():
    return load_graph("split_E.graph", "E")


@pytest.fixture(scope="session")
def split_f():
    return load_graph("split_F.graph", "F")


@pytest.fixture(scope="session")
def named_graphs(o2, ex41, split_f):
    return {"O2": o2, "E41": ex41, "F": split_f}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
