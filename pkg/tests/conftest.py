import pytest

from bratteli import catalog
from bratteli.spec import spec_from_dict
from bratteli.diagram import materialize

# (criterion number, passed, detail) filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def b1():
    return catalog.entry("b1").diagram(16)


@pytest.fixture(scope="session")
def b2():
    return catalog.entry("b2").diagram(16)


@pytest.fixture(scope="session")
def odometer3():
    return catalog.entry("odometer3").diagram(30)


@pytest.fixture(scope="session")
def two_classes():
    return catalog.entry("two-classes").diagram(12)


@pytest.fixture(scope="session")
def pascal_diagram():
    return catalog.entry("pascal").diagram(12)


@pytest.fixture(scope="session")
def countable():
    return catalog.entry("countable").diagram(10)


def stationary(matrix, root=None, depth=8):
    doc = {"generator": "stationary", "matrix": matrix}
    if root is not None:
        doc["root_edges"] = root
    return materialize(spec_from_dict(doc), depth)


def explicit(matrices, root=None):
    doc = {"generator": "explicit", "matrices": matrices}
    if root is not None:
        doc["root_edges"] = root
    spec = spec_from_dict(doc)
    return materialize(spec, spec.max_depth)
