import pytest

from relred.core import Domain, Relation


@pytest.fixture
def d2():
    return Domain("D2", ("a", "b"))


@pytest.fixture
def d3():
    return Domain("D3", ("a", "b", "c"))


@pytest.fixture
def d4():
    return Domain("D4", ("a", "b", "c", "d"))


@pytest.fixture
def rel_h(d3):
    # quaternary relation on three elements in which every pair of
    # columns is a key but no single column is
    rows = [
        ("a", "b", "b", "a"),
        ("b", "a", "a", "b"),
        ("c", "b", "c", "b"),
        ("b", "c", "b", "c"),
    ]
    return Relation.make(d3, ("1", "2", "3", "4"), rows)


def make_rel(domain, n, rows):
    attrs = tuple(str(i + 1) for i in range(n))
    return Relation.make(domain, attrs, rows)
