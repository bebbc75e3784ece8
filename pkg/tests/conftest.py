"""Shared fixtures: small scenarios, their vertex lists, facet lists and
symmetry classes, plus the named inequalities used across the suite."""

import pytest

from bellpoly.exactgeom import facet_enum
from bellpoly.scenario import Scenario, enumerate_vertices
from bellpoly.symmetry import classify


@pytest.fixture(scope="session")
def s2222():
    return Scenario(2, 2, 2, 2)


@pytest.fixture(scope="session")
def v2222(s2222):
    return enumerate_vertices(s2222)


@pytest.fixture(scope="session")
def facets2222(v2222):
    return facet_enum(v2222)


@pytest.fixture(scope="session")
def classes2222(facets2222):
    return classify(facets2222)


@pytest.fixture(scope="session")
def chsh(classes2222):
    return next(c.representative for c in classes2222 if c.orbit_size == 8)


@pytest.fixture(scope="session")
def s3322():
    return Scenario(3, 3, 2, 2)


@pytest.fixture(scope="session")
def v3322(s3322):
    return enumerate_vertices(s3322)


@pytest.fixture(scope="session")
def facets3322(v3322):
    return facet_enum(v3322)


@pytest.fixture(scope="session")
def classes3322(facets3322):
    return classify(facets3322)


@pytest.fixture(scope="session")
def i3322(classes3322):
    return next(c.representative for c in classes3322 if c.orbit_size == 576)
