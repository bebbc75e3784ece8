"""Exact enumeration, slicing and classification of tight Bell inequalities,
with quantum bounds, noise resistance and detection-efficiency analysis."""

__version__ = "0.1.0"

from .exactgeom import Inequality, facet_enum, is_facet
from .scenario import BehaviorVector, Scenario, enumerate_vertices
from .symmetry import FacetClass, classify

__all__ = [
    "Scenario",
    "BehaviorVector",
    "Inequality",
    "FacetClass",
    "enumerate_vertices",
    "facet_enum",
    "is_facet",
    "classify",
    "__version__",
]
