"""Exact beta-expansions in Pisot bases, the Parry measure, and automaton betting strategies."""

__version__ = "0.1.0"

from .algebraic import FieldElement, MinimalPolynomial, is_pisot, make_field
from .beta_expansion import BetaBase, approximate_dyadic, expand, make_base, value
from .measures import MarkovMeasure, parry_cylinder, parry_measure, parry_via_edges, xi, xi_oracle

__all__ = [
    "BetaBase",
    "FieldElement",
    "MarkovMeasure",
    "MinimalPolynomial",
    "__version__",
    "approximate_dyadic",
    "expand",
    "is_pisot",
    "make_base",
    "make_field",
    "parry_cylinder",
    "parry_measure",
    "parry_via_edges",
    "value",
    "xi",
    "xi_oracle",
]
