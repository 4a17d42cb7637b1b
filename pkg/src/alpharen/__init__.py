"""Analytically regularised Feynman amplitudes in the alpha representation.

The package builds scalar Feynman diagrams, evaluates their regularised
amplitudes by sector decomposition of the alpha integral, and renormalises
them with the recursive R-operation.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .graph import (
    FeynmanDiagram,
    FeynmanGraph,
    GraphError,
    VertexOperator,
    divergence_degree,
    is_1pi,
    is_connected,
    loop_count,
)
from .io import parse_diagram, parse_diagram_file, serialize_diagram
from .laurent import LaurentFitError, LaurentSeries, fit_laurent, pole_part, z_circle
from .renorm import compute_counterterm, renormalize, rtilde_eval, star_insert
from .sector import QuadratureError, UnsupportedDivergence, integrate
from .subgraph import Subdiagram, enumerate_1pi_subdiagrams, enumerate_disjoint_families, quotient

__all__ = [
    "RunConfig",
    "FeynmanDiagram",
    "FeynmanGraph",
    "GraphError",
    "VertexOperator",
    "divergence_degree",
    "is_1pi",
    "is_connected",
    "loop_count",
    "parse_diagram",
    "parse_diagram_file",
    "serialize_diagram",
    "LaurentFitError",
    "LaurentSeries",
    "fit_laurent",
    "pole_part",
    "z_circle",
    "compute_counterterm",
    "renormalize",
    "rtilde_eval",
    "star_insert",
    "QuadratureError",
    "UnsupportedDivergence",
    "integrate",
    "Subdiagram",
    "enumerate_1pi_subdiagrams",
    "enumerate_disjoint_families",
    "quotient",
]
