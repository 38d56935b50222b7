"""Nested quantum walks: exact state-vector simulation with query counting.

Subpackages and modules
-----------------------
graphs      graphs, markings and brute-force subgraph tests
markov      reversible Markov chains, Johnson graphs, spectral gaps
hilbert     register layouts, state vectors and matrix-free operators
oracle      counted query access and bounded-error checks
walk        single-level walks: Szegedy operators, detection, search
nested      composition of walks, truncated controlled updates
algorithms  triangle finding and graph collision walks
costmodel   exponent-level cost formulas and their exact optimisation
"""
from .algorithms import (
    TriangleParams,
    graph_collision_walk,
    triangle_mss,
    triangle_nested_3527,
    triangle_nested_97,
)
from .estimators import GraphCollisionDetector, TriangleDetector
from .exceptions import (
    BudgetError,
    CapacityError,
    ContractError,
    InfeasibleError,
    InputError,
    NestedWalkError,
    ParseError,
)
from .graphs import Graph, Marking, has_graph_collision, has_triangle, parse_graph, random_graph
from .markov import MarkovChain, johnson_chain, spectral_gap
from .oracle import BoundedCheck, QueryOracle
from .walk import WalkLevelSpec, detect, search

__version__ = "0.1.0"

__all__ = [
    "BoundedCheck",
    "BudgetError",
    "CapacityError",
    "ContractError",
    "Graph",
    "GraphCollisionDetector",
    "InfeasibleError",
    "InputError",
    "Marking",
    "MarkovChain",
    "NestedWalkError",
    "ParseError",
    "QueryOracle",
    "TriangleDetector",
    "TriangleParams",
    "WalkLevelSpec",
    "detect",
    "graph_collision_walk",
    "has_graph_collision",
    "has_triangle",
    "johnson_chain",
    "parse_graph",
    "random_graph",
    "search",
    "spectral_gap",
    "triangle_mss",
    "triangle_nested_3527",
    "triangle_nested_97",
]
