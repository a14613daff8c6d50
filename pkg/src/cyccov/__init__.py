"""Short cycle covers of bridgeless multigraphs via Klein four-group flows."""
from .graphcore import Edge, EvenSubgraph, GraphError, Multigraph
from .pipeline import BridgeError, SolveOptions, SolveResult, solve, theorem_bound

__all__ = [
    "Edge",
    "EvenSubgraph",
    "GraphError",
    "Multigraph",
    "BridgeError",
    "SolveOptions",
    "SolveResult",
    "solve",
    "theorem_bound",
]
__version__ = "0.1.0"
