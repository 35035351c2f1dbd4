"""Private information retrieval over graph-based replicated storage.

Servers are graph vertices and every file is stored on the two servers
joined by its edge. ``graphpir.bounds`` computes certified capacity bounds;
``graphpir.schemes`` holds executable retrieval schemes whose rates serve as
lower bounds; ``graphpir.verify`` checks them and ``graphpir.netsim`` runs
them over sockets.
"""

from .errors import GraphPIRError
from .graphcore import FileAssignment, Graph, build_family

__version__ = "0.1.0"

__all__ = ["FileAssignment", "Graph", "GraphPIRError", "build_family", "__version__"]
