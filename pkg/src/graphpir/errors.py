"""Exception hierarchy shared across the package."""


class GraphPIRError(Exception):
    """Base class for every error raised by graphpir."""


class GraphError(GraphPIRError, ValueError):
    """Malformed graph, graph descriptor or file assignment."""


class TooLargeError(GraphPIRError):
    """An exhaustive procedure was asked to run past its declared size limit."""


class SchemeError(GraphPIRError, ValueError):
    """Scheme used outside its preconditions (wrong graph, bad file index, bad query shape)."""


class ReconstructionError(GraphPIRError):
    """The collected answers do not determine the requested file."""


class ConsistencyError(GraphPIRError):
    """A lower bound exceeded a certified upper bound: an implementation bug."""


class FrameError(GraphPIRError, ValueError):
    """Malformed wire frame or payload."""


class TransportError(GraphPIRError):
    """An endpoint was unreachable or replied with something other than an answer."""


class MismatchError(ReconstructionError):
    """A networked retrieval decoded to a different file than expected.

    Distinct from a plain decoding failure: it points at a dishonest or buggy
    server rather than a malformed answer set.
    """
