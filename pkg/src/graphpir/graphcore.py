"""Graphs as 2-replication PIR instances.

Servers are the vertices ``1..n`` and files are the edges, numbered ``1..K``
by their position in the edge list. Everything here is immutable.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import GraphError, TooLargeError

Bits = tuple[int, ...]

MATCHING_EDGE_LIMIT = 64
AUTOMORPHISM_VERTEX_LIMIT = 8
HAMILTONIAN_VERTEX_LIMIT = 12


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with 1-indexed vertices and ordered edges.

    Each edge is stored as a sorted pair ``(u, v)`` with ``u < v``; the file
    stored on servers ``u`` and ``v`` has index ``edges.index((u, v)) + 1``.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    name: str = ""
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise GraphError(f"need at least one vertex, got {self.n_vertices}")
        normalized = []
        index: dict[tuple[int, int], int] = {}
        for raw in self.edges:
            u, v = raw
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            for w in (u, v):
                if not 1 <= w <= self.n_vertices:
                    raise GraphError(f"edge {raw} has endpoint outside [1, {self.n_vertices}]")
            pair = (min(u, v), max(u, v))
            if pair in index:
                raise GraphError(f"duplicate edge {pair}")
            index[pair] = len(normalized) + 1
            normalized.append(pair)
        object.__setattr__(self, "edges", tuple(normalized))
        object.__setattr__(self, "_index", index)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge(self, k: int) -> tuple[int, int]:
        """Endpoints of file ``k`` (1-indexed)."""
        if not 1 <= k <= len(self.edges):
            raise GraphError(f"file index {k} outside [1, {len(self.edges)}]")
        return self.edges[k - 1]

    def edge_index(self, u: int, v: int) -> int | None:
        """File index stored on servers ``u`` and ``v``, or None."""
        return self._index.get((min(u, v), max(u, v)))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._index

    def neighbors(self, v: int) -> tuple[int, ...]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return tuple(sorted(out))

    def incident_files(self, v: int) -> tuple[int, ...]:
        return tuple(k for k, e in enumerate(self.edges, 1) if v in e)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def vertices(self) -> range:
        return range(1, self.n_vertices + 1)

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Image of the graph under ``v -> perm[v - 1]``, edge order preserved."""
        return Graph(self.n_vertices, tuple((perm[u - 1], perm[v - 1]) for u, v in self.edges))

    def star_center(self) -> int | None:
        """Center vertex if this is a star (one hub adjacent to every leaf), else None."""
        n = self.n_vertices
        if n < 2 or self.n_edges != n - 1:
            return None
        for v in self.vertices():
            if self.degree(v) == n - 1:
                return v
        return None

    def to_edge_list_text(self) -> str:
        lines = [f"n {self.n_vertices}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        return self.name or f"edges:{self.n_vertices}:" + ",".join(f"{u}-{v}" for u, v in self.edges)


@dataclass(frozen=True)
class FileAssignment:
    """Contents of every file: ``contents[k - 1]`` is the bit vector of file ``k``."""

    file_length_bits: int
    contents: tuple[Bits, ...]

    def __post_init__(self) -> None:
        if self.file_length_bits < 1:
            raise GraphError("file length must be positive")
        rows = tuple(tuple(int(b) for b in row) for row in self.contents)
        for k, row in enumerate(rows, 1):
            if len(row) != self.file_length_bits:
                raise GraphError(f"file {k} has {len(row)} bits, expected {self.file_length_bits}")
            if any(b not in (0, 1) for b in row):
                raise GraphError(f"file {k} is not a bit vector")
        object.__setattr__(self, "contents", rows)

    def __getitem__(self, k: int) -> Bits:
        return self.contents[k - 1]

    def __len__(self) -> int:
        return len(self.contents)

    @classmethod
    def zeros(cls, n_files: int, length: int) -> FileAssignment:
        return cls(length, tuple((0,) * length for _ in range(n_files)))

    @classmethod
    def random(cls, n_files: int, length: int, rng: random.Random) -> FileAssignment:
        return cls(length, tuple(tuple(rng.getrandbits(1) for _ in range(length)) for _ in range(n_files)))

    @classmethod
    def unit(cls, n_files: int, length: int, k: int, bit: int) -> FileAssignment:
        """All zero except bit ``bit`` (1-indexed) of file ``k``."""
        rows = [[0] * length for _ in range(n_files)]
        rows[k - 1][bit - 1] = 1
        return cls(length, tuple(tuple(r) for r in rows))

    def xor(self, other: FileAssignment) -> FileAssignment:
        if (self.file_length_bits, len(self)) != (other.file_length_bits, len(other)):
            raise GraphError("cannot add file assignments of different shapes")
        return FileAssignment(
            self.file_length_bits,
            tuple(tuple(a ^ b for a, b in zip(r, s)) for r, s in zip(self.contents, other.contents)),
        )

    def local(self, graph: Graph, server: int) -> dict[int, Bits]:
        """The files a server stores, keyed by file index."""
        if len(self) != graph.n_edges:
            raise GraphError(f"{len(self)} files for a graph with {graph.n_edges} edges")
        return {k: self.contents[k - 1] for k in graph.incident_files(server)}


def basis_assignments(n_files: int, length: int) -> Iterator[tuple[str, FileAssignment]]:
    """The zero assignment followed by every single-bit assignment."""
    yield "zero", FileAssignment.zeros(n_files, length)
    for k in range(1, n_files + 1):
        for bit in range(1, length + 1):
            yield f"unit(file={k},bit={bit})", FileAssignment.unit(n_files, length, k, bit)


@dataclass(frozen=True)
class PermutationGroup:
    """A group of vertex permutations; ``elements[t][v - 1]`` is the image of ``v``."""

    n: int
    elements: tuple[tuple[int, ...], ...]
    vertex_transitive: bool

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.elements)

    def __contains__(self, perm: object) -> bool:
        return tuple(perm) in set(self.elements)  # type: ignore[arg-type]

    def is_closed(self) -> bool:
        members = set(self.elements)
        identity = tuple(range(1, self.n + 1))
        if identity not in members:
            return False
        for f in self.elements:
            inverse = [0] * self.n
            for v, fv in enumerate(f, 1):
                inverse[fv - 1] = v
            if tuple(inverse) not in members:
                return False
            for g in self.elements:
                if compose(f, g) not in members:
                    return False
        return True


def compose(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    """``f after g``: v -> f(g(v))."""
    return tuple(f[g[v] - 1] for v in range(len(g)))


def _int_param(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise GraphError(f"bad {what} parameter {text!r}") from None


def parse_edge_list(text: str, name: str = "") -> Graph:
    """Parse the ASCII edge-list format.

    One ``u v`` pair per line, ``#`` comments, optional ``n <N>`` header;
    without a header the vertex count is the largest index seen.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: malformed header {raw!r}")
            n = _int_param(parts[1], "vertex count")
            continue
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
        edges.append((_int_param(parts[0], "vertex"), _int_param(parts[1], "vertex")))
    if n is None:
        if not edges:
            raise GraphError("empty edge list without a vertex-count header")
        n = max(max(e) for e in edges)
    return Graph(n, tuple(edges), name=name)


def build_family(spec: str) -> Graph:
    """Build a graph from a descriptor such as ``star:5`` or ``kbipartite:3,4``.

    Supported: ``star:N`` (center N), ``cycle:N``, ``complete:N``,
    ``kbipartite:N,M``, ``wheel:N`` (N even; hub N joined to the cycle
    1..N-1), ``edges:1-2,2-3,...`` and ``file:PATH``.
    """
    family, sep, arg = spec.partition(":")
    if not sep:
        raise GraphError(f"graph spec {spec!r} must look like family:params")
    family = family.strip().lower()
    if family == "file":
        with open(arg, encoding="ascii") as fh:
            return parse_edge_list(fh.read(), name=spec)
    if family == "edges":
        edges = []
        for item in filter(None, (s.strip() for s in arg.split(","))):
            u, dash, v = item.partition("-")
            if not dash:
                raise GraphError(f"malformed edge {item!r}")
            edges.append((_int_param(u, "vertex"), _int_param(v, "vertex")))
        if not edges:
            raise GraphError("edge list is empty")
        return Graph(max(max(e) for e in edges), tuple(edges), name=spec)
    if family == "kbipartite":
        parts = arg.split(",")
        if len(parts) != 2:
            raise GraphError("kbipartite needs two sizes, e.g. kbipartite:3,4")
        a, b = (_int_param(p, "part size") for p in parts)
        if a < 1 or b < 1:
            raise GraphError("kbipartite part sizes must be positive")
        edges = tuple((i, a + j) for i in range(1, a + 1) for j in range(1, b + 1))
        return Graph(a + b, edges, name=f"kbipartite:{a},{b}")
    n = _int_param(arg, family)
    if family == "star":
        if n < 2:
            raise GraphError("star needs N >= 2")
        return Graph(n, tuple((i, n) for i in range(1, n)), name=f"star:{n}")
    if family == "cycle":
        if n < 3:
            raise GraphError("cycle needs N >= 3")
        return Graph(n, tuple((i, i % n + 1) for i in range(1, n + 1)), name=f"cycle:{n}")
    if family == "complete":
        if n < 2:
            raise GraphError("complete needs N >= 2")
        return Graph(n, tuple(itertools.combinations(range(1, n + 1), 2)), name=f"complete:{n}")
    if family == "wheel":
        if n < 4 or n % 2:
            raise GraphError("wheel needs an even vertex count >= 4")
        rim = n - 1
        edges = [(i, i % rim + 1) for i in range(1, rim + 1)]
        edges += [(i, n) for i in range(1, rim + 1)]
        return Graph(n, tuple(edges), name=f"wheel:{n}")
    raise GraphError(f"unknown graph family {family!r}")


def random_graph(n: int, p: float, rng: random.Random) -> Graph:
    """Erdos-Renyi G(n, p), resampled until it has at least one edge."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    while True:
        edges = tuple(e for e in pairs if rng.random() < p)
        if edges:
            return Graph(n, edges)


def max_degree(g: Graph) -> int:
    return max((g.degree(v) for v in g.vertices()), default=0)


def maximum_matching(g: Graph, edge_limit: int = MATCHING_EDGE_LIMIT) -> tuple[int, ...]:
    """File indices of a maximum matching, by exhaustive branch and bound."""
    if g.n_edges > edge_limit:
        raise TooLargeError(f"{g.n_edges} edges exceeds the exhaustive matching limit {edge_limit}")
    edges = list(enumerate(g.edges, 1))
    best: list[int] = []

    def search(i: int, used: frozenset, chosen: list[int]) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        if i == len(edges):
            return
        free = g.n_vertices - len(used)
        if len(chosen) + min(len(edges) - i, free // 2) <= len(best):
            return
        k, (u, v) = edges[i]
        if u not in used and v not in used:
            chosen.append(k)
            search(i + 1, used | {u, v}, chosen)
            chosen.pop()
        search(i + 1, used, chosen)

    search(0, frozenset(), [])
    return tuple(best)


def matching_number(g: Graph, edge_limit: int = MATCHING_EDGE_LIMIT) -> int:
    return len(maximum_matching(g, edge_limit))


def automorphism_group(g: Graph, limit: int = AUTOMORPHISM_VERTEX_LIMIT) -> PermutationGroup:
    """All vertex permutations preserving the edge set (brute force)."""
    n = g.n_vertices
    if n > limit:
        raise TooLargeError(f"{n} vertices exceeds the automorphism brute-force limit {limit}")
    edge_set = set(g.edges)
    degrees = [g.degree(v) for v in g.vertices()]
    found = []
    for perm in itertools.permutations(range(1, n + 1)):
        if any(degrees[v] != degrees[perm[v] - 1] for v in range(n)):
            continue
        if all((min(perm[u - 1], perm[v - 1]), max(perm[u - 1], perm[v - 1])) in edge_set for u, v in g.edges):
            found.append(perm)
    orbit = {f[0] for f in found}
    return PermutationGroup(n, tuple(found), vertex_transitive=len(orbit) == n)


def find_hamiltonian_cycle(g: Graph, limit: int = HAMILTONIAN_VERTEX_LIMIT) -> tuple[int, ...] | None:
    """A Hamiltonian cycle as a vertex sequence starting at 1, or None."""
    n = g.n_vertices
    if n > limit:
        raise TooLargeError(f"{n} vertices exceeds the Hamiltonian search limit {limit}")
    if n < 3:
        return None
    adj = {v: g.neighbors(v) for v in g.vertices()}
    if any(len(adj[v]) < 2 for v in adj):
        return None
    path = [1]
    on_path = {1}

    def extend() -> bool:
        if len(path) == n:
            return g.has_edge(path[-1], 1)
        for w in adj[path[-1]]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                if extend():
                    return True
                on_path.discard(path.pop())
        return False

    return tuple(path) if extend() else None


def is_hamiltonian_cycle(g: Graph, cycle: Iterable[int]) -> bool:
    seq = list(cycle)
    if sorted(seq) != list(g.vertices()):
        return False
    return all(g.has_edge(seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq)))


def incidence_sums(g: Graph, weights: Mapping[int, object] | Sequence) -> list:
    """Per-vertex sum of edge weights (row sums of the incidence matrix times ``weights``)."""
    if isinstance(weights, Mapping):
        w = [weights.get(k, 0) for k in range(1, g.n_edges + 1)]
    else:
        w = list(weights)
    sums = [0] * g.n_vertices
    for (u, v), x in zip(g.edges, w):
        sums[u - 1] += x
        sums[v - 1] += x
    return sums
