"""Subset scheme for the complete graph K_N and its embedding into subgraphs.

Files have L = 2^(N-1) bits. Server j receives a bijection sigma_j from the
subsets of its neighborhood onto [L] and returns, for every nonempty subset
P, the XOR over v in P of bit sigma_j(P) of file {j, v}.

Subsets are bitmasks over [N] (bit v-1 is vertex v). A query sigma_j is a
tuple of length 2^N indexed by mask; masks containing j carry 0.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterator, Mapping

from ..errors import ReconstructionError, SchemeError
from ..graphcore import Bits, Graph, build_family
from .base import AnswerSet, QuerySet, Scheme, expect_shape, random_permutation


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << (v - 1)
    return m


def members(mask: int) -> tuple[int, ...]:
    return tuple(v + 1 for v in range(mask.bit_length()) if mask >> v & 1)


def canonical_subsets(ground: tuple[int, ...], nonempty: bool = False) -> list[int]:
    """Masks of subsets of ``ground`` by increasing size, then lexicographically."""
    out = []
    for r in range(1 if nonempty else 0, len(ground) + 1):
        out.extend(mask_of(c) for c in itertools.combinations(ground, r))
    return out


class CompleteSubset(Scheme):
    """Transcript is ``(pi, extensions)``.

    ``pi`` lists the values of the bijection on Omega = {P : |P & {i, i'}| = 1}
    in canonical subset order. ``extensions[j - 1]`` is a permutation of
    [L/2] placing server j's unconstrained subsets (canonical order) onto its
    unused values (ascending).
    """

    kind = "complete-subset"

    def __init__(self, n: int):
        if n < 2:
            raise SchemeError("complete-subset needs N >= 2")
        self.n = n
        self.graph = build_family(f"complete:{n}")
        self.file_length = 2 ** (n - 1)
        self.half = self.file_length // 2
        full = tuple(range(1, n + 1))
        self._all_masks = canonical_subsets(full)
        self._domain = {}
        self._answer_masks = {}
        self._answer_pos = {}
        for j in full:
            nbrs = tuple(v for v in full if v != j)
            self._domain[j] = canonical_subsets(nbrs)
            self._answer_masks[j] = canonical_subsets(nbrs, nonempty=True)
            self._answer_pos[j] = {m: i for i, m in enumerate(self._answer_masks[j])}
        self._omega = {}

    # -- Omega and bijections -----------------------------------------
    def omega(self, theta: int) -> list[int]:
        """Omega for the file ``theta`` in canonical order, as masks."""
        if theta not in self._omega:
            i, i2 = self.graph.edge(theta)
            target = mask_of((i, i2))
            self._omega[theta] = [m for m in self._all_masks if bin(m & target).count("1") == 1]
        return self._omega[theta]

    def constrained(self, theta: int, j: int, pi: Mapping[int, int]) -> dict[int, int]:
        """Values of sigma_j forced by pi (the L/2 constrained subsets)."""
        i, i2 = self.graph.edge(theta)
        jbit = 1 << (j - 1)
        fixed = {}
        if j not in (i, i2):
            for p, value in pi.items():
                if p & jbit:
                    fixed[p & ~jbit] = value
        else:
            other = i2 if j == i else i
            for p, value in pi.items():
                if p & jbit:
                    fixed[(p & ~jbit) | 1 << (other - 1)] = value
        return fixed

    def sigma_from(self, theta: int, j: int, pi: Mapping[int, int], extension) -> tuple[int, ...]:
        fixed = self.constrained(theta, j, pi)
        free_subsets = [m for m in self._domain[j] if m not in fixed]
        used = set(fixed.values())
        free_values = [v for v in range(1, self.file_length + 1) if v not in used]
        sigma = [0] * (1 << self.n)
        for m, v in fixed.items():
            sigma[m] = v
        for m, slot in zip(free_subsets, extension):
            sigma[m] = free_values[slot - 1]
        return tuple(sigma)

    def pi_map(self, theta: int, pi: tuple[int, ...]) -> dict[int, int]:
        return dict(zip(self.omega(theta), pi))

    # -- randomness ---------------------------------------------------------
    def random_transcript(self, rng: random.Random) -> tuple:
        pi = random_permutation(self.file_length, rng)
        return pi, tuple(random_permutation(self.half, rng) for _ in range(self.n))

    def transcripts(self) -> Iterator[tuple]:
        pis = itertools.permutations(range(1, self.file_length + 1))
        for pi in pis:
            exts = itertools.product(itertools.permutations(range(1, self.half + 1)), repeat=self.n)
            for ext in exts:
                yield pi, ext

    def transcript_count(self) -> int:
        return math.factorial(self.file_length) * math.factorial(self.half) ** self.n

    def transcripts_with_extension_seeds(self, seeds: int) -> Iterator[tuple]:
        """Every pi, each paired with ``seeds`` seeded random extensions."""
        for pi in itertools.permutations(range(1, self.file_length + 1)):
            for seed in range(seeds):
                rng = random.Random(seed)
                yield pi, tuple(random_permutation(self.half, rng) for _ in range(self.n))

    # -- protocol -------------------------------------------------------------
    def queries(self, theta: int, transcript: tuple) -> QuerySet:
        self.check_theta(theta)
        pi, ext = transcript
        pm = self.pi_map(theta, pi)
        qs = tuple(self.sigma_from(theta, j, pm, ext[j - 1]) for j in self.graph.vertices())
        return QuerySet(theta, (tuple(pi), tuple(tuple(e) for e in ext)), qs)

    def check_sigma(self, server: int, sigma) -> None:
        expect_shape(isinstance(sigma, tuple) and len(sigma) == 1 << self.n, "sigma_j must have 2^N entries")
        values = sorted(sigma[m] for m in self._domain[server])
        expect_shape(values == list(range(1, self.file_length + 1)), f"sigma_{server} is not a bijection onto [L]")
        jbit = 1 << (server - 1)
        expect_shape(all(sigma[m] == 0 for m in range(1 << self.n) if m & jbit), "sigma_j defined off N(j)")

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        self.check_sigma(server, query)
        files = {v: local[self.graph.edge_index(server, v)] for v in self.graph.vertices() if v != server}
        out = []
        for m in self._answer_masks[server]:
            pos = query[m] - 1
            bit = 0
            for v in members(m):
                bit ^= files[v][pos]
            out.append(bit)
        return tuple(out)

    def answer_labels(self, server: int) -> list:
        return [("subset", m) for m in self._answer_masks[server]]

    def bit_of(self, answers: AnswerSet, server: int, mask: int) -> int:
        return answers[server][self._answer_pos[server][mask]]

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        self.check_theta(theta)
        pi, _ext = queries.transcript
        i, i2 = self.graph.edge(theta)
        out: list[int | None] = [None] * self.file_length
        for p, value in self.pi_map(theta, pi).items():
            a = i if p & 1 << (i - 1) else i2
            abar = i2 if a == i else i
            abit = 1 << (a - 1)
            bit = self.bit_of(answers, a, (p & ~abit) | 1 << (abar - 1))
            for j in members(p):
                if j != a:
                    bit ^= self.bit_of(answers, j, p & ~(1 << (j - 1)))
            if out[value - 1] is not None:
                raise ReconstructionError(f"pi assigns position {value} twice")
            out[value - 1] = bit
        if any(v is None for v in out):
            raise ReconstructionError("pi does not cover every file position")
        return tuple(out)  # type: ignore[arg-type]

    def answer_lengths(self) -> tuple[int, ...]:
        return (self.file_length - 1,) * self.n

    def declared_rate(self) -> Fraction:
        return Fraction(self.file_length, (self.file_length - 1) * self.n)


class SubgraphAdapter(Scheme):
    """Run the K_N subset scheme on any graph with N vertices.

    Pairs of servers that share no file act as if they shared an all-zero
    dummy file; only real edges of the graph can be requested.
    """

    kind = "subgraph-adapter"

    def __init__(self, graph: Graph):
        if graph.n_edges < 1:
            raise SchemeError("subgraph adapter needs a graph with at least one edge")
        self.graph = graph
        self.base = CompleteSubset(graph.n_vertices)
        self.file_length = self.base.file_length
        self._to_base = {k: self.base.graph.edge_index(u, v) for k, (u, v) in enumerate(graph.edges, 1)}

    def random_transcript(self, rng: random.Random):
        return self.base.random_transcript(rng)

    def transcripts(self):
        return self.base.transcripts()

    def transcript_count(self) -> int:
        return self.base.transcript_count()

    def queries(self, theta: int, transcript) -> QuerySet:
        self.check_theta(theta)
        qs = self.base.queries(self._to_base[theta], transcript)
        return QuerySet(theta, qs.transcript, qs.queries)

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        zero = (0,) * self.file_length
        base_local = {}
        for v in self.base.graph.vertices():
            if v == server:
                continue
            k = self.graph.edge_index(server, v)
            base_local[self.base.graph.edge_index(server, v)] = zero if k is None else local[k]
        return self.base.answer(server, query, base_local)

    def answer_labels(self, server: int) -> list:
        return self.base.answer_labels(server)

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        self.check_theta(theta)
        return self.base.reconstruct(self._to_base[theta], queries, answers)

    def answer_lengths(self) -> tuple[int, ...]:
        return self.base.answer_lengths()

    def declared_rate(self) -> Fraction:
        return self.base.declared_rate()


def subgraph_adapter(graph: Graph) -> SubgraphAdapter:
    return SubgraphAdapter(graph)
