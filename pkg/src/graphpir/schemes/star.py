"""Retrieval schemes for the star graph ``star:N`` (center N, file i = {i, N}).

``StarSimple`` reaches rate 2/N with files of K = N - 1 bits using a loop
edge coloring of K_K. ``StarSteiner`` reaches (q+1)/(K + q(q+1)) with files
of q + 1 bits using the slope-colored affine plane over F_q, padding the
K real files up to q^2 points with all-zero dummies.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterator, Mapping

from ..combinatorics import (
    BlockColoring,
    LoopColoring,
    affine_steiner,
    bertrand_prime,
    is_prime,
    loop_edge_coloring,
    slope_coloring,
)
from ..errors import ReconstructionError, SchemeError
from ..graphcore import Bits, Graph
from .base import AnswerSet, QuerySet, Scheme, expect_shape, random_permutation, xor_all


def _require_star(graph: Graph) -> int:
    n = graph.n_vertices
    if n < 2 or graph.edges != tuple((i, n) for i in range(1, n)):
        raise SchemeError(f"{graph.describe()} is not a canonical star (center N, file i = {{i, N}})")
    return n


def _check_permutation(query: object, size: int) -> tuple[int, ...]:
    expect_shape(
        isinstance(query, tuple) and sorted(query) == list(range(1, size + 1)),
        f"center query must be a permutation of [1, {size}]",
    )
    return query  # type: ignore[return-value]


def _check_index(query: object, size: int) -> int:
    expect_shape(isinstance(query, int) and 1 <= query <= size, f"leaf query must be an index in [1, {size}]")
    return query  # type: ignore[return-value]


class StarSimple(Scheme):
    kind = "star-simple"

    def __init__(self, graph: Graph, coloring: LoopColoring | None = None):
        self.graph = graph
        self.n = _require_star(graph)
        self.k = self.n - 1
        self.file_length = self.k
        self.coloring = coloring if coloring is not None else loop_edge_coloring(self.k)
        self.pairs = list(itertools.combinations(range(1, self.k + 1), 2))
        self._pair_pos = {p: i for i, p in enumerate(self.pairs)}

    def random_transcript(self, rng: random.Random) -> tuple[int, ...]:
        return random_permutation(self.k, rng)

    def transcripts(self) -> Iterator[tuple[int, ...]]:
        return itertools.permutations(range(1, self.k + 1))

    def transcript_count(self) -> int:
        return math.factorial(self.k)

    def queries(self, theta: int, sigma: tuple[int, ...]) -> QuerySet:
        self.check_theta(theta)
        c = self.coloring.color
        qs = tuple(sigma[c(i, theta) - 1] for i in range(1, self.n)) + (tuple(sigma),)
        return QuerySet(theta, tuple(sigma), qs)

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        if server < self.n:
            return (local[server][_check_index(query, self.k) - 1],)
        sigma = _check_permutation(query, self.k)
        c = self.coloring.color
        out = []
        for m, n in self.pairs:
            pos = sigma[c(m, n) - 1] - 1
            out.append(local[m][pos] ^ local[n][pos])
        return tuple(out)

    def answer_labels(self, server: int) -> list:
        return [("pair", m, n) for m, n in self.pairs] if server == self.n else [("file", server)]

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        self.check_theta(theta)
        sigma = queries.transcript
        c = self.coloring.color
        center = answers[self.n]
        out: list[int | None] = [None] * self.k
        for i in range(1, self.k + 1):
            pos = sigma[c(i, theta) - 1] - 1
            if out[pos] is not None:
                raise ReconstructionError(f"position {pos + 1} recovered twice: coloring is not proper")
            if i == theta:
                out[pos] = answers[i][0]
            else:
                out[pos] = answers[i][0] ^ center[self._pair_pos[(min(i, theta), max(i, theta))]]
        return tuple(out)  # type: ignore[arg-type]

    def answer_lengths(self) -> tuple[int, ...]:
        return (1,) * self.k + (len(self.pairs),)

    def declared_rate(self) -> Fraction:
        return Fraction(2, self.n)


class StarSteiner(Scheme):
    """Transcript is ``(sigma, gamma)``: a permutation of [q+1] and an index in [q+1].

    Server theta's answer bit ``W_theta(gamma)`` is sent but never used in
    reconstruction; it exists so that server theta sees a uniform query.
    """

    kind = "star-steiner"

    def __init__(self, graph: Graph, q: int | None = None, coloring: BlockColoring | None = None):
        self.graph = graph
        self.n = _require_star(graph)
        self.k = self.n - 1
        self.q = q if q is not None else bertrand_prime(self.k)
        if not is_prime(self.q) or self.q**2 < self.k:
            raise SchemeError(f"q={self.q} must be a prime with q^2 >= {self.k}")
        self.system = affine_steiner(self.q)
        self.coloring = coloring if coloring is not None else slope_coloring(self.system)
        self.file_length = self.q + 1

    def random_transcript(self, rng: random.Random) -> tuple:
        return random_permutation(self.q + 1, rng), rng.randint(1, self.q + 1)

    def transcripts(self) -> Iterator[tuple]:
        size = self.q + 1
        return itertools.product(itertools.permutations(range(1, size + 1)), range(1, size + 1))

    def transcript_count(self) -> int:
        return math.factorial(self.q + 1) * (self.q + 1)

    def queries(self, theta: int, transcript: tuple) -> QuerySet:
        self.check_theta(theta)
        sigma, gamma = transcript
        qs = []
        for i in range(1, self.n):
            if i == theta:
                qs.append(gamma)
            else:
                qs.append(sigma[self.coloring.color(self.system.block_through(i, theta)) - 1])
        qs.append(tuple(sigma))
        return QuerySet(theta, (tuple(sigma), gamma), tuple(qs))

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        if server < self.n:
            return (local[server][_check_index(query, self.q + 1) - 1],)
        sigma = _check_permutation(query, self.q + 1)
        out = []
        for b, block in enumerate(self.system.blocks):
            pos = sigma[self.coloring.color(b) - 1] - 1
            out.append(xor_all(local[j][pos] for j in block if j <= self.k))
        return tuple(out)

    def answer_labels(self, server: int) -> list:
        if server == self.n:
            return [("block", b) for b in range(len(self.system.blocks))]
        return [("file", server)]

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        self.check_theta(theta)
        sigma, _gamma = queries.transcript
        center = answers[self.n]
        out: list[int | None] = [None] * (self.q + 1)
        for b in self.system.blocks_through(theta):
            pos = sigma[self.coloring.color(b) - 1] - 1
            if out[pos] is not None:
                raise ReconstructionError(f"position {pos + 1} recovered twice: block coloring is not proper")
            others = (answers[j][0] for j in self.system.blocks[b] if j != theta and j <= self.k)
            out[pos] = center[b] ^ xor_all(others)
        if any(v is None for v in out):
            raise ReconstructionError("blocks through theta do not cover every position")
        return tuple(out)  # type: ignore[arg-type]

    def answer_lengths(self) -> tuple[int, ...]:
        return (1,) * self.k + (len(self.system.blocks),)

    def declared_rate(self) -> Fraction:
        return Fraction(self.q + 1, self.k + self.q * (self.q + 1))

    def describe(self) -> dict:
        return {**super().describe(), "q": self.q, "dummy_files": self.q**2 - self.k}
