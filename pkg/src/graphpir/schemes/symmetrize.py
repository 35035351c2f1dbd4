"""Average a scheme over the automorphisms of its graph.

The user draws an automorphism f uniformly, runs the base scheme for file
f(theta), and asks server i to play base server f(i). Server i receives
``(f, base query for f(i))`` and answers from its own files after relabeling
them through f, so answer locality is preserved.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Mapping

from ..errors import SchemeError
from ..graphcore import Bits, PermutationGroup
from .base import AnswerSet, QuerySet, Scheme


class Symmetrized(Scheme):
    kind = "symmetrized"

    def __init__(self, base: Scheme, group: PermutationGroup):
        self.base = base
        self.graph = base.graph
        self.file_length = base.file_length
        self.group = tuple(tuple(f) for f in group)
        if not self.group:
            raise SchemeError("automorphism group is empty")
        for f in self.group:
            self._check_automorphism(f)

    def _check_automorphism(self, f) -> None:
        g = self.graph
        if sorted(f) != list(g.vertices()) or any(not g.has_edge(f[u - 1], f[v - 1]) for u, v in g.edges):
            raise SchemeError(f"{f} is not an automorphism of {g.describe()}")

    def image_of_file(self, f, k: int) -> int:
        u, v = self.graph.edge(k)
        return self.graph.edge_index(f[u - 1], f[v - 1])  # type: ignore[return-value]

    # -- randomness ---------------------------------------------------------
    def random_transcript(self, rng: random.Random) -> tuple:
        return rng.randrange(len(self.group)), self.base.random_transcript(rng)

    def transcripts(self):
        return itertools.product(range(len(self.group)), self.base.transcripts())

    def transcript_count(self) -> int:
        return len(self.group) * self.base.transcript_count()

    # -- protocol -------------------------------------------------------------
    def queries(self, theta: int, transcript: tuple) -> QuerySet:
        self.check_theta(theta)
        fi, base_transcript = transcript
        f = self.group[fi]
        base_qs = self.base.queries(self.image_of_file(f, theta), base_transcript)
        qs = tuple((f, base_qs[f[i - 1]]) for i in self.graph.vertices())
        return QuerySet(theta, (fi, base_qs.transcript), qs)

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        if not (isinstance(query, tuple) and len(query) == 2):
            raise SchemeError("symmetrized query must be (automorphism, base query)")
        f, base_query = query
        self._check_automorphism(f)
        relabeled = {self.image_of_file(f, k): bits for k, bits in local.items()}
        return self.base.answer(f[server - 1], base_query, relabeled)

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        self.check_theta(theta)
        fi, base_transcript = queries.transcript
        f = self.group[fi]
        target = self.image_of_file(f, theta)
        base_qs = self.base.queries(target, base_transcript)
        base_answers: list[Bits] = [()] * self.graph.n_vertices
        for i in self.graph.vertices():
            base_answers[f[i - 1] - 1] = answers[i]
        return self.base.reconstruct(target, base_qs, AnswerSet(tuple(base_answers)))

    def answer_lengths(self) -> tuple:
        """Expected bits per server, averaged over the group."""
        lengths = self.base.answer_lengths()
        out = []
        for i in self.graph.vertices():
            mean = Fraction(sum(lengths[f[i - 1] - 1] for f in self.group), len(self.group))
            out.append(int(mean) if mean.denominator == 1 else mean)
        return tuple(out)

    def declared_rate(self) -> Fraction:
        return self.base.declared_rate()

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base.describe(), "group_order": len(self.group)}


def symmetrize(base: Scheme, group: PermutationGroup) -> Symmetrized:
    return Symmetrized(base, group)
