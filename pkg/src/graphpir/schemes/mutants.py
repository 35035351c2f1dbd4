"""Deliberately broken schemes, used to show the verifiers catch defects."""

from __future__ import annotations

import random
from typing import Mapping

from ..graphcore import Bits
from .base import AnswerSet, QuerySet, Scheme
from .complete import CompleteSubset
from .star import StarSimple


class _Wrapper(Scheme):
    def __init__(self, base: Scheme):
        self.base = base
        self.graph = base.graph
        self.file_length = base.file_length

    def random_transcript(self, rng: random.Random):
        return self.base.random_transcript(rng)

    def transcripts(self):
        return self.base.transcripts()

    def transcript_count(self) -> int:
        return self.base.transcript_count()

    def queries(self, theta: int, transcript) -> QuerySet:
        return self.base.queries(theta, transcript)

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        return self.base.answer(server, query, local)

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        return self.base.reconstruct(theta, queries, answers)

    def answer_lengths(self):
        return self.base.answer_lengths()

    def declared_rate(self):
        return self.base.declared_rate()


class FlippedAnswerBit(_Wrapper):
    """One server always flips one bit of its answer."""

    kind = "mutant-flipped-bit"

    def __init__(self, base: Scheme, server: int, bit: int = 0):
        super().__init__(base)
        self.server = server
        self.bit = bit

    def answer(self, server: int, query, local: Mapping[int, Bits]) -> Bits:
        out = list(self.base.answer(server, query, local))
        if server == self.server:
            out[self.bit] ^= 1
        return tuple(out)


class LeakyTheta(_Wrapper):
    """Sends theta itself to one server in place of its real query."""

    kind = "mutant-leaky-theta"

    def __init__(self, base: Scheme, server: int):
        super().__init__(base)
        self.server = server

    def queries(self, theta: int, transcript) -> QuerySet:
        qs = self.base.queries(theta, transcript)
        leaked = list(qs.queries)
        leaked[self.server - 1] = ("leak", theta)
        return QuerySet(qs.theta, qs.transcript, tuple(leaked))


class ThetaDependentExtension(CompleteSubset):
    """Completes each sigma_j deterministically, in an order chosen by theta.

    Ignores the extension part of the transcript: free subsets take free values
    ascending for odd theta and descending for even theta.
    """

    kind = "mutant-theta-extension"

    def sigma_from(self, theta, j, pi, extension):
        ordered = tuple(range(1, self.half + 1))
        return super().sigma_from(theta, j, pi, ordered if theta % 2 else ordered[::-1])


def swapped_color_star(graph, e1=(1, 1), e2=(1, 2)) -> StarSimple:
    """StarSimple whose loop coloring has two entries' colors exchanged."""
    proper = StarSimple(graph)
    return StarSimple(graph, proper.coloring.swapped(e1, e2))
