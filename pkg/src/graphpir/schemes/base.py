"""Common machinery for retrieval schemes.

A scheme turns ``(theta, transcript)`` into one query per server; the
transcript is the user's private randomness, so replaying it regenerates
the same queries. Servers answer from their query and local files only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator, Mapping

from ..errors import SchemeError
from ..graphcore import Bits, FileAssignment, Graph

Query = Hashable
Transcript = Hashable


@dataclass(frozen=True)
class QuerySet:
    theta: int
    transcript: Transcript
    queries: tuple[Query, ...]

    def __getitem__(self, server: int) -> Query:
        return self.queries[server - 1]


@dataclass(frozen=True)
class AnswerSet:
    answers: tuple[Bits, ...]

    def __getitem__(self, server: int) -> Bits:
        return self.answers[server - 1]

    @property
    def total_bits(self) -> int:
        return sum(len(a) for a in self.answers)


class Scheme:
    """Base class. Subclasses fill in the protocol methods."""

    kind: str = "abstract"
    graph: Graph
    file_length: int

    # -- randomness ---------------------------------------------------------
    def random_transcript(self, rng: random.Random) -> Transcript:
        raise NotImplementedError

    def transcripts(self) -> Iterator[Transcript]:
        """Every transcript, each with equal probability."""
        raise NotImplementedError

    def transcript_count(self) -> int:
        raise NotImplementedError

    # -- protocol -------------------------------------------------------------
    def queries(self, theta: int, transcript: Transcript) -> QuerySet:
        raise NotImplementedError

    def answer(self, server: int, query: Query, local: Mapping[int, Bits]) -> Bits:
        raise NotImplementedError

    def reconstruct(self, theta: int, queries: QuerySet, answers: AnswerSet) -> Bits:
        raise NotImplementedError

    def answer_lengths(self) -> tuple[Any, ...]:
        """Bits downloaded from each server (fixed, independent of theta and r)."""
        raise NotImplementedError

    def declared_rate(self) -> Fraction:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "graph": self.graph.describe(), "file_length": self.file_length}

    # -- conveniences -------------------------------------------------------
    @property
    def n_files(self) -> int:
        return self.graph.n_edges

    def requestable(self) -> range:
        return range(1, self.graph.n_edges + 1)

    def check_theta(self, theta: int) -> None:
        if theta not in self.requestable():
            raise SchemeError(f"theta={theta} is not a file of {self.graph.describe()}")

    def sample_queries(self, theta: int, rng: random.Random) -> QuerySet:
        return self.queries(theta, self.random_transcript(rng))

    def answer_all(self, queries: QuerySet, files: FileAssignment) -> AnswerSet:
        """Run every server on its own query and its own files."""
        if files.file_length_bits != self.file_length:
            raise SchemeError(f"files have {files.file_length_bits} bits, scheme needs {self.file_length}")
        return AnswerSet(
            tuple(
                tuple(self.answer(s, queries[s], files.local(self.graph, s)))
                for s in self.graph.vertices()
            )
        )

    def run(self, theta: int, files: FileAssignment, rng: random.Random) -> tuple[Bits, QuerySet, AnswerSet]:
        qs = self.sample_queries(theta, rng)
        ans = self.answer_all(qs, files)
        return self.reconstruct(theta, qs, ans), qs, ans

    def random_files(self, rng: random.Random) -> FileAssignment:
        return FileAssignment.random(self.n_files, self.file_length, rng)


def measured_rate(scheme: Scheme) -> Fraction:
    """File length over total downloaded bits, exactly."""
    return Fraction(scheme.file_length) / sum(Fraction(n) for n in scheme.answer_lengths())


def random_permutation(n: int, rng: random.Random) -> tuple[int, ...]:
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    return tuple(perm)


def xor_all(bits: Iterable[int]) -> int:
    out = 0
    for b in bits:
        out ^= b
    return out


def expect_shape(cond: bool, message: str) -> None:
    if not cond:
        raise SchemeError(message)
