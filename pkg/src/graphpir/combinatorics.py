"""Colorings and designs used by the star-graph schemes.

* ``loop_edge_coloring``: proper n-coloring of K_n with a self-loop at every
  vertex, built from a round-robin 1-factorization.
* ``affine_steiner`` / ``slope_coloring``: the lines of the affine plane over
  a prime field as an S(2, q, q^2) Steiner system, colored by slope.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import GraphPIRError

INFINITY = "inf"


def round_robin_factorization(n: int) -> list[list[tuple[int, int]]]:
    """Partition the edges of K_n (n even) into n - 1 perfect matchings.

    Circle method: vertex n stays fixed while 1..n-1 rotate.
    """
    if n < 2 or n % 2:
        raise GraphPIRError(f"round-robin factorization needs an even n >= 2, got {n}")
    m = n - 1
    rounds = []
    for r in range(m):
        matching = [tuple(sorted((r + 1, n)))]
        for k in range(1, n // 2):
            a = (r + k) % m + 1
            b = (r - k) % m + 1
            matching.append((min(a, b), max(a, b)))
        rounds.append(sorted(matching))
    return rounds


@dataclass(frozen=True)
class LoopColoring:
    """Edge coloring of K_n plus loops; keys are ``(i, j)`` with ``i <= j``.

    Construction does not validate; call :meth:`is_proper`. That lets tests
    feed deliberately broken colorings into the schemes.
    """

    n: int
    table: dict[tuple[int, int], int]

    def color(self, i: int, j: int) -> int:
        return self.table[(min(i, j), max(i, j))]

    def colors_at(self, i: int) -> list[int]:
        return [self.color(i, j) for j in range(1, self.n + 1)]

    def is_proper(self) -> bool:
        if len(self.table) != self.n * (self.n + 1) // 2:
            return False
        if set(self.table.values()) != set(range(1, self.n + 1)):
            return False
        return all(len(set(self.colors_at(i))) == self.n for i in range(1, self.n + 1))

    def swapped(self, e1: tuple[int, int], e2: tuple[int, int]) -> LoopColoring:
        """Copy with the colors of two entries exchanged."""
        table = dict(self.table)
        k1, k2 = (min(e1), max(e1)), (min(e2), max(e2))
        table[k1], table[k2] = table[k2], table[k1]
        return LoopColoring(self.n, table)


def loop_edge_coloring(n: int) -> LoopColoring:
    if n < 1:
        raise GraphPIRError("loop coloring needs n >= 1")
    table: dict[tuple[int, int], int] = {}
    if n % 2 == 0:
        for color, matching in enumerate(round_robin_factorization(n), 1):
            for pair in matching:
                table[pair] = color
        for i in range(1, n + 1):
            table[(i, i)] = n
    else:
        for color, matching in enumerate(round_robin_factorization(n + 1), 1):
            for i, j in matching:
                if j == n + 1:
                    table[(i, i)] = color
                else:
                    table[(i, j)] = color
    return LoopColoring(n, table)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for d in range(2, math.isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def bertrand_prime(k: int) -> int:
    """Smallest prime q with q >= ceil(sqrt(k)), so that q**2 >= k."""
    if k < 1:
        raise GraphPIRError("bertrand_prime needs k >= 1")
    q = max(2, math.isqrt(k - 1) + 1)
    while not is_prime(q):
        q += 1
    return q


@dataclass(frozen=True)
class SteinerSystem:
    """Affine plane over F_q.

    Point ``(x, y)`` has index ``x * q + y + 1``. Blocks are ordered by slope
    (0..q-1, then vertical) and, within a slope, by intercept.
    """

    q: int
    blocks: tuple[tuple[int, ...], ...]
    slopes: tuple[int | str, ...]
    _through: dict = field(init=False, repr=False, compare=False, hash=False)
    _pair_block: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        through: dict[int, list[int]] = {p: [] for p in range(1, self.q**2 + 1)}
        pair_block: dict[tuple[int, int], int] = {}
        for b, block in enumerate(self.blocks):
            for p in block:
                through[p].append(b)
            for p1, p2 in itertools.combinations(block, 2):
                pair_block[(p1, p2)] = b
        object.__setattr__(self, "_through", {p: tuple(bs) for p, bs in through.items()})
        object.__setattr__(self, "_pair_block", pair_block)

    @property
    def n_points(self) -> int:
        return self.q * self.q

    def point(self, x: int, y: int) -> int:
        return x * self.q + y + 1

    def coords(self, p: int) -> tuple[int, int]:
        return divmod(p - 1, self.q)

    def blocks_through(self, p: int) -> tuple[int, ...]:
        return self._through[p]

    def block_through(self, p1: int, p2: int) -> int:
        """Index of the unique block containing two distinct points."""
        if p1 == p2:
            raise GraphPIRError("block_through needs two distinct points")
        for p in (p1, p2):
            if not 1 <= p <= self.n_points:
                raise GraphPIRError(f"point {p} outside [1, {self.n_points}]")
        return self._pair_block[(min(p1, p2), max(p1, p2))]

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "blocks": [list(b) for b in self.blocks],
            "slopes": [s if s == INFINITY else int(s) for s in self.slopes],
        }


def affine_steiner(q: int) -> SteinerSystem:
    if not is_prime(q):
        raise GraphPIRError(f"affine_steiner needs a prime q, got {q}")
    blocks: list[tuple[int, ...]] = []
    slopes: list[int | str] = []
    for m in range(q):
        for b in range(q):
            blocks.append(tuple(sorted(x * q + (m * x + b) % q + 1 for x in range(q))))
            slopes.append(m)
    for a in range(q):
        blocks.append(tuple(a * q + y + 1 for y in range(q)))
        slopes.append(INFINITY)
    return SteinerSystem(q, tuple(blocks), tuple(slopes))


@dataclass(frozen=True)
class BlockColoring:
    system: SteinerSystem
    colors: tuple[int, ...]

    def color(self, block: int) -> int:
        return self.colors[block]

    def is_proper(self) -> bool:
        s = self.system
        if set(self.colors) != set(range(1, s.q + 2)):
            return False
        for p in range(1, s.n_points + 1):
            seen = sorted(self.colors[b] for b in s.blocks_through(p))
            if seen != list(range(1, s.q + 2)):
                return False
        return True


def slope_coloring(s: SteinerSystem) -> BlockColoring:
    """Color each line by its slope: m -> m + 1, vertical -> q + 1."""
    return BlockColoring(s, tuple(s.q + 1 if m == INFINITY else int(m) + 1 for m in s.slopes))
