"""Capacity bounds for graph-based PIR, each with a checkable certificate.

Upper bounds:
  * ``upper_bound_general``: min(max degree / K, 1 / matching number), via two
    feasible points of the fractional-matching LP.
  * ``solve_neighbor_system``: 1 / X where X minimizes the total normalized
    download subject to every server's neighbor inequality.
  * ``star_upper_bound``: 1 / (sqrt(2N) - 2) for stars.
  * ``hvt_upper_bound``: 2 / (N + 1) for Hamiltonian vertex-transitive graphs.

Lower bounds come from executable schemes (see ``graphpir.schemes``).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConsistencyError, GraphError, GraphPIRError, SchemeError, TooLargeError
from .graphcore import (
    AUTOMORPHISM_VERTEX_LIMIT,
    HAMILTONIAN_VERTEX_LIMIT,
    Graph,
    automorphism_group,
    find_hamiltonian_cycle,
    incidence_sums,
    max_degree,
    maximum_matching,
)

NEIGHBOR_EXACT_LIMIT = 6


@dataclass
class Bound:
    name: str
    value: Fraction | float
    kind: str
    certified: bool
    certificate: dict | None = None

    def to_json(self) -> dict:
        out: dict = {"name": self.name, "kind": self.kind, "certified": self.certified}
        if isinstance(self.value, Fraction):
            out["value_num"] = self.value.numerator
            out["value_den"] = self.value.denominator
        else:
            out["value_num"] = float(self.value)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


@dataclass
class BoundReport:
    graph: str
    bounds: list[Bound] = field(default_factory=list)

    def upper(self, certified_only: bool = True) -> list[Bound]:
        return [b for b in self.bounds if b.kind == "upper" and (b.certified or not certified_only)]

    def lower(self) -> list[Bound]:
        return [b for b in self.bounds if b.kind == "lower"]

    def best_upper(self) -> Bound | None:
        return min(self.upper(), key=lambda b: b.value, default=None)

    def best_lower(self) -> Bound | None:
        return max(self.lower(), key=lambda b: b.value, default=None)

    def get(self, name: str) -> Bound:
        for b in self.bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"graph": self.graph, "bounds": [b.to_json() for b in self.bounds]}


@dataclass(frozen=True)
class DualCertificate:
    """Edge weights eta; feasible when every vertex's incident weight is at most 1."""

    eta: tuple[Fraction, ...]

    @property
    def objective(self) -> Fraction:
        return sum(self.eta, Fraction(0))


def check_dual_feasible(g: Graph, eta: DualCertificate | Sequence) -> tuple[bool, Fraction]:
    """Feasibility of eta for max sum(eta) s.t. I(G) eta <= 1, eta >= 0.

    Weak duality against min sum(mu) s.t. mu_i + mu_j >= 1 on every edge
    (mu_i = normalized download of server i) makes a feasible eta with
    objective s > 0 certify capacity <= 1/s.
    """
    values = tuple(Fraction(v) for v in (eta.eta if isinstance(eta, DualCertificate) else eta))
    if len(values) != g.n_edges:
        raise GraphError(f"eta has {len(values)} entries for {g.n_edges} edges")
    feasible = all(v >= 0 for v in values) and all(s <= 1 for s in incidence_sums(g, values))
    return feasible, sum(values, Fraction(0))


def upper_bound_general(g: Graph) -> Bound:
    if g.n_edges == 0:
        raise GraphError("the general bound needs at least one edge")
    delta = max_degree(g)
    s1 = DualCertificate((Fraction(1, delta),) * g.n_edges)
    matching = set(maximum_matching(g))
    s2 = DualCertificate(tuple(Fraction(1 if k in matching else 0) for k in range(1, g.n_edges + 1)))
    certs = {}
    best = None
    for label, cert in (("degree", s1), ("matching", s2)):
        ok, obj = check_dual_feasible(g, cert)
        if not ok or obj <= 0:
            raise ConsistencyError(f"{label} certificate for {g.describe()} is not feasible")
        certs[label] = {"eta": [str(v) for v in cert.eta], "objective": str(obj), "bound": str(1 / obj)}
        best = 1 / obj if best is None else min(best, 1 / obj)
    certs["matching"]["edges"] = sorted(matching)
    return Bound("general", best, "upper", True, certs)


def star_upper_bound(n: int) -> Fraction | float:
    """min(1, 1 / (sqrt(2N) - 2)); exact when 2N is a perfect square."""
    if n < 3:
        raise GraphError("the star bound is degenerate for N < 3")
    r = math.isqrt(2 * n)
    if r * r == 2 * n:
        return min(Fraction(1), Fraction(1, r - 2))
    return min(1.0, 1 / (math.sqrt(2 * n) - 2))


def complete_lower_bound(n: int) -> Fraction:
    if n < 2:
        raise GraphError("complete_lower_bound needs N >= 2")
    half = 2 ** (n - 1)
    return Fraction(half, (half - 1) * n)


def hvt_upper_bound(g: Graph) -> Bound:
    """2 / (N + 1), tagged applicable / inapplicable / unverified.

    Past the brute-force limits the hypotheses cannot be checked here; the
    bound is then returned uncertified with status ``unverified`` and holds
    only if the caller knows the graph qualifies.
    """
    value = Fraction(2, g.n_vertices + 1)
    if g.n_vertices > min(AUTOMORPHISM_VERTEX_LIMIT, HAMILTONIAN_VERTEX_LIMIT):
        return Bound("hamiltonian_vertex_transitive", value, "upper", False, {"status": "unverified"})
    transitive = automorphism_group(g).vertex_transitive
    cycle = find_hamiltonian_cycle(g)
    status = "applicable" if transitive and cycle else "inapplicable"
    cert = {"status": status, "vertex_transitive": transitive, "hamiltonian_cycle": list(cycle) if cycle else None}
    return Bound("hamiltonian_vertex_transitive", value, "upper", status == "applicable", cert)


# -- neighbor inequality system ---------------------------------------------

def neighbor_rhs(g: Graph, x: Sequence, server: int):
    """sum_k max(0, 1 - sum_{j >= k} x_{u_j}) with neighbors sorted descending."""
    vals = sorted((x[u - 1] for u in g.neighbors(server)), reverse=True)
    total = 0
    tail = 0
    for v in reversed(vals):
        tail += v
        total += max(0, 1 - tail)
    return total


def check_neighbor_feasible(g: Graph, x: Sequence) -> tuple[bool, list]:
    """Verdict and per-server slack x_S - RHS_S (L normalized to 1)."""
    if len(x) != g.n_vertices:
        raise GraphError(f"x has {len(x)} entries for {g.n_vertices} servers")
    if any(v < 0 for v in x):
        raise GraphError("x must be non-negative")
    slacks = [x[s - 1] - neighbor_rhs(g, x, s) for s in g.vertices()]
    return all(s >= 0 for s in slacks), slacks


def neighbor_constraints(g: Graph) -> list[tuple[tuple[int, ...], int]]:
    """The neighbor system as linear inequalities ``coef . x >= rhs``.

    For a fixed neighbor order and a suffix of m active terms, the right-hand
    side is m - sum_r (m - r + 1) x_{y_r} where y_1 is the last neighbor.
    The descending order maximizes every term, so the true constraint is
    the conjunction over all orders and suffixes, and the feasible set is
    a polyhedron.
    """
    rows = set()
    n = g.n_vertices
    for s in g.vertices():
        nbrs = g.neighbors(s)
        for m in range(1, len(nbrs) + 1):
            for chosen in itertools.permutations(nbrs, m):
                coef = [0] * n
                coef[s - 1] = 1
                for r, y in enumerate(chosen, 1):
                    coef[y - 1] = m - r + 1
                rows.add((tuple(coef), m))
    return sorted(rows)


def _exact_simplex_dual(rows: list[tuple[tuple[int, ...], int]], n: int):
    """Solve max b.y s.t. A^T y <= 1, y >= 0 exactly (Bland's rule).

    Returns (objective, y, x) where x are the optimal prices of the n
    constraints, i.e. an optimal solution of min 1.x s.t. A x >= b, x >= 0.
    """
    m = len(rows)
    width = m + n
    tab = [[Fraction(rows[r][0][i]) for r in range(m)] + [Fraction(int(k == i)) for k in range(n)] + [Fraction(1)]
           for i in range(n)]
    z = [Fraction(-rows[r][1]) for r in range(m)] + [Fraction(0)] * n + [Fraction(0)]
    basis = [m + i for i in range(n)]
    while True:
        entering = next((j for j in range(width) if z[j] < 0), None)
        if entering is None:
            break
        pivot_row = None
        for i in range(n):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if pivot_row is None or ratio < best or (ratio == best and basis[i] < basis[pivot_row]):
                    pivot_row, best = i, ratio
        if pivot_row is None:
            raise ConsistencyError("neighbor-system dual is unbounded, which is impossible")
        p = tab[pivot_row][entering]
        tab[pivot_row] = [v / p for v in tab[pivot_row]]
        for i in range(n):
            if i != pivot_row and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[pivot_row])]
        f = z[entering]
        z = [a - f * b for a, b in zip(z, tab[pivot_row])]
        basis[pivot_row] = entering
    y = [Fraction(0)] * m
    for i, b in enumerate(basis):
        if b < m:
            y[b] = tab[i][-1]
    x = [z[m + i] for i in range(n)]
    return z[-1], y, x


@dataclass
class NeighborSolution:
    x: list
    value: Fraction | float
    certified: bool
    mode: str
    dual_objective: Fraction | None = None

    @property
    def bound(self) -> Fraction | float:
        return 1 / self.value


def solve_neighbor_system(
    g: Graph,
    mode: str = "exact",
    limit: int = NEIGHBOR_EXACT_LIMIT,
    starts: int = 8,
    rng: random.Random | None = None,
) -> NeighborSolution:
    """Minimize sum(x) over the neighbor system with L = 1.

    Exact mode returns a certified optimum: the primal point is rechecked by
    ``check_neighbor_feasible`` and matched by an exactly feasible dual of
    equal value. Heuristic mode is a float search and never certified; a
    feasible point over-estimates X, so its bound is only a candidate.
    """
    if g.n_edges == 0:
        raise GraphError("the neighbor system needs at least one edge")
    if mode == "exact":
        if g.n_vertices > limit:
            raise TooLargeError(f"{g.n_vertices} servers exceeds the exact neighbor-system limit {limit}")
        rows = neighbor_constraints(g)
        value, y, x = _exact_simplex_dual(rows, g.n_vertices)
        feasible, _ = check_neighbor_feasible(g, x)
        dual_ok = all(v >= 0 for v in y) and all(
            sum(y[r] * rows[r][0][i] for r in range(len(rows))) <= 1 for i in range(g.n_vertices)
        )
        dual_value = sum((y[r] * rows[r][1] for r in range(len(rows))), Fraction(0))
        certified = feasible and dual_ok and dual_value == value == sum(x, Fraction(0))
        return NeighborSolution(x, value, certified, mode, dual_value)
    if mode == "heuristic":
        return _heuristic(g, starts, rng or random.Random(0))
    raise GraphPIRError(f"unknown neighbor-system mode {mode!r}")


def _heuristic(g: Graph, starts: int, rng: random.Random) -> NeighborSolution:
    n = g.n_vertices
    best = None
    for start in range(starts):
        x = [1.0] * n if start == 0 else [rng.uniform(0.0, 1.0) for _ in range(n)]
        for _ in range(400):
            x = [0.5 * v + 0.5 * neighbor_rhs(g, x, s) for s, v in zip(g.vertices(), x)]
        for _ in range(200):
            # raise violated coordinates until feasible
            changed = False
            for s in g.vertices():
                need = neighbor_rhs(g, x, s)
                if x[s - 1] < need:
                    x[s - 1] = need
                    changed = True
            if not changed:
                break
        step = 0.25
        while step > 1e-9:
            improved = False
            for s in g.vertices():
                if x[s - 1] == 0.0:
                    continue
                trial = list(x)
                trial[s - 1] = max(0.0, trial[s - 1] - step)
                if check_neighbor_feasible(g, trial)[0]:
                    x = trial
                    improved = True
            if not improved:
                step /= 2
        if check_neighbor_feasible(g, x)[0] and (best is None or sum(x) < sum(best)):
            best = x
    if best is None:
        best = [1.0] * n
    return NeighborSolution(best, sum(best), False, "heuristic")


# -- report -----------------------------------------------------------------

def bound_report(g: Graph, neighbor_limit: int = NEIGHBOR_EXACT_LIMIT, rng: random.Random | None = None) -> BoundReport:
    """Every applicable bound for ``g``; raises ConsistencyError if lower > upper."""
    from .schemes import CompleteSubset, StarSimple, StarSteiner, SubgraphAdapter
    from .verify import measure_rate

    report = BoundReport(g.describe())
    report.bounds.append(upper_bound_general(g))

    if g.n_vertices <= neighbor_limit:
        sol = solve_neighbor_system(g, "exact", limit=neighbor_limit)
    else:
        sol = solve_neighbor_system(g, "heuristic", rng=rng)
    report.bounds.append(Bound(
        "neighbor_system", sol.bound, "upper", sol.certified,
        {"mode": sol.mode, "X": str(sol.value), "x": [str(v) for v in sol.x]},
    ))

    center = g.star_center()
    if center is not None and g.n_vertices >= 3:
        report.bounds.append(Bound("star", star_upper_bound(g.n_vertices), "upper", True, {"center": center}))

    hvt = hvt_upper_bound(g)
    if hvt.certificate["status"] == "applicable":
        report.bounds.append(hvt)

    if g.n_vertices >= 2:
        report.bounds.append(Bound("complete_graph_scheme", complete_lower_bound(g.n_vertices), "lower", True,
                                   {"via": "K_N subset scheme embedded in G"}))
    candidates = []
    for factory in (StarSimple, StarSteiner):
        try:
            candidates.append(factory(g))
        except SchemeError:
            pass
    if g.n_vertices >= 2:
        complete = CompleteSubset(g.n_vertices)
        candidates.append(complete if complete.graph.edges == g.edges else SubgraphAdapter(g))
    for scheme in candidates:
        report.bounds.append(Bound(f"scheme:{scheme.kind}", measure_rate(scheme), "lower", True,
                                   {"file_length": scheme.file_length,
                                    "answer_bits": [int(v) for v in scheme.answer_lengths()]}))

    best_up, best_low = report.best_upper(), report.best_lower()
    if best_up is not None and best_low is not None and best_low.value > best_up.value:
        raise ConsistencyError(
            f"{g.describe()}: lower bound {best_low.name}={best_low.value} exceeds "
            f"certified upper bound {best_up.name}={best_up.value}"
        )
    return report
