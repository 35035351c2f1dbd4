import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import corpus
from graphpir.bounds import (
    DualCertificate,
    bound_report,
    check_dual_feasible,
    check_neighbor_feasible,
    complete_lower_bound,
    hvt_upper_bound,
    solve_neighbor_system,
    star_upper_bound,
    upper_bound_general,
)
from graphpir.errors import GraphError, TooLargeError
from graphpir.graphcore import Graph, build_family


def literal_rhs(g: Graph, x, s):
    """Neighbor inequality right-hand side, evaluated term by term with L = 1."""
    u = sorted((x[v - 1] for v in g.neighbors(s)), reverse=True)
    return sum(max(0, 1 - sum(u[k:])) for k in range(len(u)))


def literal_feasible(g, x):
    return all(x[s - 1] >= literal_rhs(g, x, s) for s in g.vertices())


def grid_minimum(g: Graph, step: Fraction) -> Fraction:
    """Smallest sum(x) over the grid {0, step, ..., 1}^N meeting every neighbor inequality."""
    levels = [step * i for i in range(int(1 / step) + 1)]
    best = None
    for x in itertools.product(levels, repeat=g.n_vertices):
        total = sum(x)
        if best is not None and total >= best:
            continue
        if literal_feasible(g, x):
            best = total
    return best


def independent_rows(g: Graph):
    """Linear minorants of each right-hand side: one per server and ordered neighbor tuple."""
    rows = []
    for s in g.vertices():
        nbrs = g.neighbors(s)
        for m in range(1, len(nbrs) + 1):
            for seq in itertools.permutations(nbrs, m):
                coeffs = [0] * g.n_vertices
                coeffs[s - 1] = 1
                for r, v in enumerate(seq, start=1):
                    coeffs[v - 1] += m - r + 1
                rows.append((coeffs, m))
    return rows


class TestGeneral:
    @pytest.mark.parametrize("spec,value", [("wheel:8", Fraction(1, 4)), ("kbipartite:3,4", Fraction(1, 3)),
                                            ("star:5", Fraction(1)), ("star:9", Fraction(1)),
                                            ("complete:3", Fraction(2, 3)), ("cycle:5", Fraction(2, 5)),
                                            ("complete:2", Fraction(1))])
    def test_values(self, spec, value):
        assert upper_bound_general(build_family(spec)).value == value

    def test_certificates_recheck(self):
        for g in corpus():
            b = upper_bound_general(g)
            objectives = []
            for label in ("degree", "matching"):
                eta = [Fraction(v) for v in b.certificate[label]["eta"]]
                ok, obj = check_dual_feasible(g, DualCertificate(tuple(eta)))
                assert ok
                objectives.append(obj)
            assert b.value == 1 / max(objectives)

    def test_empty(self):
        with pytest.raises(GraphError):
            upper_bound_general(Graph(3, ()))

    def test_dual_checker(self):
        k3 = build_family("complete:3")
        half = Fraction(1, 2)
        assert check_dual_feasible(k3, (half, half, half)) == (True, Fraction(3, 2))
        assert check_dual_feasible(k3, (0, 0, 0)) == (True, 0)
        assert check_dual_feasible(k3, (1, 1, 1))[0] is False
        assert check_dual_feasible(k3, (-1, 1, 0))[0] is False
        with pytest.raises(GraphError):
            check_dual_feasible(k3, (1, 0))


class TestClosedForms:
    def test_star(self):
        assert star_upper_bound(8) == Fraction(1, 2)
        assert star_upper_bound(18) == Fraction(1, 4)
        assert star_upper_bound(3) == 1
        assert star_upper_bound(5) == pytest.approx(1 / (math.sqrt(10) - 2))
        with pytest.raises(GraphError):
            star_upper_bound(2)

    def test_complete_lower(self):
        assert complete_lower_bound(3) == Fraction(4, 9)
        assert complete_lower_bound(4) == Fraction(2, 7)
        for n in range(2, 30):
            assert complete_lower_bound(n) * n > 1
        assert complete_lower_bound(40) * 40 - 1 < Fraction(1, 10**10)

    def test_hvt(self):
        b = hvt_upper_bound(build_family("complete:3"))
        assert b.value == Fraction(1, 2) and b.certified
        for n in range(3, 9):
            b = hvt_upper_bound(build_family(f"cycle:{n}"))
            assert b.value == Fraction(2, n + 1) and b.certificate["status"] == "applicable"
            assert b.value <= upper_bound_general(build_family(f"cycle:{n}")).value
        assert hvt_upper_bound(build_family("star:4")).certificate["status"] == "inapplicable"
        assert hvt_upper_bound(build_family("kbipartite:2,3")).certificate["status"] == "inapplicable"
        big = hvt_upper_bound(build_family("cycle:10"))
        assert big.certificate["status"] == "unverified" and not big.certified


class TestNeighborSystem:
    def test_star3_feasible_point(self):
        g = build_family("star:3")
        half = Fraction(1, 2)
        ok, slack = check_neighbor_feasible(g, (half, half, half))
        assert ok and slack == [0, 0, 0]

    def test_star3_exact(self):
        sol = solve_neighbor_system(build_family("star:3"))
        assert sol.value == Fraction(3, 2) and sol.bound == Fraction(2, 3) and sol.certified

    def test_single_edge(self):
        sol = solve_neighbor_system(build_family("complete:2"))
        assert sol.value == 1 and sol.bound == 1

    def test_ones_and_zeros(self):
        for g in corpus():
            assert check_neighbor_feasible(g, [1] * g.n_vertices)[0]
            assert not check_neighbor_feasible(g, [0] * g.n_vertices)[0]

    def test_negative_rejected(self):
        with pytest.raises(GraphError):
            check_neighbor_feasible(build_family("star:3"), (1, -1, 1))

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_star_consistent_with_closed_form(self, n):
        sol = solve_neighbor_system(build_family(f"star:{n}"))
        assert sol.certified and sol.value >= math.sqrt(2 * n) - 2

    @pytest.mark.parametrize("spec,step", [("star:3", Fraction(1, 2)), ("star:4", Fraction(1, 6)),
                                           ("star:5", Fraction(1, 6)), ("cycle:4", Fraction(1, 4)),
                                           ("cycle:5", Fraction(1, 4)), ("complete:3", Fraction(1, 4)),
                                           ("complete:4", Fraction(1, 4)), ("kbipartite:2,3", Fraction(1, 4)),
                                           ("edges:1-2,2-3", Fraction(1, 4)), ("edges:1-2,2-3,3-4", Fraction(1, 6))])
    def test_matches_grid_oracle(self, spec, step):
        g = build_family(spec)
        sol = solve_neighbor_system(g)
        assert sol.certified
        assert grid_minimum(g, step) == sol.value

    @pytest.mark.parametrize("spec", ["star:5", "star:6", "cycle:6", "wheel:6", "kbipartite:3,3", "complete:5",
                                      "edges:1-2,1-3,2-3,3-4,4-5"])
    def test_matches_linprog(self, spec):
        scipy_optimize = pytest.importorskip("scipy.optimize")
        g = build_family(spec)
        rows = independent_rows(g)
        res = scipy_optimize.linprog(
            c=[1] * g.n_vertices,
            A_ub=[[-a for a in coeffs] for coeffs, _ in rows],
            b_ub=[-m for _, m in rows],
            bounds=[(0, None)] * g.n_vertices,
        )
        assert res.status == 0
        sol = solve_neighbor_system(g, limit=6)
        assert float(sol.value) == pytest.approx(res.fun, abs=1e-7)

    @given(st.integers(0, 2**32))
    def test_checker_agrees_with_literal(self, seed):
        rng = random.Random(seed)
        g = build_family(rng.choice(["star:4", "cycle:5", "wheel:6", "complete:4", "kbipartite:2,3"]))
        x = [Fraction(rng.randint(0, 12), 12) for _ in g.vertices()]
        ok, slack = check_neighbor_feasible(g, x)
        assert ok == literal_feasible(g, x)
        assert slack == [x[s - 1] - literal_rhs(g, x, s) for s in g.vertices()]

    @given(st.integers(0, 2**32))
    def test_no_scaled_point_beats_exact(self, seed):
        """Along random rays, the cheapest feasible multiple never undercuts X."""
        rng = random.Random(seed)
        g = build_family(rng.choice(["star:4", "cycle:4", "complete:3", "edges:1-2,2-3,3-4"]))
        X = solve_neighbor_system(g).value
        direction = [rng.random() + 1e-3 for _ in g.vertices()]
        lo, hi = 0.0, 1 / min(direction)
        for _ in range(60):
            mid = (lo + hi) / 2
            if literal_feasible(g, [mid * d for d in direction]):
                hi = mid
            else:
                lo = mid
        assert hi * sum(direction) >= float(X) - 1e-9

    def test_exact_limit(self):
        with pytest.raises(TooLargeError):
            solve_neighbor_system(build_family("wheel:8"))

    def test_heuristic_is_feasible_and_uncertified(self):
        g = build_family("cycle:7")
        sol = solve_neighbor_system(g, "heuristic", rng=random.Random(0))
        assert not sol.certified and sol.mode == "heuristic"
        assert check_neighbor_feasible(g, sol.x)[0]
        assert sol.value >= float(solve_neighbor_system(g, limit=7).value) - 1e-9


class TestReport:
    def test_complete3(self):
        r = bound_report(build_family("complete:3"))
        assert r.best_lower().value == Fraction(4, 9)
        assert r.best_upper().value == Fraction(1, 2)

    def test_star5(self):
        r = bound_report(build_family("star:5"))
        assert r.get("scheme:star-steiner").value == Fraction(3, 10)
        assert r.get("scheme:star-simple").value == Fraction(2, 5)
        assert r.best_lower().value == Fraction(2, 5)
        assert r.get("star").value == pytest.approx(0.8604, abs=1e-4)
        assert r.best_upper().value == Fraction(3, 7)

    def test_cycle4(self):
        r = bound_report(build_family("cycle:4"))
        assert r.get("scheme:subgraph-adapter").value == Fraction(2, 7)
        assert r.best_upper().value == Fraction(2, 5)

    def test_heuristic_never_certified_upper(self):
        r = bound_report(build_family("cycle:7"), neighbor_limit=5)
        ns = r.get("neighbor_system")
        assert not ns.certified and ns not in r.upper()

    def test_json_shape(self):
        out = bound_report(build_family("star:8")).to_json()
        assert out["graph"] == "star:8"
        star = next(b for b in out["bounds"] if b["name"] == "star")
        assert (star["value_num"], star["value_den"]) == (1, 2)

    def test_consistency_on_corpus(self):
        for g in corpus():
            r = bound_report(g)
            assert r.best_lower().value <= r.best_upper().value
            assert complete_lower_bound(g.n_vertices) <= r.best_upper().value
            assert all(0 < b.value <= 1 for b in r.bounds)
